#include "blockgnn/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "blockgnn/error.h"

namespace blockgnn::eval {
namespace {

void CheckLengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kLengthMismatch,
                "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
}

std::string FormatDouble(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::string EdgesLine(double lo, double hi, size_t bins) {
  std::string out = "# edges:";
  const double width = (hi - lo) / static_cast<double>(bins);
  for (size_t i = 0; i <= bins; ++i) {
    out += (i == 0 ? " " : ",");
    out += FormatDouble(i == bins ? hi : lo + width * static_cast<double>(i));
  }
  return out + "\n";
}

// Bin of `v` in [lo, hi] with the upper edge folded into the last bin;
// nullopt when outside.
std::optional<size_t> BinOf(double v, double lo, double hi, size_t bins) {
  if (!std::isfinite(v) || v < lo || v > hi) return std::nullopt;
  const auto b = static_cast<size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(b, bins - 1);
}

}  // namespace

double Mape(std::span<const double> predicted, std::span<const double> actual) {
  CheckLengths(predicted, actual);
  double sum = 0.0;
  for (size_t i = 0; i < actual.size(); ++i) {
    if (!(actual[i] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveActual, "actual value " + FormatDouble(actual[i]));
    }
    sum += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
  }
  return sum / static_cast<double>(actual.size());
}

std::optional<double> Pearson(std::span<const double> x, std::span<const double> y) {
  CheckLengths(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> Spearman(std::span<const double> x, std::span<const double> y) {
  CheckLengths(x, y);
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  return Pearson(rx, ry);
}

Metrics ComputeMetrics(std::span<const double> predicted, std::span<const double> actual) {
  Metrics m;
  m.count = actual.size();
  m.mape = Mape(predicted, actual);
  m.spearman = Spearman(predicted, actual);
  m.pearson = Pearson(predicted, actual);
  return m;
}

nlohmann::json MetricsToJson(const Metrics& m) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"count", m.count}, {"mape", m.mape}, {"spearman", opt(m.spearman)},
          {"pearson", opt(m.pearson)}};
}

std::vector<double> RelativeErrors(std::span<const double> predicted,
                                   std::span<const double> actual) {
  if (predicted.size() != actual.size()) CheckLengths(predicted, actual);
  std::vector<double> out(actual.size());
  for (size_t i = 0; i < actual.size(); ++i) {
    if (!(actual[i] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveActual, "actual value " + FormatDouble(actual[i]));
    }
    out[i] = (predicted[i] - actual[i]) / actual[i];
  }
  return out;
}

std::string HeatmapCsv(std::span<const double> predicted, std::span<const double> actual,
                       double max_cycles, size_t bins) {
  if (predicted.size() != actual.size()) CheckLengths(predicted, actual);
  if (bins == 0 || !(max_cycles > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "heatmap needs bins >= 1 and max_cycles > 0");
  }
  std::map<std::pair<size_t, size_t>, size_t> cells;
  size_t excluded = 0;
  for (size_t i = 0; i < actual.size(); ++i) {
    const auto a = BinOf(actual[i], 0.0, max_cycles, bins);
    const auto p = BinOf(predicted[i], 0.0, max_cycles, bins);
    if (!a || !p) {
      ++excluded;
      continue;
    }
    ++cells[{*a, *p}];
  }
  std::string out = "# heatmap max_cycles=" + FormatDouble(max_cycles) +
                    " bins=" + std::to_string(bins) + " excluded=" + std::to_string(excluded) + "\n";
  out += EdgesLine(0.0, max_cycles, bins);
  out += "actual_bin,predicted_bin,count\n";
  for (const auto& [cell, count] : cells) {
    out += std::to_string(cell.first) + "," + std::to_string(cell.second) + "," +
           std::to_string(count) + "\n";
  }
  return out;
}

std::string ErrorDistributionCsv(std::span<const double> relative_errors, size_t bins, double lo,
                                 double hi) {
  if (bins == 0 || !(hi > lo)) {
    throw Error(ErrorCode::kInvalidConfig, "error distribution needs bins >= 1 and hi > lo");
  }
  std::map<size_t, size_t> counts;
  size_t excluded = 0;
  for (double e : relative_errors) {
    const auto b = BinOf(e, lo, hi, bins);
    if (!b) {
      ++excluded;
      continue;
    }
    ++counts[*b];
  }
  std::string out = "# error_distribution lo=" + FormatDouble(lo) + " hi=" + FormatDouble(hi) +
                    " bins=" + std::to_string(bins) + " excluded=" + std::to_string(excluded) + "\n";
  out += EdgesLine(lo, hi, bins);
  out += "bin,count\n";
  for (const auto& [bin, count] : counts) {
    out += std::to_string(bin) + "," + std::to_string(count) + "\n";
  }
  return out;
}

}  // namespace blockgnn::eval
