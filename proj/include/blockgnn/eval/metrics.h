#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace blockgnn::eval {

struct Metrics {
  size_t count = 0;
  double mape = 0.0;
  // Unset when either input has zero variance.
  std::optional<double> spearman;
  std::optional<double> pearson;
};

// Mean of |actual - predicted| / |actual|, accumulated in input order.
// Throws Error(kLengthMismatch) for unequal or empty inputs and
// Error(kNonPositiveActual) for actual <= 0.
double Mape(std::span<const double> predicted, std::span<const double> actual);
std::optional<double> Pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks (ties share the mean rank).
std::optional<double> Spearman(std::span<const double> x, std::span<const double> y);
// 1-based ranks; tied values receive the average of their positions.
std::vector<double> AverageRanks(std::span<const double> values);

Metrics ComputeMetrics(std::span<const double> predicted, std::span<const double> actual);
nlohmann::json MetricsToJson(const Metrics& m);

// Throughput is stored per 100 block iterations; reports use one iteration.
inline double NormalizeToSingleRun(double per_hundred) { return per_hundred / 100.0; }

// 2-D histogram of (actual, predicted) over [0, max_cycles]^2 with `bins`
// equal-width bins per axis. Pairs with either value outside the range are
// excluded and counted. Output: two '#' header lines (parameters and bin
// edges), a column header, then one row per occupied cell.
std::string HeatmapCsv(std::span<const double> predicted, std::span<const double> actual,
                       double max_cycles = 10.0, size_t bins = 40);
// Histogram of relative errors over [lo, hi]; same layout, one row per
// occupied bin.
std::string ErrorDistributionCsv(std::span<const double> relative_errors, size_t bins = 40,
                                 double lo = -1.0, double hi = 1.0);
// (predicted - actual) / actual per sample.
std::vector<double> RelativeErrors(std::span<const double> predicted,
                                   std::span<const double> actual);

}  // namespace blockgnn::eval
