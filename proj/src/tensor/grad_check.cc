#include "blockgnn/tensor/grad_check.h"

#include <algorithm>
#include <cmath>

#include "blockgnn/random.h"

namespace blockgnn::tensor {
namespace {

double EvalLoss(const ParameterSet& params, const LossBuilder& build) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& e : params.entries()) leaves.push_back(tape.Constant(e.value));
  return build(tape, leaves).value().item();
}

}  // namespace

std::vector<Tensor> AnalyticGradients(const ParameterSet& params, const LossBuilder& build,
                                      double* loss_value) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& e : params.entries()) leaves.push_back(tape.Leaf(e.value));
  Var loss = build(tape, leaves);
  tape.Backward(loss);
  if (loss_value != nullptr) *loss_value = loss.value().item();
  std::vector<Tensor> grads;
  grads.reserve(leaves.size());
  for (const auto& l : leaves) grads.push_back(l.grad());
  return grads;
}

std::vector<GroupGradCheck> CheckGradients(const ParameterSet& params, const LossBuilder& build,
                                           const GradCheckOptions& options) {
  const std::vector<Tensor> analytic = AnalyticGradients(params, build);
  ParameterSet probe = params;
  Rng rng(options.seed);
  const double h = options.step;
  std::vector<GroupGradCheck> out;
  for (size_t gi = 0; gi < params.size(); ++gi) {
    const Tensor& a = analytic[gi];
    std::vector<double> analytic_vals;
    std::vector<double> numeric_vals;
    Tensor& p = probe.value(gi);
    const size_t n = p.size();
    if (n <= options.max_coordinates) {
      for (size_t j = 0; j < n; ++j) {
        const double orig = p[j];
        p[j] = orig + h;
        const double up = EvalLoss(probe, build);
        p[j] = orig - h;
        const double down = EvalLoss(probe, build);
        p[j] = orig;
        analytic_vals.push_back(a[j]);
        numeric_vals.push_back((up - down) / (2.0 * h));
      }
    } else {
      const Tensor orig = p;
      for (int d = 0; d < options.num_directions; ++d) {
        std::vector<double> dir(n);
        double norm = 0.0;
        for (double& x : dir) {
          x = rng.Uniform(-1.0, 1.0);
          norm += x * x;
        }
        norm = std::sqrt(norm);
        double directional = 0.0;
        for (size_t j = 0; j < n; ++j) {
          dir[j] /= norm;
          directional += a[j] * dir[j];
        }
        for (size_t j = 0; j < n; ++j) p[j] = orig[j] + h * dir[j];
        const double up = EvalLoss(probe, build);
        for (size_t j = 0; j < n; ++j) p[j] = orig[j] - h * dir[j];
        const double down = EvalLoss(probe, build);
        p = orig;
        analytic_vals.push_back(directional);
        numeric_vals.push_back((up - down) / (2.0 * h));
      }
    }
    double max_diff = 0.0, max_a = 0.0, max_n = 0.0;
    for (size_t k = 0; k < analytic_vals.size(); ++k) {
      max_diff = std::max(max_diff, std::abs(analytic_vals[k] - numeric_vals[k]));
      max_a = std::max(max_a, std::abs(analytic_vals[k]));
      max_n = std::max(max_n, std::abs(numeric_vals[k]));
    }
    out.push_back({params.entry(gi).name, max_diff / std::max({max_a, max_n, 1e-12}),
                   analytic_vals.size()});
  }
  return out;
}

}  // namespace blockgnn::tensor
