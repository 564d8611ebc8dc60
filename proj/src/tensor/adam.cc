#include "blockgnn/tensor/adam.h"

#include <cmath>

#include "blockgnn/error.h"

namespace blockgnn::tensor {

Adam::Adam(const ParameterSet& params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& e : params.entries()) {
    m_.emplace_back(e.value.shape());
    v_.emplace_back(e.value.shape());
  }
}

void Adam::Step(ParameterSet& params, const std::vector<Tensor>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match parameter count");
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != m_[i].shape() || params.value(i).shape() != m_[i].shape()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "gradient shape " + ShapeString(grads[i].shape()) + " for '" +
                      params.entry(i).name + "' expected " + ShapeString(m_[i].shape()));
    }
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (size_t i = 0; i < grads.size(); ++i) {
    double* p = params.value(i).data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const double* g = grads[i].data();
    const size_t n = grads[i].size();
    for (size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

double GlobalNorm(const std::vector<Tensor>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.values()) sq += x * x;
  }
  return std::sqrt(sq);
}

double ClipGlobalNorm(std::vector<Tensor>& grads, double max_norm) {
  const double norm = GlobalNorm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g.storage()) x *= s;
    }
  }
  return norm;
}

}  // namespace blockgnn::tensor
