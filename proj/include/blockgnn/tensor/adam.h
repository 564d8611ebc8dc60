#pragma once

#include <vector>

#include "blockgnn/tensor/parameters.h"

namespace blockgnn::tensor {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moment buffers mirror the parameter layout.
class Adam {
 public:
  Adam(const ParameterSet& params, AdamConfig config = {});

  // One update; `grads[i]` pairs with params.value(i).
  // Throws Error(kShapeMismatch) on layout disagreement.
  void Step(ParameterSet& params, const std::vector<Tensor>& grads);

  long step_count() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Tensor>& first_moment() const { return m_; }
  const std::vector<Tensor>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long t_ = 0;
};

// Scales `grads` in place so their global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double ClipGlobalNorm(std::vector<Tensor>& grads, double max_norm);
double GlobalNorm(const std::vector<Tensor>& grads);

}  // namespace blockgnn::tensor
