#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "blockgnn/tensor/autodiff.h"
#include "blockgnn/tensor/parameters.h"

namespace blockgnn::tensor {

// Builds a scalar loss on `tape` from leaves that alias `params` in order.
using LossBuilder = std::function<Var(Tape& tape, const std::vector<Var>& leaves)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Groups with more scalars than this are probed along random directions
  // instead of per coordinate.
  size_t max_coordinates = 10000;
  int num_directions = 8;
  uint64_t seed = 0;
};

struct GroupGradCheck {
  std::string name;
  // max |analytic - numeric| / max(max|analytic|, max|numeric|, 1e-12)
  double max_relative_error = 0.0;
  size_t num_probes = 0;
};

// Analytic gradient of the loss with respect to every parameter.
std::vector<Tensor> AnalyticGradients(const ParameterSet& params, const LossBuilder& build,
                                      double* loss_value = nullptr);

// Central-difference check of every parameter group.
std::vector<GroupGradCheck> CheckGradients(const ParameterSet& params, const LossBuilder& build,
                                           const GradCheckOptions& options = {});

}  // namespace blockgnn::tensor
