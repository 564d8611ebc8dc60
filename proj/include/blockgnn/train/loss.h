#pragma once

#include <span>
#include <string>
#include <string_view>

#include "blockgnn/tensor/autodiff.h"

namespace blockgnn::train {

enum class LossKind { kMape, kMse, kRelativeMse, kHuber, kRelativeHuber };

inline constexpr double kHuberDelta = 1.0;

std::string_view LossKindName(LossKind kind);
// Accepts mape, mse, relative_mse, huber, relative_huber.
// Throws Error(kInvalidConfig).
LossKind LossKindFromName(std::string_view name);

// Per-sample loss with e = actual - predicted:
//   MAPE |e| / |actual|, MSE e^2, RelativeMSE (e / actual)^2,
//   Huber h(e), RelativeHuber h(e / actual), with
//   h(x) = 0.5 x^2 if |x| <= 1 else |x| - 0.5.
// Throws Error(kNonPositiveActual) for actual <= 0.
double LossValue(LossKind kind, double actual, double predicted);

// Mean per-sample loss over a column of predictions [n x 1] on the tape.
tensor::Var BatchLoss(LossKind kind, tensor::Var predicted, std::span<const double> actual);

}  // namespace blockgnn::train
