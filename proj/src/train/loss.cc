#include "blockgnn/train/loss.h"

#include <cmath>

#include "blockgnn/error.h"

namespace blockgnn::train {
namespace {

double Huber(double x) {
  const double a = std::abs(x);
  return a <= kHuberDelta ? 0.5 * x * x : kHuberDelta * (a - 0.5 * kHuberDelta);
}

void CheckActual(double actual) {
  if (!(actual > 0.0)) {
    throw Error(ErrorCode::kNonPositiveActual, "actual value " + std::to_string(actual));
  }
}

}  // namespace

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kMape: return "mape";
    case LossKind::kMse: return "mse";
    case LossKind::kRelativeMse: return "relative_mse";
    case LossKind::kHuber: return "huber";
    case LossKind::kRelativeHuber: return "relative_huber";
  }
  return "unknown";
}

LossKind LossKindFromName(std::string_view name) {
  for (LossKind k : {LossKind::kMape, LossKind::kMse, LossKind::kRelativeMse, LossKind::kHuber,
                     LossKind::kRelativeHuber}) {
    if (LossKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown loss '" + std::string(name) + "'");
}

double LossValue(LossKind kind, double actual, double predicted) {
  CheckActual(actual);
  const double e = actual - predicted;
  switch (kind) {
    case LossKind::kMape: return std::abs(e) / std::abs(actual);
    case LossKind::kMse: return e * e;
    case LossKind::kRelativeMse: return (e / actual) * (e / actual);
    case LossKind::kHuber: return Huber(e);
    case LossKind::kRelativeHuber: return Huber(e / actual);
  }
  return 0.0;
}

tensor::Var BatchLoss(LossKind kind, tensor::Var predicted, std::span<const double> actual) {
  namespace ops = tensor::ops;
  const tensor::Tensor& p = predicted.value();
  if (p.size() != actual.size() || actual.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "predictions " + tensor::ShapeString(p.shape()) +
                                               " vs " + std::to_string(actual.size()) + " labels");
  }
  for (double a : actual) CheckActual(a);
  tensor::Tape& tape = *predicted.tape();
  const tensor::Tensor actual_col(p.shape(), std::vector<double>(actual.begin(), actual.end()));
  tensor::Var a = tape.Constant(actual_col);
  tensor::Var e = ops::Sub(a, predicted);
  tensor::Var per_sample;
  switch (kind) {
    case LossKind::kMape: per_sample = ops::Div(ops::Abs(e), a); break;
    case LossKind::kMse: per_sample = ops::Square(e); break;
    case LossKind::kRelativeMse: per_sample = ops::Square(ops::Div(e, a)); break;
    case LossKind::kHuber: per_sample = ops::Huber(e, kHuberDelta); break;
    case LossKind::kRelativeHuber: per_sample = ops::Huber(ops::Div(e, a), kHuberDelta); break;
  }
  return ops::ReduceMean(per_sample);
}

}  // namespace blockgnn::train
