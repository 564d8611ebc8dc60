#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blockgnn/tensor/tensor.h"

namespace blockgnn::tensor {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor& grad() const;
  Tape* tape() const { return tape_; }
  int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int32_t id_ = -1;
};

// Records operations in creation order, which is a topological order of
// the computation DAG. Backward walks it in reverse so every node is
// visited once. Single-threaded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A value that receives a gradient (parameters).
  Var Leaf(Tensor value);
  // A value that never receives a gradient (inputs, labels).
  Var Constant(Tensor value);

  // Records an op result. `backward` is dropped if no parent needs a gradient.
  Var Record(Tensor value, std::span<const Var> parents, BackwardFn backward,
             const char* op_name);
  Var Record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward,
             const char* op_name) {
    return Record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                  std::move(backward), op_name);
  }

  // Reverse-mode sweep from a scalar `loss`. Throws Error(kNotScalar).
  // Leaves not reachable from `loss` end up with zero gradients. Gradients
  // of op results are released once propagated; only leaves keep theirs.
  void Backward(Var loss);

  const Tensor& value(int32_t id) const { return nodes_[id].value; }
  const Tensor& grad(int32_t id) const;
  bool requires_grad(int32_t id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of node `id`, zero-initialized on first access.
  Tensor& MutableGrad(int32_t id);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  Tensor empty_grad_;
};

// Differentiable ops. Shapes are checked; results must be finite
// (Error(kNonFiniteValue) otherwise).
namespace ops {

// [m,k] x [k,n] -> [m,n]
Var MatMul(Var a, Var b);
// x [m,k] * w [k,n] + b [n], followed by ReLU when `relu` is set.
Var Dense(Var x, Var w, Var b, bool relu);
// Elementwise, identical shapes.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Div(Var a, Var b);
// [m,n] + [n] broadcast over rows.
Var AddRow(Var a, Var row);
Var Scale(Var a, double factor);
Var Abs(Var a);
Var Square(Var a);
// 0.5 x^2 if |x| <= delta, else delta (|x| - 0.5 delta); elementwise.
Var Huber(Var a, double delta);
Var Relu(Var a);
// Concatenates matrices with equal row counts along the last axis.
Var Concat(std::span<const Var> parts);
// Per-row normalization over the last axis, then gain * x_hat + bias.
Var LayerNorm(Var x, Var gain, Var bias, double epsilon = 1e-6);
// Rows of `table` selected by `ids` -> [ids.size(), cols].
Var EmbeddingLookup(Var table, std::span<const int32_t> ids);
// out[segment_ids[i]] += values[i]; accumulation in ascending i.
Var SegmentSum(Var values, std::span<const int32_t> segment_ids, size_t num_segments);
// Scalar sum / mean over all elements.
Var ReduceSum(Var a);
Var ReduceMean(Var a);

}  // namespace ops

}  // namespace blockgnn::tensor
