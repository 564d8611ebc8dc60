#include "blockgnn/tensor/autodiff.h"

#include <Eigen/Dense>
#include <cmath>

#include "blockgnn/error.h"

namespace blockgnn::tensor {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajor>;

ConstMatMap AsMatrix(const Tensor& t) {
  return ConstMatMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

MatMap AsMatrix(Tensor& t) {
  return MatMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

[[noreturn]] void ShapeError(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": " + ShapeString(a.shape()) +
                                             " vs " + ShapeString(b.shape()));
}

void RequireMatrix(const char* op, const Tensor& t) {
  if (t.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": expected a matrix, got " + ShapeString(t.shape()));
  }
}

Tape& SameTape(Var a, Var b) {
  if (a.tape() != b.tape() || a.tape() == nullptr) {
    throw Error(ErrorCode::kShapeMismatch, "operands live on different tapes");
  }
  return *a.tape();
}

using Array = Eigen::Map<Eigen::ArrayXd>;
using ConstArray = Eigen::Map<const Eigen::ArrayXd>;

ConstArray AsArray(const Tensor& t) {
  return ConstArray(t.data(), static_cast<Eigen::Index>(t.size()));
}

Array AsArray(Tensor& t) { return Array(t.data(), static_cast<Eigen::Index>(t.size())); }

void AddInto(Tensor& dst, const Tensor& src) { AsArray(dst) += AsArray(src); }

template <typename Forward, typename Grad>
Var Elementwise(Var a, const char* name, Forward forward, Grad local_grad) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = forward(x[i]);
  const int32_t ia = a.id();
  return a.tape()->Record(std::move(y), {a},
                          [ia, local_grad](Tape& tape, int32_t self) {
                            const Tensor& gy = tape.grad(self);
                            const Tensor& x = tape.value(ia);
                            Tensor& gx = tape.MutableGrad(ia);
                            for (size_t i = 0; i < x.size(); ++i) {
                              gx[i] += gy[i] * local_grad(x[i]);
                            }
                          },
                          name);
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::Leaf(Tensor value) {
  nodes_.push_back({std::move(value), {}, true, false, nullptr});
  return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

Var Tape::Constant(Tensor value) {
  nodes_.push_back({std::move(value), {}, false, false, nullptr});
  return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

Var Tape::Record(Tensor value, std::span<const Var> parents, BackwardFn backward,
                 const char* op_name) {
  if (!AsArray(value).allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, std::string(op_name) + " produced a non-finite value");
  }
  bool needs_grad = false;
  for (const Var& p : parents) needs_grad |= requires_grad(p.id());
  nodes_.push_back({std::move(value), {}, needs_grad, false,
                    needs_grad ? std::move(backward) : nullptr});
  return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

const Tensor& Tape::grad(int32_t id) const {
  const Node& n = nodes_[id];
  return n.has_grad ? n.grad : empty_grad_;
}

Tensor& Tape::MutableGrad(int32_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::Backward(Var loss) {
  if (loss.tape() != this) throw Error(ErrorCode::kNotScalar, "loss is not on this tape");
  if (value(loss.id()).size() != 1) {
    throw Error(ErrorCode::kNotScalar,
                "loss of shape " + ShapeString(value(loss.id()).shape()) + " is not a scalar");
  }
  // Leaves always get a (possibly zero) gradient buffer.
  for (int32_t i = 0; i < static_cast<int32_t>(nodes_.size()); ++i) {
    if (nodes_[i].requires_grad && !nodes_[i].backward) MutableGrad(i);
  }
  MutableGrad(loss.id())[0] += 1.0;
  for (int32_t i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
    // Intermediate gradients are not needed once propagated.
    n.grad = Tensor();
    n.has_grad = false;
  }
}

namespace ops {

Var MatMul(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  RequireMatrix("MatMul", x);
  RequireMatrix("MatMul", w);
  if (x.cols() != w.rows()) ShapeError("MatMul", x, w);
  Tensor y = Tensor::Matrix(x.rows(), w.cols());
  AsMatrix(y).noalias() = AsMatrix(x) * AsMatrix(w);
  const int32_t ia = a.id(), ib = b.id();
  return tape.Record(std::move(y), {a, b},
                     [ia, ib](Tape& t, int32_t self) {
                       auto gy = AsMatrix(t.grad(self));
                       if (t.requires_grad(ia)) {
                         AsMatrix(t.MutableGrad(ia)).noalias() +=
                             gy * AsMatrix(t.value(ib)).transpose();
                       }
                       if (t.requires_grad(ib)) {
                         AsMatrix(t.MutableGrad(ib)).noalias() +=
                             AsMatrix(t.value(ia)).transpose() * gy;
                       }
                     },
                     "MatMul");
}

Var Dense(Var x, Var w, Var b, bool relu) {
  Tape& tape = SameTape(x, w);
  SameTape(x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  RequireMatrix("Dense", xv);
  RequireMatrix("Dense", wv);
  if (xv.cols() != wv.rows()) ShapeError("Dense", xv, wv);
  if (bv.rank() != 1 || bv.size() != wv.cols()) ShapeError("Dense", wv, bv);
  Tensor y = Tensor::Matrix(xv.rows(), wv.cols());
  auto ym = AsMatrix(y);
  ym.noalias() = AsMatrix(xv) * AsMatrix(wv);
  ym.rowwise() += AsMatrix(bv).row(0);
  if (relu) AsArray(y) = AsArray(y).max(0.0);
  const int32_t ix = x.id(), iw = w.id(), ib = b.id();
  return tape.Record(
      std::move(y), {x, w, b},
      [ix, iw, ib, relu](Tape& t, int32_t self) {
        const Tensor& gy = t.grad(self);
        Tensor masked;
        if (relu) {
          masked = Tensor(gy.shape());
          AsArray(masked) = (AsArray(t.value(self)) > 0.0).select(AsArray(gy), 0.0);
        }
        const auto gz = AsMatrix(relu ? masked : gy);
        if (t.requires_grad(ib)) AsMatrix(t.MutableGrad(ib)).row(0) += gz.colwise().sum();
        if (t.requires_grad(iw)) {
          AsMatrix(t.MutableGrad(iw)).noalias() += AsMatrix(t.value(ix)).transpose() * gz;
        }
        if (t.requires_grad(ix)) {
          AsMatrix(t.MutableGrad(ix)).noalias() += gz * AsMatrix(t.value(iw)).transpose();
        }
      },
      "Dense");
}

Var Add(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  if (a.value().shape() != b.value().shape()) ShapeError("Add", a.value(), b.value());
  Tensor y = a.value();
  AddInto(y, b.value());
  const int32_t ia = a.id(), ib = b.id();
  return tape.Record(std::move(y), {a, b},
                     [ia, ib](Tape& t, int32_t self) {
                       const Tensor& gy = t.grad(self);
                       if (t.requires_grad(ia)) AddInto(t.MutableGrad(ia), gy);
                       if (t.requires_grad(ib)) AddInto(t.MutableGrad(ib), gy);
                     },
                     "Add");
}

Var Sub(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  if (a.value().shape() != b.value().shape()) ShapeError("Sub", a.value(), b.value());
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const int32_t ia = a.id(), ib = b.id();
  return tape.Record(std::move(y), {a, b},
                     [ia, ib](Tape& t, int32_t self) {
                       const Tensor& gy = t.grad(self);
                       if (t.requires_grad(ia)) AddInto(t.MutableGrad(ia), gy);
                       if (t.requires_grad(ib)) {
                         Tensor& gb = t.MutableGrad(ib);
                         for (size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
                       }
                     },
                     "Sub");
}

Var Mul(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  if (a.value().shape() != b.value().shape()) ShapeError("Mul", a.value(), b.value());
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const int32_t ia = a.id(), ib = b.id();
  return tape.Record(std::move(y), {a, b},
                     [ia, ib](Tape& t, int32_t self) {
                       const Tensor& gy = t.grad(self);
                       const Tensor& av = t.value(ia);
                       const Tensor& bv = t.value(ib);
                       if (t.requires_grad(ia)) {
                         Tensor& ga = t.MutableGrad(ia);
                         for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * bv[i];
                       }
                       if (t.requires_grad(ib)) {
                         Tensor& gb = t.MutableGrad(ib);
                         for (size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * av[i];
                       }
                     },
                     "Mul");
}

Var Div(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  if (a.value().shape() != b.value().shape()) ShapeError("Div", a.value(), b.value());
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] /= bv[i];
  const int32_t ia = a.id(), ib = b.id();
  return tape.Record(std::move(y), {a, b},
                     [ia, ib](Tape& t, int32_t self) {
                       const Tensor& gy = t.grad(self);
                       const Tensor& av = t.value(ia);
                       const Tensor& bv = t.value(ib);
                       if (t.requires_grad(ia)) {
                         Tensor& ga = t.MutableGrad(ia);
                         for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] / bv[i];
                       }
                       if (t.requires_grad(ib)) {
                         Tensor& gb = t.MutableGrad(ib);
                         for (size_t i = 0; i < gy.size(); ++i) {
                           gb[i] -= gy[i] * av[i] / (bv[i] * bv[i]);
                         }
                       }
                     },
                     "Div");
}

Var AddRow(Var a, Var row) {
  Tape& tape = SameTape(a, row);
  const Tensor& x = a.value();
  const Tensor& r = row.value();
  RequireMatrix("AddRow", x);
  if (r.rank() != 1 || r.size() != x.cols()) ShapeError("AddRow", x, r);
  Tensor y = x;
  AsMatrix(y).rowwise() += Eigen::Map<const Eigen::RowVectorXd>(r.data(), r.size());
  const int32_t ia = a.id(), ir = row.id();
  return tape.Record(std::move(y), {a, row},
                     [ia, ir](Tape& t, int32_t self) {
                       const Tensor& gy = t.grad(self);
                       if (t.requires_grad(ia)) AddInto(t.MutableGrad(ia), gy);
                       if (t.requires_grad(ir)) {
                         Tensor& gr = t.MutableGrad(ir);
                         Eigen::Map<Eigen::RowVectorXd>(gr.data(), gr.size()) +=
                             AsMatrix(gy).colwise().sum();
                       }
                     },
                     "AddRow");
}

Var Scale(Var a, double factor) {
  return Elementwise(
      a, "Scale", [factor](double x) { return x * factor; },
      [factor](double) { return factor; });
}

Var Abs(Var a) {
  return Elementwise(
      a, "Abs", [](double x) { return std::abs(x); },
      [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var Square(Var a) {
  return Elementwise(
      a, "Square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var Huber(Var a, double delta) {
  return Elementwise(
      a, "Huber",
      [delta](double x) {
        const double ax = std::abs(x);
        return ax <= delta ? 0.5 * x * x : delta * (ax - 0.5 * delta);
      },
      [delta](double x) {
        if (std::abs(x) <= delta) return x;
        return x > 0 ? delta : -delta;
      });
}

Var Relu(Var a) {
  Tape& tape = *a.tape();
  Tensor y(a.value().shape());
  AsArray(y) = AsArray(a.value()).max(0.0);
  const int32_t ia = a.id();
  return tape.Record(std::move(y), {a},
                     [ia](Tape& t, int32_t self) {
                       const auto gy = AsArray(t.grad(self));
                       const auto x = AsArray(t.value(ia));
                       AsArray(t.MutableGrad(ia)) += (x > 0.0).select(gy, 0.0);
                     },
                     "Relu");
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "Concat of nothing");
  Tape& tape = *parts[0].tape();
  const size_t rows = parts[0].value().rows();
  size_t cols = 0;
  for (const Var& p : parts) {
    SameTape(parts[0], p);
    RequireMatrix("Concat", p.value());
    if (p.value().rows() != rows) ShapeError("Concat", parts[0].value(), p.value());
    cols += p.value().cols();
  }
  Tensor y = Tensor::Matrix(rows, cols);
  std::vector<int32_t> ids;
  std::vector<size_t> offsets;
  size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    AsMatrix(y).middleCols(offset, v.cols()) = AsMatrix(v);
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += v.cols();
  }
  return tape.Record(std::move(y), parts,
                     [ids, offsets](Tape& t, int32_t self) {
                       auto gy = AsMatrix(t.grad(self));
                       for (size_t k = 0; k < ids.size(); ++k) {
                         if (!t.requires_grad(ids[k])) continue;
                         Tensor& g = t.MutableGrad(ids[k]);
                         AsMatrix(g) += gy.middleCols(offsets[k], g.cols());
                       }
                     },
                     "Concat");
}

Var LayerNorm(Var x, Var gain, Var bias, double epsilon) {
  Tape& tape = SameTape(x, gain);
  SameTape(x, bias);
  const Tensor& in = x.value();
  RequireMatrix("LayerNorm", in);
  const size_t rows = in.rows(), cols = in.cols();
  if (gain.value().rank() != 1 || gain.value().size() != cols) ShapeError("LayerNorm", in, gain.value());
  if (bias.value().shape() != gain.value().shape()) ShapeError("LayerNorm", gain.value(), bias.value());
  const double n = static_cast<double>(cols);
  // Per-row mean and reciprocal standard deviation; backward recomputes the
  // normalized rows from these instead of storing them.
  Tensor mean({rows});
  Tensor rstd({rows});
  Tensor y = Tensor::Matrix(rows, cols);
  const auto g = AsArray(gain.value()).transpose();
  const auto b = AsArray(bias.value()).transpose();
  const auto xm = AsMatrix(in);
  auto ym = AsMatrix(y);
  for (Eigen::Index r = 0; r < xm.rows(); ++r) {
    auto yr = ym.row(r).array();
    const double mu = xm.row(r).sum() / n;
    yr = xm.row(r).array() - mu;
    const double inv = 1.0 / std::sqrt(yr.square().sum() / n + epsilon);
    mean[static_cast<size_t>(r)] = mu;
    rstd[static_cast<size_t>(r)] = inv;
    yr = (yr * inv) * g + b;
  }
  const int32_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape.Record(
      std::move(y), {x, gain, bias},
      [ix, ig, ib, mean = std::move(mean), rstd = std::move(rstd)](Tape& t, int32_t self) {
        const auto gy = AsMatrix(t.grad(self));
        const auto xm = AsMatrix(t.value(ix));
        const auto g = AsArray(t.value(ig)).transpose();
        const double n = static_cast<double>(xm.cols());
        const bool need_g = t.requires_grad(ig), need_b = t.requires_grad(ib);
        const bool need_x = t.requires_grad(ix);
        Eigen::ArrayXXd nr(1, xm.cols()), d(1, xm.cols());
        Eigen::ArrayXXd gg = Eigen::ArrayXXd::Zero(1, xm.cols());
        for (Eigen::Index r = 0; r < xm.rows(); ++r) {
          const auto ri = static_cast<size_t>(r);
          nr = (xm.row(r).array() - mean[ri]) * rstd[ri];
          if (need_g) gg += gy.row(r).array() * nr;
          if (need_x) {
            d = gy.row(r).array() * g;
            const double mean_d = d.sum() / n;
            const double mean_dn = (d * nr).sum() / n;
            AsMatrix(t.MutableGrad(ix)).row(r).array() += rstd[ri] * (d - mean_d - nr * mean_dn);
          }
        }
        if (need_g) AsMatrix(t.MutableGrad(ig)).row(0).array() += gg;
        if (need_b) AsMatrix(t.MutableGrad(ib)).row(0) += gy.colwise().sum();
      },
      "LayerNorm");
}

Var EmbeddingLookup(Var table, std::span<const int32_t> ids) {
  Tape& tape = *table.tape();
  const Tensor& tv = table.value();
  RequireMatrix("EmbeddingLookup", tv);
  const size_t cols = tv.cols();
  Tensor y = Tensor::Matrix(ids.size(), cols);
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<size_t>(ids[i]) >= tv.rows()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "row " + std::to_string(ids[i]) + " of a table with " +
                      std::to_string(tv.rows()) + " rows");
    }
    std::copy_n(tv.data() + ids[i] * cols, cols, y.data() + i * cols);
  }
  const int32_t it = table.id();
  return tape.Record(std::move(y), {table},
                     [it, ids = std::vector<int32_t>(ids.begin(), ids.end())](Tape& t,
                                                                            int32_t self) {
                       const Tensor& gy = t.grad(self);
                       Tensor& gt = t.MutableGrad(it);
                       const size_t cols = gt.cols();
                       for (size_t i = 0; i < ids.size(); ++i) {
                         double* dst = gt.data() + ids[i] * cols;
                         const double* src = gy.data() + i * cols;
                         for (size_t c = 0; c < cols; ++c) dst[c] += src[c];
                       }
                     },
                     "EmbeddingLookup");
}

Var SegmentSum(Var values, std::span<const int32_t> segment_ids, size_t num_segments) {
  Tape& tape = *values.tape();
  const Tensor& v = values.value();
  RequireMatrix("SegmentSum", v);
  if (segment_ids.size() != v.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "SegmentSum: " + std::to_string(segment_ids.size()) +
                                               " ids for " + std::to_string(v.rows()) + " rows");
  }
  const size_t cols = v.cols();
  Tensor y = Tensor::Matrix(num_segments, cols);
  for (size_t i = 0; i < segment_ids.size(); ++i) {
    const int32_t s = segment_ids[i];
    if (s < 0 || static_cast<size_t>(s) >= num_segments) {
      throw Error(ErrorCode::kIndexOutOfRange, "segment id " + std::to_string(s));
    }
    double* dst = y.data() + s * cols;
    const double* src = v.data() + i * cols;
    for (size_t c = 0; c < cols; ++c) dst[c] += src[c];
  }
  const int32_t iv = values.id();
  return tape.Record(
      std::move(y), {values},
      [iv, ids = std::vector<int32_t>(segment_ids.begin(), segment_ids.end())](Tape& t,
                                                                             int32_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& gv = t.MutableGrad(iv);
        const size_t cols = gv.cols();
        for (size_t i = 0; i < ids.size(); ++i) {
          const double* src = gy.data() + ids[i] * cols;
          double* dst = gv.data() + i * cols;
          for (size_t c = 0; c < cols; ++c) dst[c] += src[c];
        }
      },
      "SegmentSum");
}

Var ReduceSum(Var a) {
  const Tensor& x = a.value();
  double s = 0.0;
  for (double v : x.values()) s += v;
  const int32_t ia = a.id();
  return a.tape()->Record(Tensor::Scalar(s), {a},
                          [ia](Tape& t, int32_t self) {
                            const double g = t.grad(self)[0];
                            Tensor& gx = t.MutableGrad(ia);
                            for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                          },
                          "ReduceSum");
}

Var ReduceMean(Var a) {
  const Tensor& x = a.value();
  if (x.size() == 0) throw Error(ErrorCode::kShapeMismatch, "ReduceMean of an empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double n = static_cast<double>(x.size());
  const int32_t ia = a.id();
  return a.tape()->Record(Tensor::Scalar(s / n), {a},
                          [ia, n](Tape& t, int32_t self) {
                            const double g = t.grad(self)[0] / n;
                            Tensor& gx = t.MutableGrad(ia);
                            for (size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                          },
                          "ReduceMean");
}

}  // namespace ops
}  // namespace blockgnn::tensor
