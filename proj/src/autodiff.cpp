#include "cornet/autodiff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "cornet/error.hpp"

namespace cornet {

namespace {

constexpr double kBceEps = 1e-7;

struct OpNamePair {
  Op op;
  std::string_view name;
};

constexpr std::array<OpNamePair, 21> kOpNames{{
    {Op::MatMul, "matmul"},
    {Op::Transpose, "transpose"},
    {Op::Add, "add"},
    {Op::Sub, "sub"},
    {Op::Mul, "mul"},
    {Op::Scale, "scale"},
    {Op::ScaleBy, "scale_by"},
    {Op::AddRowVec, "add_rowvec"},
    {Op::ClassExpand, "class_expand"},
    {Op::OuterDiff, "outer_diff"},
    {Op::Slice0, "slice0"},
    {Op::Sigmoid, "sigmoid"},
    {Op::Relu, "relu"},
    {Op::SoftmaxRows, "softmax_rows"},
    {Op::Conv1dSame, "conv1d_same"},
    {Op::SumAxis, "sum_axis"},
    {Op::SumAll, "sum_all"},
    {Op::MeanAll, "mean_all"},
    {Op::Square, "square"},
    {Op::Reshape, "reshape"},
    {Op::BceMean, "bce_mean"},
}};

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

void require_arity(Op op, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ShapeError(std::string(op_name(op)) + ": expected " +
                     std::to_string(want) + " operands, got " +
                     std::to_string(got));
  }
}

std::string two_shapes(const Tensor& a, const Tensor& b) {
  return shape_str(a.shape()) + " vs " + shape_str(b.shape());
}

// Forward kernels. Fixed left-to-right accumulation order throughout.
Tensor eval_op(Op op, const std::vector<const Tensor*>& in,
               const OpAttrs& attrs) {
  switch (op) {
    case Op::Leaf:
      throw Error("leaf nodes are not evaluated");
    case Op::MatMul: {
      require_arity(op, in.size(), 2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
              "matmul: incompatible shapes " + two_shapes(a, b));
      const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
      Tensor out({m, n});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t l = 0; l < k; ++l) acc += a(i, l) * b(l, j);
          out(i, j) = acc;
        }
      return out;
    }
    case Op::Transpose: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      require(a.rank() == 2, "transpose: need rank 2, got " +
                                 shape_str(a.shape()));
      Tensor out({a.dim(1), a.dim(0)});
      for (std::size_t i = 0; i < a.dim(0); ++i)
        for (std::size_t j = 0; j < a.dim(1); ++j) out(j, i) = a(i, j);
      return out;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      require_arity(op, in.size(), 2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      require(a.same_shape(b), std::string(op_name(op)) +
                                   ": shape mismatch " + two_shapes(a, b));
      Tensor out(a.shape());
      const std::size_t n = a.size();
      if (op == Op::Add)
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      else if (op == Op::Sub)
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      else
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      return out;
    }
    case Op::Scale: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * attrs.scalar;
      return out;
    }
    case Op::ScaleBy: {
      require_arity(op, in.size(), 2);
      const Tensor& a = *in[0];
      const Tensor& s = *in[1];
      require(s.size() == 1, "scale_by: scale operand must be scalar, got " +
                                 shape_str(s.shape()));
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s[0];
      return out;
    }
    case Op::AddRowVec: {
      require_arity(op, in.size(), 2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      require(a.rank() == 2 && b.rank() == 1 && b.dim(0) == a.dim(1),
              "add_rowvec: incompatible shapes " + two_shapes(a, b));
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.dim(0); ++i)
        for (std::size_t j = 0; j < a.dim(1); ++j) out(i, j) = a(i, j) + b[j];
      return out;
    }
    case Op::ClassExpand: {
      require_arity(op, in.size(), 3);
      const Tensor& x = *in[0];
      const Tensor& w = *in[1];
      const Tensor& b = *in[2];
      require(x.rank() == 2 && w.rank() == 1 && b.rank() == 1 &&
                  w.dim(0) == b.dim(0),
              "class_expand: incompatible shapes " + two_shapes(w, b) +
                  " with input " + shape_str(x.shape()));
      const std::size_t t = x.dim(0), d = x.dim(1), n = w.dim(0);
      Tensor out({t, n, d});
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t j = 0; j < d; ++j)
            out(i, c, j) = w[c] * x(i, j) + b[c];
      return out;
    }
    case Op::OuterDiff: {
      require_arity(op, in.size(), 2);
      const Tensor& u = *in[0];
      const Tensor& v = *in[1];
      require(u.rank() == 2 && v.rank() == 2 && u.dim(1) == 1 && v.dim(1) == 1,
              "outer_diff: need column vectors, got " + two_shapes(u, v));
      Tensor out({u.dim(0), v.dim(0)});
      for (std::size_t i = 0; i < u.dim(0); ++i)
        for (std::size_t j = 0; j < v.dim(0); ++j) out(i, j) = u[i] - v[j];
      return out;
    }
    case Op::Slice0: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      require(a.rank() >= 2, "slice0: need rank >= 2, got " +
                                 shape_str(a.shape()));
      require(attrs.axis < a.dim(0),
              "slice0: index " + std::to_string(attrs.axis) +
                  " out of range for " + shape_str(a.shape()));
      std::vector<std::size_t> oshape(a.shape().begin() + 1, a.shape().end());
      const std::size_t block = shape_product(oshape);
      Tensor out(oshape);
      const double* src = a.data() + attrs.axis * block;
      std::copy(src, src + block, out.data());
      return out;
    }
    case Op::Sigmoid: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = sigmoid_scalar(a[i]);
      return out;
    }
    case Op::Relu: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] > 0.0 ? a[i] : 0.0;
      return out;
    }
    case Op::SoftmaxRows: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      require(a.rank() == 2, "softmax_rows: need rank 2, got " +
                                 shape_str(a.shape()));
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.dim(0); ++i) {
        double mx = a(i, 0);
        for (std::size_t j = 1; j < a.dim(1); ++j) mx = std::max(mx, a(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < a.dim(1); ++j) {
          out(i, j) = std::exp(a(i, j) - mx);
          sum += out(i, j);
        }
        for (std::size_t j = 0; j < a.dim(1); ++j) out(i, j) /= sum;
      }
      return out;
    }
    case Op::Conv1dSame: {
      require_arity(op, in.size(), 2);
      const Tensor& x = *in[0];
      const Tensor& w = *in[1];
      require(x.rank() == 2 && w.rank() == 3 && w.dim(1) == x.dim(1),
              "conv1d_same: incompatible shapes " + two_shapes(x, w));
      require(w.dim(0) % 2 == 1, "conv1d_same: kernel size must be odd, got " +
                                     std::to_string(w.dim(0)));
      const std::size_t t = x.dim(0), ci = x.dim(1), k = w.dim(0),
                        co = w.dim(2);
      const std::size_t h = k / 2;
      Tensor out({t, co});
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t a = 0; a < k; ++a) {
          const std::ptrdiff_t s =
              static_cast<std::ptrdiff_t>(i + a) - static_cast<std::ptrdiff_t>(h);
          if (s < 0 || s >= static_cast<std::ptrdiff_t>(t)) continue;
          for (std::size_t c = 0; c < ci; ++c) {
            const double xv = x(static_cast<std::size_t>(s), c);
            for (std::size_t o = 0; o < co; ++o)
              out(i, o) += xv * w(a, c, o);
          }
        }
      return out;
    }
    case Op::SumAxis: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      require(attrs.axis < a.rank(), "sum_axis: axis " +
                                         std::to_string(attrs.axis) +
                                         " out of range for " +
                                         shape_str(a.shape()));
      std::vector<std::size_t> oshape;
      for (std::size_t i = 0; i < a.rank(); ++i)
        if (i != attrs.axis) oshape.push_back(a.dim(i));
      if (oshape.empty()) oshape = {1};
      std::size_t outer = 1, inner = 1;
      for (std::size_t i = 0; i < attrs.axis; ++i) outer *= a.dim(i);
      for (std::size_t i = attrs.axis + 1; i < a.rank(); ++i)
        inner *= a.dim(i);
      const std::size_t mid = a.dim(attrs.axis);
      Tensor out(oshape);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t m = 0; m < mid; ++m)
          for (std::size_t j = 0; j < inner; ++j)
            out[o * inner + j] += a[(o * mid + m) * inner + j];
      return out;
    }
    case Op::SumAll:
    case Op::MeanAll: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
      if (op == Op::MeanAll) acc /= static_cast<double>(a.size());
      return Tensor::scalar(acc);
    }
    case Op::Square: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * a[i];
      return out;
    }
    case Op::Reshape: {
      require_arity(op, in.size(), 1);
      const Tensor& a = *in[0];
      require(shape_product(attrs.shape) == a.size(),
              "reshape: " + shape_str(a.shape()) + " to " +
                  shape_str(attrs.shape) + " changes element count");
      return Tensor(attrs.shape, a.values());
    }
    case Op::BceMean: {
      require_arity(op, in.size(), 2);
      const Tensor& p = *in[0];
      const Tensor& y = *in[1];
      require(p.same_shape(y),
              "bce_mean: shape mismatch " + two_shapes(p, y));
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::min(std::max(p[i], kBceEps), 1.0 - kBceEps);
        acc += -(y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc));
      }
      return Tensor::scalar(acc / static_cast<double>(p.size()));
    }
  }
  throw Error("unhandled primitive");
}

}  // namespace

Op op_from_name(std::string_view name) {
  for (const auto& e : kOpNames)
    if (e.name == name) return e.op;
  throw Error("unknown primitive id: " + std::string(name));
}

std::string_view op_name(Op op) {
  if (op == Op::Leaf) return "leaf";
  for (const auto& e : kOpNames)
    if (e.op == op) return e.name;
  return "?";
}

std::size_t Tape::check(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw Error("invalid node id " + std::to_string(id));
  return static_cast<std::size_t>(id);
}

int Tape::leaf(Tensor value, bool trainable, std::string name) {
  TapeNode n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.trainable = trainable;
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::apply(Op op, const std::vector<int>& inputs, OpAttrs attrs) {
  if (op == Op::Leaf) throw Error("apply: leaf is not a primitive");
  std::vector<const Tensor*> operands;
  operands.reserve(inputs.size());
  for (int id : inputs) operands.push_back(&nodes_[check(id)].value);
  TapeNode n;
  n.op = op;
  n.inputs = inputs;
  n.attrs = attrs;
  n.value = eval_op(op, operands, attrs);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::apply(std::string_view op, const std::vector<int>& inputs,
                OpAttrs attrs) {
  return apply(op_from_name(op), inputs, std::move(attrs));
}

std::vector<int> Tape::trainable_leaves() const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op == Op::Leaf && nodes_[i].trainable)
      ids.push_back(static_cast<int>(i));
  return ids;
}

bool Tape::replay_bitexact() const {
  for (const TapeNode& n : nodes_) {
    if (n.op == Op::Leaf) continue;
    std::vector<const Tensor*> operands;
    for (int id : n.inputs) operands.push_back(&nodes_[check(id)].value);
    if (!eval_op(n.op, operands, n.attrs).bit_equal(n.value)) return false;
  }
  return true;
}

std::vector<Tensor> Tape::backward(int loss_id) const {
  const std::size_t loss = check(loss_id);
  if (nodes_[loss].value.size() != 1)
    throw ShapeError("backward: loss node must be scalar, got " +
                     shape_str(nodes_[loss].value.shape()));

  std::vector<Tensor> grads(nodes_.size());
  auto grad_of = [&](int id) -> Tensor& {
    Tensor& g = grads[static_cast<std::size_t>(id)];
    if (g.size() == 0 && nodes_[static_cast<std::size_t>(id)].value.size() != 0)
      g = Tensor::zeros_like(nodes_[static_cast<std::size_t>(id)].value);
    return g;
  };

  grad_of(loss_id)[0] = 1.0;

  for (std::size_t idx = loss + 1; idx-- > 0;) {
    const TapeNode& n = nodes_[idx];
    if (n.op == Op::Leaf || grads[idx].size() == 0) continue;
    const Tensor& gy = grads[idx];
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        const Tensor& a = nodes_[check(n.inputs[0])].value;
        const Tensor& b = nodes_[check(n.inputs[1])].value;
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gb = grad_of(n.inputs[1]);
        const std::size_t m = a.dim(0), k = a.dim(1), nn = b.dim(1);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            double acc = 0.0;
            for (std::size_t j = 0; j < nn; ++j) acc += gy(i, j) * b(l, j);
            ga(i, l) += acc;
          }
        for (std::size_t l = 0; l < k; ++l)
          for (std::size_t j = 0; j < nn; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += a(i, l) * gy(i, j);
            gb(l, j) += acc;
          }
        break;
      }
      case Op::Transpose: {
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.dim(0); ++i)
          for (std::size_t j = 0; j < gy.dim(1); ++j) ga(j, i) += gy(i, j);
        break;
      }
      case Op::Add: {
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gb = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          ga[i] += gy[i];
          gb[i] += gy[i];
        }
        break;
      }
      case Op::Sub: {
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gb = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          ga[i] += gy[i];
          gb[i] -= gy[i];
        }
        break;
      }
      case Op::Mul: {
        const Tensor& a = nodes_[check(n.inputs[0])].value;
        const Tensor& b = nodes_[check(n.inputs[1])].value;
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gb = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          ga[i] += gy[i] * b[i];
          gb[i] += gy[i] * a[i];
        }
        break;
      }
      case Op::Scale: {
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i)
          ga[i] += gy[i] * n.attrs.scalar;
        break;
      }
      case Op::ScaleBy: {
        const Tensor& a = nodes_[check(n.inputs[0])].value;
        const Tensor& s = nodes_[check(n.inputs[1])].value;
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gs = grad_of(n.inputs[1]);
        double acc = 0.0;
        for (std::size_t i = 0; i < gy.size(); ++i) {
          ga[i] += gy[i] * s[0];
          acc += gy[i] * a[i];
        }
        gs[0] += acc;
        break;
      }
      case Op::AddRowVec: {
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gb = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gy.dim(0); ++i)
          for (std::size_t j = 0; j < gy.dim(1); ++j) {
            ga(i, j) += gy(i, j);
            gb[j] += gy(i, j);
          }
        break;
      }
      case Op::ClassExpand: {
        const Tensor& x = nodes_[check(n.inputs[0])].value;
        const Tensor& w = nodes_[check(n.inputs[1])].value;
        Tensor& gx = grad_of(n.inputs[0]);
        Tensor& gw = grad_of(n.inputs[1]);
        Tensor& gb = grad_of(n.inputs[2]);
        const std::size_t t = x.dim(0), d = x.dim(1), nc = w.dim(0);
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t j = 0; j < d; ++j) {
              const double g = gy(i, c, j);
              gx(i, j) += w[c] * g;
              gw[c] += x(i, j) * g;
              gb[c] += g;
            }
        break;
      }
      case Op::OuterDiff: {
        Tensor& gu = grad_of(n.inputs[0]);
        Tensor& gv = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gy.dim(0); ++i)
          for (std::size_t j = 0; j < gy.dim(1); ++j) {
            gu[i] += gy(i, j);
            gv[j] -= gy(i, j);
          }
        break;
      }
      case Op::Slice0: {
        Tensor& ga = grad_of(n.inputs[0]);
        const std::size_t block = gy.size();
        double* dst = ga.data() + n.attrs.axis * block;
        for (std::size_t i = 0; i < block; ++i) dst[i] += gy[i];
        break;
      }
      case Op::Sigmoid: {
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          const double y = n.value[i];
          ga[i] += gy[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::Relu: {
        const Tensor& x = nodes_[check(n.inputs[0])].value;
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i)
          if (x[i] > 0.0) ga[i] += gy[i];
        break;
      }
      case Op::SoftmaxRows: {
        Tensor& ga = grad_of(n.inputs[0]);
        const std::size_t rows = gy.dim(0), cols = gy.dim(1);
        for (std::size_t i = 0; i < rows; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < cols; ++j)
            dot += gy(i, j) * n.value(i, j);
          for (std::size_t j = 0; j < cols; ++j)
            ga(i, j) += n.value(i, j) * (gy(i, j) - dot);
        }
        break;
      }
      case Op::Conv1dSame: {
        const Tensor& x = nodes_[check(n.inputs[0])].value;
        const Tensor& w = nodes_[check(n.inputs[1])].value;
        Tensor& gx = grad_of(n.inputs[0]);
        Tensor& gw = grad_of(n.inputs[1]);
        const std::size_t t = x.dim(0), ci = x.dim(1), k = w.dim(0),
                          co = w.dim(2);
        const std::size_t h = k / 2;
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t a = 0; a < k; ++a) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i + a) -
                                     static_cast<std::ptrdiff_t>(h);
            if (s < 0 || s >= static_cast<std::ptrdiff_t>(t)) continue;
            const std::size_t su = static_cast<std::size_t>(s);
            for (std::size_t c = 0; c < ci; ++c)
              for (std::size_t o = 0; o < co; ++o) {
                gx(su, c) += gy(i, o) * w(a, c, o);
                gw(a, c, o) += x(su, c) * gy(i, o);
              }
          }
        break;
      }
      case Op::SumAxis: {
        const Tensor& a = nodes_[check(n.inputs[0])].value;
        Tensor& ga = grad_of(n.inputs[0]);
        std::size_t outer = 1, inner = 1;
        for (std::size_t i = 0; i < n.attrs.axis; ++i) outer *= a.dim(i);
        for (std::size_t i = n.attrs.axis + 1; i < a.rank(); ++i)
          inner *= a.dim(i);
        const std::size_t mid = a.dim(n.attrs.axis);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t m = 0; m < mid; ++m)
            for (std::size_t j = 0; j < inner; ++j)
              ga[(o * mid + m) * inner + j] += gy[o * inner + j];
        break;
      }
      case Op::SumAll: {
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gy[0];
        break;
      }
      case Op::MeanAll: {
        Tensor& ga = grad_of(n.inputs[0]);
        const double g = gy[0] / static_cast<double>(ga.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
        break;
      }
      case Op::Square: {
        const Tensor& x = nodes_[check(n.inputs[0])].value;
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i)
          ga[i] += 2.0 * x[i] * gy[i];
        break;
      }
      case Op::Reshape: {
        Tensor& ga = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
        break;
      }
      case Op::BceMean: {
        const Tensor& p = nodes_[check(n.inputs[0])].value;
        const Tensor& y = nodes_[check(n.inputs[1])].value;
        Tensor& gp = grad_of(n.inputs[0]);
        Tensor& gt = grad_of(n.inputs[1]);
        const double g = gy[0] / static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double pc = std::min(std::max(p[i], kBceEps), 1.0 - kBceEps);
          if (p[i] > kBceEps && p[i] < 1.0 - kBceEps)
            gp[i] += g * (pc - y[i]) / (pc * (1.0 - pc));
          gt[i] += g * (std::log(1.0 - pc) - std::log(pc));
        }
        break;
      }
    }
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op == Op::Leaf && nodes_[i].trainable &&
        grads[i].size() == 0)
      grads[i] = Tensor::zeros_like(nodes_[i].value);
  return grads;
}

int matmul(Tape& t, int a, int b) { return t.apply(Op::MatMul, {a, b}); }
int transpose(Tape& t, int a) { return t.apply(Op::Transpose, {a}); }
int add(Tape& t, int a, int b) { return t.apply(Op::Add, {a, b}); }
int sub(Tape& t, int a, int b) { return t.apply(Op::Sub, {a, b}); }
int mul(Tape& t, int a, int b) { return t.apply(Op::Mul, {a, b}); }
int scale(Tape& t, int a, double c) {
  return t.apply(Op::Scale, {a}, {.scalar = c});
}
int scale_by(Tape& t, int a, int s) { return t.apply(Op::ScaleBy, {a, s}); }
int add_rowvec(Tape& t, int a, int b) {
  return t.apply(Op::AddRowVec, {a, b});
}
int class_expand(Tape& t, int x, int w, int b) {
  return t.apply(Op::ClassExpand, {x, w, b});
}
int outer_diff(Tape& t, int u, int v) {
  return t.apply(Op::OuterDiff, {u, v});
}
int slice0(Tape& t, int a, std::size_t index) {
  return t.apply(Op::Slice0, {a}, {.axis = index});
}
int sigmoid(Tape& t, int a) { return t.apply(Op::Sigmoid, {a}); }
int relu(Tape& t, int a) { return t.apply(Op::Relu, {a}); }
int softmax_rows(Tape& t, int a) { return t.apply(Op::SoftmaxRows, {a}); }
int conv1d_same(Tape& t, int x, int w) {
  return t.apply(Op::Conv1dSame, {x, w});
}
int sum_axis(Tape& t, int a, std::size_t axis) {
  return t.apply(Op::SumAxis, {a}, {.axis = axis});
}
int sum_all(Tape& t, int a) { return t.apply(Op::SumAll, {a}); }
int mean_all(Tape& t, int a) { return t.apply(Op::MeanAll, {a}); }
int square(Tape& t, int a) { return t.apply(Op::Square, {a}); }
int reshape(Tape& t, int a, std::vector<std::size_t> shape) {
  return t.apply(Op::Reshape, {a}, {.shape = std::move(shape)});
}
int bce_mean(Tape& t, int probs, int targets) {
  return t.apply(Op::BceMean, {probs, targets});
}
int affine(Tape& t, int x, int w, int b) {
  return add_rowvec(t, matmul(t, x, w), b);
}

double grad_check(
    const std::function<int(Tape&, const std::vector<int>&)>& build,
    const std::vector<Tensor>& params, double eps) {
  if (eps <= 0.0) throw Error("grad_check: eps must be positive");

  auto make_tape = [&](const std::vector<Tensor>& values) {
    Tape t;
    std::vector<int> ids;
    ids.reserve(values.size());
    for (const Tensor& p : values) ids.push_back(t.leaf(p, true));
    const int loss = build(t, ids);
    const Tensor& v = t.value(loss);
    if (v.size() != 1)
      throw ShapeError("grad_check: function must be scalar-valued");
    if (!std::isfinite(v[0]))
      throw Error("grad_check: non-finite function value");
    return std::pair<Tape, int>(std::move(t), loss);
  };
  auto eval_value = [&](const std::vector<Tensor>& values) {
    auto [t, loss] = make_tape(values);
    return t.value(loss)[0];
  };

  auto [tape, loss] = make_tape(params);
  const std::vector<Tensor> grads = tape.backward(loss);
  std::vector<int> leaf_ids = tape.trainable_leaves();

  std::vector<Tensor> work = params;
  double max_err = 0.0;
  for (std::size_t pi = 0; pi < work.size(); ++pi) {
    const Tensor& analytic = grads[static_cast<std::size_t>(leaf_ids[pi])];
    for (std::size_t i = 0; i < work[pi].size(); ++i) {
      const double orig = work[pi][i];
      work[pi][i] = orig + eps;
      const double fp = eval_value(work);
      work[pi][i] = orig - eps;
      const double fm = eval_value(work);
      work[pi][i] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[i];
      const double err = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace cornet
