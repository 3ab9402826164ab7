#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cornet/tensor.hpp"

namespace cornet {

// Primitive operations. Every non-leaf kind has a forward kernel and a
// reverse-mode rule; all kernels are fixed-order loops, so recomputing a
// record reproduces its values bit-exactly.
enum class Op {
  Leaf,
  MatMul,       // [m,k]x[k,n] -> [m,n]
  Transpose,    // [m,n] -> [n,m]
  Add,          // elementwise, equal shapes
  Sub,
  Mul,
  Scale,        // x * attrs.scalar
  ScaleBy,      // x * s, s a scalar tensor (differentiable)
  AddRowVec,    // [m,n] + [n], broadcast over rows
  ClassExpand,  // ([t,d], w[n], b[n]) -> [t,n,d], out(t,i,:) = w_i*x(t,:)+b_i
  OuterDiff,    // (u[n,1], v[m,1]) -> [n,m], out(i,j) = u_i - v_j
  Slice0,       // index attrs.axis along the leading axis
  Sigmoid,
  Relu,
  SoftmaxRows,  // row-wise softmax of [m,n]
  Conv1dSame,   // ([t,ci], w[k,ci,co]) -> [t,co], zero padded, k odd
  SumAxis,      // reduce attrs.axis
  SumAll,       // -> [1]
  MeanAll,      // -> [1]
  Square,
  Reshape,      // to attrs.shape, same element count
  BceMean,      // (probs, targets) -> [1], clamped binary cross entropy
};

Op op_from_name(std::string_view name);
std::string_view op_name(Op op);

struct OpAttrs {
  double scalar = 0.0;
  std::size_t axis = 0;
  std::vector<std::size_t> shape;
};

struct TapeNode {
  Op op = Op::Leaf;
  std::vector<int> inputs;
  OpAttrs attrs;
  Tensor value;
  bool trainable = false;
  std::string name;
};

// Records every primitive application in topological order (operands are
// created before use, so insertion order is already topological). A tape is
// confined to one logical thread; independent evaluations use separate tapes.
class Tape {
 public:
  int leaf(Tensor value, bool trainable = false, std::string name = {});
  int apply(Op op, const std::vector<int>& inputs, OpAttrs attrs = {});
  int apply(std::string_view op, const std::vector<int>& inputs,
            OpAttrs attrs = {});

  const Tensor& value(int id) const { return nodes_[check(id)].value; }
  const TapeNode& node(int id) const { return nodes_[check(id)]; }
  std::size_t size() const { return nodes_.size(); }
  std::vector<int> trainable_leaves() const;

  // d(loss)/d(node) for every node, indexed by node id. Gradients of
  // trainable leaves are always materialized (zero when unused); other
  // untouched entries are left empty.
  std::vector<Tensor> backward(int loss_id) const;

  // Recompute every node from its recorded inputs and compare bitwise.
  bool replay_bitexact() const;

 private:
  std::size_t check(int id) const;
  std::vector<TapeNode> nodes_;
};

// Graph-building helpers.
int matmul(Tape& t, int a, int b);
int transpose(Tape& t, int a);
int add(Tape& t, int a, int b);
int sub(Tape& t, int a, int b);
int mul(Tape& t, int a, int b);
int scale(Tape& t, int a, double c);
int scale_by(Tape& t, int a, int s);
int add_rowvec(Tape& t, int a, int b);
int class_expand(Tape& t, int x, int w, int b);
int outer_diff(Tape& t, int u, int v);
int slice0(Tape& t, int a, std::size_t index);
int sigmoid(Tape& t, int a);
int relu(Tape& t, int a);
int softmax_rows(Tape& t, int a);
int conv1d_same(Tape& t, int x, int w);
int sum_axis(Tape& t, int a, std::size_t axis);
int sum_all(Tape& t, int a);
int mean_all(Tape& t, int a);
int square(Tape& t, int a);
int reshape(Tape& t, int a, std::vector<std::size_t> shape);
int bce_mean(Tape& t, int probs, int targets);
// matmul followed by a broadcast bias add.
int affine(Tape& t, int x, int w, int b);

// Max over all parameter entries of
//   |analytic - central difference| / max(1, |analytic|, |central difference|)
// for a scalar-valued graph built by `build` over trainable leaves created
// from `params` (in order). The numeric side only re-evaluates forwards.
double grad_check(
    const std::function<int(Tape&, const std::vector<int>&)>& build,
    const std::vector<Tensor>& params, double eps);

}  // namespace cornet
