#include "cornet/losses.hpp"

#include "cornet/error.hpp"

namespace cornet {

int bce_loss(Tape& t, int probs, int targets) {
  return bce_mean(t, probs, targets);
}

int cooc_mse_loss(Tape& t, int r, int r_star) {
  const Tensor& rv = t.value(r);
  const Tensor& rsv = t.value(r_star);
  if (rv.rank() != 2 || rv.dim(0) != rv.dim(1) || !rv.same_shape(rsv))
    throw ShapeError("cooc_mse_loss: need matching square matrices, got " +
                     shape_str(rv.shape()) + " vs " + shape_str(rsv.shape()));
  const double n = static_cast<double>(rv.dim(0));
  return scale(t, sum_all(t, square(t, sub(t, r_star, r))), 1.0 / n);
}

int total_loss(Tape& t, int bce, int mse, double balance) {
  if (balance < 0.0) throw Error("total_loss: balance factor must be >= 0");
  return add(t, bce, scale(t, mse, balance));
}

LossBreakdown loss_breakdown(const Tape& t, int bce, int mse, int total,
                             double balance) {
  LossBreakdown out;
  out.bce = t.value(bce)[0];
  out.mse = t.value(mse)[0];
  out.total = t.value(total)[0];
  out.balance = balance;
  return out;
}

}  // namespace cornet
