#pragma once

#include "cornet/autodiff.hpp"

namespace cornet {

struct LossBreakdown {
  double bce = 0.0;
  double mse = 0.0;
  double total = 0.0;
  double balance = 0.0;  // factor a
};

// Mean clamped binary cross entropy over all T*N entries.
int bce_loss(Tape& t, int probs, int targets);

// (1/N) * sum of squared entries of (R* - R): squared row-difference norms
// averaged over the N rows.
int cooc_mse_loss(Tape& t, int r, int r_star);

// total = bce + a * mse.
int total_loss(Tape& t, int bce, int mse, double balance);

LossBreakdown loss_breakdown(const Tape& t, int bce, int mse, int total,
                             double balance);

}  // namespace cornet
