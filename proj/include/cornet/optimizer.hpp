#pragma once

#include <cstdint>
#include <vector>

#include "cornet/params.hpp"
#include "cornet/tensor.hpp"

namespace cornet {

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment estimation state, accumulators aligned with a ParamSet.
struct OptimizerState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static OptimizerState init(const ParamSet& params, AdamConfig config = {});
};

// One bias-corrected update. Pure in the sense that identical
// (params, grads, state) always produce identical results.
void optimizer_step(ParamSet& params, const std::vector<Tensor>& grads,
                    OptimizerState& state);

}  // namespace cornet
