#include "cornet/optimizer.hpp"

#include <cmath>

#include "cornet/autodiff.hpp"
#include "cornet/error.hpp"

namespace cornet {

std::vector<int> add_param_leaves(Tape& tape, const ParamSet& params) {
  std::vector<int> ids;
  ids.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i)
    ids.push_back(tape.leaf(params.values[i], true, params.names[i]));
  return ids;
}

OptimizerState OptimizerState::init(const ParamSet& params, AdamConfig config) {
  OptimizerState st;
  st.config = config;
  st.m.reserve(params.count());
  st.v.reserve(params.count());
  for (const Tensor& p : params.values) {
    st.m.push_back(Tensor::zeros_like(p));
    st.v.push_back(Tensor::zeros_like(p));
  }
  return st;
}

void optimizer_step(ParamSet& params, const std::vector<Tensor>& grads,
                    OptimizerState& state) {
  if (grads.size() != params.count() || state.m.size() != params.count())
    throw ShapeError("optimizer_step: parameter/gradient/state count mismatch");
  for (std::size_t i = 0; i < params.count(); ++i) {
    if (!grads[i].same_shape(params.values[i]))
      throw ShapeError("optimizer_step: gradient shape " +
                       shape_str(grads[i].shape()) + " does not match " +
                       params.names[i] + " " +
                       shape_str(params.values[i].shape()));
  }

  state.step += 1;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& p = params.values[i];
    const Tensor& g = grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace cornet
