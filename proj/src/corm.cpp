#include "cornet/corm.hpp"

#include <cmath>

#include "cornet/error.hpp"

namespace cornet {

CorrFn corr_fn_from_name(const std::string& name) {
  if (name == "m1" || name == "M1") return CorrFn::M1;
  if (name == "m2" || name == "M2") return CorrFn::M2;
  throw ParseError("unknown correlation function '" + name +
                   "' (expected m1 or m2)");
}

std::string corr_fn_name(CorrFn fn) { return fn == CorrFn::M1 ? "m1" : "m2"; }

void CormConfig::validate() const {
  if (d0 == 0 || dv == 0 || n_classes == 0 || d_e == 0 || d_k == 0)
    throw Error("corm config: all dimensions must be >= 1");
}

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in,
                    Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = rng.uniform(-bound, bound);
  return t;
}

CormParamIds init_corm_params(ParamSet& params, const CormConfig& config,
                              Rng& rng) {
  config.validate();
  CormParamIds ids;
  ids.f_w = params.add("corm.f.w",
                       uniform_init({config.d0, config.dv}, config.d0, rng));
  ids.f_b = params.add("corm.f.b", Tensor({config.dv}));
  ids.g_w = params.add("corm.g.w",
                       uniform_init({config.n_classes}, 1, rng));
  ids.g_b = params.add("corm.g.b", Tensor({config.n_classes}));
  if (config.vcor == CorrFn::M1) {
    ids.v_phi_w = params.add(
        "corm.vcor.phi.w", uniform_init({config.dv, 1}, config.dv, rng));
    ids.v_phi_b = params.add("corm.vcor.phi.b", Tensor({1}));
    ids.v_psi_w = params.add(
        "corm.vcor.psi.w", uniform_init({config.dv, 1}, config.dv, rng));
    ids.v_psi_b = params.add("corm.vcor.psi.b", Tensor({1}));
  } else {
    ids.v_q = params.add(
        "corm.vcor.q", uniform_init({config.dv, config.d_k}, config.dv, rng));
    ids.v_k = params.add(
        "corm.vcor.k", uniform_init({config.dv, config.d_k}, config.dv, rng));
  }
  if (config.scor == CorrFn::M1) {
    ids.s_phi_w = params.add(
        "corm.scor.phi.w", uniform_init({config.d_e, 1}, config.d_e, rng));
    ids.s_phi_b = params.add("corm.scor.phi.b", Tensor({1}));
    ids.s_psi_w = params.add(
        "corm.scor.psi.w", uniform_init({config.d_e, 1}, config.d_e, rng));
    ids.s_psi_b = params.add("corm.scor.psi.b", Tensor({1}));
  } else {
    ids.s_q = params.add(
        "corm.scor.q", uniform_init({config.d_e, config.d_k}, config.d_e, rng));
    ids.s_k = params.add(
        "corm.scor.k", uniform_init({config.d_e, config.d_k}, config.d_e, rng));
  }
  ids.alpha = params.add("corm.alpha", Tensor::scalar(config.alpha_init));
  ids.beta = params.add("corm.beta", Tensor::scalar(config.beta_init));
  return ids;
}

std::size_t param_count(const CormConfig& config) {
  config.validate();
  std::size_t count = 0;
  count += config.d0 * config.dv + config.dv;  // f
  count += 2 * config.n_classes;               // g
  count += config.vcor == CorrFn::M1 ? 2 * (config.dv + 1)
                                     : 2 * config.dv * config.d_k;
  count += config.scor == CorrFn::M1 ? 2 * (config.d_e + 1)
                                     : 2 * config.d_e * config.d_k;
  count += 2;  // alpha, beta
  return count;
}

int corm_preprocess(Tape& t, int x0, int f_w, int f_b) {
  return affine(t, x0, f_w, f_b);
}

int corm_class_features(Tape& t, int x, int g_w, int g_b) {
  return class_expand(t, x, g_w, g_b);
}

int correlate_m1(Tape& t, int features, int phi_w, int phi_b, int psi_w,
                 int psi_b) {
  const int u = affine(t, features, phi_w, phi_b);  // [N,1]
  const int v = affine(t, features, psi_w, psi_b);  // [N,1]
  return sigmoid(t, outer_diff(t, u, v));
}

int correlate_m2(Tape& t, int features, int h_q, int h_k, std::size_t d_k) {
  const int q = matmul(t, features, h_q);
  const int k = matmul(t, features, h_k);
  const int logits =
      scale(t, matmul(t, q, transpose(t, k)),
            1.0 / std::sqrt(static_cast<double>(d_k)));
  return softmax_rows(t, logits);
}

int fuse_and_sum(Tape& t, const std::vector<int>& rv_steps, int rs, int alpha,
                 int beta, bool scor_once) {
  if (rv_steps.empty())
    throw Error("fuse_and_sum: need at least one visual step");
  int acc = rv_steps[0];
  for (std::size_t i = 1; i < rv_steps.size(); ++i)
    acc = add(t, acc, rv_steps[i]);
  const int visual = scale_by(t, acc, alpha);
  int semantic = scale_by(t, rs, beta);
  if (!scor_once)
    semantic =
        scale(t, semantic, static_cast<double>(rv_steps.size()));
  return add(t, visual, semantic);
}

namespace {

int correlate_branch(Tape& t, int features, CorrFn fn, bool visual,
                     const std::vector<int>& leaves, const CormParamIds& ids,
                     const CormConfig& config) {
  if (fn == CorrFn::M1) {
    const int phi_w = leaves[visual ? ids.v_phi_w : ids.s_phi_w];
    const int phi_b = leaves[visual ? ids.v_phi_b : ids.s_phi_b];
    const int psi_w = leaves[visual ? ids.v_psi_w : ids.s_psi_w];
    const int psi_b = leaves[visual ? ids.v_psi_b : ids.s_psi_b];
    return correlate_m1(t, features, phi_w, phi_b, psi_w, psi_b);
  }
  const int h_q = leaves[visual ? ids.v_q : ids.s_q];
  const int h_k = leaves[visual ? ids.v_k : ids.s_k];
  return correlate_m2(t, features, h_q, h_k, config.d_k);
}

}  // namespace

int corm_forward(Tape& t, int x0, int we, const std::vector<int>& leaves,
                 const CormParamIds& ids, const CormConfig& config) {
  const Tensor& x0v = t.value(x0);
  if (x0v.rank() != 2 || x0v.dim(1) != config.d0)
    throw ShapeError("corm_forward: input " + shape_str(x0v.shape()) +
                     " does not match encoder width " +
                     std::to_string(config.d0));
  const std::size_t steps = x0v.dim(0);

  const int x = corm_preprocess(t, x0, leaves[ids.f_w], leaves[ids.f_b]);
  const int x_cls = corm_class_features(t, x, leaves[ids.g_w], leaves[ids.g_b]);

  std::vector<int> rv_steps;
  rv_steps.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step) {
    const int f_t = slice0(t, x_cls, step);  // [N, Dv]
    rv_steps.push_back(
        correlate_branch(t, f_t, config.vcor, true, leaves, ids, config));
  }

  // The semantic matrix does not depend on t; computed once per forward.
  const int rs = correlate_branch(t, we, config.scor, false, leaves, ids,
                                  config);

  return fuse_and_sum(t, rv_steps, rs, leaves[ids.alpha], leaves[ids.beta],
                      config.scor_once);
}

Tensor eval_correlate_m1(const Tensor& features, const Tensor& phi_w,
                         const Tensor& phi_b, const Tensor& psi_w,
                         const Tensor& psi_b) {
  Tape t;
  const int f = t.leaf(features);
  const int out = correlate_m1(t, f, t.leaf(phi_w), t.leaf(phi_b),
                               t.leaf(psi_w), t.leaf(psi_b));
  return t.value(out);
}

Tensor eval_correlate_m2(const Tensor& features, const Tensor& h_q,
                         const Tensor& h_k, std::size_t d_k) {
  Tape t;
  const int f = t.leaf(features);
  const int out = correlate_m2(t, f, t.leaf(h_q), t.leaf(h_k), d_k);
  return t.value(out);
}

}  // namespace cornet
