#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cornet/autodiff.hpp"
#include "cornet/params.hpp"
#include "cornet/rng.hpp"

namespace cornet {

// Correlation modeling functions: M1 is a sigmoid of projected pairwise
// differences, M2 is scaled-dot-product self-attention.
enum class CorrFn { M1, M2 };

CorrFn corr_fn_from_name(const std::string& name);
std::string corr_fn_name(CorrFn fn);

struct CormConfig {
  std::size_t d0 = 0;       // encoder output width
  std::size_t dv = 32;      // reduced visual width
  std::size_t n_classes = 0;
  std::size_t d_e = 0;      // label embedding width
  std::size_t d_k = 16;     // attention projection width
  CorrFn vcor = CorrFn::M1;
  CorrFn scor = CorrFn::M2;
  double alpha_init = 0.5;
  double beta_init = 0.5;
  bool scor_once = false;  // add the semantic matrix once instead of per step

  void validate() const;
};

// ParamSet indices of the CORM learnables. A branch owns either the phi/psi
// pair (M1) or the query/key projections (M2); the unused pair stays -1 and
// contributes nothing to the parameter count.
struct CormParamIds {
  int f_w = -1, f_b = -1;
  int g_w = -1, g_b = -1;
  int v_phi_w = -1, v_phi_b = -1, v_psi_w = -1, v_psi_b = -1;
  int v_q = -1, v_k = -1;
  int s_phi_w = -1, s_phi_b = -1, s_psi_w = -1, s_psi_b = -1;
  int s_q = -1, s_k = -1;
  int alpha = -1, beta = -1;
};

CormParamIds init_corm_params(ParamSet& params, const CormConfig& config,
                              Rng& rng);

// Exact number of scalar learnables for a configuration.
std::size_t param_count(const CormConfig& config);

// Graph builders; arguments are node ids on the tape.
int corm_preprocess(Tape& t, int x0, int f_w, int f_b);
int corm_class_features(Tape& t, int x, int g_w, int g_b);
int correlate_m1(Tape& t, int features, int phi_w, int phi_b, int psi_w,
                 int psi_b);
int correlate_m2(Tape& t, int features, int h_q, int h_k, std::size_t d_k);
int fuse_and_sum(Tape& t, const std::vector<int>& rv_steps, int rs, int alpha,
                 int beta, bool scor_once);

// Full module: preprocess, per-step visual correlation, semantic
// correlation of W_e, weighted fusion summed over time.
int corm_forward(Tape& t, int x0, int we, const std::vector<int>& leaves,
                 const CormParamIds& ids, const CormConfig& config);

// Convenience single-shot evaluations on plain tensors (no recording reuse).
Tensor eval_correlate_m1(const Tensor& features, const Tensor& phi_w,
                         const Tensor& phi_b, const Tensor& psi_w,
                         const Tensor& psi_b);
Tensor eval_correlate_m2(const Tensor& features, const Tensor& h_q,
                         const Tensor& h_k, std::size_t d_k);

// Uniform +-1/sqrt(fan_in) weights, zero biases.
Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in,
                    Rng& rng);

}  // namespace cornet
