#pragma once

#include <vector>

#include "cornet/autodiff.hpp"
#include "cornet/corm.hpp"
#include "cornet/params.hpp"

namespace cornet {

// Plain temporal-convolution encoder. Stands in for the pluggable sequence
// model the CORM attaches to; every layer preserves sequence length.
struct EncoderConfig {
  std::size_t d_in = 0;
  std::size_t d0 = 64;
  std::size_t layers = 3;
  std::size_t kernel = 9;  // odd

  void validate() const;
};

struct NetworkConfig {
  EncoderConfig encoder;
  CormConfig corm;  // corm.d0 must equal encoder.d0
};

struct NetworkParamIds {
  std::vector<int> conv_w;  // [k, c_in, c_out] per layer
  std::vector<int> conv_b;  // [c_out] per layer
  int head_w = -1, head_b = -1;
  CormParamIds corm;
};

NetworkParamIds init_network_params(ParamSet& params,
                                    const NetworkConfig& config, Rng& rng);

// L x (same-length conv -> rectifier); output is [T, D0].
int encode(Tape& t, int features, const std::vector<int>& leaves,
           const NetworkParamIds& ids);

// Per-timestep affine + sigmoid head; output is [T, N] in (0,1).
int predict(Tape& t, int x0, int head_w, int head_b);

enum class RunMode { Train, Infer };

struct NetworkForward {
  int probs = -1;  // [T, N]
  int r = -1;      // [N, N]; -1 in infer mode (CORM never evaluated)
  int x0 = -1;     // encoder output, for diagnostics
};

// In train mode both branches are evaluated; in infer mode the CORM subgraph
// is never built, so its parameters and W_e are never read.
NetworkForward cor_network_forward(Tape& t, int features, int we,
                                   const std::vector<int>& leaves,
                                   const NetworkParamIds& ids,
                                   const NetworkConfig& config, RunMode mode);

}  // namespace cornet
