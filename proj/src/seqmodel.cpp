#include "cornet/seqmodel.hpp"

#include "cornet/error.hpp"

namespace cornet {

void EncoderConfig::validate() const {
  if (d_in == 0 || d0 == 0) throw Error("encoder config: widths must be >= 1");
  if (layers == 0) throw Error("encoder config: need at least one layer");
  if (kernel % 2 == 0)
    throw Error("encoder config: kernel size must be odd, got " +
                std::to_string(kernel));
}

NetworkParamIds init_network_params(ParamSet& params,
                                    const NetworkConfig& config, Rng& rng) {
  config.encoder.validate();
  if (config.corm.d0 != config.encoder.d0)
    throw Error("network config: corm.d0 " + std::to_string(config.corm.d0) +
                " != encoder.d0 " + std::to_string(config.encoder.d0));
  NetworkParamIds ids;
  for (std::size_t l = 0; l < config.encoder.layers; ++l) {
    const std::size_t c_in = l == 0 ? config.encoder.d_in : config.encoder.d0;
    const std::size_t c_out = config.encoder.d0;
    const std::string tag = "encoder.conv" + std::to_string(l);
    ids.conv_w.push_back(params.add(
        tag + ".w", uniform_init({config.encoder.kernel, c_in, c_out},
                                 config.encoder.kernel * c_in, rng)));
    ids.conv_b.push_back(params.add(tag + ".b", Tensor({c_out})));
  }
  ids.head_w = params.add(
      "head.w", uniform_init({config.encoder.d0, config.corm.n_classes},
                             config.encoder.d0, rng));
  ids.head_b = params.add("head.b", Tensor({config.corm.n_classes}));
  ids.corm = init_corm_params(params, config.corm, rng);
  return ids;
}

int encode(Tape& t, int features, const std::vector<int>& leaves,
           const NetworkParamIds& ids) {
  int x = features;
  for (std::size_t l = 0; l < ids.conv_w.size(); ++l) {
    const int conv = conv1d_same(t, x, leaves[ids.conv_w[l]]);
    x = relu(t, add_rowvec(t, conv, leaves[ids.conv_b[l]]));
  }
  return x;
}

int predict(Tape& t, int x0, int head_w, int head_b) {
  return sigmoid(t, affine(t, x0, head_w, head_b));
}

NetworkForward cor_network_forward(Tape& t, int features, int we,
                                   const std::vector<int>& leaves,
                                   const NetworkParamIds& ids,
                                   const NetworkConfig& config, RunMode mode) {
  NetworkForward out;
  out.x0 = encode(t, features, leaves, ids);
  out.probs = predict(t, out.x0, leaves[ids.head_w], leaves[ids.head_b]);
  if (mode == RunMode::Train)
    out.r = corm_forward(t, out.x0, we, leaves, ids.corm, config.corm);
  return out;
}

}  // namespace cornet
