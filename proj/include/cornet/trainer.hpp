#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cornet/annotations.hpp"
#include "cornet/embeddings.hpp"
#include "cornet/losses.hpp"
#include "cornet/metrics.hpp"
#include "cornet/optimizer.hpp"
#include "cornet/seqmodel.hpp"

namespace cornet {

struct RunConfig {
  EncoderConfig encoder;
  std::size_t dv = 32;
  std::size_t d_k = 16;
  CorrFn vcor = CorrFn::M1;
  CorrFn scor = CorrFn::M2;
  double alpha_init = 0.5;
  double beta_init = 0.5;

  double lr = 0.0005;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double balance = 0.001;     // loss balance factor a
  std::size_t crop_len = 256; // training sequence crop length T
  std::uint64_t seed = 1;
  bool scor_once = false;
  bool normalize_cooc = false;

  std::string data_dir;
  std::string embeddings_path;  // defaults to <data_dir>/embeddings.json
  std::string out_dir;          // optional; CLI --out overrides

  static RunConfig from_json_file(const std::string& path);
  std::string to_json() const;
  std::string digest() const;
};

// A corpus loaded into memory, split by video-id prefix ("val_" marks the
// validation split).
struct LoadedData {
  ClassVocabulary vocab;
  SemanticSpace space;
  std::vector<AnnotationSequence> sequences;
  std::vector<Tensor> features;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
};

LoadedData load_dataset(const std::string& data_dir,
                        const std::string& embeddings_path);

struct Checkpoint {
  int version = 1;
  RunConfig config;
  std::size_t epoch = 0;
  ParamSet params;
  OptimizerState opt;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

struct EpochRow {
  std::size_t epoch = 0;
  double bce = 0.0;
  double mse = 0.0;
  double total = 0.0;
  double val_map = 0.0;
};

struct TrainResult {
  std::vector<EpochRow> rows;
  std::string best_checkpoint;
  double best_val_map = 0.0;
};

// Builds the full training graph for one window: forward in train mode plus
// the combined loss. Shared by the training loop and gradient checking.
struct TrainingGraph {
  NetworkForward forward;
  int bce = -1;
  int mse = -1;
  int total = -1;
};

TrainingGraph build_training_graph(Tape& tape, const std::vector<int>& leaves,
                                   const NetworkParamIds& ids,
                                   const NetworkConfig& net,
                                   const Tensor& features, const Tensor& we,
                                   const Tensor& targets, const Tensor& r_star,
                                   double balance, bool normalize_cooc);

// Full loop: per-epoch crops, gradient accumulation, adaptive-moment steps,
// validation mAP, per-epoch checkpoints and log.csv under out_dir.
TrainResult train_run(const RunConfig& config, const std::string& out_dir,
                      std::ostream& log);

enum class EvalSplit { All, Train, Val };

// Inference-only evaluation: pools per-frame scores over the selected videos
// in fixed order and computes per-class AP / mAP. Never touches the CORM.
EvalReport evaluate_model(const ParamSet& params, const NetworkParamIds& ids,
                          const NetworkConfig& net, const LoadedData& data,
                          EvalSplit split);

NetworkConfig network_config_from_run(const RunConfig& config,
                                      std::size_t n_classes,
                                      std::size_t embed_dim);

}  // namespace cornet
