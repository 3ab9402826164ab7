#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cornet/annotations.hpp"
#include "cornet/embeddings.hpp"
#include "cornet/tensor.hpp"

namespace cornet {

// One planted co-occurrence: whenever class `a` places a segment, class `b`
// places an overlapping segment with probability `p`.
struct PlantedPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double p = 0.0;
};

struct SynthSpec {
  std::size_t n_classes = 8;
  std::size_t d_in = 16;
  std::size_t train_videos = 40;
  std::size_t val_videos = 10;
  std::size_t frames = 64;
  std::size_t embed_dim = 32;
  std::vector<PlantedPair> pairs;
  double base_rate = 0.5;       // per-class segment placement probability
  std::size_t seg_min = 8;
  std::size_t seg_max = 32;
  double noise_sigma = 1.0;
  double proto_scale = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  static SynthSpec from_json_file(const std::string& path);
  std::string to_json() const;
};

struct SynthCorpus {
  ClassVocabulary vocab;
  SemanticSpace space;
  std::vector<AnnotationSequence> sequences;  // train then val, id-prefixed
  std::vector<Tensor> features;               // aligned with sequences
};

// Deterministic function of the spec. Train ids are "train_###", validation
// ids "val_###"; frame features are active-class prototype sums plus noise.
SynthCorpus generate_dataset(const SynthSpec& spec);

}  // namespace cornet
