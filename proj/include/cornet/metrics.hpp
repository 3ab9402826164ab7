#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cornet/annotations.hpp"
#include "cornet/tensor.hpp"

namespace cornet {

// Ranked-retrieval average precision over per-frame scores of one class.
// Frames are ranked by descending score, ties broken by ascending frame
// index; AP is the mean of precision-at-rank over the positive frames.
// Requires at least one positive label.
double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels);

struct EvalReport {
  double map = 0.0;
  std::vector<std::pair<std::string, double>> per_class;  // vocabulary order
  std::vector<std::string> skipped;  // classes without positive frames
  std::size_t frames = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

// Per-frame mAP over pooled frames: probs and targets are [F, N] where F is
// the concatenation of all evaluated videos. Classes without positives are
// skipped; the mean runs over the remaining classes.
EvalReport per_frame_map(const Tensor& probs, const Tensor& targets,
                         const ClassVocabulary& vocab);

void write_eval_report(const std::string& path, const EvalReport& report);

}  // namespace cornet
