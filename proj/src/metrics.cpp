#include "cornet/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cornet/error.hpp"

namespace cornet {

double average_precision(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size())
    throw ShapeError("average_precision: " + std::to_string(scores.size()) +
                     " scores vs " + std::to_string(labels.size()) +
                     " labels");
  std::size_t positives = 0;
  for (std::uint8_t y : labels) positives += y ? 1 : 0;
  if (positives == 0)
    throw Error("average_precision: no positive labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });

  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]]) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return ap / static_cast<double>(positives);
}

EvalReport per_frame_map(const Tensor& probs, const Tensor& targets,
                         const ClassVocabulary& vocab) {
  if (probs.rank() != 2 || !probs.same_shape(targets) ||
      probs.dim(1) != vocab.size())
    throw ShapeError("per_frame_map: shapes " + shape_str(probs.shape()) +
                     " vs " + shape_str(targets.shape()) + " with N=" +
                     std::to_string(vocab.size()));
  const std::size_t frames = probs.dim(0);

  EvalReport report;
  report.frames = frames;
  double ap_sum = 0.0;
  std::size_t scored = 0;
  std::vector<double> scores(frames);
  std::vector<std::uint8_t> labels(frames);
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    bool any = false;
    for (std::size_t t = 0; t < frames; ++t) {
      scores[t] = probs(t, c);
      labels[t] = targets(t, c) > 0.0 ? 1 : 0;
      any = any || labels[t];
    }
    if (!any) {
      report.skipped.push_back(vocab.labels[c]);
      continue;
    }
    const double ap = average_precision(scores, labels);
    report.per_class.emplace_back(vocab.labels[c], ap);
    ap_sum += ap;
    ++scored;
  }
  if (scored == 0)
    throw Error("per_frame_map: no class has a positive frame");
  report.map = ap_sum / static_cast<double>(scored);
  return report;
}

void write_eval_report(const std::string& path, const EvalReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [label, ap] : report.per_class) per_class[label] = ap;
  nlohmann::json j{{"map", report.map},
                   {"per_class", per_class},
                   {"skipped", report.skipped},
                   {"frames", report.frames},
                   {"seed", report.seed},
                   {"config_digest", report.config_digest}};
  std::ofstream out(path);
  if (!out) throw Error("eval report: cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cornet
