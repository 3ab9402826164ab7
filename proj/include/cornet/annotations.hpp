#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cornet/tensor.hpp"

namespace cornet {

// Ordered action-label phrases; index is the class id for the whole run.
struct ClassVocabulary {
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }
  void validate() const;  // labels unique and non-empty

  static ClassVocabulary load(const std::string& path);
  void save(const std::string& path) const;
};

// Half-open frame interval [start, end) carrying one class id.
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t class_id = 0;
};

// Dense multi-label temporal annotation of one video. Overlaps across
// classes are allowed; duplicate same-class coverage of a frame counts once.
struct AnnotationSequence {
  std::string id;
  std::size_t num_frames = 0;
  std::vector<Interval> intervals;

  void validate(std::size_t n_classes) const;
};

// N x N co-occurrence intensity. Ground-truth matrices hold integer counts
// and are symmetric; predicted ones hold arbitrary finite reals.
struct CoOccurrenceMatrix {
  Tensor values;  // [N, N]
  bool ground_truth = false;
};

// R* = sum over frames t of the indicator matrix of the per-frame class set
// C_t. Computed as Y^T Y over the dense target matrix.
CoOccurrenceMatrix build_cooccurrence(const AnnotationSequence& seq,
                                      const ClassVocabulary& vocab);

// [T, N] binary matrix; entry (t, c) = 1 iff class c covers frame t.
Tensor to_dense_targets(const AnnotationSequence& seq,
                        const ClassVocabulary& vocab);

// Restrict to the frame window [start, start+len); intervals are clipped.
AnnotationSequence crop_sequence(const AnnotationSequence& seq,
                                 std::size_t start, std::size_t len);

// JSON Lines, one record per video. Errors report the 1-based line number.
std::vector<AnnotationSequence> load_annotations(const std::string& path,
                                                 const ClassVocabulary& vocab);
void save_annotations(const std::string& path,
                      const std::vector<AnnotationSequence>& seqs);

struct DatasetStats {
  double labels_per_frame = 0.0;   // mean |C_t| over all frames
  double classes_per_video = 0.0;  // mean distinct classes per video
  std::vector<std::size_t> per_class_frames;
  std::size_t total_frames = 0;
};

DatasetStats dataset_stats(const std::vector<AnnotationSequence>& seqs,
                           const ClassVocabulary& vocab);

// CSV dump: header row of label names, then N rows of N values.
void write_cooccurrence_csv(const std::string& path, const Tensor& matrix,
                            const ClassVocabulary& vocab);

}  // namespace cornet
