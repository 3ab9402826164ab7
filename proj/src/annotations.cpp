#include "cornet/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cornet/error.hpp"

namespace cornet {

using nlohmann::json;

void ClassVocabulary::validate() const {
  std::set<std::string> seen;
  for (const std::string& label : labels) {
    if (label.empty()) throw ParseError("vocabulary: empty label");
    if (!seen.insert(label).second)
      throw ParseError("vocabulary: duplicate label '" + label + "'");
  }
}

ClassVocabulary ClassVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("vocabulary: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("vocabulary: " + path + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError("vocabulary: " + path + ": not an array");
  ClassVocabulary vocab;
  for (const auto& item : j) {
    if (!item.is_string())
      throw ParseError("vocabulary: " + path + ": non-string entry");
    vocab.labels.push_back(item.get<std::string>());
  }
  vocab.validate();
  return vocab;
}

void ClassVocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("vocabulary: cannot write " + path);
  out << json(labels).dump() << "\n";
}

void AnnotationSequence::validate(std::size_t n_classes) const {
  for (const Interval& iv : intervals) {
    if (iv.start >= iv.end || iv.end > num_frames)
      throw ParseError("annotation '" + id + "': bad interval [" +
                       std::to_string(iv.start) + "," +
                       std::to_string(iv.end) + ") with num_frames " +
                       std::to_string(num_frames));
    if (iv.class_id >= n_classes)
      throw ParseError("annotation '" + id + "': interval [" +
                       std::to_string(iv.start) + "," +
                       std::to_string(iv.end) + ") class id " +
                       std::to_string(iv.class_id) + " out of range (N=" +
                       std::to_string(n_classes) + ")");
  }
}

Tensor to_dense_targets(const AnnotationSequence& seq,
                        const ClassVocabulary& vocab) {
  seq.validate(vocab.size());
  Tensor y({seq.num_frames, vocab.size()});
  for (const Interval& iv : seq.intervals)
    for (std::size_t t = iv.start; t < iv.end; ++t) y(t, iv.class_id) = 1.0;
  return y;
}

CoOccurrenceMatrix build_cooccurrence(const AnnotationSequence& seq,
                                      const ClassVocabulary& vocab) {
  const Tensor y = to_dense_targets(seq, vocab);
  const std::size_t n = vocab.size();
  CoOccurrenceMatrix r;
  r.ground_truth = true;
  r.values = Tensor({n, n});
  // R*(i,j) = sum_t y(t,i) y(t,j); 0/1 doubles keep the counts exact.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < seq.num_frames; ++t)
        acc += y(t, i) * y(t, j);
      r.values(i, j) = acc;
    }
  return r;
}

AnnotationSequence crop_sequence(const AnnotationSequence& seq,
                                 std::size_t start, std::size_t len) {
  AnnotationSequence out;
  out.id = seq.id;
  out.num_frames = len;
  const std::size_t stop = start + len;
  for (const Interval& iv : seq.intervals) {
    const std::size_t s = std::max(iv.start, start);
    const std::size_t e = std::min(iv.end, stop);
    if (s < e) out.intervals.push_back({s - start, e - start, iv.class_id});
  }
  return out;
}

std::vector<AnnotationSequence> load_annotations(const std::string& path,
                                                 const ClassVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("annotations: cannot open " + path);
  std::vector<AnnotationSequence> seqs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("annotations: " + path + " line " +
                       std::to_string(lineno) + ": " + e.what());
    }
    AnnotationSequence seq;
    try {
      seq.id = j.at("id").get<std::string>();
      seq.num_frames = j.at("num_frames").get<std::size_t>();
      for (const auto& item : j.at("intervals")) {
        if (!item.is_array() || item.size() != 3)
          throw ParseError("interval must be [start,end,class_id]");
        seq.intervals.push_back({item[0].get<std::size_t>(),
                                 item[1].get<std::size_t>(),
                                 item[2].get<std::size_t>()});
      }
    } catch (const json::exception& e) {
      throw ParseError("annotations: " + path + " line " +
                       std::to_string(lineno) + ": " + e.what());
    }
    seq.validate(vocab.size());
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

void save_annotations(const std::string& path,
                      const std::vector<AnnotationSequence>& seqs) {
  std::ofstream out(path);
  if (!out) throw Error("annotations: cannot write " + path);
  for (const AnnotationSequence& seq : seqs) {
    json intervals = json::array();
    for (const Interval& iv : seq.intervals)
      intervals.push_back({iv.start, iv.end, iv.class_id});
    json j{{"id", seq.id},
           {"num_frames", seq.num_frames},
           {"intervals", intervals}};
    out << j.dump() << "\n";
  }
}

DatasetStats dataset_stats(const std::vector<AnnotationSequence>& seqs,
                           const ClassVocabulary& vocab) {
  if (seqs.empty()) throw Error("dataset_stats: empty sequence collection");
  DatasetStats stats;
  stats.per_class_frames.assign(vocab.size(), 0);
  std::size_t label_frames = 0;
  std::size_t distinct_sum = 0;
  for (const AnnotationSequence& seq : seqs) {
    const Tensor y = to_dense_targets(seq, vocab);
    std::size_t distinct = 0;
    for (std::size_t c = 0; c < vocab.size(); ++c) {
      std::size_t frames = 0;
      for (std::size_t t = 0; t < seq.num_frames; ++t)
        frames += y(t, c) > 0.0 ? 1 : 0;
      stats.per_class_frames[c] += frames;
      label_frames += frames;
      if (frames > 0) ++distinct;
    }
    distinct_sum += distinct;
    stats.total_frames += seq.num_frames;
  }
  stats.labels_per_frame =
      static_cast<double>(label_frames) / static_cast<double>(stats.total_frames);
  stats.classes_per_video =
      static_cast<double>(distinct_sum) / static_cast<double>(seqs.size());
  return stats;
}

void write_cooccurrence_csv(const std::string& path, const Tensor& matrix,
                            const ClassVocabulary& vocab) {
  if (matrix.rank() != 2 || matrix.dim(0) != vocab.size() ||
      matrix.dim(1) != vocab.size())
    throw ShapeError("cooccurrence csv: matrix " + shape_str(matrix.shape()) +
                     " does not match vocabulary size " +
                     std::to_string(vocab.size()));
  std::ofstream out(path);
  if (!out) throw Error("cooccurrence csv: cannot write " + path);
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    if (c) out << ",";
    out << vocab.labels[c];
  }
  out << "\n";
  std::ostringstream row;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    row.str("");
    for (std::size_t j = 0; j < vocab.size(); ++j) {
      if (j) row << ",";
      const double v = matrix(i, j);
      if (v == std::floor(v) && std::abs(v) < 1e15)
        row << static_cast<long long>(v);
      else
        row << v;
    }
    out << row.str() << "\n";
  }
}

}  // namespace cornet
