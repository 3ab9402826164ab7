#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "cornet/annotations.hpp"
#include "cornet/error.hpp"
#include "cornet/io_util.hpp"
#include "cornet/rng.hpp"
#include "test_util.hpp"

using namespace cornet;
using cornet::testing::TempDir;

namespace {

ClassVocabulary make_vocab(std::size_t n) {
  ClassVocabulary v;
  for (std::size_t i = 0; i < n; ++i)
    v.labels.push_back("action " + std::to_string(i));
  return v;
}

// Independent oracle: nested loops over frames and label pairs.
Tensor brute_force_cooccurrence(const AnnotationSequence& seq, std::size_t n) {
  Tensor r({n, n});
  for (std::size_t t = 0; t < seq.num_frames; ++t) {
    std::set<std::size_t> active;
    for (const Interval& iv : seq.intervals)
      if (iv.start <= t && t < iv.end) active.insert(iv.class_id);
    for (std::size_t i : active)
      for (std::size_t j : active) r(i, j) += 1.0;
  }
  return r;
}

AnnotationSequence random_sequence(Rng& rng, std::size_t max_frames,
                                   std::size_t n_classes,
                                   const std::string& id) {
  AnnotationSequence seq;
  seq.id = id;
  seq.num_frames = 1 + rng.uniform_int(max_frames);
  const std::size_t count = rng.uniform_int(2 * n_classes + 1);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = rng.uniform_int(seq.num_frames);
    const std::size_t end = start + 1 + rng.uniform_int(seq.num_frames - start);
    seq.intervals.push_back({start, end, rng.uniform_int(n_classes)});
  }
  return seq;
}

}  // namespace

TEST_CASE("empty sequence gives the zero matrix") {
  const ClassVocabulary vocab = make_vocab(3);
  AnnotationSequence seq{"v", 5, {}};
  const CoOccurrenceMatrix r = build_cooccurrence(seq, vocab);
  CHECK(r.ground_truth);
  for (std::size_t i = 0; i < 9; ++i) CHECK(r.values[i] == 0.0);
}

TEST_CASE("two-frame example matches the worked matrix") {
  // C_0 = {0,1}, C_1 = {1}
  const ClassVocabulary vocab = make_vocab(3);
  AnnotationSequence seq{"v", 2, {{0, 1, 0}, {0, 2, 1}}};
  const Tensor r = build_cooccurrence(seq, vocab).values;
  const Tensor want({3, 3}, {1, 1, 0, 1, 2, 0, 0, 0, 0});
  CHECK(r.bit_equal(want));
}

TEST_CASE("single constant class fills exactly one diagonal entry") {
  const ClassVocabulary vocab = make_vocab(4);
  AnnotationSequence seq{"v", 7, {{0, 7, 2}}};
  const Tensor r = build_cooccurrence(seq, vocab).values;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(r(i, j) == (i == 2 && j == 2 ? 7.0 : 0.0));
}

TEST_CASE("matches the brute-force oracle on randomized sequences") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(10);
    const ClassVocabulary vocab = make_vocab(n);
    const AnnotationSequence seq = random_sequence(rng, 64, n, "r");
    const Tensor got = build_cooccurrence(seq, vocab).values;
    const Tensor want = brute_force_cooccurrence(seq, n);
    CHECK(got.bit_equal(want));
  }
}

TEST_CASE("ground-truth matrix is symmetric with dominated off-diagonals") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(8);
    const ClassVocabulary vocab = make_vocab(n);
    const AnnotationSequence seq = random_sequence(rng, 32, n, "r");
    const Tensor r = build_cooccurrence(seq, vocab).values;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(r(i, j) == r(j, i));
        CHECK(r(i, j) <= std::min(r(i, i), r(j, j)));
        CHECK(r(i, j) == static_cast<double>(static_cast<long long>(r(i, j))));
      }
  }
}

TEST_CASE("diagonal equals the column sums of the dense targets") {
  Rng rng(78);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(6);
    const ClassVocabulary vocab = make_vocab(n);
    const AnnotationSequence seq = random_sequence(rng, 40, n, "r");
    const Tensor r = build_cooccurrence(seq, vocab).values;
    const Tensor y = to_dense_targets(seq, vocab);
    for (std::size_t c = 0; c < n; ++c) {
      double col = 0.0;
      for (std::size_t t = 0; t < seq.num_frames; ++t) col += y(t, c);
      CHECK(r(c, c) == col);
    }
  }
}

TEST_CASE("concatenating disjoint frame ranges adds the matrices") {
  Rng rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(5);
    const ClassVocabulary vocab = make_vocab(n);
    const AnnotationSequence a = random_sequence(rng, 20, n, "a");
    const AnnotationSequence b = random_sequence(rng, 20, n, "b");
    AnnotationSequence joined;
    joined.id = "ab";
    joined.num_frames = a.num_frames + b.num_frames;
    joined.intervals = a.intervals;
    for (const Interval& iv : b.intervals)
      joined.intervals.push_back(
          {iv.start + a.num_frames, iv.end + a.num_frames, iv.class_id});
    const Tensor ra = build_cooccurrence(a, vocab).values;
    const Tensor rb = build_cooccurrence(b, vocab).values;
    const Tensor rj = build_cooccurrence(joined, vocab).values;
    for (std::size_t i = 0; i < rj.size(); ++i)
      CHECK(rj[i] == ra[i] + rb[i]);
  }
}

TEST_CASE("dense targets for simple cases") {
  const ClassVocabulary vocab = make_vocab(2);
  SUBCASE("no intervals is all zero") {
    const Tensor y = to_dense_targets({"v", 3, {}}, vocab);
    for (std::size_t i = 0; i < 6; ++i) CHECK(y[i] == 0.0);
  }
  SUBCASE("direct indicator") {
    const Tensor y = to_dense_targets({"v", 3, {{0, 2, 1}}}, vocab);
    CHECK(y.bit_equal(Tensor({3, 2}, {0, 1, 0, 1, 0, 0})));
  }
  SUBCASE("duplicate coverage counts once") {
    const Tensor y =
        to_dense_targets({"v", 2, {{0, 2, 0}, {0, 1, 0}, {1, 2, 0}}}, vocab);
    CHECK(y.bit_equal(Tensor({2, 2}, {1, 0, 1, 0})));
  }
}

TEST_CASE("dense targets agree with the co-occurrence class sets") {
  const ClassVocabulary vocab = make_vocab(3);
  AnnotationSequence seq{"v", 2, {{0, 1, 0}, {0, 2, 1}}};
  const Tensor y = to_dense_targets(seq, vocab);
  CHECK(y(0, 0) == 1.0);
  CHECK(y(0, 1) == 1.0);
  CHECK(y(0, 2) == 0.0);
  CHECK(y(1, 0) == 0.0);
  CHECK(y(1, 1) == 1.0);
  CHECK(y(1, 2) == 0.0);
}

TEST_CASE("validation rejects bad intervals and class ids") {
  const ClassVocabulary vocab = make_vocab(2);
  CHECK_THROWS_AS(to_dense_targets({"v", 3, {{0, 4, 0}}}, vocab), ParseError);
  CHECK_THROWS_AS(to_dense_targets({"v", 3, {{2, 2, 0}}}, vocab), ParseError);
  try {
    to_dense_targets({"clipX", 3, {{0, 2, 7}}}, vocab);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("clipX") != std::string::npos);
    CHECK(msg.find("7") != std::string::npos);
  }
}

TEST_CASE("annotation files round-trip and report parse errors by line") {
  TempDir dir("ann");
  const ClassVocabulary vocab = make_vocab(3);

  SUBCASE("well-formed two-video file") {
    write_text_file(dir.str() + "/a.jsonl",
                    "{\"id\":\"v0\",\"num_frames\":4,\"intervals\":[[0,2,1]]}\n"
                    "{\"id\":\"v1\",\"num_frames\":6,\"intervals\":[]}\n");
    const auto seqs = load_annotations(dir.str() + "/a.jsonl", vocab);
    REQUIRE(seqs.size() == 2);
    CHECK(seqs[0].num_frames == 4);
    CHECK(seqs[1].num_frames == 6);
  }
  SUBCASE("interval past the end names the video") {
    write_text_file(dir.str() + "/b.jsonl",
                    "{\"id\":\"bad\",\"num_frames\":3,\"intervals\":[[0,9,1]]}\n");
    try {
      load_annotations(dir.str() + "/b.jsonl", vocab);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("bad") != std::string::npos);
    }
  }
  SUBCASE("malformed line reports its number") {
    write_text_file(dir.str() + "/c.jsonl",
                    "{\"id\":\"v0\",\"num_frames\":4,\"intervals\":[]}\n"
                    "{oops\n");
    try {
      load_annotations(dir.str() + "/c.jsonl", vocab);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("save then load reproduces identical structures") {
    Rng rng(5);
    std::vector<AnnotationSequence> seqs;
    for (int i = 0; i < 5; ++i)
      seqs.push_back(random_sequence(rng, 30, 3, "v" + std::to_string(i)));
    save_annotations(dir.str() + "/d.jsonl", seqs);
    const auto loaded = load_annotations(dir.str() + "/d.jsonl", vocab);
    REQUIRE(loaded.size() == seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      CHECK(loaded[i].id == seqs[i].id);
      CHECK(loaded[i].num_frames == seqs[i].num_frames);
      REQUIRE(loaded[i].intervals.size() == seqs[i].intervals.size());
      for (std::size_t k = 0; k < seqs[i].intervals.size(); ++k) {
        CHECK(loaded[i].intervals[k].start == seqs[i].intervals[k].start);
        CHECK(loaded[i].intervals[k].end == seqs[i].intervals[k].end);
        CHECK(loaded[i].intervals[k].class_id == seqs[i].intervals[k].class_id);
      }
    }
  }
}

TEST_CASE("vocabulary validation") {
  TempDir dir("vocab");
  write_text_file(dir.str() + "/v.json", "[\"a\", \"b\", \"a\"]");
  CHECK_THROWS_AS(ClassVocabulary::load(dir.str() + "/v.json"), ParseError);
  write_text_file(dir.str() + "/w.json", "[\"a\", \"\"]");
  CHECK_THROWS_AS(ClassVocabulary::load(dir.str() + "/w.json"), ParseError);
  write_text_file(dir.str() + "/x.json", "[\"a\", \"b\"]");
  CHECK(ClassVocabulary::load(dir.str() + "/x.json").size() == 2);
}

TEST_CASE("dataset statistics") {
  const ClassVocabulary vocab = make_vocab(3);

  SUBCASE("every frame one label gives 1.0") {
    AnnotationSequence seq{"v", 4, {{0, 4, 1}}};
    const DatasetStats s = dataset_stats({seq}, vocab);
    CHECK(s.labels_per_frame == doctest::Approx(1.0));
    CHECK(s.classes_per_video == doctest::Approx(1.0));
  }
  SUBCASE("worked example gives 1.5") {
    AnnotationSequence seq{"v", 2, {{0, 1, 0}, {0, 2, 1}}};
    const DatasetStats s = dataset_stats({seq}, vocab);
    CHECK(s.labels_per_frame == doctest::Approx(1.5));
  }
  SUBCASE("per-class frame counts equal summed co-occurrence diagonals") {
    Rng rng(6);
    std::vector<AnnotationSequence> seqs;
    Tensor diag({3});
    for (int i = 0; i < 4; ++i) {
      seqs.push_back(random_sequence(rng, 25, 3, "v" + std::to_string(i)));
      const Tensor r = build_cooccurrence(seqs.back(), vocab).values;
      for (std::size_t c = 0; c < 3; ++c) diag[c] += r(c, c);
    }
    const DatasetStats s = dataset_stats(seqs, vocab);
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(static_cast<double>(s.per_class_frames[c]) == diag[c]);
  }
  SUBCASE("empty collection is rejected") {
    CHECK_THROWS_AS(dataset_stats({}, vocab), Error);
  }
}

TEST_CASE("crop_sequence clips intervals to the window") {
  AnnotationSequence seq{"v", 10, {{0, 4, 0}, {3, 9, 1}, {8, 10, 0}}};
  const AnnotationSequence c = crop_sequence(seq, 2, 5);  // frames [2,7)
  CHECK(c.num_frames == 5);
  REQUIRE(c.intervals.size() == 2);
  CHECK(c.intervals[0].start == 0);
  CHECK(c.intervals[0].end == 2);  // [2,4) -> [0,2)
  CHECK(c.intervals[1].start == 1);
  CHECK(c.intervals[1].end == 5);  // [3,7) -> [1,5)
}
