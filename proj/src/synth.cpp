#include "cornet/synth.hpp"

#include <algorithm>

#include <json.hpp>

#include "cornet/error.hpp"
#include "cornet/io_util.hpp"
#include "cornet/rng.hpp"

namespace cornet {

using nlohmann::json;

void SynthSpec::validate() const {
  if (n_classes == 0 || d_in == 0 || frames == 0)
    throw ParseError("synth spec: classes, feature width and frames must be >= 1");
  if (train_videos + val_videos == 0)
    throw ParseError("synth spec: no videos requested");
  if (embed_dim < 2) throw ParseError("synth spec: embed_dim must be >= 2");
  if (base_rate < 0.0 || base_rate > 1.0)
    throw ParseError("synth spec: base_rate must be in [0,1]");
  if (seg_min == 0 || seg_min > seg_max || seg_max > frames)
    throw ParseError("synth spec: need 1 <= seg_min <= seg_max <= frames");
  if (noise_sigma < 0.0) throw ParseError("synth spec: negative noise_sigma");
  for (const PlantedPair& pair : pairs) {
    if (pair.a >= n_classes || pair.b >= n_classes || pair.a == pair.b)
      throw ParseError("synth spec: bad pair (" + std::to_string(pair.a) +
                       "," + std::to_string(pair.b) + ")");
    if (pair.p < 0.0 || pair.p > 1.0)
      throw ParseError("synth spec: pair probability must be in [0,1]");
  }
}

SynthSpec SynthSpec::from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError("synth spec: " + path + ": " + e.what());
  }
  SynthSpec spec;
  try {
    spec.n_classes = j.at("classes").get<std::size_t>();
    spec.d_in = j.at("feature_dim").get<std::size_t>();
    spec.train_videos = j.at("train_videos").get<std::size_t>();
    spec.val_videos = j.at("val_videos").get<std::size_t>();
    spec.frames = j.at("frames").get<std::size_t>();
    spec.embed_dim = j.value("embed_dim", spec.embed_dim);
    spec.base_rate = j.at("base_rate").get<double>();
    const auto seg = j.at("segment_frames");
    spec.seg_min = seg.at(0).get<std::size_t>();
    spec.seg_max = seg.at(1).get<std::size_t>();
    spec.noise_sigma = j.at("noise_sigma").get<double>();
    spec.proto_scale = j.value("prototype_scale", spec.proto_scale);
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.value("pairs", json::array()))
      spec.pairs.push_back({p.at(0).get<std::size_t>(),
                            p.at(1).get<std::size_t>(),
                            p.at(2).get<double>()});
  } catch (const json::exception& e) {
    throw ParseError("synth spec: " + path + ": " + e.what());
  }
  spec.validate();
  return spec;
}

std::string SynthSpec::to_json() const {
  json pairs_json = json::array();
  for (const PlantedPair& pair : pairs)
    pairs_json.push_back({pair.a, pair.b, pair.p});
  const json j{{"classes", n_classes},
               {"feature_dim", d_in},
               {"train_videos", train_videos},
               {"val_videos", val_videos},
               {"frames", frames},
               {"embed_dim", embed_dim},
               {"pairs", pairs_json},
               {"base_rate", base_rate},
               {"segment_frames", {seg_min, seg_max}},
               {"noise_sigma", noise_sigma},
               {"prototype_scale", proto_scale},
               {"seed", seed}};
  return j.dump(2);
}

namespace {

std::string padded_index(std::size_t i) {
  std::string s = std::to_string(i);
  while (s.size() < 3) s.insert(s.begin(), '0');
  return s;
}

AnnotationSequence make_sequence(const SynthSpec& spec, const std::string& id,
                                 Rng& rng) {
  AnnotationSequence seq;
  seq.id = id;
  seq.num_frames = spec.frames;

  auto place_segment = [&](std::size_t class_id) {
    const std::size_t len =
        spec.seg_min + rng.uniform_int(spec.seg_max - spec.seg_min + 1);
    const std::size_t start = rng.uniform_int(spec.frames - len + 1);
    seq.intervals.push_back({start, start + len, class_id});
    return seq.intervals.back();
  };

  std::vector<Interval> base_round;
  for (std::size_t c = 0; c < spec.n_classes; ++c)
    if (rng.uniform01() < spec.base_rate) base_round.push_back(place_segment(c));

  // Planted co-occurrence: partner segments overlap the triggering one.
  for (const Interval& iv : base_round)
    for (const PlantedPair& pair : spec.pairs) {
      if (pair.a != iv.class_id) continue;
      if (rng.uniform01() >= pair.p) continue;
      const std::size_t len =
          spec.seg_min + rng.uniform_int(spec.seg_max - spec.seg_min + 1);
      const std::size_t lo = iv.start >= len - 1 ? iv.start - (len - 1) : 0;
      const std::size_t hi = std::min(iv.end - 1, spec.frames - len);
      const std::size_t start =
          lo <= hi ? lo + rng.uniform_int(hi - lo + 1) : lo;
      seq.intervals.push_back({start, start + len, pair.b});
    }
  return seq;
}

Tensor make_features(const SynthSpec& spec, const AnnotationSequence& seq,
                     const Tensor& prototypes, Rng& rng) {
  Tensor y({seq.num_frames, spec.n_classes});
  for (const Interval& iv : seq.intervals)
    for (std::size_t t = iv.start; t < iv.end; ++t) y(t, iv.class_id) = 1.0;

  Tensor x({seq.num_frames, spec.d_in});
  for (std::size_t t = 0; t < seq.num_frames; ++t)
    for (std::size_t d = 0; d < spec.d_in; ++d) {
      double v = 0.0;
      for (std::size_t c = 0; c < spec.n_classes; ++c)
        if (y(t, c) > 0.0) v += prototypes(c, d);
      x(t, d) = v + spec.noise_sigma * rng.normal();
    }
  return x;
}

}  // namespace

SynthCorpus generate_dataset(const SynthSpec& spec) {
  spec.validate();
  SynthCorpus corpus;

  for (std::size_t c = 0; c < spec.n_classes; ++c)
    corpus.vocab.labels.push_back("action " + padded_index(c));

  Rng root(spec.seed);
  Rng proto_rng = root.fork(0x70726f74);
  Tensor prototypes({spec.n_classes, spec.d_in});
  for (std::size_t i = 0; i < prototypes.size(); ++i)
    prototypes[i] = spec.proto_scale * proto_rng.normal();
  // Trigger classes of planted pairs share most of their visual direction:
  // they are confusable on appearance alone, and only the co-occurring
  // partner disambiguates them. Partner prototypes stay fully distinct.
  if (!spec.pairs.empty()) {
    std::vector<double> common(spec.d_in);
    for (double& v : common) v = spec.proto_scale * proto_rng.normal();
    std::vector<bool> is_trigger(spec.n_classes, false);
    for (const PlantedPair& pair : spec.pairs) is_trigger[pair.a] = true;
    for (std::size_t c = 0; c < spec.n_classes; ++c)
      if (is_trigger[c])
        for (std::size_t d = 0; d < spec.d_in; ++d)
          prototypes(c, d) = 0.92 * common[d] + 0.39 * prototypes(c, d);
  }

  std::vector<std::pair<std::size_t, std::size_t>> affinity;
  for (const PlantedPair& pair : spec.pairs) affinity.emplace_back(pair.a, pair.b);
  corpus.space = synthetic_semantic_space(corpus.vocab, spec.embed_dim,
                                          root.fork(0x656d6264).next_u64(),
                                          affinity);

  const std::size_t total = spec.train_videos + spec.val_videos;
  for (std::size_t v = 0; v < total; ++v) {
    const bool train = v < spec.train_videos;
    const std::string id =
        (train ? "train_" : "val_") +
        padded_index(train ? v : v - spec.train_videos);
    Rng video_rng = root.fork(1000 + v);
    AnnotationSequence seq = make_sequence(spec, id, video_rng);
    corpus.features.push_back(make_features(spec, seq, prototypes, video_rng));
    corpus.sequences.push_back(std::move(seq));
  }
  return corpus;
}

}  // namespace cornet
