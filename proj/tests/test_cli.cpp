#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cornet/commands.hpp"
#include "cornet/error.hpp"
#include "cornet/io_util.hpp"
#include "cornet/synth.hpp"
#include "test_util.hpp"

using namespace cornet;
using cornet::testing::TempDir;
using nlohmann::json;

namespace {

std::string toy_spec_json(std::uint64_t seed = 3) {
  SynthSpec spec;
  spec.n_classes = 4;
  spec.d_in = 6;
  spec.train_videos = 2;
  spec.val_videos = 1;
  spec.frames = 24;
  spec.embed_dim = 8;
  spec.pairs = {{0, 1, 0.9}};
  spec.base_rate = 0.7;
  spec.seg_min = 4;
  spec.seg_max = 10;
  spec.noise_sigma = 0.4;
  spec.seed = seed;
  return spec.to_json();
}

std::string toy_config_json(const std::string& data_dir, double balance,
                            std::uint64_t seed = 5, std::size_t epochs = 1) {
  json j{{"encoder", {{"d_in", 6}, {"d0", 8}, {"layers", 2}, {"kernel", 3}}},
         {"corm", {{"dv", 4}, {"d_k", 2}, {"vcor", "m1"}, {"scor", "m2"}}},
         {"lr", 0.002},
         {"epochs", epochs},
         {"batch_size", 2},
         {"balance", balance},
         {"crop_len", 16},
         {"seed", seed},
         {"data", data_dir}};
  return j.dump();
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("synth writes a manifest covering the whole corpus") {
  TempDir dir("synth");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);

  const json manifest =
      json::parse(read_text_file(dir.str() + "/corpus/manifest.json"));
  // videos * 2 feature files + vocab + annotations + embeddings
  CHECK(manifest.at("files").size() == 3 * 2 + 3);
  for (const auto& entry : manifest.at("files")) {
    const std::string path = entry.at("path").get<std::string>();
    CHECK(digest_file(dir.str() + "/corpus/" + path) ==
          entry.at("digest").get<std::string>());
  }
}

TEST_CASE("synth reruns produce identical digests") {
  TempDir dir("synth2");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/a", log);
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/b", log);
  const json a = json::parse(read_text_file(dir.str() + "/a/manifest.json"));
  const json b = json::parse(read_text_file(dir.str() + "/b/manifest.json"));
  CHECK(a == b);
}

TEST_CASE("corrupt synth spec raises a parse error with location") {
  TempDir dir("synth3");
  write_text_file(dir.str() + "/spec.json", "{\"classes\": 4,,}");
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_synth(dir.str() + "/spec.json", dir.str() + "/c", log),
                  ParseError);
}

TEST_CASE("train writes one finite log row per epoch") {
  TempDir dir("train1");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  write_text_file(dir.str() + "/config.json",
                  toy_config_json(dir.str() + "/corpus", 0.001));
  const TrainResult result =
      cmd_train(dir.str() + "/config.json", dir.str() + "/run", log);

  REQUIRE(result.rows.size() == 1);
  CHECK(std::isfinite(result.rows[0].bce));
  CHECK(std::isfinite(result.rows[0].mse));
  CHECK(std::isfinite(result.rows[0].total));
  CHECK(std::isfinite(result.rows[0].val_map));
  CHECK(count_lines(dir.str() + "/run/log.csv") == 2);  // header + 1 row
  const std::string head = read_text_file(dir.str() + "/run/log.csv");
  CHECK(head.rfind("epoch,bce,mse,total,val_map\n", 0) == 0);
  CHECK(log.str().find("best checkpoint:") != std::string::npos);
}

TEST_CASE("zero balance reports mse but total equals bce") {
  TempDir dir("train2");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  write_text_file(dir.str() + "/config.json",
                  toy_config_json(dir.str() + "/corpus", 0.0));
  const TrainResult result =
      cmd_train(dir.str() + "/config.json", dir.str() + "/run", log);
  REQUIRE(result.rows.size() == 1);
  CHECK(result.rows[0].mse > 0.0);
  CHECK(std::abs(result.rows[0].total - result.rows[0].bce) <= 1e-12);
}

TEST_CASE("identical config and seed give byte-identical logs") {
  TempDir dir("train3");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  write_text_file(dir.str() + "/config.json",
                  toy_config_json(dir.str() + "/corpus", 0.001, 11, 2));
  cmd_train(dir.str() + "/config.json", dir.str() + "/run_a", log);
  cmd_train(dir.str() + "/config.json", dir.str() + "/run_b", log);
  CHECK(read_text_file(dir.str() + "/run_a/log.csv") ==
        read_text_file(dir.str() + "/run_b/log.csv"));
  CHECK(read_text_file(dir.str() + "/run_a/checkpoint_ep002.json") ==
        read_text_file(dir.str() + "/run_b/checkpoint_ep002.json"));
}

TEST_CASE("checkpoints round-trip bit-exactly through eval") {
  TempDir dir("eval1");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  write_text_file(dir.str() + "/config.json",
                  toy_config_json(dir.str() + "/corpus", 0.001, 7, 2));
  const TrainResult result =
      cmd_train(dir.str() + "/config.json", dir.str() + "/run", log);

  const EvalReport a = cmd_eval(result.best_checkpoint, dir.str() + "/corpus",
                                dir.str() + "/report_a.json", EvalSplit::Val,
                                log);
  const EvalReport b = cmd_eval(result.best_checkpoint, dir.str() + "/corpus",
                                dir.str() + "/report_b.json", EvalSplit::Val,
                                log);
  CHECK(a.map == b.map);
  CHECK(read_text_file(dir.str() + "/report_a.json") ==
        read_text_file(dir.str() + "/report_b.json"));

  // Saved checkpoint reproduces the in-memory validation score bit-exactly.
  CHECK(a.map == result.best_val_map);

  const json report = json::parse(read_text_file(dir.str() + "/report_a.json"));
  CHECK(report.contains("map"));
  CHECK(report.contains("per_class"));
  CHECK(report.contains("skipped"));
  CHECK(report.contains("frames"));
  CHECK(report.contains("seed"));
  CHECK(report.contains("config_digest"));
}

TEST_CASE("zeroing relation parameters does not change evaluation") {
  TempDir dir("eval2");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  write_text_file(dir.str() + "/config.json",
                  toy_config_json(dir.str() + "/corpus", 0.001, 13));
  const TrainResult result =
      cmd_train(dir.str() + "/config.json", dir.str() + "/run", log);

  // Rewrite the checkpoint with zeroed relation-module tensors.
  Checkpoint ckpt = load_checkpoint(result.best_checkpoint);
  for (std::size_t i = 0; i < ckpt.params.count(); ++i)
    if (ckpt.params.names[i].rfind("corm.", 0) == 0)
      for (std::size_t k = 0; k < ckpt.params.values[i].size(); ++k)
        ckpt.params.values[i][k] = 0.0;
  save_checkpoint(dir.str() + "/zeroed.json", ckpt);

  const EvalReport original =
      cmd_eval(result.best_checkpoint, dir.str() + "/corpus",
               dir.str() + "/ra.json", EvalSplit::All, log);
  const EvalReport zeroed =
      cmd_eval(dir.str() + "/zeroed.json", dir.str() + "/corpus",
               dir.str() + "/rb.json", EvalSplit::All, log);
  CHECK(original.map == zeroed.map);
}

TEST_CASE("eval rejects dimension mismatches by tensor name") {
  TempDir dir("eval3");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  write_text_file(dir.str() + "/config.json",
                  toy_config_json(dir.str() + "/corpus", 0.001, 17));
  const TrainResult result =
      cmd_train(dir.str() + "/config.json", dir.str() + "/run", log);

  // A corpus with a different class count.
  SynthSpec other;
  other.n_classes = 6;
  other.d_in = 6;
  other.train_videos = 1;
  other.val_videos = 1;
  other.frames = 24;
  other.embed_dim = 8;
  other.base_rate = 0.7;
  other.seg_min = 4;
  other.seg_max = 10;
  other.seed = 23;
  write_text_file(dir.str() + "/other_spec.json", other.to_json());
  cmd_synth(dir.str() + "/other_spec.json", dir.str() + "/other", log);

  try {
    cmd_eval(result.best_checkpoint, dir.str() + "/other",
             dir.str() + "/r.json", EvalSplit::All, log);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("head.w") != std::string::npos);
  }
}

TEST_CASE("cooc dumps the worked example and is additive") {
  TempDir dir("cooc1");
  write_text_file(dir.str() + "/vocab.json", "[\"a\",\"b\",\"c\"]");
  const std::string one =
      "{\"id\":\"v\",\"num_frames\":2,\"intervals\":[[0,1,0],[0,2,1]]}\n";
  write_text_file(dir.str() + "/one.jsonl", one);
  write_text_file(dir.str() + "/two.jsonl", one + one);
  std::ostringstream log;

  cmd_cooc(dir.str() + "/one.jsonl", dir.str() + "/vocab.json",
           dir.str() + "/one.csv", log);
  CHECK(read_text_file(dir.str() + "/one.csv") ==
        "a,b,c\n1,1,0\n1,2,0\n0,0,0\n");

  cmd_cooc(dir.str() + "/two.jsonl", dir.str() + "/vocab.json",
           dir.str() + "/two.csv", log);
  CHECK(read_text_file(dir.str() + "/two.csv") ==
        "a,b,c\n2,2,0\n2,4,0\n0,0,0\n");
}

TEST_CASE("cooc rejects an empty annotation file") {
  TempDir dir("cooc2");
  write_text_file(dir.str() + "/vocab.json", "[\"a\"]");
  write_text_file(dir.str() + "/empty.jsonl", "");
  std::ostringstream log;
  try {
    cmd_cooc(dir.str() + "/empty.jsonl", dir.str() + "/vocab.json",
             dir.str() + "/out.csv", log);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no sequences") != std::string::npos);
  }
}

TEST_CASE("train rejects mismatched feature widths before epoch one") {
  TempDir dir("train4");
  write_text_file(dir.str() + "/spec.json", toy_spec_json());
  std::ostringstream log;
  cmd_synth(dir.str() + "/spec.json", dir.str() + "/corpus", log);
  json cfg = json::parse(toy_config_json(dir.str() + "/corpus", 0.001));
  cfg["encoder"]["d_in"] = 11;
  write_text_file(dir.str() + "/config.json", cfg.dump());
  CHECK_THROWS_AS(
      cmd_train(dir.str() + "/config.json", dir.str() + "/run", log), Error);
  CHECK_FALSE(std::filesystem::exists(dir.str() + "/run/checkpoint_ep001.json"));
}
