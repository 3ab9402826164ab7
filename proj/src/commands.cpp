#include "cornet/commands.hpp"

#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "cornet/error.hpp"
#include "cornet/io_util.hpp"
#include "cornet/synth.hpp"

namespace cornet {

namespace fs = std::filesystem;
using nlohmann::json;

void cmd_synth(const std::string& spec_path, const std::string& out_dir,
               std::ostream& log) {
  const SynthSpec spec = SynthSpec::from_json_file(spec_path);
  const SynthCorpus corpus = generate_dataset(spec);

  std::error_code ec;
  fs::create_directories(out_dir + "/features", ec);
  if (!fs::is_directory(out_dir))
    throw Error("synth: cannot create output directory " + out_dir);

  std::vector<std::string> files;
  corpus.vocab.save(out_dir + "/vocab.json");
  files.push_back("vocab.json");
  save_annotations(out_dir + "/annotations.jsonl", corpus.sequences);
  files.push_back("annotations.jsonl");
  save_semantic_space(out_dir + "/embeddings.json", corpus.space, corpus.vocab);
  files.push_back("embeddings.json");
  for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
    const std::string rel = "features/" + corpus.sequences[i].id;
    write_features(out_dir + "/" + rel, corpus.features[i]);
    files.push_back(rel + ".f32");
    files.push_back(rel + ".json");
  }

  json manifest_files = json::array();
  for (const std::string& rel : files)
    manifest_files.push_back(
        {{"path", rel}, {"digest", digest_file(out_dir + "/" + rel)}});
  const json manifest{{"spec_digest", digest_string(spec.to_json())},
                      {"files", manifest_files}};
  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

  log << "synth: wrote " << files.size() << " files to " << out_dir << "\n";
}

TrainResult cmd_train(const std::string& config_path,
                      const std::string& out_dir, std::ostream& log) {
  RunConfig config = RunConfig::from_json_file(config_path);
  const std::string out = out_dir.empty() ? config.out_dir : out_dir;
  if (out.empty())
    throw ParseError("train: no output directory (config 'out' or --out)");
  if (config.data_dir.empty())
    throw ParseError("train: config must name a 'data' directory");
  return train_run(config, out, log);
}

EvalReport cmd_eval(const std::string& checkpoint_path,
                    const std::string& data_dir,
                    const std::string& report_path, EvalSplit split,
                    std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const LoadedData data = load_dataset(data_dir, "");

  const NetworkConfig net = network_config_from_run(
      ckpt.config, data.vocab.size(), data.space.embed_dim);

  // Rebuild parameter layout for this config, then overlay checkpoint values;
  // a shape clash names the offending tensor.
  ParamSet params;
  Rng rng(ckpt.config.seed);
  const NetworkParamIds ids = init_network_params(params, net, rng);
  for (std::size_t i = 0; i < params.count(); ++i) {
    const int idx = ckpt.params.find(params.names[i]);
    if (idx < 0)
      throw Error("eval: checkpoint is missing tensor '" + params.names[i] +
                  "'");
    const Tensor& stored = ckpt.params.values[static_cast<std::size_t>(idx)];
    if (!stored.same_shape(params.values[i]))
      throw Error("eval: tensor '" + params.names[i] + "' has shape " +
                  shape_str(stored.shape()) + " in the checkpoint but " +
                  shape_str(params.values[i].shape()) +
                  " for this data (dimension mismatch)");
    params.values[i] = stored;
  }
  for (std::size_t i = 0; i < data.features.size(); ++i)
    if (data.features[i].dim(1) != ckpt.config.encoder.d_in)
      throw Error("eval: video '" + data.sequences[i].id +
                  "' feature width " + std::to_string(data.features[i].dim(1)) +
                  " != encoder d_in " +
                  std::to_string(ckpt.config.encoder.d_in));

  EvalReport report = evaluate_model(params, ids, net, data, split);
  report.seed = ckpt.config.seed;
  report.config_digest = ckpt.config.digest();
  write_eval_report(report_path, report);
  log << "eval: map=" << report.map << " over " << report.frames
      << " frames -> " << report_path << "\n";
  return report;
}

void cmd_cooc(const std::string& annotations_path,
              const std::string& vocab_path, const std::string& out_csv,
              std::ostream& log) {
  const ClassVocabulary vocab = ClassVocabulary::load(vocab_path);
  const std::vector<AnnotationSequence> seqs =
      load_annotations(annotations_path, vocab);
  if (seqs.empty())
    throw Error("cooc: no sequences in " + annotations_path);
  Tensor sum({vocab.size(), vocab.size()});
  for (const AnnotationSequence& seq : seqs) {
    const CoOccurrenceMatrix r = build_cooccurrence(seq, vocab);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r.values[i];
  }
  write_cooccurrence_csv(out_csv, sum, vocab);
  log << "cooc: " << seqs.size() << " videos -> " << out_csv << "\n";
}

}  // namespace cornet
