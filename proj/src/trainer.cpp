#include "cornet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "cornet/error.hpp"
#include "cornet/io_util.hpp"
#include "cornet/rng.hpp"

namespace cornet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    const json& e = j.at("encoder");
    c.encoder.d_in = e.at("d_in").get<std::size_t>();
    c.encoder.d0 = e.value("d0", c.encoder.d0);
    c.encoder.layers = e.value("layers", c.encoder.layers);
    c.encoder.kernel = e.value("kernel", c.encoder.kernel);
    if (j.contains("corm")) {
      const json& m = j.at("corm");
      c.dv = m.value("dv", c.dv);
      c.d_k = m.value("d_k", c.d_k);
      if (m.contains("vcor")) c.vcor = corr_fn_from_name(m.at("vcor"));
      if (m.contains("scor")) c.scor = corr_fn_from_name(m.at("scor"));
      c.alpha_init = m.value("alpha_init", c.alpha_init);
      c.beta_init = m.value("beta_init", c.beta_init);
    }
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.balance = j.value("balance", c.balance);
    c.crop_len = j.value("crop_len", c.crop_len);
    c.seed = j.value("seed", c.seed);
    c.scor_once = j.value("scor_once", c.scor_once);
    c.normalize_cooc = j.value("normalize_cooc", c.normalize_cooc);
    c.data_dir = j.value("data", c.data_dir);
    c.embeddings_path = j.value("embeddings", c.embeddings_path);
    c.out_dir = j.value("out", c.out_dir);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  c.encoder.validate();
  if (c.lr <= 0.0 || c.epochs == 0 || c.batch_size == 0 || c.crop_len == 0)
    throw ParseError("run config: lr, epochs, batch_size and crop_len must be positive");
  if (c.balance < 0.0) throw ParseError("run config: balance must be >= 0");
  if (c.dv == 0 || c.d_k == 0)
    throw ParseError("run config: dv and d_k must be >= 1");
  return c;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string epoch_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "checkpoint_ep%03zu.json", epoch);
  return buf;
}

Tensor crop_rows(const Tensor& t, std::size_t start, std::size_t len) {
  Tensor out({len, t.dim(1)});
  const std::size_t width = t.dim(1);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < width; ++j) out(i, j) = t(start + i, j);
  return out;
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError("run config: " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string RunConfig::to_json() const {
  const json j{
      {"encoder",
       {{"d_in", encoder.d_in},
        {"d0", encoder.d0},
        {"layers", encoder.layers},
        {"kernel", encoder.kernel}}},
      {"corm",
       {{"dv", dv},
        {"d_k", d_k},
        {"vcor", corr_fn_name(vcor)},
        {"scor", corr_fn_name(scor)},
        {"alpha_init", alpha_init},
        {"beta_init", beta_init}}},
      {"lr", lr},
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"balance", balance},
      {"crop_len", crop_len},
      {"seed", seed},
      {"scor_once", scor_once},
      {"normalize_cooc", normalize_cooc},
      {"data", data_dir},
      {"embeddings", embeddings_path},
      {"out", out_dir}};
  return j.dump();
}

std::string RunConfig::digest() const { return digest_string(to_json()); }

NetworkConfig network_config_from_run(const RunConfig& config,
                                      std::size_t n_classes,
                                      std::size_t embed_dim) {
  NetworkConfig net;
  net.encoder = config.encoder;
  net.corm.d0 = config.encoder.d0;
  net.corm.dv = config.dv;
  net.corm.n_classes = n_classes;
  net.corm.d_e = embed_dim;
  net.corm.d_k = config.d_k;
  net.corm.vcor = config.vcor;
  net.corm.scor = config.scor;
  net.corm.alpha_init = config.alpha_init;
  net.corm.beta_init = config.beta_init;
  net.corm.scor_once = config.scor_once;
  return net;
}

LoadedData load_dataset(const std::string& data_dir,
                        const std::string& embeddings_path) {
  LoadedData data;
  data.vocab = ClassVocabulary::load(data_dir + "/vocab.json");
  data.sequences = load_annotations(data_dir + "/annotations.jsonl", data.vocab);
  const std::string emb =
      embeddings_path.empty() ? data_dir + "/embeddings.json" : embeddings_path;
  data.space = load_semantic_space(emb, data.vocab);
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    const AnnotationSequence& seq = data.sequences[i];
    Tensor f = read_features(data_dir + "/features/" + seq.id);
    if (f.dim(0) != seq.num_frames)
      throw ParseError("dataset: video '" + seq.id + "' has " +
                       std::to_string(f.dim(0)) + " feature rows but " +
                       std::to_string(seq.num_frames) + " annotated frames");
    data.features.push_back(std::move(f));
    if (seq.id.rfind("val_", 0) == 0)
      data.val_idx.push_back(i);
    else
      data.train_idx.push_back(i);
  }
  return data;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json params = json::object();
  for (std::size_t i = 0; i < ckpt.params.count(); ++i) {
    const Tensor& t = ckpt.params.values[i];
    params[ckpt.params.names[i]] = {{"shape", t.shape()},
                                    {"data", encode_tensor_data(t)}};
  }
  json m = json::object(), v = json::object();
  for (std::size_t i = 0; i < ckpt.params.count(); ++i) {
    m[ckpt.params.names[i]] = encode_tensor_data(ckpt.opt.m[i]);
    v[ckpt.params.names[i]] = encode_tensor_data(ckpt.opt.v[i]);
  }
  const json j{{"version", ckpt.version},
               {"config", json::parse(ckpt.config.to_json())},
               {"config_digest", ckpt.config.digest()},
               {"epoch", ckpt.epoch},
               {"params", params},
               {"opt",
                {{"step", ckpt.opt.step},
                 {"lr", ckpt.opt.config.lr},
                 {"beta1", ckpt.opt.config.beta1},
                 {"beta2", ckpt.opt.config.beta2},
                 {"eps", ckpt.opt.config.eps},
                 {"m", m},
                 {"v", v}}}};
  write_text_file(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError("checkpoint: " + path + ": " + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.version = j.at("version").get<int>();
    if (ckpt.version != 1)
      throw ParseError("checkpoint: unsupported version " +
                       std::to_string(ckpt.version));
    ckpt.config = run_config_from_json(j.at("config"));
    ckpt.epoch = j.at("epoch").get<std::size_t>();
    for (const auto& [name, entry] : j.at("params").items()) {
      const std::vector<std::size_t> shape =
          entry.at("shape").get<std::vector<std::size_t>>();
      ckpt.params.add(name, Tensor(shape, decode_tensor_data(
                                              entry.at("data").get<std::string>())));
    }
    const json& opt = j.at("opt");
    ckpt.opt.step = opt.at("step").get<std::int64_t>();
    ckpt.opt.config.lr = opt.at("lr").get<double>();
    ckpt.opt.config.beta1 = opt.at("beta1").get<double>();
    ckpt.opt.config.beta2 = opt.at("beta2").get<double>();
    ckpt.opt.config.eps = opt.at("eps").get<double>();
    for (std::size_t i = 0; i < ckpt.params.count(); ++i) {
      const std::string& name = ckpt.params.names[i];
      ckpt.opt.m.push_back(Tensor(ckpt.params.values[i].shape(),
                                  decode_tensor_data(opt.at("m").at(name))));
      ckpt.opt.v.push_back(Tensor(ckpt.params.values[i].shape(),
                                  decode_tensor_data(opt.at("v").at(name))));
    }
  } catch (const json::exception& e) {
    throw ParseError("checkpoint: " + path + ": " + e.what());
  }
  return ckpt;
}

TrainingGraph build_training_graph(Tape& tape, const std::vector<int>& leaves,
                                   const NetworkParamIds& ids,
                                   const NetworkConfig& net,
                                   const Tensor& features, const Tensor& we,
                                   const Tensor& targets, const Tensor& r_star,
                                   double balance, bool normalize_cooc) {
  const int f = tape.leaf(features);
  const int w = tape.leaf(we);
  TrainingGraph g;
  g.forward =
      cor_network_forward(tape, f, w, leaves, ids, net, RunMode::Train);
  const int y = tape.leaf(targets);
  g.bce = bce_loss(tape, g.forward.probs, y);
  int r = g.forward.r;
  int rs = tape.leaf(r_star);
  if (normalize_cooc) {
    const double inv_len = 1.0 / static_cast<double>(features.dim(0));
    r = scale(tape, r, inv_len);
    rs = scale(tape, rs, inv_len);
  }
  g.mse = cooc_mse_loss(tape, r, rs);
  g.total = total_loss(tape, g.bce, g.mse, balance);
  return g;
}

EvalReport evaluate_model(const ParamSet& params, const NetworkParamIds& ids,
                          const NetworkConfig& net, const LoadedData& data,
                          EvalSplit split) {
  std::vector<std::size_t> selected;
  switch (split) {
    case EvalSplit::All:
      for (std::size_t i = 0; i < data.sequences.size(); ++i)
        selected.push_back(i);
      break;
    case EvalSplit::Train:
      selected = data.train_idx;
      break;
    case EvalSplit::Val:
      selected = data.val_idx;
      break;
  }
  std::size_t total_frames = 0;
  for (std::size_t i : selected) total_frames += data.sequences[i].num_frames;

  const std::size_t n = data.vocab.size();
  Tensor probs({total_frames, n});
  Tensor targets({total_frames, n});
  std::size_t row = 0;
  for (std::size_t i : selected) {
    Tape tape;
    const std::vector<int> leaves = add_param_leaves(tape, params);
    const int f = tape.leaf(data.features[i]);
    const NetworkForward fwd =
        cor_network_forward(tape, f, -1, leaves, ids, net, RunMode::Infer);
    const Tensor& p = tape.value(fwd.probs);
    const Tensor y = to_dense_targets(data.sequences[i], data.vocab);
    for (std::size_t t = 0; t < p.dim(0); ++t, ++row)
      for (std::size_t c = 0; c < n; ++c) {
        probs(row, c) = p(t, c);
        targets(row, c) = y(t, c);
      }
  }
  return per_frame_map(probs, targets, data.vocab);
}

TrainResult train_run(const RunConfig& config, const std::string& out_dir,
                      std::ostream& log) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  const LoadedData data = load_dataset(config.data_dir, config.embeddings_path);
  const std::size_t n = data.vocab.size();
  const NetworkConfig net =
      network_config_from_run(config, n, data.space.embed_dim);

  // Everything that can mismatch is diagnosed before epoch 1.
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    if (data.features[i].dim(1) != config.encoder.d_in)
      throw Error("train: video '" + data.sequences[i].id +
                  "' feature width " +
                  std::to_string(data.features[i].dim(1)) +
                  " != encoder d_in " + std::to_string(config.encoder.d_in));
  }
  if (data.train_idx.empty()) throw Error("train: no training videos");

  ParamSet params;
  Rng init_rng(config.seed);
  const NetworkParamIds ids = init_network_params(params, net, init_rng);
  OptimizerState opt = OptimizerState::init(params, AdamConfig{.lr = config.lr});

  std::vector<Tensor> dense_targets;
  dense_targets.reserve(data.sequences.size());
  for (const AnnotationSequence& seq : data.sequences)
    dense_targets.push_back(to_dense_targets(seq, data.vocab));

  std::ofstream csv(out_dir + "/log.csv", std::ios::binary);
  if (!csv) throw Error("train: cannot write " + out_dir + "/log.csv");
  csv << "epoch,bce,mse,total,val_map\n";

  TrainResult result;
  result.best_val_map = -1.0;
  const Rng shuffle_root(config.seed);

  std::vector<Tensor> grad_acc;
  for (const Tensor& p : params.values) grad_acc.push_back(Tensor::zeros_like(p));
  std::vector<int> leaf_ids;  // filled per tape; params order is stable

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng erng = shuffle_root.fork(epoch);
    std::vector<std::size_t> order = data.train_idx;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[erng.uniform_int(i)]);

    double bce_sum = 0.0, mse_sum = 0.0, total_sum = 0.0;
    for (Tensor& g : grad_acc) std::fill(g.values().begin(), g.values().end(), 0.0);
    std::size_t in_batch = 0;

    auto flush_batch = [&]() {
      if (in_batch == 0) return;
      std::vector<Tensor> mean_grads = grad_acc;
      const double inv = 1.0 / static_cast<double>(in_batch);
      for (Tensor& g : mean_grads)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= inv;
      optimizer_step(params, mean_grads, opt);
      for (Tensor& g : grad_acc)
        std::fill(g.values().begin(), g.values().end(), 0.0);
      in_batch = 0;
    };

    for (std::size_t vid : order) {
      const AnnotationSequence& seq = data.sequences[vid];
      const std::size_t len = std::min(config.crop_len, seq.num_frames);
      const std::size_t start =
          seq.num_frames > len ? erng.uniform_int(seq.num_frames - len + 1) : 0;

      const Tensor fcrop = crop_rows(data.features[vid], start, len);
      const Tensor ycrop = crop_rows(dense_targets[vid], start, len);
      const AnnotationSequence scrop = crop_sequence(seq, start, len);
      const Tensor r_star = build_cooccurrence(scrop, data.vocab).values;

      Tape tape;
      leaf_ids = add_param_leaves(tape, params);
      const TrainingGraph g = build_training_graph(
          tape, leaf_ids, ids, net, fcrop, data.space.we, ycrop, r_star,
          config.balance, config.normalize_cooc);
      const std::vector<Tensor> grads = tape.backward(g.total);
      for (std::size_t i = 0; i < params.count(); ++i) {
        const Tensor& gi = grads[static_cast<std::size_t>(leaf_ids[i])];
        for (std::size_t k = 0; k < gi.size(); ++k) grad_acc[i][k] += gi[k];
      }
      ++in_batch;

      const LossBreakdown lb =
          loss_breakdown(tape, g.bce, g.mse, g.total, config.balance);
      bce_sum += lb.bce;
      mse_sum += lb.mse;
      total_sum += lb.total;

      if (in_batch == config.batch_size) flush_batch();
    }
    flush_batch();

    const double inv_videos = 1.0 / static_cast<double>(order.size());
    EpochRow row;
    row.epoch = epoch;
    row.bce = bce_sum * inv_videos;
    row.mse = mse_sum * inv_videos;
    row.total = total_sum * inv_videos;
    row.val_map =
        data.val_idx.empty()
            ? std::numeric_limits<double>::quiet_NaN()
            : evaluate_model(params, ids, net, data, EvalSplit::Val).map;
    result.rows.push_back(row);

    csv << row.epoch << "," << format_double(row.bce) << ","
        << format_double(row.mse) << "," << format_double(row.total) << ","
        << format_double(row.val_map) << "\n";

    const std::string ckpt_path = out_dir + "/" + epoch_name(epoch);
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.epoch = epoch;
    ckpt.params = params;
    ckpt.opt = opt;
    save_checkpoint(ckpt_path, ckpt);

    const double map_for_best = data.val_idx.empty() ? 0.0 : row.val_map;
    if (map_for_best > result.best_val_map) {
      result.best_val_map = map_for_best;
      result.best_checkpoint = ckpt_path;
    }
  }
  if (result.best_checkpoint.empty() && !result.rows.empty())
    result.best_checkpoint = out_dir + "/" + epoch_name(config.epochs);

  log << "best checkpoint: " << result.best_checkpoint
      << " (val_map=" << format_double(result.best_val_map) << ")\n";
  return result;
}

}  // namespace cornet
