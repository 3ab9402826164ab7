#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cornet/annotations.hpp"
#include "cornet/autodiff.hpp"
#include "cornet/commands.hpp"
#include "cornet/corm.hpp"
#include "cornet/embeddings.hpp"
#include "cornet/error.hpp"
#include "cornet/metrics.hpp"
#include "cornet/synth.hpp"

namespace py = pybind11;

namespace {

using cornet::Tensor;

Tensor tensor_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  std::vector<std::size_t> shape(static_cast<std::size_t>(arr.ndim()));
  for (py::ssize_t i = 0; i < arr.ndim(); ++i)
    shape[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(arr.shape(i));
  std::vector<double> values(arr.data(), arr.data() + arr.size());
  return Tensor(std::move(shape), std::move(values));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.rank());
  for (std::size_t i = 0; i < t.rank(); ++i)
    shape[i] = static_cast<py::ssize_t>(t.dim(i));
  py::array_t<double> arr(shape);
  std::copy(t.data(), t.data() + t.size(), arr.mutable_data());
  return arr;
}

cornet::ClassVocabulary vocab_from_labels(const std::vector<std::string>& labels) {
  cornet::ClassVocabulary vocab;
  vocab.labels = labels;
  vocab.validate();
  return vocab;
}

cornet::AnnotationSequence sequence_from_args(
    const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>&
        intervals,
    std::size_t num_frames, const std::string& id) {
  cornet::AnnotationSequence seq;
  seq.id = id;
  seq.num_frames = num_frames;
  for (const auto& [s, e, c] : intervals) seq.intervals.push_back({s, e, c});
  return seq;
}

py::dict report_to_dict(const cornet::EvalReport& report) {
  py::dict per_class;
  for (const auto& [label, ap] : report.per_class)
    per_class[py::str(label)] = ap;
  py::dict out;
  out["map"] = report.map;
  out["per_class"] = per_class;
  out["skipped"] = report.skipped;
  out["frames"] = report.frames;
  out["seed"] = report.seed;
  out["config_digest"] = report.config_digest;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Co-occurrence relation network for multi-label temporal action "
            "localization";
  m.attr("__version__") = "0.1.0";

  // Translators run newest-first; the derived ParseError must be registered
  // after its base so it is tried before the generic handler.
  py::register_exception<cornet::Error>(m, "CornetError", PyExc_RuntimeError);
  py::register_exception<cornet::ParseError>(m, "CornetParseError",
                                             PyExc_ValueError);

  py::class_<cornet::Tape>(m, "Tape")
      .def(py::init<>())
      .def(
          "leaf",
          [](cornet::Tape& t, const py::array_t<double>& value, bool trainable,
             const std::string& name) {
            return t.leaf(tensor_from_array(value), trainable, name);
          },
          py::arg("value"), py::arg("trainable") = false, py::arg("name") = "")
      .def(
          "apply",
          [](cornet::Tape& t, const std::string& op,
             const std::vector<int>& inputs, double scalar, std::size_t axis,
             const std::vector<std::size_t>& shape) {
            cornet::OpAttrs attrs;
            attrs.scalar = scalar;
            attrs.axis = axis;
            attrs.shape = shape;
            return t.apply(op, inputs, attrs);
          },
          py::arg("op"), py::arg("inputs"), py::arg("scalar") = 0.0,
          py::arg("axis") = 0, py::arg("shape") = std::vector<std::size_t>{})
      .def("value",
           [](const cornet::Tape& t, int id) {
             return array_from_tensor(t.value(id));
           })
      .def("backward",
           [](const cornet::Tape& t, int loss_id) {
             const std::vector<Tensor> grads = t.backward(loss_id);
             py::dict out;
             for (int id : t.trainable_leaves())
               out[py::int_(id)] =
                   array_from_tensor(grads[static_cast<std::size_t>(id)]);
             return out;
           })
      .def("trainable_leaves", &cornet::Tape::trainable_leaves)
      .def("replay_bitexact", &cornet::Tape::replay_bitexact)
      .def("__len__", &cornet::Tape::size);

  m.def(
      "build_cooccurrence",
      [](const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>&
             intervals,
         std::size_t num_frames, std::size_t n_classes) {
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n_classes; ++i)
          labels.push_back("class " + std::to_string(i));
        return array_from_tensor(
            cornet::build_cooccurrence(
                sequence_from_args(intervals, num_frames, "py"),
                vocab_from_labels(labels))
                .values);
      },
      py::arg("intervals"), py::arg("num_frames"), py::arg("n_classes"),
      "Ground-truth co-occurrence counts from [start, end, class_id] "
      "intervals (end exclusive).");

  m.def(
      "to_dense_targets",
      [](const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>&
             intervals,
         std::size_t num_frames, std::size_t n_classes) {
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n_classes; ++i)
          labels.push_back("class " + std::to_string(i));
        return array_from_tensor(cornet::to_dense_targets(
            sequence_from_args(intervals, num_frames, "py"),
            vocab_from_labels(labels)));
      },
      py::arg("intervals"), py::arg("num_frames"), py::arg("n_classes"));

  m.def(
      "correlate_m1",
      [](const py::array_t<double>& features, const py::array_t<double>& phi_w,
         const py::array_t<double>& phi_b, const py::array_t<double>& psi_w,
         const py::array_t<double>& psi_b) {
        return array_from_tensor(cornet::eval_correlate_m1(
            tensor_from_array(features), tensor_from_array(phi_w),
            tensor_from_array(phi_b), tensor_from_array(psi_w),
            tensor_from_array(psi_b)));
      },
      py::arg("features"), py::arg("phi_w"), py::arg("phi_b"),
      py::arg("psi_w"), py::arg("psi_b"),
      "Sigmoid of pairwise projected differences; entries in (0,1).");

  m.def(
      "correlate_m2",
      [](const py::array_t<double>& features, const py::array_t<double>& h_q,
         const py::array_t<double>& h_k) {
        const Tensor q = tensor_from_array(h_q);
        return array_from_tensor(cornet::eval_correlate_m2(
            tensor_from_array(features), q, tensor_from_array(h_k),
            q.dim(1)));
      },
      py::arg("features"), py::arg("h_q"), py::arg("h_k"),
      "Scaled-dot-product self-attention; rows sum to 1.");

  m.def(
      "param_count",
      [](std::size_t d0, std::size_t dv, std::size_t n_classes,
         std::size_t d_e, std::size_t d_k, const std::string& vcor,
         const std::string& scor) {
        cornet::CormConfig config;
        config.d0 = d0;
        config.dv = dv;
        config.n_classes = n_classes;
        config.d_e = d_e;
        config.d_k = d_k;
        config.vcor = cornet::corr_fn_from_name(vcor);
        config.scor = cornet::corr_fn_from_name(scor);
        return cornet::param_count(config);
      },
      py::arg("d0"), py::arg("dv"), py::arg("n_classes"), py::arg("d_e"),
      py::arg("d_k"), py::arg("vcor") = "m1", py::arg("scor") = "m2",
      "Exact number of scalar learnables in the relation module.");

  m.def(
      "average_precision",
      [](const std::vector<double>& scores,
         const std::vector<std::uint8_t>& labels) {
        return cornet::average_precision(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "per_frame_map",
      [](const py::array_t<double>& probs, const py::array_t<double>& targets,
         const std::vector<std::string>& labels) {
        return report_to_dict(cornet::per_frame_map(
            tensor_from_array(probs), tensor_from_array(targets),
            vocab_from_labels(labels)));
      },
      py::arg("probs"), py::arg("targets"), py::arg("labels"));

  m.def(
      "synthetic_semantic_space",
      [](const std::vector<std::string>& labels, std::size_t embed_dim,
         std::uint64_t seed,
         const std::vector<std::pair<std::size_t, std::size_t>>& affinity) {
        return array_from_tensor(
            cornet::synthetic_semantic_space(vocab_from_labels(labels),
                                             embed_dim, seed, affinity)
                .we);
      },
      py::arg("labels"), py::arg("embed_dim"), py::arg("seed"),
      py::arg("affinity") = std::vector<std::pair<std::size_t, std::size_t>>{});

  m.def(
      "synth",
      [](const std::string& spec_path, const std::string& out_dir) {
        std::ostringstream log;
        cornet::cmd_synth(spec_path, out_dir, log);
        return log.str();
      },
      py::arg("spec"), py::arg("out"));

  m.def(
      "train",
      [](const std::string& config_path, const std::string& out_dir) {
        std::ostringstream log;
        const cornet::TrainResult result =
            cornet::cmd_train(config_path, out_dir, log);
        py::list rows;
        for (const cornet::EpochRow& r : result.rows) {
          py::dict row;
          row["epoch"] = r.epoch;
          row["bce"] = r.bce;
          row["mse"] = r.mse;
          row["total"] = r.total;
          row["val_map"] = r.val_map;
          rows.append(row);
        }
        py::dict out;
        out["best_checkpoint"] = result.best_checkpoint;
        out["best_val_map"] = result.best_val_map;
        out["rows"] = rows;
        return out;
      },
      py::arg("config"), py::arg("out") = "");

  m.def(
      "evaluate",
      [](const std::string& checkpoint, const std::string& data,
         const std::string& report, const std::string& split) {
        const cornet::EvalSplit s = split == "train" ? cornet::EvalSplit::Train
                                    : split == "val" ? cornet::EvalSplit::Val
                                                     : cornet::EvalSplit::All;
        std::ostringstream log;
        return report_to_dict(
            cornet::cmd_eval(checkpoint, data, report, s, log));
      },
      py::arg("checkpoint"), py::arg("data"), py::arg("report"),
      py::arg("split") = "all");

  m.def(
      "cooc",
      [](const std::string& annotations, const std::string& vocab,
         const std::string& out) {
        std::ostringstream log;
        cornet::cmd_cooc(annotations, vocab, out, log);
        return log.str();
      },
      py::arg("annotations"), py::arg("vocab"), py::arg("out"));
}
