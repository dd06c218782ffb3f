#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dascl/error.h"
#include "dascl/gradcheck.h"
#include "dascl/io.h"
#include "dascl/lexicon.h"
#include "dascl/losses.h"
#include "dascl/metrics.h"
#include "dascl/trainer.h"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

std::vector<dascl::ScoredPrediction> Zip(const std::vector<int>& truth, const std::vector<int>& predicted,
                                         const std::vector<double>& scores) {
  if (truth.size() != predicted.size() || (!scores.empty() && scores.size() != truth.size())) {
    throw dascl::ValidationError("truth, predicted and scores must have equal length");
  }
  std::vector<dascl::ScoredPrediction> out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out.push_back({truth[i], predicted[i], scores.empty() ? 0.0 : scores[i]});
  }
  return out;
}

py::dict ReportToDict(const dascl::EvalReport& r) {
  py::dict d;
  d["count"] = r.count;
  d["accuracy"] = r.accuracy;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1_positive"] = r.f1_positive;
  d["macro_f1"] = r.macro_f1;
  d["average_precision"] = r.average_precision ? py::cast(*r.average_precision) : py::none();
  return d;
}

// Same pipeline as `dascl train`; returns the history document as text.
std::string TrainFromConfig(const fs::path& config_path) {
  const dascl::io::ExperimentConfig cfg = dascl::io::LoadExperimentConfig(config_path);
  const dascl::Corpus train = dascl::io::ReadCorpusJsonl(cfg.train_path);
  const dascl::Corpus val = dascl::io::ReadCorpusJsonl(cfg.val_path);
  const dascl::LexiconSet lexicons = dascl::io::LoadLexicons(cfg.dictionaries);
  std::optional<dascl::Corpus> test;
  if (cfg.test_path) test = dascl::io::ReadCorpusJsonl(*cfg.test_path);

  dascl::TrainResult result;
  {
    py::gil_scoped_release release;
    result = dascl::Train(cfg.train, train, val, lexicons);
  }
  fs::create_directories(cfg.output_dir);
  dascl::io::SaveCheckpoint(result.model, cfg.output_dir / "checkpoint.json");
  const std::string history = dascl::io::Dump(dascl::io::HistoryToJson(cfg.train, result.history));
  dascl::io::WriteTextFile(cfg.output_dir / "history.json", history);
  if (test) {
    dascl::io::WriteTextFile(cfg.output_dir / "test_report.json",
                             dascl::io::Dump(dascl::io::ReportToJson(dascl::EvaluateModel(result.model, *test))));
  }
  return history;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dictionary-assisted supervised contrastive learning core";

  py::register_exception<dascl::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<dascl::RuntimeError>(m, "DasclRuntimeError", PyExc_RuntimeError);

  // Lexicons and keyword simplification.
  py::class_<dascl::Lexicon>(m, "Lexicon")
      .def_readonly("name", &dascl::Lexicon::name)
      .def_readonly("token", &dascl::Lexicon::token)
      .def_property_readonly("size", [](const dascl::Lexicon& l) { return l.entries.size(); })
      .def("__repr__", [](const dascl::Lexicon& l) {
        return "<Lexicon " + l.name + " -> " + l.token + ", " + std::to_string(l.entries.size()) + " entries>";
      });
  py::class_<dascl::LexiconSet>(m, "LexiconSet")
      .def(py::init<std::vector<dascl::Lexicon>>(), py::arg("lexicons"))
      .def("simplify", [](const dascl::LexiconSet& s, const std::vector<std::string>& doc) {
        return dascl::KeywordSimplify(doc, s);
      }, py::arg("tokens"))
      .def("simplify_text", [](const dascl::LexiconSet& s, const std::string& text) {
        return dascl::JoinTokens(dascl::KeywordSimplify(dascl::Tokenize(text), s));
      }, py::arg("text"));

  m.def("parse_dictionary", &dascl::ParseDictionary, py::arg("text"), py::arg("token"), py::arg("name") = "");
  m.def("tokenize", &dascl::Tokenize, py::arg("text"));
  m.def("join_tokens", &dascl::JoinTokens, py::arg("tokens"));
  m.def("keyword_simplify", &dascl::KeywordSimplify, py::arg("tokens"), py::arg("lexicons"));

  // Losses.
  m.def("cross_entropy", [](const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
    dascl::CrossEntropyResult r = dascl::CrossEntropyLoss(probs, labels);
    return py::make_tuple(r.loss, r.grad_logits);
  }, py::arg("probs"), py::arg("labels"), "Returns (loss, gradient with respect to logits).");
  m.def("dascl_loss", [](const Eigen::MatrixXd& embeddings, const std::vector<int>& labels, double tau) {
    dascl::ContrastiveResult r = dascl::DasclLoss({embeddings, labels}, tau);
    return py::make_tuple(r.loss, r.grad_embeddings, r.grad_tau);
  }, py::arg("embeddings"), py::arg("labels"), py::arg("tau"),
        "Rows [0, N) are originals and rows [N, 2N) their simplified twins. Returns (loss, d/dz, d/dtau).");
  m.def("scl_loss", [](const Eigen::MatrixXd& embeddings, const std::vector<int>& labels, double tau) {
    dascl::ContrastiveResult r = dascl::SclLoss(embeddings, labels, tau);
    return py::make_tuple(r.loss, r.grad_embeddings, r.grad_tau);
  }, py::arg("embeddings"), py::arg("labels"), py::arg("tau"));
  m.def("total_loss", py::overload_cast<double, double, double>(&dascl::TotalLoss), py::arg("ce"),
        py::arg("contrastive"), py::arg("lam"));
  m.def("loss_modes", [] {
    std::vector<std::string> out;
    for (auto mode : {dascl::LossMode::kCE, dascl::LossMode::kCEDA, dascl::LossMode::kCESCL,
                      dascl::LossMode::kCEDASCL, dascl::LossMode::kCEDASCLDA}) {
      out.emplace_back(dascl::LossModeName(mode));
    }
    return out;
  });

  // Metrics.
  m.def("average_precision", [](const std::vector<int>& truth, const std::vector<double>& scores) {
    std::vector<int> predicted(truth.size(), 0);
    return dascl::AveragePrecision(Zip(truth, predicted, scores));
  }, py::arg("truth"), py::arg("scores"));
  m.def("precision_recall_f1", [](long tp, long fp, long tn, long fn) {
    dascl::PrecisionRecallF1 r = dascl::Prf(dascl::Confusion{tp, fp, tn, fn});
    return py::make_tuple(r.precision, r.recall, r.f1);
  }, py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
  m.def("macro_f1", [](const std::vector<int>& truth, const std::vector<int>& predicted) {
    return dascl::MacroF1(Zip(truth, predicted, {}));
  }, py::arg("truth"), py::arg("predicted"));
  m.def("evaluate", [](const std::vector<int>& truth, const std::vector<int>& predicted,
                       const std::vector<double>& scores) {
    return ReportToDict(dascl::Evaluate(Zip(truth, predicted, scores)));
  }, py::arg("truth"), py::arg("predicted"), py::arg("scores"));

  // Training, evaluation and gradient checks.
  m.def("_train_from_config", &TrainFromConfig, py::arg("config_path"));
  m.def("evaluate_checkpoint", [](const fs::path& checkpoint, const fs::path& corpus) {
    return ReportToDict(dascl::EvaluateModel(dascl::io::LoadCheckpoint(checkpoint), dascl::io::ReadCorpusJsonl(corpus)));
  }, py::arg("checkpoint"), py::arg("corpus"));
  m.def("export_embeddings", [](const fs::path& checkpoint, const fs::path& corpus, const fs::path& out) {
    dascl::ExportEmbeddings(dascl::io::LoadCheckpoint(checkpoint), dascl::io::ReadCorpusJsonl(corpus), out);
  }, py::arg("checkpoint"), py::arg("corpus"), py::arg("out"));
  m.def("gradcheck", [](std::optional<std::string> mode, std::uint64_t seed, int trials) {
    dascl::GradCheckOptions options;
    options.seed = seed;
    options.trials = trials;
    if (mode && *mode != "all") options.modes = {dascl::ParseLossMode(*mode)};
    py::list out;
    for (const dascl::GradCheckResult& r : dascl::RunGradCheck(options)) {
      py::dict d;
      d["mode"] = std::string(dascl::LossModeName(r.mode));
      d["max_relative_error"] = r.max_relative_error;
      d["worst_block"] = r.worst_block;
      d["tau_relative_error"] = r.checked_tau ? py::cast(r.max_tau_relative_error) : py::none();
      d["passed"] = r.passed;
      out.append(d);
    }
    return out;
  }, py::arg("mode") = py::none(), py::arg("seed") = 0, py::arg("trials") = 100);
}
