// dascl: keyword simplification, training, evaluation, gradient checks and
// embedding export from the command line.
//
// Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dascl/error.h"
#include "dascl/gradcheck.h"
#include "dascl/io.h"
#include "dascl/lexicon.h"
#include "dascl/synthetic.h"
#include "dascl/trainer.h"

namespace fs = std::filesystem;
using dascl::io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void RequireFile(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw dascl::ValidationError(std::string(what) + " '" + path.string() + "' does not exist");
  }
}

int RunSimplify(const std::vector<std::string>& dict_specs, const fs::path& in_path,
                const fs::path& out_path) {
  std::vector<dascl::io::DictionarySpec> specs;
  for (const std::string& s : dict_specs) {
    specs.push_back(dascl::io::ParseDictionarySpec(s));
    RequireFile(specs.back().path, "dictionary");
  }
  RequireFile(in_path, "input corpus");
  const dascl::LexiconSet lexicons = dascl::io::LoadLexicons(specs);

  // Rewrites only "text"; every other field and the key order survive.
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw dascl::RuntimeError("cannot read '" + in_path.string() + "'");
  std::string out, line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw dascl::ValidationError(in_path.string() + ":" + std::to_string(line_no) +
                                   ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string()) {
      throw dascl::ValidationError(in_path.string() + ":" + std::to_string(line_no) +
                                   ": field 'text' must be a string");
    }
    const dascl::TokenizedDoc doc = dascl::Tokenize(obj["text"].get<std::string>());
    obj["text"] = dascl::JoinTokens(dascl::KeywordSimplify(doc, lexicons));
    out += obj.dump() + "\n";
  }
  dascl::io::WriteTextFile(out_path, out);
  return kExitOk;
}

void PrintReport(const char* title, const dascl::EvalReport& r) {
  std::printf("%s: n=%ld accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f macro_f1=%.4f", title,
              r.count, r.accuracy, r.precision, r.recall, r.f1_positive, r.macro_f1);
  if (r.average_precision) {
    std::printf(" ap=%.4f\n", *r.average_precision);
  } else {
    std::printf(" ap=n/a\n");
  }
}

int RunTrain(const fs::path& config_path) {
  // Validation happens in full before any output is created.
  const dascl::io::ExperimentConfig cfg = dascl::io::LoadExperimentConfig(config_path);
  const dascl::Corpus train = dascl::io::ReadCorpusJsonl(cfg.train_path);
  const dascl::Corpus val = dascl::io::ReadCorpusJsonl(cfg.val_path);
  const dascl::LexiconSet lexicons = dascl::io::LoadLexicons(cfg.dictionaries);
  if (cfg.train.few_shot_n && static_cast<std::size_t>(*cfg.train.few_shot_n) > train.size()) {
    throw dascl::ValidationError("$.few_shot_n: exceeds the training corpus size " +
                                 std::to_string(train.size()));
  }
  std::optional<dascl::Corpus> test;
  if (cfg.test_path) test = dascl::io::ReadCorpusJsonl(*cfg.test_path);

  const dascl::TrainResult result = dascl::Train(cfg.train, train, val, lexicons);

  fs::create_directories(cfg.output_dir);
  const fs::path checkpoint = cfg.output_dir / "checkpoint.json";
  const fs::path history = cfg.output_dir / "history.json";
  dascl::io::SaveCheckpoint(result.model, checkpoint);
  dascl::io::WriteTextFile(history, dascl::io::Dump(dascl::io::HistoryToJson(cfg.train, result.history)));

  const auto& best = result.history.epochs.at(static_cast<std::size_t>(result.history.selected_epoch - 1));
  std::printf("mode=%s selected_epoch=%d/%d tau=%.6g\n",
              std::string(dascl::LossModeName(cfg.train.loss.mode)).c_str(),
              result.history.selected_epoch, cfg.train.epochs, best.tau);
  PrintReport("validation", best.validation);
  if (test) {
    const dascl::EvalReport report = dascl::EvaluateModel(result.model, *test);
    dascl::io::WriteTextFile(cfg.output_dir / "test_report.json",
                             dascl::io::Dump(dascl::io::ReportToJson(report)));
    PrintReport("test", report);
  }
  std::printf("wrote %s and %s\n", checkpoint.string().c_str(), history.string().c_str());
  return kExitOk;
}

int RunEval(const fs::path& checkpoint, const fs::path& in_path, const std::string& out_path) {
  RequireFile(checkpoint, "checkpoint");
  RequireFile(in_path, "input corpus");
  const dascl::TrainedModel model = dascl::io::LoadCheckpoint(checkpoint);
  const dascl::Corpus corpus = dascl::io::ReadCorpusJsonl(in_path);
  const std::string text = dascl::io::Dump(dascl::io::ReportToJson(dascl::EvaluateModel(model, corpus)));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    dascl::io::WriteTextFile(out_path, text);
  }
  return kExitOk;
}

int RunGradCheck(const std::string& mode, std::uint64_t seed, int trials) {
  dascl::GradCheckOptions options;
  options.seed = seed;
  options.trials = trials;
  if (!mode.empty() && mode != "all") options.modes = {dascl::ParseLossMode(mode)};

  bool ok = true;
  for (const dascl::GradCheckResult& r : dascl::RunGradCheck(options)) {
    std::printf("%-12s max_rel_error=%.3e (worst block: %s)", std::string(dascl::LossModeName(r.mode)).c_str(),
                r.max_relative_error, r.worst_block.empty() ? "-" : r.worst_block.c_str());
    if (r.checked_tau) std::printf(" tau_rel_error=%.3e", r.max_tau_relative_error);
    std::printf(" %s\n", r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitRuntime;
}

int RunExport(const fs::path& checkpoint, const fs::path& in_path, const fs::path& out_path) {
  RequireFile(checkpoint, "checkpoint");
  RequireFile(in_path, "input corpus");
  const dascl::TrainedModel model = dascl::io::LoadCheckpoint(checkpoint);
  const dascl::Corpus corpus = dascl::io::ReadCorpusJsonl(in_path);
  dascl::ExportEmbeddings(model, corpus, out_path);
  return kExitOk;
}

int RunMakeSynthetic(const fs::path& out_dir, std::uint64_t seed, int train_n, int val_n, int test_n) {
  dascl::SyntheticOptions options;
  options.seed = seed;
  const dascl::SyntheticWorld world = dascl::MakeSyntheticWorld(options);
  fs::create_directories(out_dir);
  auto write = [&](const char* name, int count, std::uint64_t s) {
    const dascl::Corpus c = dascl::SampleSyntheticDocs(world, count, s, dascl::DictionarySlice::kAll, name);
    dascl::io::WriteTextFile(out_dir / (std::string(name) + ".jsonl"), dascl::io::CorpusToJsonl(c));
  };
  write("train", train_n, seed + 1);
  write("val", val_n, seed + 2);
  write("test", test_n, seed + 3);
  auto dict = [&](const char* name, const std::vector<std::string>& words) {
    std::string text;
    for (const std::string& w : words) text += w + "\n";
    dascl::io::WriteTextFile(out_dir / name, text);
  };
  dict("positive.txt", world.positive_words);
  dict("negative.txt", world.negative_words);
  std::printf("wrote train/val/test JSONL and positive.txt/negative.txt to %s\n", out_dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dictionary-assisted supervised contrastive learning toolkit"};
  app.require_subcommand(1);

  std::vector<std::string> dicts;
  std::string in_path, out_path, config_path, checkpoint, mode;
  std::uint64_t seed = 0;
  int trials = 100;

  auto* simplify = app.add_subcommand("simplify", "Keyword-simplify a JSONL corpus");
  simplify->add_option("--dict", dicts, "Dictionary as <path>:<token>; order sets priority");
  simplify->add_option("--in", in_path, "Input JSONL corpus")->required();
  simplify->add_option("--out", out_path, "Output JSONL corpus")->required();

  auto* train = app.add_subcommand("train", "Train from an experiment config");
  train->add_option("--config", config_path, "Experiment config JSON")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a JSONL corpus");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--in", in_path, "JSONL corpus")->required();
  eval->add_option("--out", out_path, "Write the report here instead of stdout");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of all loss modes");
  grad->add_option("--mode", mode, "CE, CE_DA, CE_SCL, CE_DASCL, CE_DASCL_DA or all");
  grad->add_option("--seed", seed, "Random seed");
  grad->add_option("--trials", trials, "Random trials per mode")->check(CLI::PositiveNumber);

  auto* exporter = app.add_subcommand("export-embeddings", "Write hidden and projected embeddings");
  exporter->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  exporter->add_option("--in", in_path, "JSONL corpus")->required();
  exporter->add_option("--out", out_path, "Output TSV")->required();

  std::string synth_dir;
  int train_n = 1000, val_n = 200, test_n = 200;
  auto* synth = app.add_subcommand("make-synthetic", "Generate a synthetic sentiment corpus");
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--train", train_n, "Training documents")->check(CLI::PositiveNumber);
  synth->add_option("--val", val_n, "Validation documents")->check(CLI::PositiveNumber);
  synth->add_option("--test", test_n, "Test documents")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simplify) return RunSimplify(dicts, in_path, out_path);
    if (*train) return RunTrain(config_path);
    if (*eval) return RunEval(checkpoint, in_path, out_path);
    if (*grad) return RunGradCheck(mode, seed, trials);
    if (*exporter) return RunExport(checkpoint, in_path, out_path);
    if (*synth) return RunMakeSynthetic(synth_dir, seed, train_n, val_n, test_n);
  } catch (const dascl::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}
