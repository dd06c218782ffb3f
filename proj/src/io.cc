#include "dascl/io.h"

#include <fstream>
#include <set>
#include <sstream>

#include "dascl/error.h"

namespace dascl::io {

namespace fs = std::filesystem;

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw RuntimeError("failed while writing '" + path.string() + "'");
}

std::string Dump(const Json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Corpora

Corpus ParseCorpusJsonl(std::istream& in, const std::string& source) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ValidationError(where + ": expected a JSON object");
    if (!obj.contains("id") || !obj["id"].is_string()) {
      throw ValidationError(where + ": field 'id' must be a string");
    }
    if (!obj.contains("text") || !obj["text"].is_string()) {
      throw ValidationError(where + ": field 'text' must be a string");
    }
    if (!obj.contains("label") || !obj["label"].is_number_integer()) {
      throw ValidationError(where + ": field 'label' must be an integer");
    }
    Example ex{obj["id"].get<std::string>(), obj["text"].get<std::string>(), obj["label"].get<int>()};
    if (ex.label < 0) throw ValidationError(where + ": label must be >= 0");
    if (!ids.insert(ex.id).second) throw ValidationError(where + ": duplicate id '" + ex.id + "'");
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

Corpus ReadCorpusJsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot read corpus '" + path.string() + "'");
  return ParseCorpusJsonl(in, path.string());
}

std::string CorpusToJsonl(const Corpus& corpus) {
  std::string out;
  for (const Example& ex : corpus) {
    Json obj;
    obj["id"] = ex.id;
    obj["text"] = ex.text;
    obj["label"] = ex.label;
    out += obj.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dictionaries

DictionarySpec ParseDictionarySpec(std::string_view spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == spec.size()) {
    throw ValidationError("dictionary spec '" + std::string(spec) + "' must look like <path>:<token>");
  }
  DictionarySpec out{fs::path(std::string(spec.substr(0, colon))), std::string(spec.substr(colon + 1))};
  if (!IsValidReplacementToken(out.token)) {
    throw ValidationError("dictionary spec '" + std::string(spec) + "': token must have the form <[a-z_]+>");
  }
  return out;
}

LexiconSet LoadLexicons(const std::vector<DictionarySpec>& specs) {
  std::vector<Lexicon> lexicons;
  for (const DictionarySpec& spec : specs) {
    lexicons.push_back(ParseDictionary(ReadTextFile(spec.path), spec.token, spec.path.string()));
  }
  return LexiconSet(std::move(lexicons));
}

// ---------------------------------------------------------------------------
// Experiment configuration

namespace {

class SchemaErrors {
 public:
  void Add(const std::string& path, const std::string& message) {
    errors_.push_back(path + ": " + message);
  }
  bool empty() const { return errors_.empty(); }
  [[noreturn]] void Throw() const {
    std::string msg = "invalid configuration:";
    for (const std::string& e : errors_) msg += "\n  " + e;
    throw ValidationError(msg);
  }

 private:
  std::vector<std::string> errors_;
};

const std::set<std::string>& KnownConfigKeys() {
  static const std::set<std::string> keys = {
      "train", "val", "test", "dictionaries", "mode", "lambda", "tau_init", "learning_rate",
      "batch_size", "epochs", "seed", "dims", "selection_metric", "few_shot_n", "optimizer",
      "weight_decay", "grad_clip", "output_dir"};
  return keys;
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ExperimentConfig ParseExperimentConfig(const Json& doc, const fs::path& base_dir) {
  SchemaErrors errors;
  ExperimentConfig cfg;
  if (!doc.is_object()) {
    errors.Add("$", "configuration must be a JSON object");
    errors.Throw();
  }
  for (const auto& [key, value] : doc.items()) {
    if (!KnownConfigKeys().contains(key)) errors.Add("$." + key, "unknown field");
  }

  auto input_file = [&](const char* key, bool required) -> std::optional<fs::path> {
    const std::string path = std::string("$.") + key;
    if (!doc.contains(key) || doc[key].is_null()) {
      if (required) errors.Add(path, "required");
      return std::nullopt;
    }
    if (!doc[key].is_string()) {
      errors.Add(path, "must be a string path");
      return std::nullopt;
    }
    fs::path p = Resolve(base_dir, doc[key].get<std::string>());
    if (!fs::is_regular_file(p)) errors.Add(path, "file '" + p.string() + "' does not exist");
    return p;
  };
  if (auto p = input_file("train", true)) cfg.train_path = *p;
  if (auto p = input_file("val", true)) cfg.val_path = *p;
  cfg.test_path = input_file("test", false);

  if (doc.contains("dictionaries")) {
    const Json& dicts = doc["dictionaries"];
    if (!dicts.is_array()) {
      errors.Add("$.dictionaries", "must be an array");
    } else {
      for (std::size_t i = 0; i < dicts.size(); ++i) {
        const std::string path = "$.dictionaries[" + std::to_string(i) + "]";
        const Json& d = dicts[i];
        if (!d.is_object()) {
          errors.Add(path, "must be an object with 'path' and 'token'");
          continue;
        }
        DictionarySpec spec;
        bool ok = true;
        if (!d.contains("path") || !d["path"].is_string()) {
          errors.Add(path + ".path", "required string");
          ok = false;
        } else {
          spec.path = Resolve(base_dir, d["path"].get<std::string>());
          if (!fs::is_regular_file(spec.path)) {
            errors.Add(path + ".path", "file '" + spec.path.string() + "' does not exist");
            ok = false;
          }
        }
        if (!d.contains("token") || !d["token"].is_string()) {
          errors.Add(path + ".token", "required string");
          ok = false;
        } else {
          spec.token = d["token"].get<std::string>();
          if (!IsValidReplacementToken(spec.token)) {
            errors.Add(path + ".token", "must have the form <[a-z_]+>");
            ok = false;
          }
        }
        for (const auto& [key, value] : d.items()) {
          if (key != "path" && key != "token") errors.Add(path + "." + key, "unknown field");
        }
        if (ok) cfg.dictionaries.push_back(std::move(spec));
      }
    }
  }

  TrainConfig& t = cfg.train;
  if (!doc.contains("mode")) {
    errors.Add("$.mode", "required");
  } else if (!doc["mode"].is_string()) {
    errors.Add("$.mode", "must be a string");
  } else {
    try {
      t.loss.mode = ParseLossMode(doc["mode"].get<std::string>());
    } catch (const ValidationError& e) {
      errors.Add("$.mode", e.what());
    }
  }

  auto number = [&](const char* key, double& out, auto&& valid, const char* rule) {
    if (!doc.contains(key)) return;
    const Json& v = doc[key];
    if (!v.is_number() || !valid(v.get<double>())) {
      errors.Add(std::string("$.") + key, rule);
      return;
    }
    out = v.get<double>();
  };
  auto integer = [&](const Json& parent, const std::string& path, const char* key, int& out,
                     int min) {
    if (!parent.contains(key)) return;
    const Json& v = parent[key];
    if (!v.is_number_integer() || v.get<long long>() < min || v.get<long long>() > 1'000'000'000) {
      errors.Add(path + "." + key, "must be an integer >= " + std::to_string(min));
      return;
    }
    out = v.get<int>();
  };

  number("lambda", t.loss.lambda, [](double x) { return x >= 0.0 && x <= 1.0; },
         "must be a number in [0, 1]");
  number("tau_init", t.tau_init, [](double x) { return x > 0.0 && std::isfinite(x); },
         "must be a number > 0");
  number("learning_rate", t.learning_rate, [](double x) { return x > 0.0 && std::isfinite(x); },
         "must be a number > 0");
  number("weight_decay", t.weight_decay, [](double x) { return x >= 0.0 && std::isfinite(x); },
         "must be a number >= 0");
  integer(doc, "$", "batch_size", t.batch_size, 1);
  integer(doc, "$", "epochs", t.epochs, 1);

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
      errors.Add("$.seed", "must be a non-negative integer");
    } else {
      t.seed = doc["seed"].get<std::uint64_t>();
    }
  }

  if (doc.contains("dims")) {
    const Json& dims = doc["dims"];
    if (!dims.is_object()) {
      errors.Add("$.dims", "must be an object");
    } else {
      integer(dims, "$.dims", "embedding", t.dims.embedding, 1);
      integer(dims, "$.dims", "hidden", t.dims.hidden, 1);
      integer(dims, "$.dims", "projection", t.dims.projection, 1);
      integer(dims, "$.dims", "classes", t.dims.classes, 2);
      for (const auto& [key, value] : dims.items()) {
        if (key != "embedding" && key != "hidden" && key != "projection" && key != "classes") {
          errors.Add("$.dims." + key, "unknown field");
        }
      }
    }
  }

  if (doc.contains("selection_metric")) {
    if (!doc["selection_metric"].is_string()) {
      errors.Add("$.selection_metric", "must be a string");
    } else {
      try {
        t.selection = ParseSelectionMetric(doc["selection_metric"].get<std::string>());
      } catch (const ValidationError& e) {
        errors.Add("$.selection_metric", e.what());
      }
    }
  }

  if (doc.contains("few_shot_n") && !doc["few_shot_n"].is_null()) {
    int n = 0;
    integer(doc, "$", "few_shot_n", n, 1);
    if (n >= 1) t.few_shot_n = n;
  }

  if (doc.contains("optimizer") && doc["optimizer"] != "adam") {
    errors.Add("$.optimizer", "only \"adam\" is supported");
  }
  if (doc.contains("grad_clip") && !doc["grad_clip"].is_null()) {
    const Json& v = doc["grad_clip"];
    if (!v.is_number() || !(v.get<double>() > 0.0)) {
      errors.Add("$.grad_clip", "must be a number > 0 or null");
    } else {
      t.grad_clip = v.get<double>();
    }
  }

  if (HasContrastiveTerm(t.loss.mode) && doc.contains("lambda") && doc["lambda"].is_number() &&
      doc["lambda"].get<double>() == 0.0) {
    errors.Add("$.lambda", "must be > 0 when the mode has a contrastive term");
  }

  if (!doc.contains("output_dir")) {
    errors.Add("$.output_dir", "required");
  } else if (!doc["output_dir"].is_string()) {
    errors.Add("$.output_dir", "must be a string path");
  } else {
    cfg.output_dir = Resolve(base_dir, doc["output_dir"].get<std::string>());
    if (fs::exists(cfg.output_dir) && !fs::is_directory(cfg.output_dir)) {
      errors.Add("$.output_dir", "'" + cfg.output_dir.string() + "' exists and is not a directory");
    }
  }

  if (!errors.empty()) errors.Throw();
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ValidationError("config file '" + path.string() + "' does not exist");
  Json doc;
  try {
    doc = Json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return ParseExperimentConfig(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointFormat = "dascl-checkpoint";
constexpr int kCheckpointVersion = 1;

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  Json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["data"] = std::move(data);
  return out;
}

Eigen::MatrixXd MatrixFromJson(const Json& j, const std::string& name, Eigen::Index rows,
                               Eigen::Index cols) {
  if (!j.is_object() || j.value("rows", -1) != rows || j.value("cols", -1) != cols ||
      !j.contains("data") || !j["data"].is_array() ||
      j["data"].size() != static_cast<std::size_t>(rows * cols)) {
    throw ValidationError("checkpoint: block '" + name + "' does not have shape " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = j["data"][k++];
      if (!v.is_number()) throw ValidationError("checkpoint: block '" + name + "' has a non-number");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

Json CheckpointToJson(const TrainedModel& model) {
  const EncoderDims d = model.params.dims();
  const EncoderParams& p = model.params;
  Json out;
  out["format"] = kCheckpointFormat;
  out["version"] = kCheckpointVersion;
  out["dims"] = {{"vocab", d.vocab}, {"embedding", d.embedding}, {"hidden", d.hidden},
                 {"projection", d.projection}, {"classes", d.classes}};
  out["vocab"] = model.vocab.tokens();
  Json params;
  params["embedding"] = MatrixToJson(p.embedding);
  params["hidden_w"] = MatrixToJson(p.hidden_w);
  params["hidden_b"] = MatrixToJson(p.hidden_b.transpose());
  params["proj_w"] = MatrixToJson(p.proj_w);
  params["proj_b"] = MatrixToJson(p.proj_b.transpose());
  params["cls_w"] = MatrixToJson(p.cls_w);
  params["cls_b"] = MatrixToJson(p.cls_b.transpose());
  params["rho"] = p.rho;
  out["params"] = std::move(params);
  return out;
}

TrainedModel CheckpointFromJson(const Json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kCheckpointFormat) {
    throw ValidationError("not a dascl checkpoint");
  }
  if (doc.value("version", 0) != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version");
  }
  const Json& dj = doc.at("dims");
  EncoderDims d{dj.at("vocab").get<int>(), dj.at("embedding").get<int>(), dj.at("hidden").get<int>(),
                dj.at("projection").get<int>(), dj.at("classes").get<int>()};
  d.Validate();

  TrainedModel model;
  model.vocab = Vocab::FromTokens(doc.at("vocab").get<std::vector<std::string>>());
  if (model.vocab.size() != d.vocab) {
    throw ValidationError("checkpoint: vocabulary has " + std::to_string(model.vocab.size()) +
                          " tokens but dims.vocab is " + std::to_string(d.vocab));
  }
  const Json& pj = doc.at("params");
  EncoderParams& p = model.params;
  p.embedding = MatrixFromJson(pj.at("embedding"), "embedding", d.vocab, d.embedding);
  p.hidden_w = MatrixFromJson(pj.at("hidden_w"), "hidden_w", d.embedding, d.hidden);
  p.hidden_b = MatrixFromJson(pj.at("hidden_b"), "hidden_b", 1, d.hidden).transpose();
  p.proj_w = MatrixFromJson(pj.at("proj_w"), "proj_w", d.hidden, d.projection);
  p.proj_b = MatrixFromJson(pj.at("proj_b"), "proj_b", 1, d.projection).transpose();
  p.cls_w = MatrixFromJson(pj.at("cls_w"), "cls_w", d.hidden, d.classes);
  p.cls_b = MatrixFromJson(pj.at("cls_b"), "cls_b", 1, d.classes).transpose();
  p.rho = pj.at("rho").get<double>();
  return model;
}

void SaveCheckpoint(const TrainedModel& model, const fs::path& path) {
  WriteTextFile(path, Dump(CheckpointToJson(model)));
}

TrainedModel LoadCheckpoint(const fs::path& path) {
  Json doc;
  try {
    doc = Json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("checkpoint '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return CheckpointFromJson(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint '" + path.string() + "' is malformed: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

Json ReportToJson(const EvalReport& r) {
  Json out;
  out["count"] = r.count;
  out["accuracy"] = r.accuracy;
  out["precision"] = r.precision;
  out["recall"] = r.recall;
  out["f1_positive"] = r.f1_positive;
  out["macro_f1"] = r.macro_f1;
  out["average_precision"] = r.average_precision ? Json(*r.average_precision) : Json(nullptr);
  return out;
}

Json HistoryToJson(const TrainConfig& config, const TrainHistory& history) {
  Json cfg;
  cfg["mode"] = LossModeName(config.loss.mode);
  cfg["lambda"] = config.loss.lambda;
  cfg["tau_init"] = config.tau_init;
  cfg["learning_rate"] = config.learning_rate;
  cfg["batch_size"] = config.batch_size;
  cfg["epochs"] = config.epochs;
  cfg["seed"] = config.seed;
  cfg["dims"] = {{"embedding", config.dims.embedding}, {"hidden", config.dims.hidden},
                 {"projection", config.dims.projection}, {"classes", config.dims.classes}};
  cfg["selection_metric"] = SelectionMetricName(config.selection);
  cfg["few_shot_n"] = config.few_shot_n ? Json(*config.few_shot_n) : Json(nullptr);
  cfg["optimizer"] = "adam";
  cfg["weight_decay"] = config.weight_decay;
  cfg["grad_clip"] = config.grad_clip ? Json(*config.grad_clip) : Json(nullptr);

  Json epochs = Json::array();
  for (const EpochRecord& e : history.epochs) {
    Json rec;
    rec["epoch"] = e.epoch;
    rec["loss"] = {{"ce", e.ce_loss},
                   {"contrastive", e.contrastive_loss ? Json(*e.contrastive_loss) : Json(nullptr)},
                   {"total", e.total_loss}};
    rec["tau"] = e.tau;
    rec["validation"] = ReportToJson(e.validation);
    epochs.push_back(std::move(rec));
  }

  Json out;
  out["config"] = std::move(cfg);
  out["epochs"] = std::move(epochs);
  out["selected_epoch"] = history.selected_epoch;
  out["selected_metric"] = history.selected_metric;
  return out;
}

}  // namespace dascl::io
