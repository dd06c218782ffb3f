#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dascl/lexicon.h"
#include "dascl/metrics.h"
#include "dascl/trainer.h"

namespace dascl::io {

using Json = nlohmann::ordered_json;

std::string ReadTextFile(const std::filesystem::path& path);
// Truncates and writes. Throws RuntimeError naming the path on failure.
void WriteTextFile(const std::filesystem::path& path, std::string_view content);

// JSONL corpus: one {"id": string, "text": string, "label": integer} object
// per non-blank line. `source` names the input in error messages.
Corpus ParseCorpusJsonl(std::istream& in, const std::string& source);
Corpus ReadCorpusJsonl(const std::filesystem::path& path);
std::string CorpusToJsonl(const Corpus& corpus);

// "<path>:<token>", split at the last ':'.
struct DictionarySpec {
  std::filesystem::path path;
  std::string token;
};
DictionarySpec ParseDictionarySpec(std::string_view spec);
// Lexicon names are the file paths as given; order is priority order.
LexiconSet LoadLexicons(const std::vector<DictionarySpec>& specs);

struct ExperimentConfig {
  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::optional<std::filesystem::path> test_path;
  std::vector<DictionarySpec> dictionaries;
  TrainConfig train;
  std::filesystem::path output_dir;
};

// Validates the whole document and throws one ValidationError listing every
// violation by field path (e.g. "$.dims.hidden"). Relative paths resolve
// against `base_dir`. Referenced input files must exist.
ExperimentConfig ParseExperimentConfig(const Json& doc, const std::filesystem::path& base_dir);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

Json CheckpointToJson(const TrainedModel& model);
TrainedModel CheckpointFromJson(const Json& doc);
void SaveCheckpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel LoadCheckpoint(const std::filesystem::path& path);

Json ReportToJson(const EvalReport& report);
Json HistoryToJson(const TrainConfig& config, const TrainHistory& history);

// Stable textual form used for every file we write.
std::string Dump(const Json& doc);

}  // namespace dascl::io
