#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dascl/encoder.h"
#include "dascl/lexicon.h"
#include "dascl/losses.h"
#include "dascl/metrics.h"

namespace dascl {

struct Example {
  std::string id;
  std::string text;
  int label = 0;
};

using Corpus = std::vector<Example>;

enum class SelectionMetric { kAccuracy, kF1Positive };

std::string_view SelectionMetricName(SelectionMetric metric);
SelectionMetric ParseSelectionMetric(std::string_view name);

struct TrainConfig {
  LossConfig loss;  // mode + lambda, default CE_DASCL with lambda 0.9
  double tau_init = 0.3;
  double learning_rate = 1e-3;
  int batch_size = 16;
  int epochs = 50;
  std::uint64_t seed = 0;
  // `vocab` is ignored; it is derived from the training corpus.
  EncoderDims dims;
  SelectionMetric selection = SelectionMetric::kAccuracy;
  std::optional<int> few_shot_n;
  double weight_decay = 0.0;
  std::optional<double> grad_clip;  // global L2 norm

  // Contrastive modes with lambda = 0 are accepted here (they reduce to CE);
  // experiment configuration files reject them.
  void Validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double ce_loss = 0.0;
  std::optional<double> contrastive_loss;
  double total_loss = 0.0;
  double tau = 0.0;  // after the epoch's last update
  EvalReport validation;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;
  double selected_metric = 0.0;
};

// Everything needed to run inference on raw text.
struct TrainedModel {
  Vocab vocab;
  EncoderParams params;
};

struct TrainResult {
  TrainedModel model;  // parameters of the selected epoch
  TrainHistory history;
};

// Uniform sample of n examples without replacement; no stratification.
Corpus FewShotSample(const Corpus& corpus, int n, std::uint64_t seed);

// Token ids of a corpus and its keyword-simplified twin, aligned by index.
struct EncodedCorpus {
  std::vector<std::vector<int>> originals;
  std::vector<std::vector<int>> simplified;
  std::vector<int> labels;
};

struct PairedBatch {
  std::vector<std::size_t> indices;
  std::vector<std::vector<int>> originals;
  std::vector<std::vector<int>> simplified;
  std::vector<int> labels;
};

// Shuffles once with `epoch_seed` and cuts consecutive batches; the final
// short batch is kept.
std::vector<PairedBatch> MakeBatches(const EncodedCorpus& corpus, int batch_size,
                                     std::uint64_t epoch_seed);

// Seed of one epoch's shuffle, derived from the run seed.
std::uint64_t EpochSeed(std::uint64_t run_seed, int epoch);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

// One bias-corrected Adam update of a flat parameter block at step t >= 1.
void AdamUpdate(std::span<double> params, std::span<const double> grads, std::span<double> m,
                std::span<double> v, long t, const AdamOptions& options);

struct AdamState {
  EncoderParams m;
  EncoderParams v;
  long step = 0;

  static AdamState For(const EncoderDims& dims);
};

// Advances state.step and updates every block, rho included. Throws
// RuntimeError without touching params if any gradient is non-finite.
void AdamStep(EncoderParams& params, const EncoderGrads& grads, AdamState& state,
              const AdamOptions& options);

// Tokenized originals and keyword-simplified twins of a corpus.
std::vector<TokenizedDoc> TokenizeCorpus(const Corpus& corpus);

EncodedCorpus EncodeCorpus(const Vocab& vocab, std::span<const TokenizedDoc> originals,
                           std::span<const TokenizedDoc> simplified, std::span<const int> labels);

// Predicts from original text only.
std::vector<ScoredPrediction> Predict(const TrainedModel& model, const Corpus& corpus);
EvalReport EvaluateModel(const TrainedModel& model, const Corpus& corpus);

TrainResult Train(const TrainConfig& config, const Corpus& train, const Corpus& validation,
                  const LexiconSet& lexicons);

// Tab-separated rows: id, label, h_0..h_{H-1}, psi_0..psi_{P-1}, one per
// document, after a header line.
void ExportEmbeddings(const TrainedModel& model, const Corpus& corpus,
                      const std::filesystem::path& path);

struct EmbeddingTable {
  std::vector<std::string> ids;
  std::vector<int> labels;
  Eigen::MatrixXd hidden;
  Eigen::MatrixXd psi;
};

EmbeddingTable ReadEmbeddings(const std::filesystem::path& path);

}  // namespace dascl
