#include "dascl/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "dascl/error.h"
#include "dascl/objective.h"

namespace dascl {

std::string_view SelectionMetricName(SelectionMetric metric) {
  return metric == SelectionMetric::kAccuracy ? "accuracy" : "f1_positive";
}

SelectionMetric ParseSelectionMetric(std::string_view name) {
  if (name == "accuracy") return SelectionMetric::kAccuracy;
  if (name == "f1_positive") return SelectionMetric::kF1Positive;
  throw ValidationError("unknown selection metric '" + std::string(name) +
                        "' (expected accuracy or f1_positive)");
}

void TrainConfig::Validate() const {
  loss.Validate();
  if (!(tau_init > 0.0) || !std::isfinite(tau_init)) throw ValidationError("tau_init must be > 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (few_shot_n && *few_shot_n < 1) throw ValidationError("few_shot_n must be >= 1");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (grad_clip && !(*grad_clip > 0.0)) throw ValidationError("grad_clip must be > 0");
  EncoderDims d = dims;
  d.vocab = 1;
  d.Validate();
}

Corpus FewShotSample(const Corpus& corpus, int n, std::uint64_t seed) {
  if (n < 1 || static_cast<std::size_t>(n) > corpus.size()) {
    throw ValidationError("few-shot size " + std::to_string(n) + " must lie in [1, " +
                          std::to_string(corpus.size()) + "]");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Corpus out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(corpus[order[static_cast<std::size_t>(i)]]);
  return out;
}

std::uint64_t EpochSeed(std::uint64_t run_seed, int epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<PairedBatch> MakeBatches(const EncodedCorpus& corpus, int batch_size,
                                     std::uint64_t epoch_seed) {
  const std::size_t n = corpus.originals.size();
  if (corpus.simplified.size() != n || corpus.labels.size() != n) {
    throw ValidationError("original and simplified corpora are not aligned");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(epoch_seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<PairedBatch> batches;
  const auto step = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < n; start += step) {
    PairedBatch b;
    for (std::size_t k = start; k < std::min(n, start + step); ++k) {
      const std::size_t idx = order[k];
      b.indices.push_back(idx);
      b.originals.push_back(corpus.originals[idx]);
      b.simplified.push_back(corpus.simplified[idx]);
      b.labels.push_back(corpus.labels[idx]);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

void AdamUpdate(std::span<double> params, std::span<const double> grads, std::span<double> m,
                std::span<double> v, long t, const AdamOptions& options) {
  if (t < 1) throw ValidationError("Adam step counter must be >= 1");
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ValidationError("Adam: block sizes differ");
  }
  const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + options.weight_decay * params[i];
    m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g;
    v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

AdamState AdamState::For(const EncoderDims& dims) {
  return AdamState{EncoderParams::Zeros(dims), EncoderParams::Zeros(dims), 0};
}

void AdamStep(EncoderParams& params, const EncoderGrads& grads, AdamState& state,
              const AdamOptions& options) {
  grads.ForEachBlock([](const char* name, auto block) {
    for (double g : block) {
      if (!std::isfinite(g)) {
        throw RuntimeError(std::string("non-finite gradient in parameter block '") + name + "'");
      }
    }
  });
  if (params.dims() != grads.dims() || params.dims() != state.m.dims()) {
    throw ValidationError("Adam: parameter, gradient and state shapes differ");
  }

  ++state.step;
  std::vector<std::span<double>> p_blocks, m_blocks, v_blocks;
  std::vector<std::span<const double>> g_blocks;
  params.ForEachBlock([&](const char*, std::span<double> b) { p_blocks.push_back(b); });
  state.m.ForEachBlock([&](const char*, std::span<double> b) { m_blocks.push_back(b); });
  state.v.ForEachBlock([&](const char*, std::span<double> b) { v_blocks.push_back(b); });
  grads.ForEachBlock([&](const char*, std::span<const double> b) { g_blocks.push_back(b); });
  for (std::size_t i = 0; i < p_blocks.size(); ++i) {
    AdamUpdate(p_blocks[i], g_blocks[i], m_blocks[i], v_blocks[i], state.step, options);
  }
}

std::vector<TokenizedDoc> TokenizeCorpus(const Corpus& corpus) {
  std::vector<TokenizedDoc> docs;
  docs.reserve(corpus.size());
  for (const Example& ex : corpus) docs.push_back(Tokenize(ex.text));
  return docs;
}

EncodedCorpus EncodeCorpus(const Vocab& vocab, std::span<const TokenizedDoc> originals,
                           std::span<const TokenizedDoc> simplified, std::span<const int> labels) {
  if (originals.size() != simplified.size() || originals.size() != labels.size()) {
    throw ValidationError("original and simplified corpora are not aligned");
  }
  EncodedCorpus out;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    out.originals.push_back(vocab.Encode(originals[i]));
    out.simplified.push_back(vocab.Encode(simplified[i]));
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<ScoredPrediction> Predict(const TrainedModel& model, const Corpus& corpus) {
  const int classes = static_cast<int>(model.params.cls_b.size());
  std::vector<ScoredPrediction> preds;
  preds.reserve(corpus.size());
  for (const Example& ex : corpus) {
    if (ex.label < 0 || ex.label >= classes) {
      throw ValidationError("example '" + ex.id + "' has label " + std::to_string(ex.label) +
                            " but the model has " + std::to_string(classes) + " classes");
    }
    const ForwardTrace t = Encode(model.params, model.vocab.Encode(Tokenize(ex.text)));
    Eigen::Index argmax = 0;
    t.probs.maxCoeff(&argmax);
    preds.push_back({ex.label, static_cast<int>(argmax), t.probs(std::min(1, classes - 1))});
  }
  return preds;
}

EvalReport EvaluateModel(const TrainedModel& model, const Corpus& corpus) {
  return Evaluate(Predict(model, corpus));
}

namespace {

double SelectionValue(const EvalReport& r, SelectionMetric metric) {
  return metric == SelectionMetric::kAccuracy ? r.accuracy : r.f1_positive;
}

void ClipGradients(EncoderGrads& grads, double max_norm) {
  double sq = 0.0;
  grads.ForEachBlock([&](const char*, std::span<double> b) {
    for (double g : b) sq += g * g;
  });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  grads.ForEachBlock([&](const char*, std::span<double> b) {
    for (double& g : b) g *= scale;
  });
}

void CheckLabels(const Corpus& corpus, int classes, const char* which) {
  for (const Example& ex : corpus) {
    if (ex.label < 0 || ex.label >= classes) {
      throw ValidationError(std::string(which) + " example '" + ex.id + "' has label " +
                            std::to_string(ex.label) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

}  // namespace

TrainResult Train(const TrainConfig& config, const Corpus& train, const Corpus& validation,
                  const LexiconSet& lexicons) {
  config.Validate();
  if (train.empty()) throw ValidationError("training corpus is empty");
  if (validation.empty()) throw ValidationError("validation corpus is empty");
  CheckLabels(train, config.dims.classes, "training");
  CheckLabels(validation, config.dims.classes, "validation");

  const Corpus subset = config.few_shot_n ? FewShotSample(train, *config.few_shot_n, config.seed) : train;

  const std::vector<TokenizedDoc> originals = TokenizeCorpus(subset);
  const std::vector<TokenizedDoc> simplified = SimplifyCorpus(originals, lexicons);
  std::vector<TokenizedDoc> all_docs = originals;
  all_docs.insert(all_docs.end(), simplified.begin(), simplified.end());

  TrainedModel model;
  model.vocab = Vocab::Build(all_docs);
  EncoderDims dims = config.dims;
  dims.vocab = model.vocab.size();
  model.params = InitParams(dims, config.seed, config.tau_init);

  std::vector<int> labels;
  for (const Example& ex : subset) labels.push_back(ex.label);
  const EncodedCorpus encoded = EncodeCorpus(model.vocab, originals, simplified, labels);

  AdamOptions adam;
  adam.learning_rate = config.learning_rate;
  adam.weight_decay = config.weight_decay;
  AdamState state = AdamState::For(dims);

  TrainResult result;
  EncoderParams best = model.params;
  bool have_best = false;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    double ce_sum = 0.0, contrastive_sum = 0.0, total_sum = 0.0;
    for (const PairedBatch& batch : MakeBatches(encoded, config.batch_size, EpochSeed(config.seed, epoch))) {
      BatchObjective obj =
          ComputeObjective(model.params, batch.originals, batch.simplified, batch.labels, config.loss);
      if (!std::isfinite(obj.total)) {
        throw RuntimeError("non-finite loss at epoch " + std::to_string(epoch));
      }
      if (config.grad_clip) ClipGradients(obj.grads, *config.grad_clip);
      AdamStep(model.params, obj.grads, state, adam);

      const auto weight = static_cast<double>(batch.labels.size());
      ce_sum += weight * obj.ce;
      if (obj.contrastive) contrastive_sum += weight * *obj.contrastive;
      total_sum += weight * obj.total;
    }
    const auto count = static_cast<double>(encoded.labels.size());
    record.ce_loss = ce_sum / count;
    if (HasContrastiveTerm(config.loss.mode)) record.contrastive_loss = contrastive_sum / count;
    record.total_loss = total_sum / count;
    record.tau = model.params.tau();
    if (!(record.tau > 0.0) || !std::isfinite(record.tau)) {
      throw RuntimeError("temperature left (0, inf) at epoch " + std::to_string(epoch));
    }
    record.validation = EvaluateModel(model, validation);

    const double value = SelectionValue(record.validation, config.selection);
    if (!have_best || value > result.history.selected_metric) {
      have_best = true;
      best = model.params;
      result.history.selected_epoch = epoch;
      result.history.selected_metric = value;
    }
    result.history.epochs.push_back(std::move(record));
  }
  model.params = std::move(best);
  result.model = std::move(model);
  return result;
}

void ExportEmbeddings(const TrainedModel& model, const Corpus& corpus,
                      const std::filesystem::path& path) {
  for (const Example& ex : corpus) {
    if (ex.id.find_first_of("\t\n\r") != std::string::npos) {
      throw ValidationError("document id '" + ex.id + "' contains a tab or newline");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");

  const EncoderDims dims = model.params.dims();
  out << "id\tlabel";
  for (int i = 0; i < dims.hidden; ++i) out << "\th_" << i;
  for (int i = 0; i < dims.projection; ++i) out << "\tpsi_" << i;
  out << '\n';

  out << std::setprecision(17);
  for (const Example& ex : corpus) {
    const ForwardTrace t = Encode(model.params, model.vocab.Encode(Tokenize(ex.text)));
    out << ex.id << '\t' << ex.label;
    for (double x : t.hidden) out << '\t' << x;
    for (double x : t.psi) out << '\t' << x;
    out << '\n';
  }
  if (!out) throw RuntimeError("failed while writing '" + path.string() + "'");
}

EmbeddingTable ReadEmbeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("'" + path.string() + "' has no header");

  int hidden = 0, projection = 0;
  {
    std::istringstream header(line);
    std::string col;
    while (std::getline(header, col, '\t')) {
      if (col.starts_with("h_")) ++hidden;
      if (col.starts_with("psi_")) ++projection;
    }
  }

  std::vector<std::vector<double>> h_rows, psi_rows;
  EmbeddingTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, '\t')) fields.push_back(field);
    if (fields.size() != static_cast<std::size_t>(2 + hidden + projection)) {
      throw ValidationError("'" + path.string() + "' line " + std::to_string(line_no) +
                            ": wrong number of columns");
    }
    table.ids.push_back(fields[0]);
    table.labels.push_back(std::stoi(fields[1]));
    std::vector<double> h, psi;
    for (int i = 0; i < hidden; ++i) h.push_back(std::stod(fields[2 + i]));
    for (int i = 0; i < projection; ++i) psi.push_back(std::stod(fields[2 + hidden + i]));
    h_rows.push_back(std::move(h));
    psi_rows.push_back(std::move(psi));
  }
  const auto n = static_cast<Eigen::Index>(h_rows.size());
  table.hidden.resize(n, hidden);
  table.psi.resize(n, projection);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int c = 0; c < hidden; ++c) table.hidden(r, c) = h_rows[r][c];
    for (int c = 0; c < projection; ++c) table.psi(r, c) = psi_rows[r][c];
  }
  return table;
}

}  // namespace dascl
