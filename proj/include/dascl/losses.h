#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dascl/encoder.h"

namespace dascl {

enum class LossMode {
  kCE,           // cross-entropy on originals
  kCEDA,         // cross-entropy on originals and simplified twins
  kCESCL,        // cross-entropy + supervised contrastive on originals
  kCEDASCL,      // cross-entropy + dictionary-assisted contrastive
  kCEDASCLDA,    // the above with twins also fed to cross-entropy
};

std::string_view LossModeName(LossMode mode);
// Accepts CE, CE_DA, CE_SCL, CE_DASCL, CE_DASCL_DA.
LossMode ParseLossMode(std::string_view name);

bool HasContrastiveTerm(LossMode mode);
bool UsesSimplifiedText(LossMode mode);
bool AugmentsCrossEntropy(LossMode mode);

struct LossConfig {
  LossMode mode = LossMode::kCEDASCL;
  double lambda = 0.9;

  void Validate() const;
};

struct CrossEntropyResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_logits;  // rows x C, (probs - onehot) / rows
};

// Mean negative log-likelihood of the true class. Probabilities are floored
// at kProbabilityFloor before the log.
inline constexpr double kProbabilityFloor = 1e-12;
CrossEntropyResult CrossEntropyLoss(const Eigen::MatrixXd& probs, std::span<const int> labels);

// 2N unit vectors; rows [0, N) are originals and row i + N is the
// keyword-simplified twin of row i, carrying the same label.
struct ContrastiveBatch {
  Eigen::MatrixXd embeddings;  // 2N x P
  std::vector<int> labels;     // 2N

  int batch_size() const { return static_cast<int>(labels.size() / 2); }
  // Throws ValidationError unless rows and labels agree and twins share labels.
  void Validate() const;
};

struct ContrastiveResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_embeddings;  // same shape as the input embeddings
  double grad_tau = 0.0;
};

// Dictionary-assisted supervised contrastive loss over originals and their
// twins, normalized by 1/(2N) and per anchor by its 2N_y - 1 positives.
ContrastiveResult DasclLoss(const ContrastiveBatch& batch, double tau);

// Supervised contrastive loss over originals only, summed over anchors with
// no outer 1/N. Anchors whose class is unique in the batch contribute 0.
ContrastiveResult SclLoss(const Eigen::MatrixXd& embeddings, std::span<const int> labels,
                          double tau);

// (1 - lambda) * ce + lambda * contrastive.
double TotalLoss(double ce, double contrastive, double lambda);
// Mode-aware: returns ce unchanged when the mode has no contrastive term.
double TotalLoss(double ce, std::optional<double> contrastive, const LossConfig& config);

// Loss inputs for one mini-batch. Row indices refer to the concatenation
// [originals..., simplified...] of the traces handed to AssembleBatch.
struct AssembledBatch {
  Eigen::MatrixXd ce_probs;
  std::vector<int> ce_labels;
  std::vector<int> ce_rows;

  // Set for CE_DASCL and CE_DASCL_DA.
  std::optional<ContrastiveBatch> dascl;
  // Set for CE_SCL: N original embeddings and labels.
  std::optional<Eigen::MatrixXd> scl_embeddings;
  std::vector<int> scl_labels;
  std::vector<int> contrastive_rows;
};

AssembledBatch AssembleBatch(std::span<const ForwardTrace> originals,
                             std::span<const ForwardTrace> simplified,
                             std::span<const int> labels, LossMode mode);

}  // namespace dascl
