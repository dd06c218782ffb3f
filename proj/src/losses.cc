#include "dascl/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dascl/error.h"

namespace dascl {

std::string_view LossModeName(LossMode mode) {
  switch (mode) {
    case LossMode::kCE: return "CE";
    case LossMode::kCEDA: return "CE_DA";
    case LossMode::kCESCL: return "CE_SCL";
    case LossMode::kCEDASCL: return "CE_DASCL";
    case LossMode::kCEDASCLDA: return "CE_DASCL_DA";
  }
  return "?";
}

LossMode ParseLossMode(std::string_view name) {
  for (LossMode m : {LossMode::kCE, LossMode::kCEDA, LossMode::kCESCL, LossMode::kCEDASCL,
                     LossMode::kCEDASCLDA}) {
    if (LossModeName(m) == name) return m;
  }
  throw ValidationError("unknown loss mode '" + std::string(name) +
                        "' (expected CE, CE_DA, CE_SCL, CE_DASCL or CE_DASCL_DA)");
}

bool HasContrastiveTerm(LossMode mode) {
  return mode == LossMode::kCESCL || mode == LossMode::kCEDASCL || mode == LossMode::kCEDASCLDA;
}

bool UsesSimplifiedText(LossMode mode) {
  return mode == LossMode::kCEDA || mode == LossMode::kCEDASCL || mode == LossMode::kCEDASCLDA;
}

bool AugmentsCrossEntropy(LossMode mode) {
  return mode == LossMode::kCEDA || mode == LossMode::kCEDASCLDA;
}

void LossConfig::Validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
}

CrossEntropyResult CrossEntropyLoss(const Eigen::MatrixXd& probs, std::span<const int> labels) {
  const Eigen::Index rows = probs.rows();
  if (static_cast<std::size_t>(rows) != labels.size()) {
    throw ValidationError("cross-entropy: probability rows and labels differ in length");
  }
  CrossEntropyResult r;
  r.grad_logits = Eigen::MatrixXd::Zero(rows, probs.cols());
  if (rows == 0) return r;

  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= probs.cols()) {
      throw ValidationError("cross-entropy: label " + std::to_string(y) + " out of range");
    }
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-6) {
      throw ValidationError("cross-entropy: probability row does not sum to 1");
    }
    r.loss -= std::log(std::max(probs(i, y), kProbabilityFloor));
    r.grad_logits.row(i) = probs.row(i) * inv_rows;
    r.grad_logits(i, y) -= inv_rows;
  }
  r.loss *= inv_rows;
  return r;
}

namespace {

void CheckTemperature(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("temperature must be positive and finite");
  }
}

// Shared anchor/positive/negative evaluation. `scale` multiplies every
// anchor's term; anchors without positives are skipped.
ContrastiveResult SupervisedContrastive(const Eigen::MatrixXd& z, std::span<const int> labels,
                                        double tau, double scale) {
  const Eigen::Index m = z.rows();
  ContrastiveResult r;
  r.grad_embeddings = Eigen::MatrixXd::Zero(m, z.cols());
  if (m < 2) return r;

  const Eigen::MatrixXd sim = (z * z.transpose()) / tau;
  Eigen::VectorXd softmax(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int yi = labels[static_cast<std::size_t>(i)];
    int positives = 0;
    double max_s = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == i) continue;
      if (labels[static_cast<std::size_t>(k)] == yi) ++positives;
      max_s = std::max(max_s, sim(i, k));
    }
    if (positives == 0) continue;

    double denom = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != i) denom += std::exp(sim(i, k) - max_s);
    }
    const double log_denom = max_s + std::log(denom);
    const double inv_pos = 1.0 / positives;

    double term = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == i) continue;
      softmax(k) = std::exp(sim(i, k) - log_denom);
      if (labels[static_cast<std::size_t>(k)] == yi) term -= (sim(i, k) - log_denom);
    }
    r.loss += scale * inv_pos * term;

    // dL/ds_ik = scale * (softmax_ik - [k positive] / positives)
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == i) continue;
      double g = softmax(k);
      if (labels[static_cast<std::size_t>(k)] == yi) g -= inv_pos;
      g *= scale;
      r.grad_embeddings.row(i) += (g / tau) * z.row(k);
      r.grad_embeddings.row(k) += (g / tau) * z.row(i);
      r.grad_tau -= g * sim(i, k) / tau;
    }
  }
  return r;
}

}  // namespace

void ContrastiveBatch::Validate() const {
  if (labels.size() % 2 != 0) {
    throw ValidationError("contrastive batch must hold an even number (2N) of rows");
  }
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw ValidationError("contrastive batch: embeddings and labels differ in length");
  }
  const std::size_t n = labels.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != labels[i + n]) {
      throw ValidationError("contrastive batch: row " + std::to_string(i + n) +
                            " does not carry the label of its original " + std::to_string(i));
    }
  }
}

ContrastiveResult DasclLoss(const ContrastiveBatch& batch, double tau) {
  CheckTemperature(tau);
  batch.Validate();
  if (batch.labels.empty()) {
    return ContrastiveResult{0.0, Eigen::MatrixXd::Zero(0, batch.embeddings.cols()), 0.0};
  }
  const double scale = 1.0 / static_cast<double>(batch.labels.size());
  return SupervisedContrastive(batch.embeddings, batch.labels, tau, scale);
}

ContrastiveResult SclLoss(const Eigen::MatrixXd& embeddings, std::span<const int> labels,
                          double tau) {
  CheckTemperature(tau);
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw ValidationError("scl: embeddings and labels differ in length");
  }
  return SupervisedContrastive(embeddings, labels, tau, 1.0);
}

double TotalLoss(double ce, double contrastive, double lambda) {
  return (1.0 - lambda) * ce + lambda * contrastive;
}

double TotalLoss(double ce, std::optional<double> contrastive, const LossConfig& config) {
  config.Validate();
  if (!HasContrastiveTerm(config.mode)) return ce;
  if (!contrastive) throw ValidationError("mode requires a contrastive loss value");
  return TotalLoss(ce, *contrastive, config.lambda);
}

AssembledBatch AssembleBatch(std::span<const ForwardTrace> originals,
                             std::span<const ForwardTrace> simplified,
                             std::span<const int> labels, LossMode mode) {
  const std::size_t n = originals.size();
  if (labels.size() != n) throw ValidationError("assemble: originals and labels differ in length");
  if (UsesSimplifiedText(mode) && simplified.size() != n) {
    throw ValidationError("assemble: originals and simplified twins differ in length");
  }
  if (n == 0) throw ValidationError("assemble: empty batch");

  const Eigen::Index classes = originals.front().probs.size();
  const Eigen::Index proj = originals.front().psi.size();
  AssembledBatch out;

  const std::size_t ce_n = AugmentsCrossEntropy(mode) ? 2 * n : n;
  out.ce_probs.resize(static_cast<Eigen::Index>(ce_n), classes);
  for (std::size_t r = 0; r < ce_n; ++r) {
    const ForwardTrace& t = r < n ? originals[r] : simplified[r - n];
    out.ce_probs.row(static_cast<Eigen::Index>(r)) = t.probs.transpose();
    out.ce_labels.push_back(labels[r % n]);
    out.ce_rows.push_back(static_cast<int>(r));
  }

  if (mode == LossMode::kCEDASCL || mode == LossMode::kCEDASCLDA) {
    ContrastiveBatch batch;
    batch.embeddings.resize(static_cast<Eigen::Index>(2 * n), proj);
    for (std::size_t r = 0; r < 2 * n; ++r) {
      const ForwardTrace& t = r < n ? originals[r] : simplified[r - n];
      batch.embeddings.row(static_cast<Eigen::Index>(r)) = t.psi.transpose();
      batch.labels.push_back(labels[r % n]);
      out.contrastive_rows.push_back(static_cast<int>(r));
    }
    out.dascl = std::move(batch);
  } else if (mode == LossMode::kCESCL) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), proj);
    for (std::size_t r = 0; r < n; ++r) {
      z.row(static_cast<Eigen::Index>(r)) = originals[r].psi.transpose();
      out.scl_labels.push_back(labels[r]);
      out.contrastive_rows.push_back(static_cast<int>(r));
    }
    out.scl_embeddings = std::move(z);
  }
  return out;
}

}  // namespace dascl
