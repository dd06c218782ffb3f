#include "dascl/metrics.h"

#include <algorithm>
#include <string>

#include "dascl/error.h"

namespace dascl {
namespace {

double SafeDiv(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double F1(double precision, double recall) {
  return SafeDiv(2.0 * precision * recall, precision + recall);
}

}  // namespace

Confusion ConfusionCounts(std::span<const ScoredPrediction> preds) {
  Confusion c;
  for (const ScoredPrediction& p : preds) {
    if ((p.truth != 0 && p.truth != 1) || (p.predicted != 0 && p.predicted != 1)) {
      throw ValidationError("confusion counts require binary labels, got truth=" +
                            std::to_string(p.truth) + " predicted=" + std::to_string(p.predicted));
    }
    if (p.truth == 1) {
      (p.predicted == 1 ? c.tp : c.fn)++;
    } else {
      (p.predicted == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

PrecisionRecallF1 Prf(const Confusion& counts) {
  PrecisionRecallF1 r;
  r.precision = SafeDiv(static_cast<double>(counts.tp), static_cast<double>(counts.tp + counts.fp));
  r.recall = SafeDiv(static_cast<double>(counts.tp), static_cast<double>(counts.tp + counts.fn));
  r.f1 = F1(r.precision, r.recall);
  return r;
}

double Accuracy(std::span<const ScoredPrediction> preds) {
  long correct = 0;
  for (const ScoredPrediction& p : preds) correct += p.truth == p.predicted;
  return SafeDiv(static_cast<double>(correct), static_cast<double>(preds.size()));
}

double MacroF1(std::span<const ScoredPrediction> preds) {
  int classes = 2;
  for (const ScoredPrediction& p : preds) classes = std::max({classes, p.truth + 1, p.predicted + 1});
  double sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    Confusion counts;
    for (const ScoredPrediction& p : preds) {
      const bool truth = p.truth == c;
      const bool pred = p.predicted == c;
      if (truth && pred) ++counts.tp;
      else if (!truth && pred) ++counts.fp;
      else if (truth) ++counts.fn;
      else ++counts.tn;
    }
    sum += Prf(counts).f1;
  }
  return sum / classes;
}

double AveragePrecision(std::span<const ScoredPrediction> preds) {
  std::vector<ScoredPrediction> sorted(preds.begin(), preds.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredPrediction& a, const ScoredPrediction& b) { return a.score > b.score; });
  long positives = 0;
  for (const ScoredPrediction& p : sorted) positives += p.truth == 1;
  if (positives == 0) {
    throw ValidationError("average precision is undefined without positive examples");
  }

  double ap = 0.0;
  double prev_recall = 0.0;
  long tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == threshold) {
      tp += sorted[i].truth == 1;
      ++seen;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

EvalReport Evaluate(std::span<const ScoredPrediction> preds) {
  std::vector<ScoredPrediction> binary(preds.begin(), preds.end());
  for (ScoredPrediction& p : binary) {
    p.truth = p.truth == 1;
    p.predicted = p.predicted == 1;
  }
  EvalReport r;
  r.count = static_cast<long>(preds.size());
  r.accuracy = Accuracy(preds);
  const PrecisionRecallF1 prf = Prf(ConfusionCounts(binary));
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1_positive = prf.f1;
  r.macro_f1 = MacroF1(preds);
  const bool any_positive =
      std::any_of(binary.begin(), binary.end(), [](const auto& p) { return p.truth == 1; });
  if (any_positive) r.average_precision = AveragePrecision(binary);
  return r;
}

}  // namespace dascl
