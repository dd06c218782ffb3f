#pragma once

#include <optional>
#include <span>
#include <vector>

namespace dascl {

// One classified example. `score` is the model's probability for class 1.
struct ScoredPrediction {
  int truth = 0;
  int predicted = 0;
  double score = 0.0;
};

struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  long count = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1_positive = 0.0;
  double macro_f1 = 0.0;
  // Unset when the evaluated set has no positive example.
  std::optional<double> average_precision;
};

// Binary confusion counts with class 1 as positive. Throws ValidationError
// for labels outside {0, 1}.
Confusion ConfusionCounts(std::span<const ScoredPrediction> preds);

// Zero denominators yield 0.
PrecisionRecallF1 Prf(const Confusion& counts);

double Accuracy(std::span<const ScoredPrediction> preds);

// Unweighted mean over classes 0..C-1 of the one-vs-rest F1, where C is one
// more than the largest label seen and at least 2.
double MacroF1(std::span<const ScoredPrediction> preds);

// AP = sum_n (R_n - R_{n-1}) P_n over thresholds at each distinct score,
// highest first; tied scores share a threshold. Throws ValidationError when
// there is no positive example.
double AveragePrecision(std::span<const ScoredPrediction> preds);

// Treats class 1 as positive for precision/recall/F1/AP; multi-class
// inputs are binarized one-vs-rest for those fields.
EvalReport Evaluate(std::span<const ScoredPrediction> preds);

}  // namespace dascl
