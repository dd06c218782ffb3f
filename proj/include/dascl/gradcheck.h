#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dascl/encoder.h"
#include "dascl/losses.h"

namespace dascl {

struct GradCheckOptions {
  std::uint64_t seed = 0;
  int trials = 100;
  std::vector<LossMode> modes = {LossMode::kCE, LossMode::kCEDA, LossMode::kCESCL,
                                 LossMode::kCEDASCL, LossMode::kCEDASCLDA};
  EncoderDims dims{12, 5, 6, 4, 2};
  int batch_docs = 3;
  double lambda = 0.9;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
};

struct GradCheckResult {
  LossMode mode = LossMode::kCE;
  double max_relative_error = 0.0;
  std::string worst_block;
  double max_tau_relative_error = 0.0;  // 0 for modes without a temperature
  bool checked_tau = false;
  bool passed = false;
};

// |a - b| / max(|a|, |b|, kRelativeErrorFloor).
inline constexpr double kRelativeErrorFloor = 1e-6;
double RelativeError(double analytic, double numeric);

// Central finite differences over every parameter of randomly initialized
// encoders on random tiny batches, one result per mode.
std::vector<GradCheckResult> RunGradCheck(const GradCheckOptions& options);

}  // namespace dascl
