#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dascl/encoder.h"
#include "dascl/losses.h"

namespace dascl {

// Loss parts and parameter gradients of one mini-batch.
struct BatchObjective {
  double ce = 0.0;
  std::optional<double> contrastive;  // unset for CE and CE_DA
  double total = 0.0;
  EncoderGrads grads;
};

// Forward both views, assemble the mode's losses, blend them and
// backpropagate. `simplified` may be empty for modes that never read it.
// Gradients are skipped when `with_gradients` is false.
BatchObjective ComputeObjective(const EncoderParams& params,
                                std::span<const std::vector<int>> originals,
                                std::span<const std::vector<int>> simplified,
                                std::span<const int> labels, const LossConfig& config,
                                bool with_gradients = true);

}  // namespace dascl
