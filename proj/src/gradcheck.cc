#include "dascl/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dascl/objective.h"

namespace dascl {

double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

namespace {

std::vector<int> RandomDoc(std::mt19937_64& rng, int vocab) {
  std::uniform_int_distribution<int> len(1, 5);
  std::uniform_int_distribution<int> tok(0, vocab - 1);
  std::vector<int> doc(static_cast<std::size_t>(len(rng)));
  for (int& t : doc) t = tok(rng);
  return doc;
}

}  // namespace

std::vector<GradCheckResult> RunGradCheck(const GradCheckOptions& options) {
  std::vector<GradCheckResult> results;
  for (LossMode mode : options.modes) {
    GradCheckResult res;
    res.mode = mode;
    res.checked_tau = HasContrastiveTerm(mode);
    const LossConfig config{mode, options.lambda};

    std::mt19937_64 rng(options.seed * 1000003ULL + static_cast<std::uint64_t>(mode));
    std::uniform_real_distribution<double> tau_dist(0.1, 1.0);
    std::uniform_int_distribution<int> label_dist(0, options.dims.classes - 1);
    for (int trial = 0; trial < options.trials; ++trial) {
      EncoderParams params = InitParams(options.dims, rng(), tau_dist(rng));
      // Nonzero biases exercise every path.
      std::normal_distribution<double> bias(0.0, 0.1);
      for (double& b : params.hidden_b) b = bias(rng);
      for (double& b : params.proj_b) b = bias(rng);
      for (double& b : params.cls_b) b = bias(rng);

      std::vector<std::vector<int>> originals, simplified;
      std::vector<int> labels;
      for (int i = 0; i < options.batch_docs; ++i) {
        originals.push_back(RandomDoc(rng, options.dims.vocab));
        simplified.push_back(RandomDoc(rng, options.dims.vocab));
        labels.push_back(label_dist(rng));
      }

      const EncoderGrads analytic =
          ComputeObjective(params, originals, simplified, labels, config).grads;

      std::vector<std::pair<const char*, std::span<double>>> blocks;
      params.ForEachBlock([&](const char* name, std::span<double> b) { blocks.emplace_back(name, b); });
      std::vector<std::span<const double>> grad_blocks;
      analytic.ForEachBlock([&](const char*, std::span<const double> b) { grad_blocks.push_back(b); });

      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        auto [name, block] = blocks[bi];
        for (std::size_t k = 0; k < block.size(); ++k) {
          const double saved = block[k];
          block[k] = saved + options.epsilon;
          const double plus =
              ComputeObjective(params, originals, simplified, labels, config, false).total;
          block[k] = saved - options.epsilon;
          const double minus =
              ComputeObjective(params, originals, simplified, labels, config, false).total;
          block[k] = saved;
          const double numeric = (plus - minus) / (2.0 * options.epsilon);
          const double err = RelativeError(grad_blocks[bi][k], numeric);
          if (err > res.max_relative_error) {
            res.max_relative_error = err;
            res.worst_block = name;
          }
          if (std::string_view(name) == "rho") {
            res.max_tau_relative_error = std::max(res.max_tau_relative_error, err);
          }
        }
      }
    }
    res.passed = res.max_relative_error <= options.tolerance;
    results.push_back(res);
  }
  return results;
}

}  // namespace dascl
