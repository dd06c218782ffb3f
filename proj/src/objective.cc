#include "dascl/objective.h"

#include "dascl/error.h"

namespace dascl {

BatchObjective ComputeObjective(const EncoderParams& params,
                                std::span<const std::vector<int>> originals,
                                std::span<const std::vector<int>> simplified,
                                std::span<const int> labels, const LossConfig& config,
                                bool with_gradients) {
  config.Validate();
  const std::size_t n = originals.size();
  const bool twins = UsesSimplifiedText(config.mode);

  // traces = [originals..., simplified...]; AssembleBatch rows index into it.
  std::vector<ForwardTrace> traces;
  traces.reserve(twins ? 2 * n : n);
  for (const auto& doc : originals) traces.push_back(Encode(params, doc));
  if (twins) {
    if (simplified.size() != n) {
      throw ValidationError("objective: originals and simplified twins differ in length");
    }
    for (const auto& doc : simplified) traces.push_back(Encode(params, doc));
  }
  std::span<const ForwardTrace> all(traces);
  AssembledBatch batch =
      AssembleBatch(all.first(n), twins ? all.subspan(n) : all.subspan(n, 0), labels, config.mode);

  const CrossEntropyResult ce = CrossEntropyLoss(batch.ce_probs, batch.ce_labels);
  std::optional<ContrastiveResult> contrastive;
  if (batch.dascl) {
    contrastive = DasclLoss(*batch.dascl, params.tau());
  } else if (batch.scl_embeddings) {
    contrastive = SclLoss(*batch.scl_embeddings, batch.scl_labels, params.tau());
  }

  BatchObjective out;
  out.ce = ce.loss;
  if (contrastive) out.contrastive = contrastive->loss;
  out.total = TotalLoss(out.ce, out.contrastive, config);
  if (!with_gradients) return out;

  const double ce_weight = HasContrastiveTerm(config.mode) ? 1.0 - config.lambda : 1.0;
  const EncoderDims dims = params.dims();
  const auto rows = static_cast<Eigen::Index>(traces.size());
  EncoderUpstream upstream;
  upstream.logits = Eigen::MatrixXd::Zero(rows, dims.classes);
  upstream.psi = Eigen::MatrixXd::Zero(rows, dims.projection);
  for (std::size_t r = 0; r < batch.ce_rows.size(); ++r) {
    upstream.logits.row(batch.ce_rows[r]) += ce_weight * ce.grad_logits.row(static_cast<Eigen::Index>(r));
  }
  if (contrastive) {
    for (std::size_t r = 0; r < batch.contrastive_rows.size(); ++r) {
      upstream.psi.row(batch.contrastive_rows[r]) +=
          config.lambda * contrastive->grad_embeddings.row(static_cast<Eigen::Index>(r));
    }
    upstream.tau = config.lambda * contrastive->grad_tau;
  }
  out.grads = Backward(params, traces, upstream);
  return out;
}

}  // namespace dascl
