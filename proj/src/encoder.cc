#include "dascl/encoder.h"

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "dascl/error.h"

namespace dascl {

Vocab::Vocab() { Add(std::string(kUnknown)); }

Vocab Vocab::Build(std::span<const TokenizedDoc> docs) {
  Vocab vocab;
  for (const TokenizedDoc& doc : docs) {
    for (const std::string& token : doc) vocab.Add(token);
  }
  return vocab;
}

Vocab Vocab::FromTokens(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kUnknown) {
    throw ValidationError("vocabulary must start with " + std::string(kUnknown));
  }
  Vocab vocab;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (vocab.ids_.contains(tokens[i])) {
      throw ValidationError("duplicate vocabulary token '" + tokens[i] + "'");
    }
    vocab.Add(tokens[i]);
  }
  return vocab;
}

int Vocab::Add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocab::Id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknownId : it->second;
}

std::vector<int> Vocab::Encode(const TokenizedDoc& doc) const {
  std::vector<int> ids;
  ids.reserve(doc.size());
  for (const std::string& token : doc) ids.push_back(Id(token));
  if (ids.empty()) ids.push_back(kUnknownId);
  return ids;
}

void EncoderDims::Validate() const {
  if (vocab < 1 || embedding < 1 || hidden < 1 || projection < 1 || classes < 1) {
    throw ValidationError("encoder dimensions must all be >= 1");
  }
}

EncoderParams EncoderParams::Zeros(const EncoderDims& dims) {
  dims.Validate();
  EncoderParams p;
  p.embedding = Eigen::MatrixXd::Zero(dims.vocab, dims.embedding);
  p.hidden_w = Eigen::MatrixXd::Zero(dims.embedding, dims.hidden);
  p.hidden_b = Eigen::VectorXd::Zero(dims.hidden);
  p.proj_w = Eigen::MatrixXd::Zero(dims.hidden, dims.projection);
  p.proj_b = Eigen::VectorXd::Zero(dims.projection);
  p.cls_w = Eigen::MatrixXd::Zero(dims.hidden, dims.classes);
  p.cls_b = Eigen::VectorXd::Zero(dims.classes);
  p.rho = 0.0;
  return p;
}

EncoderDims EncoderParams::dims() const {
  return EncoderDims{static_cast<int>(embedding.rows()), static_cast<int>(embedding.cols()),
                     static_cast<int>(hidden_w.cols()), static_cast<int>(proj_w.cols()),
                     static_cast<int>(cls_w.cols())};
}

double EncoderParams::tau() const { return std::exp(rho); }

std::size_t EncoderParams::NumValues() const {
  std::size_t n = 0;
  ForEachBlock([&](const char*, auto block) { n += block.size(); });
  return n;
}

EncoderParams InitParams(const EncoderDims& dims, std::uint64_t seed, double tau_init) {
  if (!(tau_init > 0.0) || !std::isfinite(tau_init)) {
    throw ValidationError("tau_init must be a positive finite number");
  }
  EncoderParams p = EncoderParams::Zeros(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Eigen::MatrixXd& m) {
    const double s = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-s, s);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    }
  };
  fill(p.embedding);
  fill(p.hidden_w);
  fill(p.proj_w);
  fill(p.cls_w);
  p.rho = std::log(tau_init);
  return p;
}

ForwardTrace Encode(const EncoderParams& params, std::span<const int> token_ids) {
  if (token_ids.empty()) throw ValidationError("cannot encode an empty document");
  const Eigen::Index vocab = params.embedding.rows();
  std::map<int, int> counts;
  for (int id : token_ids) {
    if (id < 0 || id >= vocab) {
      throw ValidationError("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(vocab));
    }
    ++counts[id];
  }
  ForwardTrace t;
  const auto length = static_cast<double>(token_ids.size());
  t.pooled = Eigen::VectorXd::Zero(params.embedding.cols());
  for (auto [id, count] : counts) {
    const double w = static_cast<double>(count) / length;
    t.pooling_weights.emplace_back(id, w);
    t.pooled += w * params.embedding.row(id).transpose();
  }

  t.hidden = (params.hidden_w.transpose() * t.pooled + params.hidden_b).array().tanh().matrix();

  t.projection = params.proj_w.transpose() * t.hidden + params.proj_b;
  t.projection_norm = t.projection.norm();
  if (!(t.projection_norm > 0.0)) {
    throw RuntimeError("projection collapsed to the zero vector; cannot normalize");
  }
  t.psi = t.projection / t.projection_norm;

  t.logits = params.cls_w.transpose() * t.hidden + params.cls_b;
  Eigen::VectorXd shifted = t.logits.array() - t.logits.maxCoeff();
  Eigen::VectorXd e = shifted.array().exp();
  t.probs = e / e.sum();
  return t;
}

EncoderGrads Backward(const EncoderParams& params, std::span<const ForwardTrace> traces,
                      const EncoderUpstream& upstream) {
  const EncoderDims dims = params.dims();
  const auto n = static_cast<Eigen::Index>(traces.size());
  if (upstream.psi.rows() != n || upstream.psi.cols() != dims.projection ||
      upstream.logits.rows() != n || upstream.logits.cols() != dims.classes) {
    throw ValidationError("upstream gradient shape does not match traces and dimensions");
  }

  EncoderGrads g = EncoderParams::Zeros(dims);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ForwardTrace& t = traces[static_cast<std::size_t>(i)];
    const Eigen::VectorXd g_psi = upstream.psi.row(i).transpose();
    const Eigen::VectorXd g_logits = upstream.logits.row(i).transpose();

    // d(p/|p|)/dp = (I - psi psi^T) / |p|
    const Eigen::VectorXd g_proj = (g_psi - t.psi * t.psi.dot(g_psi)) / t.projection_norm;

    g.proj_w.noalias() += t.hidden * g_proj.transpose();
    g.proj_b += g_proj;
    g.cls_w.noalias() += t.hidden * g_logits.transpose();
    g.cls_b += g_logits;

    const Eigen::VectorXd g_hidden = params.proj_w * g_proj + params.cls_w * g_logits;
    const Eigen::VectorXd g_pre =
        (g_hidden.array() * (1.0 - t.hidden.array().square())).matrix();

    g.hidden_w.noalias() += t.pooled * g_pre.transpose();
    g.hidden_b += g_pre;

    const Eigen::VectorXd g_pooled = params.hidden_w * g_pre;
    for (auto [id, w] : t.pooling_weights) g.embedding.row(id) += w * g_pooled.transpose();
  }
  g.rho = upstream.tau * params.tau();
  return g;
}

}  // namespace dascl
