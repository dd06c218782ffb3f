#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dascl/lexicon.h"

namespace dascl {

// Token <-> dense id map. Id 0 is always the unknown token.
class Vocab {
 public:
  static constexpr std::string_view kUnknown = "<unk>";
  static constexpr int kUnknownId = 0;

  Vocab();

  // Builds a vocabulary from documents in first-appearance order.
  static Vocab Build(std::span<const TokenizedDoc> docs);
  // Rebuilds from an id-ordered token list (checkpoint loading).
  static Vocab FromTokens(std::vector<std::string> tokens);

  int Add(const std::string& token);
  int Id(const std::string& token) const;
  const std::string& Token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Maps a document to ids; unseen tokens become <unk> and an empty
  // document becomes a single <unk>.
  std::vector<int> Encode(const TokenizedDoc& doc) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct EncoderDims {
  int vocab = 1;
  int embedding = 64;
  int hidden = 64;
  int projection = 32;
  int classes = 2;

  void Validate() const;
  friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

// All trainable weights. Gradients use the same layout. Matrices are laid
// out input-major, so a row vector x maps to x * W.
struct EncoderParams {
  Eigen::MatrixXd embedding;  // V x E
  Eigen::MatrixXd hidden_w;   // E x H
  Eigen::VectorXd hidden_b;   // H
  Eigen::MatrixXd proj_w;     // H x P
  Eigen::VectorXd proj_b;     // P
  Eigen::MatrixXd cls_w;      // H x C
  Eigen::VectorXd cls_b;      // C
  double rho = 0.0;           // temperature = exp(rho)

  static EncoderParams Zeros(const EncoderDims& dims);

  EncoderDims dims() const;
  double tau() const;
  std::size_t NumValues() const;

  // Calls fn(name, std::span<double>) for every parameter block in a fixed
  // order. Blocks are contiguous in Eigen's storage order.
  template <typename Self, typename Fn>
  static void ForEachBlock(Self& p, Fn&& fn) {
    fn("embedding", std::span(p.embedding.data(), static_cast<std::size_t>(p.embedding.size())));
    fn("hidden_w", std::span(p.hidden_w.data(), static_cast<std::size_t>(p.hidden_w.size())));
    fn("hidden_b", std::span(p.hidden_b.data(), static_cast<std::size_t>(p.hidden_b.size())));
    fn("proj_w", std::span(p.proj_w.data(), static_cast<std::size_t>(p.proj_w.size())));
    fn("proj_b", std::span(p.proj_b.data(), static_cast<std::size_t>(p.proj_b.size())));
    fn("cls_w", std::span(p.cls_w.data(), static_cast<std::size_t>(p.cls_w.size())));
    fn("cls_b", std::span(p.cls_b.data(), static_cast<std::size_t>(p.cls_b.size())));
    fn("rho", std::span(&p.rho, 1));
  }
  template <typename Fn>
  void ForEachBlock(Fn&& fn) { ForEachBlock(*this, fn); }
  template <typename Fn>
  void ForEachBlock(Fn&& fn) const { ForEachBlock(*this, fn); }
};

using EncoderGrads = EncoderParams;

// Cached activations of one document.
struct ForwardTrace {
  // Distinct token ids in ascending order with weight count/length. Pooling
  // sums in this order, so it is exactly invariant to token order and to
  // repeating every token k times.
  std::vector<std::pair<int, double>> pooling_weights;
  Eigen::VectorXd pooled;      // E, mean of token embeddings
  Eigen::VectorXd hidden;      // H, tanh(pooled * W_h + b_h)
  Eigen::VectorXd projection;  // P, unnormalized
  double projection_norm = 0.0;
  Eigen::VectorXd psi;         // P, unit norm
  Eigen::VectorXd logits;      // C
  Eigen::VectorXd probs;       // C, softmax(logits)
};

// Glorot-uniform weights, zero biases, rho = ln(tau_init). Deterministic
// given the seed.
EncoderParams InitParams(const EncoderDims& dims, std::uint64_t seed, double tau_init);

ForwardTrace Encode(const EncoderParams& params, std::span<const int> token_ids);

// Upstream gradients for a batch: row i of each matrix belongs to trace i.
struct EncoderUpstream {
  Eigen::MatrixXd psi;     // n x P, dLoss/dPsi
  Eigen::MatrixXd logits;  // n x C, dLoss/dlogits
  double tau = 0.0;        // dLoss/dtau
};

// Reverse-mode gradients of all parameters. The temperature gradient is
// chained through tau = exp(rho).
EncoderGrads Backward(const EncoderParams& params, std::span<const ForwardTrace> traces,
                      const EncoderUpstream& upstream);

}  // namespace dascl
