// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Pre-layer-norm decoder-only transformer with an arbitrary boolean attention
// mask, exact backpropagation and an incremental scorer for decoding.
//
//   h_0     = tok[x] + type[t] + pos[p]
//   a       = LN1(h);  Q, K, V = a W_q + b_q, ...
//   head_k  = softmax over allowed b of (Q_k K_k^T / sqrt(d_head)), times V_k
//   h      += concat(head) W_o + b_o
//   h      += GELU(LN2(h) W_1 + b_1) W_2 + b_2
//   logits  = LN_f(h) tok^T
//
// Masked entries get exactly zero weight.

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cgrg/maskbuilder.hpp"
#include "cgrg/model.hpp"
#include "cgrg/scorer.hpp"

namespace cgrg {

template <typename S>
struct ForwardTrace {
  Matrix<S> logits;             // one row per entry of logit_rows
  std::vector<int> logit_rows;  // sequence positions of the logits rows
  std::vector<Matrix<S>> hidden;  // residual stream: embeddings, then after each layer
  std::vector<std::vector<Matrix<S>>> attention;  // [layer][head], L x L, when requested
};

struct ForwardOptions {
  bool keep_hidden = true;
  bool keep_attention = false;
  std::optional<std::vector<int>> logit_rows;  // nullopt: every position
};

template <typename S>
ForwardTrace<S> forward(const Parameters<S>& params, const ModelConfig& cfg,
                        std::span<const TokenId> token_ids, const EmbeddingIds& embedding_ids,
                        const AttentionMask& mask, const ForwardOptions& opts = {});

/// Mean negative log-likelihood of `targets` (response then <eos>) where
/// position r_start - 1 + k predicts targets[k]. The trace must hold logits
/// for those rows. Throws InvalidArgument when the response is empty.
template <typename S>
S loss(const ForwardTrace<S>& trace, std::span<const TokenId> targets, int r_start);

/// One training sequence: the input followed by the response tokens.
struct TrainingInstance {
  std::vector<TokenId> token_ids;
  EmbeddingIds embedding_ids;
  AttentionMask mask;
  int r_start = 0;
  std::vector<TokenId> targets;  // response followed by <eos>

  int response_len() const { return static_cast<int>(targets.size()) - 1; }
};

/// Mean over `batch` of the per-instance response loss. When `grad` is
/// given it is overwritten with the exact gradient of that mean.
template <typename S>
S loss_and_gradient(const Parameters<S>& params, const ModelConfig& cfg,
                    std::span<const TrainingInstance> batch, Parameters<S>* grad);

/// Incremental scorer over a parameter snapshot. The input is run once;
/// response tokens are appended with cached keys and values. Response rows
/// attend to every earlier position.
template <typename S>
class CachedScorer final : public NextTokenScorer {
 public:
  CachedScorer(std::shared_ptr<const Parameters<S>> params, ModelConfig cfg,
               std::span<const TokenId> input_ids, const EmbeddingIds& input_embedding_ids,
               const AttentionMask& input_mask);

  int vocab_size() const override { return cfg_.vocab_size; }
  int capacity() const override { return cfg_.max_len - input_len_; }
  std::vector<double> next_logprobs(std::span<const TokenId> response) override;

 private:
  struct Node {
    std::shared_ptr<const Node> parent;
    int depth = 0;
    std::vector<Matrix<S>> k, v;  // per layer, 1 x d
    std::vector<double> logprobs;
  };

  std::shared_ptr<const Node> node_for(std::span<const TokenId> response);
  std::shared_ptr<const Node> extend(const std::shared_ptr<const Node>& parent, TokenId token);

  std::shared_ptr<const Parameters<S>> params_;
  ModelConfig cfg_;
  int input_len_ = 0;
  std::vector<Matrix<S>> input_k_, input_v_;
  std::map<std::vector<TokenId>, std::shared_ptr<const Node>> nodes_;
};

extern template class CachedScorer<float>;
extern template class CachedScorer<double>;

/// Log-softmax of a logits row, computed in double.
template <typename Derived>
std::vector<double> log_softmax_row(const Eigen::MatrixBase<Derived>& row) {
  const double mx = static_cast<double>(row.maxCoeff());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < row.size(); ++k) sum += std::exp(static_cast<double>(row(k)) - mx);
  const double log_z = mx + std::log(sum);
  std::vector<double> out(static_cast<std::size_t>(row.size()));
  for (Eigen::Index k = 0; k < row.size(); ++k) out[static_cast<std::size_t>(k)] = static_cast<double>(row(k)) - log_z;
  return out;
}

}  // namespace cgrg
