// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used by the tests. They favour
// literal, slow formulations over anything shared with the library.

#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cgrg/decoder.hpp"
#include "cgrg/maskbuilder.hpp"
#include "cgrg/model.hpp"
#include "cgrg/scorer.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg::testing {

// --- masks ------------------------------------------------------------------

/// Mask from the four exclusion predicates, evaluated per (a, b) pair.
std::vector<std::vector<bool>> brute_force_mask(const SegmentLayout& layout);

/// Random segment contents: up to `max_segments` segments in total, at most
/// `max_tokens` input tokens including separators.
SegmentInput random_segment_input(std::mt19937_64& rng, int max_segments, int max_tokens);

// --- model ------------------------------------------------------------------

/// Scores by running the full model on input + response every call.
template <typename S>
class FullForwardScorer final : public NextTokenScorer {
 public:
  FullForwardScorer(const Parameters<S>& params, ModelConfig cfg, std::vector<TokenId> input_ids,
                    EmbeddingIds input_emb, AttentionMask input_mask)
      : params_(params), cfg_(cfg), ids_(std::move(input_ids)), emb_(std::move(input_emb)),
        mask_(std::move(input_mask)) {}

  int vocab_size() const override { return cfg_.vocab_size; }
  int capacity() const override { return cfg_.max_len - static_cast<int>(ids_.size()); }
  std::vector<double> next_logprobs(std::span<const TokenId> response) override;

 private:
  const Parameters<S>& params_;
  ModelConfig cfg_;
  std::vector<TokenId> ids_;
  EmbeddingIds emb_;
  AttentionMask mask_;
};

/// Fixed table of next-token distributions keyed by the response prefix,
/// drawn at random on first use. Deterministic in `seed`.
class TableScorer final : public NextTokenScorer {
 public:
  TableScorer(int vocab, std::uint64_t seed, double temperature = 1.0)
      : vocab_(vocab), seed_(seed), temperature_(temperature) {}
  int vocab_size() const override { return vocab_; }
  int capacity() const override { return 1 << 20; }
  std::vector<double> next_logprobs(std::span<const TokenId> response) override;

 private:
  int vocab_;
  std::uint64_t seed_;
  double temperature_;
  std::map<std::vector<TokenId>, std::vector<double>> table_;
};

struct OracleResult {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
  bool finished = false;
  bool found = false;
};

/// Enumerates every response of at most `horizon` steps (a step emits a
/// token or <eos>) and returns the most probable one holding each
/// constraint as a run, with the runs pairwise disjoint. Ties prefer the
/// lexicographically smaller token sequence.
OracleResult exhaustive_constrained_argmax(NextTokenScorer& scorer,
                                           const std::vector<std::vector<TokenId>>& constraints,
                                           int horizon, TokenId eos);

/// True when the constraints can be placed as pairwise disjoint runs.
bool disjoint_placement(const std::vector<TokenId>& seq,
                        const std::vector<std::vector<TokenId>>& constraints);

// --- metrics ----------------------------------------------------------------

using Sentence = std::vector<std::string>;

double ref_bleu4(const Sentence& hyp, const std::vector<Sentence>& refs);
double ref_corpus_bleu4(const std::vector<Sentence>& hyps, const std::vector<std::vector<Sentence>>& refs);
double ref_nist4(const Sentence& hyp, const std::vector<Sentence>& refs, const std::vector<Sentence>& pool);
double ref_corpus_nist4(const std::vector<Sentence>& hyps, const std::vector<std::vector<Sentence>>& refs,
                        const std::vector<Sentence>& pool);
double ref_div2(const std::vector<Sentence>& hyps);
/// Precision, recall and F1 of two token sets.
std::vector<double> ref_prf(const std::vector<std::string>& predicted, const std::vector<std::string>& reference);

}  // namespace cgrg::testing
