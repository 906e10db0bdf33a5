// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Greedy decoding and lexically constrained grid beam search.
//
// Grid beam search keeps one beam per coverage level k (number of constraint
// tokens placed). A hypothesis grows by generating a free token (same bank),
// starting an unused constraint or continuing its open one (bank k + 1).
// <eos> is only allowed once every constraint is complete, so any returned
// hypothesis holds each constraint as a contiguous run.

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cgrg/scorer.hpp"
#include "cgrg/textproc.hpp"

namespace cgrg {

enum class DecodeMethod { kGreedy, kGbs };

std::string_view method_name(DecodeMethod m);
DecodeMethod parse_method(std::string_view name);

struct DecodeParams {
  int max_new_tokens = 30;
  DecodeMethod method = DecodeMethod::kGreedy;
  int beam_per_bank = 4;
  TokenId eos_id = Vocab::kEosId;

  void validate() const;
};

struct Hypothesis {
  std::vector<TokenId> token_ids;  // excludes the final <eos>
  std::vector<double> token_logprobs;  // one per emitted token, <eos> included
  double logprob = 0.0;
  int coverage = 0;
  std::optional<std::pair<int, int>> open_constraint;  // (constraint, next token index)
  std::vector<bool> used;  // per constraint: started or completed
  bool finished = false;   // ended with <eos>
};

/// Argmax decoding; ties go to the lowest token id. Throws SequenceTooLong
/// when max_new_tokens do not fit after the input.
Hypothesis greedy(NextTokenScorer& scorer, const DecodeParams& dp);

/// Best hypotheses (best first, at most beam_per_bank, distinct token
/// sequences) that contain every constraint. Candidates are hypotheses that
/// emitted <eos> from the full-coverage bank plus full-coverage hypotheses
/// alive at the horizon, ranked by total log-probability. Throws
/// ConstraintsUnsatisfiable when there is none.
std::vector<Hypothesis> grid_beam_search_nbest(NextTokenScorer& scorer,
                                               const std::vector<std::vector<TokenId>>& constraints,
                                               const DecodeParams& dp);

Hypothesis grid_beam_search(NextTokenScorer& scorer,
                            const std::vector<std::vector<TokenId>>& constraints,
                            const DecodeParams& dp);

/// True when every constraint occurs contiguously in `tokens`.
bool contains_all_constraints(std::span<const TokenId> tokens,
                              const std::vector<std::vector<TokenId>>& constraints);

}  // namespace cgrg
