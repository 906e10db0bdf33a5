// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Response-level checks shared by the experiment harness: control-phrase
// inclusion, grounded-fact accuracy and the teacher-forced probability ratio.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cgrg/corpus.hpp"
#include "cgrg/input_settings.hpp"
#include "cgrg/model.hpp"
#include "cgrg/textproc.hpp"

namespace cgrg {

/// True when every control phrase occurs contiguously in the hypothesis tokens.
bool includes_controls(const std::vector<std::string>& hyp_tokens,
                       const std::vector<std::string>& controls);

/// Positions of response tokens that carry grounded facts: content tokens
/// found in the example's G_C sentences but in none of its control phrases
/// and none of its context turns.
std::vector<int> grounded_token_positions(const GroundedExample& example, const WordSet& stopwords);

/// Share of grounded response tokens that the hypothesis reproduces, or -1
/// when the example has none.
double fact_accuracy(const std::vector<std::string>& hyp_tokens, const GroundedExample& example,
                     const WordSet& stopwords);

struct Probe {
  std::size_t example = 0;
  int position = 0;  // index into the example's response tokens
};

/// First grounded token of each example that has one.
std::vector<Probe> entity_probes(std::span<const GroundedExample> examples, const WordSet& stopwords);

/// p(response[position] | setting input, gold response prefix).
double teacher_forced_probability(const Model& model, const Vocab& vocab,
                                  const GroundedExample& example, Setting setting, int position);

struct RatioResult {
  double ratio = 0.0;
  int used = 0;
  int skipped = 0;  // probes where model b gave probability 0
};

/// Mean over probes of p_a / p_b for the probed token under teacher forcing.
RatioResult probability_ratio(const Model& a, Setting setting_a, const Model& b, Setting setting_b,
                              const Vocab& vocab, std::span<const GroundedExample> examples,
                              std::span<const Probe> probes);

}  // namespace cgrg
