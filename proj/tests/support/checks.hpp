// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Measurement routines shared by the unit tests (small sizes) and the
// acceptance run (full sizes). Each returns raw numbers; callers decide.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cgrg::testing {

struct MaskOracleStats {
  int layouts = 0;
  long mismatches = 0;
  double seconds = 0.0;
};
/// Random layouts with at most 12 segments and 64 tokens, compared bit by
/// bit against the brute-force mask.
MaskOracleStats run_mask_oracle(int layouts, std::uint64_t seed);

struct IsolationStats {
  int instances = 0;
  long forbidden_perturbations = 0;
  double max_forbidden_delta = 0.0;  // largest change seen in C_i hidden states
  int allowed_trials = 0;
  int allowed_changed = 0;  // trials with a change >= 1e-6
};
/// Double-precision tiny model; perturbs tokens outside and inside the
/// sentences a control phrase may attend to.
IsolationStats run_isolation(int instances, std::uint64_t seed);

struct CausalityStats {
  int instances = 0;
  long violations = 0;  // logits before the perturbed position that moved
  long unchanged_after = 0;  // perturbations that left every later logit equal
};
CausalityStats run_causality(int instances, std::uint64_t seed);

struct GradCheckStats {
  int samples = 0;
  double max_rel_error = 0.0;
  std::string worst;
  std::vector<std::string> kinds;  // tensor kinds sampled
  // Key biases shift every score in a row equally, so their true gradient is
  // zero. They are checked by magnitude instead of relative error.
  double max_key_bias_grad = 0.0;
  double seconds = 0.0;
};
/// Central differences with step 1e-4 on the double model.
GradCheckStats run_gradient_check(int samples, std::uint64_t seed);

struct MetricFixtureStats {
  int fixtures = 0;
  double max_bleu_diff = 0.0;  // sentence, corpus and multi-reference
  double max_nist_diff = 0.0;
  double max_div2_diff = 0.0;
  double max_prf_diff = 0.0;
  bool special_cases_exact = false;  // identity and zero cases
};
/// Library metrics against the independent scorers on the frozen fixtures.
MetricFixtureStats run_metric_fixtures(const std::string& path);

struct OverfitStats {
  int examples = 0;
  int steps = 0;
  double final_loss = 0.0;  // mean loss over the whole set after training
  int first_step_below = -1;  // first step whose batch loss was < 0.1
  double seconds = 0.0;
};
/// Trains the default model on `examples` synthetic X+C+GC+IA instances.
OverfitStats run_overfit(int examples, int steps, std::uint64_t seed);

struct GbsStats {
  int decodes = 0;
  int hypotheses = 0;
  int missing_constraint = 0;
  int oracle_instances = 0;
  int oracle_mismatches = 0;
  std::string first_mismatch;
};
/// `decodes` constrained decodes (1-3 constraints) with a random tiny model
/// plus `oracle_instances` exhaustive comparisons on a vocabulary of 5.
GbsStats run_gbs(int decodes, int oracle_instances, std::uint64_t seed);

}  // namespace cgrg::testing
