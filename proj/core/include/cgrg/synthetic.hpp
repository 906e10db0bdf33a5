// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Desk-scale grounded dialogue generator.
//
// Each example asks about one person. The grounding lists templated facts
// ("sam studied physics at toronto in 2017"); the response restates one of
// them in different words. Facts are drawn fresh per example, so the year in
// the response can only be recovered from the grounding. A second fact about
// the same person shares the place, which puts two sentences into G_C that
// the context alone cannot tell apart; the topic control disambiguates them.

#pragma once

#include <cstdint>
#include <vector>

#include "cgrg/corpus.hpp"

namespace cgrg {

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int n_examples = 100;
  int n_entities = 40;
  int n_facts_per_entity = 3;
  int n_other_facts = 2;  // facts about unrelated people
  ExtractionConfig extraction{};
};

std::vector<GroundedExample> generate_synthetic(const SyntheticSpec& spec);

}  // namespace cgrg
