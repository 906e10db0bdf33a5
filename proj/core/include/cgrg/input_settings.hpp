// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Builds model inputs for each input setting.
//
//   X          context only
//   X+G        context and the whole grounding
//   X+C        context and control phrases
//   X+GC       context and the grounding sentences holding a control phrase
//   X+C+GC     both, concatenated under a causal mask
//   X+C+GC+IA  both, under the inductive attention mask
//   X+C+G      decodes with the X+G model, control phrases as decoding constraints

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cgrg/corpus.hpp"
#include "cgrg/maskbuilder.hpp"
#include "cgrg/textproc.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg {

enum class Setting { kX, kXG, kXC, kXGC, kXCGC, kXCGCIA, kXCG };

std::string_view setting_name(Setting s);
/// Throws InvalidArgument("unknown setting ...") for anything else.
Setting parse_setting(std::string_view name);
const std::vector<Setting>& all_settings();
/// Setting whose trained model serves `s`.
Setting training_setting(Setting s);
bool uses_decoding_constraints(Setting s);

/// Everything a decoder needs for one instance.
struct ModelInput {
  std::vector<TokenId> input_ids;
  EmbeddingIds embedding_ids;  // input positions only
  AttentionMask mask;          // input positions only
  SegmentLayout layout;        // r_len is the reserved response room
  std::vector<int> gc_indices;                    // example grounding indices in the input
  std::vector<std::string> controls;              // phrases in the input or used as constraints
  std::vector<std::vector<TokenId>> constraints;  // non-empty only for X+C+G
  bool inductive = false;
};

/// Default limits with the sequence cap of `cfg`.
LayoutLimits limits_for(const ModelConfig& cfg);

/// Lays out `example` (its controls are taken as given) for setting `s`,
/// keeping `response_room` positions free after the input.
ModelInput build_model_input(const GroundedExample& example, Setting s, const Vocab& vocab,
                             int response_room, const LayoutLimits& limits = {});

/// Input plus the example response, ready for teacher forcing.
TrainingInstance build_training_instance(const GroundedExample& example, Setting s,
                                         const Vocab& vocab, const LayoutLimits& limits = {});

/// Extends a model input with `response` for a full, non-incremental pass.
TrainingInstance teacher_forced_instance(const ModelInput& input, std::span<const TokenId> response);

}  // namespace cgrg
