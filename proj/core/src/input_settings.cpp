// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/input_settings.hpp"

#include <array>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

constexpr std::array<std::pair<Setting, std::string_view>, 7> kNames{{
    {Setting::kX, "X"},
    {Setting::kXG, "X+G"},
    {Setting::kXC, "X+C"},
    {Setting::kXGC, "X+GC"},
    {Setting::kXCGC, "X+C+GC"},
    {Setting::kXCGCIA, "X+C+GC+IA"},
    {Setting::kXCG, "X+C+G"},
}};

struct Assembled {
  SegmentInput segments;
  std::vector<int> gc_indices;
  std::vector<std::string> controls;
  std::vector<std::vector<TokenId>> constraints;
  bool inductive = false;
};

std::vector<std::vector<TokenId>> encode_all(const std::vector<std::string>& texts, const Vocab& vocab) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encode(t, vocab));
  return out;
}

Assembled assemble(const GroundedExample& ex, Setting s, const Vocab& vocab) {
  if (ex.context.empty()) throw InvalidArgument("example has no context");
  Assembled out;
  out.segments.context = encode_all(ex.context, vocab);

  const bool with_c = s == Setting::kXC || s == Setting::kXCGC || s == Setting::kXCGCIA;
  const bool with_gc = s == Setting::kXGC || s == Setting::kXCGC || s == Setting::kXCGCIA;
  const bool with_g = s == Setting::kXG || s == Setting::kXCG;

  if (with_g) {
    for (std::size_t j = 0; j < ex.grounding.size(); ++j) {
      out.gc_indices.push_back(static_cast<int>(j));
      out.segments.grounding.push_back(encode(ex.grounding[j], vocab));
    }
  } else if (with_gc) {
    out.gc_indices = select_gc(ex.grounding, ex.controls);
    for (int j : out.gc_indices) {
      out.segments.grounding.push_back(encode(ex.grounding[static_cast<std::size_t>(j)], vocab));
    }
  }

  if (with_c) {
    std::vector<std::vector<std::string>> placed;
    for (int j : out.gc_indices) placed.push_back(normalize(ex.grounding[static_cast<std::size_t>(j)]));
    for (const auto& phrase : ex.controls) {
      out.controls.push_back(phrase);
      out.segments.controls.push_back(encode(phrase, vocab));
      const auto tokens = normalize(phrase);
      std::vector<int> holds;
      if (with_gc) {
        for (std::size_t k = 0; k < placed.size(); ++k) {
          if (contains_phrase(placed[k], tokens)) holds.push_back(static_cast<int>(k));
        }
      }
      out.segments.containment.push_back(std::move(holds));
    }
  }

  if (s == Setting::kXCG) {
    out.controls = ex.controls;
    out.constraints = encode_all(ex.controls, vocab);
    std::erase_if(out.constraints, [](const auto& c) { return c.empty(); });
  }
  out.inductive = s == Setting::kXCGCIA;
  return out;
}

}  // namespace

std::string_view setting_name(Setting s) {
  for (const auto& [setting, name] : kNames) {
    if (setting == s) return name;
  }
  throw InvalidArgument("unknown setting");
}

Setting parse_setting(std::string_view name) {
  for (const auto& [setting, n] : kNames) {
    if (n == name) return setting;
  }
  throw InvalidArgument("unknown setting '" + std::string(name) + "'");
}

const std::vector<Setting>& all_settings() {
  static const std::vector<Setting> settings = [] {
    std::vector<Setting> v;
    for (const auto& entry : kNames) v.push_back(entry.first);
    return v;
  }();
  return settings;
}

Setting training_setting(Setting s) { return s == Setting::kXCG ? Setting::kXG : s; }

bool uses_decoding_constraints(Setting s) { return s == Setting::kXCG; }

LayoutLimits limits_for(const ModelConfig& cfg) {
  LayoutLimits lim;
  lim.max_len = cfg.max_len;
  return lim;
}

ModelInput build_model_input(const GroundedExample& example, Setting s, const Vocab& vocab,
                             int response_room, const LayoutLimits& limits) {
  Assembled a = assemble(example, s, vocab);
  ModelInput in;
  in.layout = build_layout(a.segments, response_room, limits);
  in.input_ids = assemble_input(a.segments, in.layout);
  SegmentLayout input_only = in.layout;
  input_only.r_len = 0;
  input_only.total_len = input_only.r_start;
  in.mask = a.inductive ? build_mask(input_only) : AttentionMask::causal(input_only.total_len);
  in.embedding_ids = build_embedding_ids(input_only);
  in.gc_indices.reserve(in.layout.g_spans.size());
  for (std::size_t j = 0; j < in.layout.g_spans.size(); ++j) in.gc_indices.push_back(a.gc_indices[j]);
  in.controls = std::move(a.controls);
  if (!uses_decoding_constraints(s)) {
    in.controls.resize(std::min(in.controls.size(), in.layout.c_spans.size()));
  }
  in.constraints = std::move(a.constraints);
  in.inductive = a.inductive;
  return in;
}

TrainingInstance teacher_forced_instance(const ModelInput& input, std::span<const TokenId> response) {
  TrainingInstance inst;
  inst.r_start = static_cast<int>(input.input_ids.size());
  inst.token_ids = input.input_ids;
  inst.token_ids.insert(inst.token_ids.end(), response.begin(), response.end());
  inst.embedding_ids = input.embedding_ids;
  inst.embedding_ids.append_response(static_cast<int>(response.size()));
  inst.mask = input.mask.extended(static_cast<int>(inst.token_ids.size()));
  inst.targets.assign(response.begin(), response.end());
  inst.targets.push_back(Vocab::kEosId);
  return inst;
}

TrainingInstance build_training_instance(const GroundedExample& example, Setting s,
                                         const Vocab& vocab, const LayoutLimits& limits) {
  const std::vector<TokenId> response = encode(example.response, vocab);
  if (response.empty()) throw InvalidArgument("example has an empty response");
  const ModelInput input =
      build_model_input(example, training_setting(s), vocab, static_cast<int>(response.size()), limits);
  return teacher_forced_instance(input, response);
}

}  // namespace cgrg
