// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cgrg/error.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg {

bool includes_controls(const std::vector<std::string>& hyp_tokens,
                       const std::vector<std::string>& controls) {
  return std::all_of(controls.begin(), controls.end(), [&](const std::string& c) {
    const auto tokens = normalize(c);
    return tokens.empty() || contains_phrase(hyp_tokens, tokens);
  });
}

std::vector<int> grounded_token_positions(const GroundedExample& example, const WordSet& stopwords) {
  std::unordered_set<std::string> in_gc, excluded;
  for (int j : select_gc(example.grounding, example.controls)) {
    for (auto& t : normalize(example.grounding[static_cast<std::size_t>(j)])) in_gc.insert(std::move(t));
  }
  for (const auto& c : example.controls) {
    for (auto& t : normalize(c)) excluded.insert(std::move(t));
  }
  for (const auto& u : example.context) {
    for (auto& t : normalize(u)) excluded.insert(std::move(t));
  }
  std::vector<int> out;
  const auto response = normalize(example.response);
  for (std::size_t k = 0; k < response.size(); ++k) {
    const auto& t = response[k];
    if (!is_function_token(t, stopwords) && in_gc.count(t) && !excluded.count(t)) {
      out.push_back(static_cast<int>(k));
    }
  }
  return out;
}

double fact_accuracy(const std::vector<std::string>& hyp_tokens, const GroundedExample& example,
                     const WordSet& stopwords) {
  const auto positions = grounded_token_positions(example, stopwords);
  if (positions.empty()) return -1.0;
  const auto response = normalize(example.response);
  const std::unordered_set<std::string> hyp(hyp_tokens.begin(), hyp_tokens.end());
  int hit = 0;
  for (int p : positions) hit += hyp.count(response[static_cast<std::size_t>(p)]) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(positions.size());
}

std::vector<Probe> entity_probes(std::span<const GroundedExample> examples, const WordSet& stopwords) {
  std::vector<Probe> probes;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto positions = grounded_token_positions(examples[i], stopwords);
    if (!positions.empty()) probes.push_back({i, positions.front()});
  }
  return probes;
}

double teacher_forced_probability(const Model& model, const Vocab& vocab,
                                  const GroundedExample& example, Setting setting, int position) {
  const std::vector<TokenId> response = encode(example.response, vocab);
  if (position < 0 || position >= static_cast<int>(response.size())) {
    throw InvalidArgument("probe position outside the response");
  }
  const ModelInput input = build_model_input(example, training_setting(setting), vocab,
                                             static_cast<int>(response.size()), limits_for(model.config));
  const TrainingInstance inst = teacher_forced_instance(input, response);
  ForwardOptions opts;
  opts.keep_hidden = false;
  opts.logit_rows = std::vector<int>{inst.r_start - 1 + position};
  const auto trace = forward<float>(model.params, model.config, inst.token_ids, inst.embedding_ids,
                                    inst.mask, opts);
  const auto lp = log_softmax_row(trace.logits.row(0));
  return std::exp(lp[static_cast<std::size_t>(response[static_cast<std::size_t>(position)])]);
}

RatioResult probability_ratio(const Model& a, Setting setting_a, const Model& b, Setting setting_b,
                              const Vocab& vocab, std::span<const GroundedExample> examples,
                              std::span<const Probe> probes) {
  RatioResult out;
  double sum = 0.0;
  for (const auto& probe : probes) {
    if (probe.example >= examples.size()) throw InvalidArgument("probe refers to a missing example");
    const auto& ex = examples[probe.example];
    const double pb = teacher_forced_probability(b, vocab, ex, setting_b, probe.position);
    if (pb <= 0.0) {
      ++out.skipped;
      continue;
    }
    sum += teacher_forced_probability(a, vocab, ex, setting_a, probe.position) / pb;
    ++out.used;
  }
  out.ratio = out.used ? sum / out.used : 0.0;
  return out;
}

}  // namespace cgrg
