// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/decoder.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

void check_room(const NextTokenScorer& scorer, const DecodeParams& dp) {
  if (dp.max_new_tokens > scorer.capacity()) {
    throw SequenceTooLong("no room for " + std::to_string(dp.max_new_tokens) + " new tokens");
  }
}

// Best first; equal scores fall back to the token sequence so results never
// depend on container order.
bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  return a.token_ids < b.token_ids;
}

bool same_state(const Hypothesis& a, const Hypothesis& b) {
  return a.token_ids == b.token_ids && a.finished == b.finished &&
         a.open_constraint == b.open_constraint && a.used == b.used;
}

// Indices of the `count` most probable tokens, skipping `skip`; ties go to
// the lower id.
std::vector<TokenId> top_tokens(const std::vector<double>& lp, std::size_t count, TokenId skip) {
  std::vector<TokenId> ids;
  ids.reserve(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k) {
    if (static_cast<TokenId>(k) != skip) ids.push_back(static_cast<TokenId>(k));
  }
  count = std::min(count, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count), ids.end(),
                    [&](TokenId a, TokenId b) {
                      const auto ua = static_cast<std::size_t>(a);
                      const auto ub = static_cast<std::size_t>(b);
                      return lp[ua] != lp[ub] ? lp[ua] > lp[ub] : a < b;
                    });
  ids.resize(count);
  return ids;
}

Hypothesis append(const Hypothesis& h, TokenId token, double lp) {
  Hypothesis out = h;
  out.token_ids.push_back(token);
  out.token_logprobs.push_back(lp);
  out.logprob += lp;
  return out;
}

void prune(std::vector<Hypothesis>& bank, std::size_t width) {
  std::sort(bank.begin(), bank.end(), better);
  std::vector<Hypothesis> kept;
  for (auto& h : bank) {
    if (kept.size() == width) break;
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const Hypothesis& k) { return same_state(k, h); });
    if (!dup) kept.push_back(std::move(h));
  }
  bank = std::move(kept);
}

}  // namespace

std::string_view method_name(DecodeMethod m) { return m == DecodeMethod::kGreedy ? "greedy" : "gbs"; }

DecodeMethod parse_method(std::string_view name) {
  if (name == "greedy") return DecodeMethod::kGreedy;
  if (name == "gbs") return DecodeMethod::kGbs;
  throw InvalidArgument("unknown decode method '" + std::string(name) + "'");
}

void DecodeParams::validate() const {
  if (max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be >= 1");
  if (beam_per_bank < 1) throw InvalidArgument("beam_per_bank must be >= 1");
}

Hypothesis greedy(NextTokenScorer& scorer, const DecodeParams& dp) {
  dp.validate();
  check_room(scorer, dp);
  Hypothesis h;
  for (int t = 0; t < dp.max_new_tokens; ++t) {
    const std::vector<double> lp = scorer.next_logprobs(h.token_ids);
    const auto best = static_cast<TokenId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    h.logprob += lp[static_cast<std::size_t>(best)];
    h.token_logprobs.push_back(lp[static_cast<std::size_t>(best)]);
    if (best == dp.eos_id) {
      h.finished = true;
      break;
    }
    h.token_ids.push_back(best);
  }
  return h;
}

std::vector<Hypothesis> grid_beam_search_nbest(NextTokenScorer& scorer,
                                               const std::vector<std::vector<TokenId>>& constraints,
                                               const DecodeParams& dp) {
  dp.validate();
  int total = 0;
  for (const auto& c : constraints) {
    if (c.empty()) throw InvalidArgument("empty constraint");
    for (TokenId t : c) {
      if (t < 0 || t >= scorer.vocab_size()) throw InvalidArgument("constraint token out of range");
      if (t == dp.eos_id) throw InvalidArgument("constraint contains <eos>");
    }
    total += static_cast<int>(c.size());
  }
  if (total > dp.max_new_tokens) throw ConstraintsUnsatisfiable();
  check_room(scorer, dp);

  const auto width = static_cast<std::size_t>(dp.beam_per_bank);
  const auto n_banks = static_cast<std::size_t>(total) + 1;
  std::vector<std::vector<Hypothesis>> banks(n_banks);
  Hypothesis root;
  root.used.assign(constraints.size(), false);
  banks[0].push_back(root);
  std::vector<Hypothesis> finished;
  bool reached_horizon = true;

  for (int t = 0; t < dp.max_new_tokens; ++t) {
    std::vector<std::vector<Hypothesis>> next(n_banks);
    for (std::size_t c = 0; c < n_banks; ++c) {
      const bool full = c + 1 == n_banks;
      for (const Hypothesis& h : banks[c]) {
        const std::vector<double> lp = scorer.next_logprobs(h.token_ids);
        if (h.open_constraint) {
          const auto [i, j] = *h.open_constraint;
          const auto& phrase = constraints[static_cast<std::size_t>(i)];
          const TokenId tok = phrase[static_cast<std::size_t>(j)];
          Hypothesis ext = append(h, tok, lp[static_cast<std::size_t>(tok)]);
          ext.coverage += 1;
          if (static_cast<std::size_t>(j + 1) < phrase.size()) {
            ext.open_constraint = std::make_pair(i, j + 1);
          } else {
            ext.open_constraint.reset();
          }
          next[c + 1].push_back(std::move(ext));
          continue;
        }
        for (TokenId tok : top_tokens(lp, width, dp.eos_id)) {
          next[c].push_back(append(h, tok, lp[static_cast<std::size_t>(tok)]));
        }
        if (full) {
          Hypothesis done = h;
          done.logprob += lp[static_cast<std::size_t>(dp.eos_id)];
          done.token_logprobs.push_back(lp[static_cast<std::size_t>(dp.eos_id)]);
          done.finished = true;
          next[c].push_back(std::move(done));
        }
        for (std::size_t i = 0; i < constraints.size(); ++i) {
          if (h.used[i]) continue;
          const TokenId tok = constraints[i].front();
          Hypothesis ext = append(h, tok, lp[static_cast<std::size_t>(tok)]);
          ext.coverage += 1;
          ext.used[i] = true;
          if (constraints[i].size() > 1) ext.open_constraint = std::make_pair(static_cast<int>(i), 1);
          next[c + 1].push_back(std::move(ext));
        }
      }
    }

    bool any_live = false;
    double best_live = -std::numeric_limits<double>::infinity();
    for (auto& bank : next) {
      prune(bank, width);
      std::vector<Hypothesis> live;
      for (auto& h : bank) {
        if (h.finished) {
          finished.push_back(std::move(h));
        } else {
          best_live = std::max(best_live, h.logprob);
          live.push_back(std::move(h));
        }
      }
      any_live = any_live || !live.empty();
      bank = std::move(live);
    }
    banks = std::move(next);
    if (!any_live) {
      reached_horizon = false;
      break;
    }
    // Scores only go down, so nothing alive can overtake a better finished one.
    const bool settled = std::any_of(finished.begin(), finished.end(),
                                     [&](const Hypothesis& f) { return f.logprob > best_live; });
    if (settled && t + 1 < dp.max_new_tokens) {
      reached_horizon = false;
      break;
    }
  }

  std::vector<Hypothesis> candidates = std::move(finished);
  if (reached_horizon) {
    for (auto& h : banks.back()) candidates.push_back(std::move(h));
  }
  std::sort(candidates.begin(), candidates.end(), better);
  std::vector<Hypothesis> out;
  for (auto& h : candidates) {
    if (out.size() == width) break;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Hypothesis& k) { return k.token_ids == h.token_ids; });
    if (!dup) out.push_back(std::move(h));
  }
  if (out.empty()) throw ConstraintsUnsatisfiable();
  return out;
}

Hypothesis grid_beam_search(NextTokenScorer& scorer,
                            const std::vector<std::vector<TokenId>>& constraints,
                            const DecodeParams& dp) {
  return grid_beam_search_nbest(scorer, constraints, dp).front();
}

bool contains_all_constraints(std::span<const TokenId> tokens,
                              const std::vector<std::vector<TokenId>>& constraints) {
  for (const auto& c : constraints) {
    if (c.empty()) continue;
    if (std::search(tokens.begin(), tokens.end(), c.begin(), c.end()) == tokens.end()) return false;
  }
  return true;
}

}  // namespace cgrg
