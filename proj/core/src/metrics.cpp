// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "cgrg/error.hpp"
#include "cgrg/textproc.hpp"

namespace cgrg {

namespace {

constexpr int kMaxOrder = 4;

using Counts = std::map<Tokens, int>;

Counts ngram_counts(const Tokens& tokens, int n) {
  Counts counts;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) {
    ++counts[Tokens(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

// For each n-gram, the largest count found in any single reference.
Counts max_ref_counts(const std::vector<Tokens>& refs, int n) {
  Counts best;
  for (const auto& r : refs) {
    for (const auto& [g, c] : ngram_counts(r, n)) best[g] = std::max(best[g], c);
  }
  return best;
}

struct Clipped {
  long matches = 0;
  long total = 0;
};

Clipped clipped_matches(const Tokens& hyp, const std::vector<Tokens>& refs, int n) {
  Clipped out;
  const Counts ref = max_ref_counts(refs, n);
  for (const auto& [g, c] : ngram_counts(hyp, n)) {
    out.total += c;
    if (auto it = ref.find(g); it != ref.end()) out.matches += std::min(c, it->second);
  }
  return out;
}

std::size_t closest_ref_len(std::size_t hyp_len, const std::vector<Tokens>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = std::labs(static_cast<long>(r.size()) - static_cast<long>(hyp_len));
    const auto bd = std::labs(static_cast<long>(best) - static_cast<long>(hyp_len));
    if (d < bd || (d == bd && r.size() < best)) best = r.size();
  }
  return best;
}

double bleu_brevity(double hyp_len, double ref_len) {
  if (hyp_len <= 0.0) return 0.0;
  return hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
}

double avg_len(const std::vector<Tokens>& refs) {
  double sum = 0.0;
  for (const auto& r : refs) sum += static_cast<double>(r.size());
  return sum / static_cast<double>(refs.size());
}

void require_refs(const std::vector<Tokens>& refs) {
  if (refs.empty()) throw InvalidArgument("at least one reference is required");
}

Tokens content_tokens(const std::vector<std::string>& texts, const WordSet& stopwords) {
  std::set<std::string> seen;
  for (const auto& text : texts) {
    for (auto& tok : normalize(text)) {
      if (!is_function_token(tok, stopwords)) seen.insert(std::move(tok));
    }
  }
  return Tokens(seen.begin(), seen.end());
}

}  // namespace

double bleu4(const Tokens& hyp, const std::vector<Tokens>& refs) {
  require_refs(refs);
  if (hyp.empty()) return 0.0;
  Clipped c[kMaxOrder];
  bool any_zero = false;
  for (int n = 1; n <= kMaxOrder; ++n) {
    c[n - 1] = clipped_matches(hyp, refs, n);
    any_zero = any_zero || c[n - 1].matches == 0;
  }
  if (c[0].matches == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    double num = static_cast<double>(c[n - 1].matches);
    double den = static_cast<double>(c[n - 1].total);
    if (any_zero && n >= 2) {
      num += 1.0;
      den += 1.0;
    }
    log_sum += std::log(num / den);
  }
  const double bp = bleu_brevity(static_cast<double>(hyp.size()),
                                 static_cast<double>(closest_ref_len(hyp.size(), refs)));
  return bp * std::exp(log_sum / kMaxOrder);
}

double corpus_bleu4(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs) {
  if (hyps.size() != refs.size()) throw ShapeMismatch("one reference set per hypothesis is required");
  long matches[kMaxOrder] = {0, 0, 0, 0};
  long totals[kMaxOrder] = {0, 0, 0, 0};
  double hyp_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    require_refs(refs[k]);
    for (int n = 1; n <= kMaxOrder; ++n) {
      const Clipped c = clipped_matches(hyps[k], refs[k], n);
      matches[n - 1] += c.matches;
      totals[n - 1] += c.total;
    }
    hyp_len += static_cast<double>(hyps[k].size());
    ref_len += static_cast<double>(closest_ref_len(hyps[k].size(), refs[k]));
  }
  double log_sum = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  return bleu_brevity(hyp_len, ref_len) * std::exp(log_sum / kMaxOrder);
}

NistInfo NistInfo::from_references(const std::vector<Tokens>& pool) {
  NistInfo out;
  for (const auto& r : pool) {
    out.total_words_ += static_cast<long>(r.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
      for (const auto& [g, c] : ngram_counts(r, n)) out.counts_[g] += c;
    }
  }
  return out;
}

double NistInfo::info(const Tokens& ngram) const {
  if (ngram.empty()) return 0.0;
  const auto it = counts_.find(ngram);
  if (it == counts_.end()) return 0.0;
  double prefix = static_cast<double>(total_words_);
  if (ngram.size() > 1) {
    const auto p = counts_.find(Tokens(ngram.begin(), ngram.end() - 1));
    if (p == counts_.end()) return 0.0;
    prefix = static_cast<double>(p->second);
  }
  return std::log2(prefix / static_cast<double>(it->second));
}

double nist_brevity(double hyp_len, double avg_ref_len) {
  if (avg_ref_len <= 0.0) return 1.0;
  const double beta = std::log(0.5) / std::pow(std::log(1.5), 2);
  const double ratio = std::min(hyp_len / avg_ref_len, 1.0);
  if (ratio <= 0.0) return 0.0;
  return std::exp(beta * std::pow(std::log(ratio), 2));
}

namespace {

struct NistSums {
  double info[kMaxOrder] = {0, 0, 0, 0};
  long total[kMaxOrder] = {0, 0, 0, 0};
};

void add_nist(NistSums& sums, const Tokens& hyp, const std::vector<Tokens>& refs, const NistInfo& info) {
  for (int n = 1; n <= kMaxOrder; ++n) {
    const Counts ref = max_ref_counts(refs, n);
    for (const auto& [g, c] : ngram_counts(hyp, n)) {
      sums.total[n - 1] += c;
      if (auto it = ref.find(g); it != ref.end()) sums.info[n - 1] += std::min(c, it->second) * info.info(g);
    }
  }
}

double nist_from_sums(const NistSums& sums) {
  double score = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (sums.total[n] > 0) score += sums.info[n] / static_cast<double>(sums.total[n]);
  }
  return score;
}

}  // namespace

double nist4(const Tokens& hyp, const std::vector<Tokens>& refs, const NistInfo& info) {
  require_refs(refs);
  if (hyp.empty()) return 0.0;
  NistSums sums;
  add_nist(sums, hyp, refs, info);
  return nist_from_sums(sums) * nist_brevity(static_cast<double>(hyp.size()), avg_len(refs));
}

double corpus_nist4(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs,
                    const NistInfo& info) {
  if (hyps.size() != refs.size()) throw ShapeMismatch("one reference set per hypothesis is required");
  NistSums sums;
  double hyp_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    require_refs(refs[k]);
    add_nist(sums, hyps[k], refs[k], info);
    hyp_len += static_cast<double>(hyps[k].size());
    ref_len += avg_len(refs[k]);
  }
  if (hyp_len == 0.0) return 0.0;
  return nist_from_sums(sums) * nist_brevity(hyp_len, ref_len);
}

double div2(const std::vector<Tokens>& hyps) {
  std::set<std::pair<std::string, std::string>> distinct;
  long total = 0;
  for (const auto& h : hyps) {
    for (std::size_t i = 0; i + 1 < h.size(); ++i) {
      distinct.emplace(h[i], h[i + 1]);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(distinct.size()) / static_cast<double>(total);
}

double multi_ref_best(const PairScore& score, const Tokens& hyp, const std::vector<Tokens>& refs) {
  require_refs(refs);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : refs) best = std::max(best, score(hyp, r));
  return best;
}

PRF token_prf(const std::vector<std::string>& predicted, const std::vector<std::string>& reference) {
  const std::set<std::string> p(predicted.begin(), predicted.end());
  const std::set<std::string> r(reference.begin(), reference.end());
  long common = 0;
  for (const auto& t : p) common += static_cast<long>(r.count(t));
  PRF out;
  if (!p.empty()) out.precision = static_cast<double>(common) / static_cast<double>(p.size());
  if (!r.empty()) out.recall = static_cast<double>(common) / static_cast<double>(r.size());
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

PhraseCoverage phrase_coverage(const std::vector<std::string>& predicted_c,
                               const std::vector<std::string>& predicted_gc,
                               const std::vector<std::string>& references,
                               const WordSet& stopwords) {
  if (references.empty()) throw InvalidArgument("at least one reference is required");
  const Tokens c_tokens = content_tokens(predicted_c, stopwords);
  const Tokens gc_tokens = content_tokens(predicted_gc, stopwords);
  PhraseCoverage best;
  bool first = true;
  for (const auto& ref : references) {
    const Tokens ref_tokens = content_tokens({ref}, stopwords);
    PhraseCoverage cur{token_prf(c_tokens, ref_tokens), token_prf(gc_tokens, ref_tokens)};
    if (first || cur.c.f1 > best.c.f1) best = cur;
    first = false;
  }
  return best;
}

PhraseCoverage mean_coverage(const std::vector<PhraseCoverage>& items) {
  PhraseCoverage out;
  if (items.empty()) return out;
  for (const auto& it : items) {
    out.c.precision += it.c.precision;
    out.c.recall += it.c.recall;
    out.c.f1 += it.c.f1;
    out.gc.precision += it.gc.precision;
    out.gc.recall += it.gc.recall;
    out.gc.f1 += it.gc.f1;
  }
  const double n = static_cast<double>(items.size());
  for (double* v : {&out.c.precision, &out.c.recall, &out.c.f1, &out.gc.precision, &out.gc.recall, &out.gc.f1}) {
    *v /= n;
  }
  return out;
}

ScoreReport score_responses(const std::vector<Tokens>& hyps,
                            const std::vector<std::vector<Tokens>>& refs, bool multi_ref) {
  if (hyps.size() != refs.size()) throw ShapeMismatch("one reference set per hypothesis is required");
  std::vector<std::vector<Tokens>> used;
  used.reserve(refs.size());
  std::vector<Tokens> pool;
  for (const auto& r : refs) {
    require_refs(r);
    used.push_back(multi_ref ? r : std::vector<Tokens>{r.front()});
    pool.insert(pool.end(), used.back().begin(), used.back().end());
  }
  const NistInfo info = NistInfo::from_references(pool);

  ScoreReport report;
  double len_sum = 0.0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    ExampleScore s;
    s.bleu4 = multi_ref_best([](const Tokens& h, const Tokens& r) { return bleu4(h, {r}); }, hyps[k], used[k]);
    s.nist4 = multi_ref_best([&](const Tokens& h, const Tokens& r) { return nist4(h, {r}, info); },
                             hyps[k], used[k]);
    report.per_example.push_back(s);
    len_sum += static_cast<double>(hyps[k].size());
  }
  if (!hyps.empty()) {
    report.corpus.bleu4 = corpus_bleu4(hyps, used);
    report.corpus.nist4 = corpus_nist4(hyps, used, info);
    report.corpus.div2 = div2(hyps);
    report.corpus.avg_len = len_sum / static_cast<double>(hyps.size());
  }
  return report;
}

nlohmann::ordered_json to_json(const ScoreReport& report) {
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& s : report.per_example) per.push_back({{"bleu4", s.bleu4}, {"nist4", s.nist4}});
  return {{"per_example", std::move(per)},
          {"corpus",
           {{"bleu4", report.corpus.bleu4},
            {"nist4", report.corpus.nist4},
            {"div2", report.corpus.div2},
            {"avg_len", report.corpus.avg_len}}}};
}

nlohmann::ordered_json to_json(const PhraseCoverage& coverage) {
  auto prf = [](const PRF& p) {
    return nlohmann::ordered_json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
  };
  return {{"c", prf(coverage.c)}, {"gc", prf(coverage.gc)}};
}

}  // namespace cgrg
