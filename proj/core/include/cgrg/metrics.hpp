// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Automatic response metrics over normalized token lists: BLEU-4, NIST-4,
// Div-2, multi-reference scoring and control-phrase token coverage.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgrg/wordlists.hpp"

namespace cgrg {

using Tokens = std::vector<std::string>;

/// Sentence BLEU-4. Clipped n-gram precision against the maximum reference
/// count, geometric mean, brevity penalty against the closest reference
/// length (shorter wins ties). When some precision is zero, orders 2-4 use
/// (matches + 1) / (total + 1); a zero unigram match still scores 0.
double bleu4(const Tokens& hyp, const std::vector<Tokens>& refs);

/// Corpus BLEU-4: pooled clipped counts, no smoothing.
double corpus_bleu4(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs);

/// NIST information weights: info(w1..wn) = log2(count(w1..wn-1) / count(w1..wn))
/// with the empty prefix counting every word of the pool.
class NistInfo {
 public:
  NistInfo() = default;
  static NistInfo from_references(const std::vector<Tokens>& pool);
  /// 0 for n-grams never seen in the pool.
  double info(const Tokens& ngram) const;
  long total_words() const { return total_words_; }

 private:
  std::map<Tokens, long> counts_;
  long total_words_ = 0;
};

/// NIST-4 brevity factor; 0.5 at a length ratio of 2/3.
double nist_brevity(double hyp_len, double avg_ref_len);

/// Sentence NIST-4: for n = 1..4, clipped matched information over the
/// number of hypothesis n-grams, summed, times the brevity factor against
/// the average reference length.
double nist4(const Tokens& hyp, const std::vector<Tokens>& refs, const NistInfo& info);

/// Corpus NIST-4 with pooled sums over the whole set.
double corpus_nist4(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs,
                    const NistInfo& info);

/// Distinct bigrams over total bigrams across every hypothesis; 0 without bigrams.
double div2(const std::vector<Tokens>& hyps);

using PairScore = std::function<double(const Tokens& hyp, const Tokens& ref)>;
/// Highest single-reference score.
double multi_ref_best(const PairScore& score, const Tokens& hyp, const std::vector<Tokens>& refs);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PRF token_prf(const std::vector<std::string>& predicted, const std::vector<std::string>& reference);

struct PhraseCoverage {
  PRF c;   // control-phrase tokens
  PRF gc;  // tokens of the sentences holding them
};

/// Content tokens (stopwords and punctuation removed, deduplicated) of the
/// predicted phrases and sentences scored against each reference; the
/// reference with the best control-token F1 is kept.
PhraseCoverage phrase_coverage(const std::vector<std::string>& predicted_c,
                               const std::vector<std::string>& predicted_gc,
                               const std::vector<std::string>& references,
                               const WordSet& stopwords);
PhraseCoverage mean_coverage(const std::vector<PhraseCoverage>& items);

struct ExampleScore {
  double bleu4 = 0.0;
  double nist4 = 0.0;
};

struct CorpusScore {
  double bleu4 = 0.0;
  double nist4 = 0.0;
  double div2 = 0.0;
  double avg_len = 0.0;
};

struct ScoreReport {
  std::vector<ExampleScore> per_example;
  CorpusScore corpus;
};

/// Scores hypotheses against reference sets. Single-reference mode uses the
/// first reference only; multi-reference mode takes each example's best
/// sentence score and pools every reference at corpus level. NIST weights
/// come from the references in use.
ScoreReport score_responses(const std::vector<Tokens>& hyps,
                            const std::vector<std::vector<Tokens>>& refs, bool multi_ref);

nlohmann::ordered_json to_json(const ScoreReport& report);
nlohmann::ordered_json to_json(const PhraseCoverage& coverage);

}  // namespace cgrg
