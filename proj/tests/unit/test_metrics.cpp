// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cgrg/error.hpp"
#include "cgrg/metrics.hpp"
#include "cgrg/textproc.hpp"
#include "cgrg/wordlists.hpp"
#include "checks.hpp"
#include "oracles.hpp"

namespace cgrg {
namespace {

Tokens t(std::string_view s) { return normalize(s); }

TEST(Fixtures, MatchIndependentScorers) {
  const auto s = testing::run_metric_fixtures(std::string(CGRG_TEST_DATA_DIR) + "/metrics_fixtures.json");
  EXPECT_EQ(s.fixtures, 5);
  EXPECT_LE(s.max_bleu_diff, 1e-9);
  EXPECT_LE(s.max_nist_diff, 1e-9);
  EXPECT_LE(s.max_div2_diff, 1e-9);
  EXPECT_LE(s.max_prf_diff, 1e-9);
  EXPECT_TRUE(s.special_cases_exact);
}

TEST(Bleu, HandComputedSentence) {
  // Matches 5/6, 3/5, 1/4, 0/3. The zero turns on add-one smoothing for
  // orders 2-4: 4/6, 2/5, 1/4. Equal lengths, no brevity penalty.
  const double got = bleu4(t("the cat sat on the mat"), {t("the cat is on the mat")});
  const double want = std::exp((std::log(5.0 / 6) + std::log(4.0 / 6) + std::log(2.0 / 5) + std::log(1.0 / 4)) / 4);
  EXPECT_NEAR(got, want, 1e-12);
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  const Tokens hyp = t("a b c d e");
  const double got = bleu4(hyp, {t("a b c d e f g"), t("a b c d e z z z z z")});
  EXPECT_NEAR(got, std::exp(1.0 - 7.0 / 5.0), 1e-12);
}

TEST(Bleu, ClipsRepeatedWords) {
  // Unigrams clip to 1/4; smoothed 1/4, 1/3, 1/2 above.
  EXPECT_NEAR(bleu4(t("the the the the"), {t("the cat")}), std::pow(1.0 / 96, 0.25), 1e-12);
}

TEST(Bleu, RandomSentencesAgreeWithOracle) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> word(0, 5), len(1, 9);
  auto sentence = [&] {
    Tokens s;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) s.push_back(std::string(1, static_cast<char>('a' + word(rng))));
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const Tokens hyp = sentence();
    const std::vector<Tokens> refs = {sentence(), sentence()};
    ASSERT_NEAR(bleu4(hyp, refs), testing::ref_bleu4(hyp, refs), 1e-12);
    const NistInfo info = NistInfo::from_references(refs);
    ASSERT_NEAR(nist4(hyp, refs, info), testing::ref_nist4(hyp, refs, refs), 1e-12);
  }
}

TEST(Bleu, RequiresReferences) {
  EXPECT_THROW(bleu4(t("a"), {}), InvalidArgument);
  EXPECT_THROW(score_responses({t("a")}, {}, false), ShapeMismatch);
}

TEST(Nist, InformationWeights) {
  const auto info = NistInfo::from_references({t("a b a c"), t("a b")});
  EXPECT_EQ(info.total_words(), 6);
  EXPECT_NEAR(info.info(t("a")), std::log2(6.0 / 3.0), 1e-12);
  EXPECT_NEAR(info.info(t("a b")), std::log2(3.0 / 2.0), 1e-12);
  EXPECT_NEAR(info.info(t("b a")), std::log2(2.0 / 1.0), 1e-12);
  EXPECT_EQ(info.info(t("z")), 0.0);
}

TEST(Nist, BrevityFactor) {
  EXPECT_NEAR(nist_brevity(2.0, 3.0), 0.5, 1e-12);
  EXPECT_EQ(nist_brevity(5.0, 5.0), 1.0);
  EXPECT_EQ(nist_brevity(7.0, 5.0), 1.0);
  EXPECT_LT(nist_brevity(1.0, 5.0), 0.5);
}

TEST(Div2, CountsDistinctBigramsAcrossHypotheses) {
  EXPECT_DOUBLE_EQ(div2({t("a b c"), t("a b d")}), 3.0 / 4.0);
  EXPECT_EQ(div2({}), 0.0);
}

TEST(MultiRef, BestSingleReferenceScore) {
  auto overlap = [](const Tokens& h, const Tokens& r) { return static_cast<double>(h.size() == r.size()); };
  EXPECT_EQ(multi_ref_best(overlap, t("a b"), {t("x"), t("y z")}), 1.0);
}

TEST(Report, SingleReferenceModeUsesTheFirstReference) {
  const std::vector<Tokens> hyps = {t("sam was at toronto")};
  const std::vector<std::vector<Tokens>> refs = {{t("kim went home"), t("sam was at toronto")}};
  EXPECT_LT(score_responses(hyps, refs, false).per_example[0].bleu4, 0.1);
  EXPECT_EQ(score_responses(hyps, refs, true).per_example[0].bleu4, 1.0);
  const auto j = to_json(score_responses(hyps, refs, true));
  EXPECT_EQ(j["corpus"]["avg_len"], 4.0);
}

TEST(Coverage, ContentTokensOnly) {
  const auto cov = phrase_coverage({"the orca", "great white shark"}, {"orca whales hunt sharks"},
                                   {"an orca ate a great white shark"}, default_stopwords());
  EXPECT_DOUBLE_EQ(cov.c.precision, 1.0);
  EXPECT_NEAR(cov.c.recall, 4.0 / 5.0, 1e-12);
  EXPECT_THROW(phrase_coverage({"a"}, {}, {}, default_stopwords()), InvalidArgument);
}

TEST(Coverage, KeepsTheReferenceWithBestControlF1) {
  const auto cov = phrase_coverage({"orca"}, {}, {"a shark swam", "the orca swam"}, default_stopwords());
  EXPECT_DOUBLE_EQ(cov.c.precision, 1.0);
  const auto mean = mean_coverage({cov, PhraseCoverage{}});
  EXPECT_DOUBLE_EQ(mean.c.precision, 0.5);
}

}  // namespace
}  // namespace cgrg
