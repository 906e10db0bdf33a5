// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "cgrg/controlplan.hpp"
#include "cgrg/corpus.hpp"
#include "cgrg/synthetic.hpp"
#include "fixtures.hpp"

namespace cgrg {
namespace {

using Strings = std::vector<std::string>;

// Returns fixed chunks regardless of the sentence.
class FixedChunks final : public NounPhraseDetector {
 public:
  explicit FixedChunks(std::vector<Strings> chunks) : chunks_(std::move(chunks)) {}
  std::vector<Strings> chunks(const Strings&) const override { return chunks_; }

 private:
  std::vector<Strings> chunks_;
};

TEST(Idf, WeightsAndUnseenTokens) {
  const IdfTable idf = IdfTable::from_counts(4, {{"a", 1}, {"b", 4}});
  EXPECT_DOUBLE_EQ(idf.idf("a"), std::log(4.0));
  EXPECT_DOUBLE_EQ(idf.idf("b"), 0.0);
  EXPECT_DOUBLE_EQ(idf.idf("zzz"), std::log(4.0));
}

TEST(Idf, FromDocumentsCountsEachDocumentOnce) {
  const IdfTable idf = IdfTable::from_documents({{"a a", "a b"}, {"b c"}});
  EXPECT_EQ(idf.num_documents(), 2);
  EXPECT_DOUBLE_EQ(idf.idf("a"), std::log(2.0));
  EXPECT_DOUBLE_EQ(idf.idf("b"), 0.0);
}

TEST(Idf, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const IdfTable idf = IdfTable::from_examples(testing::toy_corpus());
  idf.save(dir / "idf.tsv");
  const IdfTable back = IdfTable::load(dir / "idf.tsv");
  EXPECT_EQ(back.num_documents(), idf.num_documents());
  for (const char* t : {"orca", "the", "2017", "never-seen"}) EXPECT_DOUBLE_EQ(back.idf(t), idf.idf(t));
}

TEST(Rank, HandComputedScores) {
  const IdfTable idf = IdfTable::from_counts(8, {{"a", 1}, {"b", 2}, {"c", 8}});
  const double wa = std::log(8.0), wb = std::log(4.0);
  const auto r = rank_sentences({"a"}, {"a b", "c"}, idf);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].first, 0);
  EXPECT_DOUBLE_EQ(r[0].second, wa);
  EXPECT_EQ(r[1], (std::pair<int, double>{1, 0.0}));

  const auto r2 = rank_sentences({"b c", "a"}, {"c c", "a b b c"}, idf);
  EXPECT_EQ(r2[0].first, 1);
  EXPECT_DOUBLE_EQ(r2[0].second, wa + wb);
  EXPECT_DOUBLE_EQ(r2[1].second, 0.0);
}

TEST(Rank, EmptyContextKeepsOrder) {
  const IdfTable idf = IdfTable::from_counts(3, {});
  const auto r = rank_sentences({}, {"x", "y", "z"}, idf);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(r[static_cast<std::size_t>(j)], (std::pair<int, double>{j, 0.0}));
}

TEST(Rank, DuplicateContextTokensDoNotCount) {
  const IdfTable idf = IdfTable::from_counts(10, {{"orca", 1}});
  const auto once = rank_sentences({"orca"}, {"orca orca swims", "nothing"}, idf);
  const auto twice = rank_sentences({"orca orca orca"}, {"orca orca swims", "nothing"}, idf);
  EXPECT_EQ(once, twice);
}

TEST(Rank, IdenticalSentencesTieInIndexOrder) {
  const IdfTable idf = IdfTable::from_counts(10, {});
  const auto r = rank_sentences({"b"}, {"a", "b c", "b c"}, idf);
  EXPECT_EQ(r[0].first, 1);
  EXPECT_EQ(r[1].first, 2);
  EXPECT_DOUBLE_EQ(r[0].second, r[1].second);
}

TEST(Chunker, SplitsOnFunctionWordsAndVerbs) {
  const HeuristicChunker chunker;
  EXPECT_EQ(chunker.chunks(normalize("the orca ate a great white shark")),
            (std::vector<Strings>{{"orca"}, {"great", "white", "shark"}}));
}

TEST(Predict, TwoMostFrequentPhrases) {
  const IdfTable idf = IdfTable::from_counts(10, {});
  const auto p = predict_controls({"tell me"}, {"the orca ate", "the orca slept", "the shark swam"}, idf,
                                  HeuristicChunker{});
  EXPECT_EQ(p.phrases, (Strings{"orca", "shark"}));
  EXPECT_EQ(p.scores, (std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(p.gc_indices, (std::vector<int>{0, 1, 2}));
}

TEST(Predict, SingleSentenceSinglePhrase) {
  const IdfTable idf = IdfTable::from_counts(10, {});
  const auto p = predict_controls({}, {"the orca"}, idf, HeuristicChunker{});
  ASSERT_EQ(p.phrases.size(), 1u);
  EXPECT_EQ(normalize(p.phrases[0]), (Strings{"orca"}));
}

TEST(Predict, EmptyGroundingGivesEmptyPrediction) {
  const auto p = predict_controls({"hi"}, {}, IdfTable::from_counts(1, {}), HeuristicChunker{});
  EXPECT_TRUE(p.phrases.empty());
  EXPECT_TRUE(p.gc_indices.empty());
}

TEST(Predict, ProperSubstringsAreNotFullOverlap) {
  const FixedChunks chunks({{"orca"}, {"the", "orca"}});
  const auto p = predict_controls({}, {"the orca", "the orca", "the orca"}, IdfTable::from_counts(10, {}), chunks);
  EXPECT_EQ(p.phrases.size(), 2u);
}

TEST(Predict, IdenticalSecondPhraseIsDropped) {
  const FixedChunks chunks({{"orca"}, {"Orca"}});
  const auto p = predict_controls({}, {"the orca"}, IdfTable::from_counts(10, {}), chunks);
  ASSERT_EQ(p.phrases.size(), 1u);
  EXPECT_EQ(normalize(p.phrases[0]), (Strings{"orca"}));
}

TEST(Predict, TiesPreferHigherIdfThenShorter) {
  const IdfTable idf = IdfTable::from_counts(100, {{"common", 50}, {"rare", 1}});
  const auto p = predict_controls({}, {"common thing", "rare thing"}, idf,
                                  FixedChunks({{"common"}, {"rare"}}));
  ASSERT_EQ(p.phrases.size(), 2u);
  EXPECT_EQ(p.phrases[0], "rare");
}

TEST(Predict, PropertiesOverSyntheticCorpus) {
  SyntheticSpec spec;
  spec.n_examples = 80;
  const auto examples = generate_synthetic(spec);
  const IdfTable idf = IdfTable::from_examples(examples);
  const HeuristicChunker chunker;
  for (const auto& ex : examples) {
    const auto p = predict_controls(ex.context, ex.grounding, idf, chunker);
    EXPECT_LE(p.phrases.size(), 2u);
    EXPECT_EQ(p.phrases.size(), p.scores.size());
    EXPECT_EQ(p.gc_indices, select_gc(ex.grounding, p.phrases));
    for (const auto& phrase : p.phrases) {
      bool found = false;
      for (const auto& g : ex.grounding) found = found || contains_phrase(normalize(g), normalize(phrase));
      EXPECT_TRUE(found) << phrase;
    }
    if (p.phrases.size() == 2) {
      EXPECT_NE(normalize(p.phrases[0]), normalize(p.phrases[1]));
    }
  }
}

}  // namespace
}  // namespace cgrg
