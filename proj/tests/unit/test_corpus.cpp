// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include <gtest/gtest.h>

#include "cgrg/corpus.hpp"
#include "cgrg/error.hpp"
#include "cgrg/synthetic.hpp"
#include "fixtures.hpp"

namespace cgrg {
namespace {

using Strings = std::vector<std::string>;

ExtractionConfig admit_all() {
  ExtractionConfig cfg;
  cfg.df_threshold = 1.0;
  return cfg;
}

TEST(Extract, ContextMatchesAreRemovedAndFunctionWordsStripped) {
  const Strings grounding = {"the orca held the shark upside down"};
  const Strings context = {"... a killer whale held a great white shark ..."};
  const std::string response = "i am pretty sure the orca is the one who killed the shark";
  const DocFreq df = {{"orca", 0.05}, {"shark", 0.05}, {"held", 0.5}, {"upside", 0.5}, {"down", 0.5}};
  ExtractionConfig cfg;
  EXPECT_EQ(extract_user_controls(grounding, response, context, cfg, df), (Strings{"orca"}));
}

TEST(Extract, NoOverlapGivesNothing) {
  EXPECT_TRUE(extract_user_controls({"x y"}, "z w", {}, admit_all(), {}).empty());
}

TEST(Extract, PrefersMaximalMatches) {
  EXPECT_EQ(extract_user_controls({"alpha beta gamma"}, "alpha beta", {}, admit_all(), {}),
            (Strings{"alpha beta"}));
}

TEST(Extract, UninformativeTokensDisqualifyAnNgram) {
  const DocFreq df = {{"toronto", 0.02}, {"university", 0.4}};
  ExtractionConfig cfg;
  EXPECT_EQ(extract_user_controls({"sam went to university of toronto"}, "the university of toronto , yes", {},
                                  cfg, df),
            (Strings{"toronto"}));
}

TEST(Extract, OrderedByFirstOccurrenceInResponse) {
  EXPECT_EQ(extract_user_controls({"red fox and blue whale"}, "whale then fox", {}, admit_all(), {}),
            (Strings{"whale", "fox"}));
}

TEST(Extract, RespectsMaxNgram) {
  ExtractionConfig cfg = admit_all();
  cfg.max_ngram = 2;
  const auto got = extract_user_controls({"one two three"}, "one two three", {}, cfg, {});
  for (const auto& p : got) EXPECT_LE(normalize(p).size(), 2u);
  EXPECT_FALSE(got.empty());
}

TEST(Extract, ConfigValidation) {
  ExtractionConfig cfg;
  cfg.max_ngram = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg.max_ngram = 5;
  cfg.df_threshold = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg.df_threshold = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(SelectGc, Examples) {
  EXPECT_EQ(select_gc({"a b", "c d"}, {"c d"}), (std::vector<int>{1}));
  EXPECT_EQ(select_gc({"orca ate", "shark swam", "orca slept"}, {"orca"}), (std::vector<int>{0, 2}));
  EXPECT_TRUE(select_gc({"a"}, {}).empty());
}

TEST(SelectGc, TokenMatchNotSubstring) {
  EXPECT_TRUE(select_gc({"the catalog arrived"}, {"cat"}).empty());
}

TEST(SelectGc, TruncatesToTwenty) {
  Strings g(25, "orca here");
  EXPECT_EQ(select_gc(g, {"orca"}).size(), 20u);
}

TEST(Filter, DropsExamplesWithoutControlsInOrder) {
  GroundedExample a, b, c;
  a.controls = {"orca"};
  a.response = "a";
  c.controls = {"x"};
  c.response = "c";
  EXPECT_EQ(filter_dataset({a, b}), (std::vector<GroundedExample>{a}));
  EXPECT_TRUE(filter_dataset({b, b}).empty());
  EXPECT_EQ(filter_dataset({a, b, c}), (std::vector<GroundedExample>{a, c}));
  const auto once = filter_dataset({a, b, c});
  EXPECT_EQ(filter_dataset(once), once);
}

TEST(ReferenceSet, ResponseFirstCappedAtFive) {
  GroundedExample ex;
  ex.response = "r";
  ex.refs = Strings{"a", "b", "c", "d", "e", "f"};
  EXPECT_EQ(reference_set(ex), (Strings{"r", "a", "b", "c", "d"}));
}

TEST(Jsonl, WriteReadWriteIsByteIdentical) {
  testing::TempDir dir;
  SyntheticSpec spec;
  spec.n_examples = 50;
  auto examples = generate_synthetic(spec);
  examples.push_back(testing::toy_corpus()[0]);
  write_jsonl(dir / "a.jsonl", examples);
  const auto back = read_jsonl(dir / "a.jsonl");
  EXPECT_EQ(back, examples);
  write_jsonl(dir / "b.jsonl", back);
  EXPECT_EQ(testing::read_file(dir / "a.jsonl"), testing::read_file(dir / "b.jsonl"));
}

TEST(Jsonl, KeyOrderAndOptionalRefs) {
  GroundedExample ex = testing::toy_corpus()[1];
  EXPECT_EQ(to_jsonl_line(ex),
            R"({"context":["where did sam study ?","i think it was in canada"],)"
            R"("grounding":["sam finished his phd at toronto in 2017 .","sam taught history at ottawa in 2019 .",)"
            R"("lena studied physics at tokyo in 2011 ."],"response":"sam got a phd from toronto back in 2017",)"
            R"("controls":["toronto","phd"],"gc":[0]})");
}

TEST(Jsonl, MalformedLinesAreReported) {
  testing::TempDir dir;
  {
    std::ofstream f(dir / "bad.jsonl");
    f << R"({"context":[],"grounding":[],"response":"x","controls":[],"gc":[]})" << "\n" << "{not json\n";
  }
  EXPECT_THROW(read_jsonl(dir / "bad.jsonl"), FormatError);
  EXPECT_THROW(example_from_json(nlohmann::json::parse(R"({"context":"x"})")), FormatError);
}

TEST(Meta, RecordsNormalizationAndExtraction) {
  const auto m = dataset_meta(ExtractionConfig{});
  EXPECT_TRUE(m.contains("tokenizer"));
  EXPECT_EQ(m["extraction"]["max_ngram"], 5);
  EXPECT_DOUBLE_EQ(m["extraction"]["df_threshold"].get<double>(), 0.1);
}

TEST(Synthetic, DeterministicInSeed) {
  SyntheticSpec spec;
  spec.n_examples = 40;
  EXPECT_EQ(generate_synthetic(spec), generate_synthetic(spec));
  SyntheticSpec other = spec;
  other.seed = 2;
  EXPECT_NE(generate_synthetic(spec), generate_synthetic(other));
}

TEST(Synthetic, EveryExampleIsWellFormed) {
  SyntheticSpec spec;
  spec.n_examples = 100;
  const auto examples = generate_synthetic(spec);
  ASSERT_EQ(examples.size(), 100u);
  EXPECT_EQ(filter_dataset(examples).size(), 100u);
  for (const auto& ex : examples) {
    ASSERT_FALSE(ex.controls.empty());
    const auto response = normalize(ex.response);
    for (const auto& c : ex.controls) {
      const auto phrase = normalize(c);
      EXPECT_TRUE(contains_phrase(response, phrase)) << c;
      bool in_grounding = false;
      for (const auto& g : ex.grounding) in_grounding = in_grounding || contains_phrase(normalize(g), phrase);
      EXPECT_TRUE(in_grounding) << c;
      for (const auto& u : ex.context) EXPECT_FALSE(contains_phrase(normalize(u), phrase)) << c;
    }
    EXPECT_EQ(ex.gc, select_gc(ex.grounding, ex.controls));
    EXPECT_FALSE(ex.gc.empty());
    EXPECT_LE(ex.controls.size(), kMaxControls);
  }
}

TEST(Synthetic, FactYearOnlyInGrounding) {
  SyntheticSpec spec;
  spec.n_examples = 60;
  for (const auto& ex : generate_synthetic(spec)) {
    std::string year;
    for (const auto& t : normalize(ex.response)) {
      if (t.size() == 4 && std::all_of(t.begin(), t.end(), ::isdigit)) year = t;
    }
    ASSERT_FALSE(year.empty()) << ex.response;
    for (const auto& u : ex.context) EXPECT_EQ(u.find(year), std::string::npos);
    bool grounded = false;
    for (int j : ex.gc) grounded = grounded || ex.grounding[static_cast<std::size_t>(j)].find(year) != std::string::npos;
    EXPECT_TRUE(grounded) << ex.response;
  }
}

TEST(Annotate, UsesCorpusDocumentFrequencies) {
  auto examples = testing::toy_corpus();
  for (auto& ex : examples) {
    ex.controls.clear();
    ex.gc.clear();
  }
  ExtractionConfig cfg;
  cfg.df_threshold = 0.34;  // a token in one of three documents
  annotate_controls(examples, cfg);
  for (const auto& ex : examples) {
    EXPECT_EQ(ex.gc, select_gc(ex.grounding, ex.controls));
    for (const auto& c : ex.controls) {
      for (const auto& u : ex.context) EXPECT_FALSE(contains_phrase(normalize(u), normalize(c)));
    }
  }
  EXPECT_EQ(examples[1].controls, (Strings{"phd", "toronto", "2017"}));
}

}  // namespace
}  // namespace cgrg
