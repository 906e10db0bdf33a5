// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "cgrg/checkpoint.hpp"
#include "cgrg/corpus.hpp"
#include "fixtures.hpp"

namespace cgrg {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cgrg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

const std::vector<std::string> kTinyModel = {"--layers", "1", "--d-model", "16", "--d-ff", "32",
                                             "--max-len", "128", "--steps", "4", "--batch", "2"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, app::kExitOk);
  EXPECT_EQ(cli({}).code, app::kExitUsage);
  EXPECT_EQ(cli({"make-data"}).code, app::kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, app::kExitUsage);
  EXPECT_EQ(cli({"train", "--data", "/nonexistent.jsonl", "--out", "x"}).code, app::kExitUsage);
  testing::TempDir dir;
  EXPECT_EQ(cli({"make-data", "--out", (dir / "d.jsonl").string(), "--n", "0"}).code, app::kExitUsage);
}

TEST(Cli, MakeDataWritesCorpusAndMeta) {
  testing::TempDir dir;
  const auto r = cli({"make-data", "--out", (dir / "sub/d.jsonl").string(), "--n", "12", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_jsonl(dir / "sub/d.jsonl").size(), 12u);
  EXPECT_TRUE(std::filesystem::exists(dir / "sub/meta.json"));
  cli({"make-data", "--out", (dir / "again.jsonl").string(), "--n", "12", "--seed", "4"});
  EXPECT_EQ(testing::read_file(dir / "sub/d.jsonl"), testing::read_file(dir / "again.jsonl"));
}

TEST(Cli, ExtractControlsAnnotates) {
  testing::TempDir dir;
  auto corpus = testing::toy_corpus();
  for (auto& ex : corpus) {
    ex.controls.clear();
    ex.gc.clear();
  }
  write_jsonl(dir / "raw.jsonl", corpus);
  const auto r = cli({"extract-controls", "--in", (dir / "raw.jsonl").string(), "--out",
                      (dir / "ann.jsonl").string(), "--df-threshold", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& ex : read_jsonl(dir / "ann.jsonl")) {
    EXPECT_FALSE(ex.controls.empty());
    EXPECT_FALSE(ex.gc.empty());
  }
}

TEST(Cli, TrainGenerateEvalPipeline) {
  testing::TempDir dir;
  ASSERT_EQ(cli({"make-data", "--out", (dir / "d.jsonl").string(), "--n", "10"}).code, 0);
  auto r = cli(with({"train", "--data", (dir / "d.jsonl").string(), "--out", (dir / "m").string(), "--quiet"},
                    kTinyModel));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"model.ckpt", "vocab.txt", "idf.tsv", "train_log.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "m" / f)) << f;
  }
  EXPECT_EQ(load_checkpoint(dir / "m/model.ckpt").meta["setting"], "X+C+GC+IA");

  r = cli({"generate", "--checkpoint", (dir / "m/model.ckpt").string(), "--in", (dir / "d.jsonl").string(),
           "--out", (dir / "hyp.jsonl").string(), "--method", "gbs", "--beam", "2", "--max-new-tokens", "12"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(dir / "hyp.jsonl");
  ASSERT_EQ(lines.size(), 10u);
  const auto data = read_jsonl(dir / "d.jsonl");
  for (std::size_t k = 0; k < lines.size(); ++k) {
    ASSERT_FALSE(lines[k].contains("error")) << lines[k];
    const auto words = normalize(lines[k]["response"].get<std::string>());
    for (const auto& c : data[k].controls) {
      const auto cw = normalize(c);
      EXPECT_TRUE(contains_phrase(words, cw)) << c << " / " << lines[k]["response"];
    }
  }

  r = cli({"eval", "--hyp", (dir / "hyp.jsonl").string(), "--data", (dir / "d.jsonl").string(), "--multi-ref"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["per_example"].size(), 10u);
  EXPECT_GT(report["corpus"]["avg_len"].get<double>(), 0.0);
}

TEST(Cli, TrainingIsReproducible) {
  testing::TempDir dir;
  ASSERT_EQ(cli({"make-data", "--out", (dir / "d.jsonl").string(), "--n", "8"}).code, 0);
  for (const char* out : {"a", "b"}) {
    const auto r = cli(with({"train", "--data", (dir / "d.jsonl").string(), "--out", (dir / out).string(),
                             "--seed", "1", "--quiet"},
                            kTinyModel));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(testing::read_file(dir / "a/model.ckpt"), testing::read_file(dir / "b/model.ckpt"));
}

TEST(Cli, PredictControls) {
  testing::TempDir dir;
  write_jsonl(dir / "d.jsonl", testing::toy_corpus());
  const auto r = cli({"predict-controls", "--in", (dir / "d.jsonl").string(), "--out", (dir / "p.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(dir / "p.jsonl");
  ASSERT_EQ(lines.size(), 3u);
  for (const auto& l : lines) {
    EXPECT_EQ(l["phrases"].size(), l["scores"].size());
    EXPECT_TRUE(l["gc"].is_array());
  }
}

TEST(Cli, RuntimeFailuresExitTwo) {
  testing::TempDir dir;
  {
    std::ofstream(dir / "bad.jsonl") << "{not json\n";
  }
  write_jsonl(dir / "d.jsonl", testing::toy_corpus());
  EXPECT_EQ(cli({"eval", "--hyp", (dir / "bad.jsonl").string(), "--data", (dir / "d.jsonl").string()}).code,
            app::kExitRuntime);
  {
    std::ofstream(dir / "junk.ckpt") << "junk\n";
  }
  EXPECT_EQ(cli({"generate", "--checkpoint", (dir / "junk.ckpt").string(), "--in", (dir / "d.jsonl").string(),
                 "--out", (dir / "o.jsonl").string()})
                .code,
            app::kExitRuntime);
}

TEST(Cli, CompareSettingsOnASmallSyntheticSet) {
  testing::TempDir dir;
  const auto r = cli(with({"compare-settings", "--train-size", "12", "--test-size", "4", "--settings", "X",
                           "--settings", "X+C", "--out", (dir / "report.json").string(), "--max-new-tokens", "5"},
                          kTinyModel));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("X+C"), std::string::npos);
  const auto report = nlohmann::json::parse(testing::read_file(dir / "report.json"));
  EXPECT_EQ(report["rows"].size(), 2u);
}

}  // namespace
}  // namespace cgrg
