// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cgrg/checkpoint.hpp"
#include "cgrg/controlplan.hpp"
#include "cgrg/input_settings.hpp"
#include "oracles.hpp"

namespace cgrg::testing {

ModelConfig tiny_config(int vocab_size, int max_len) {
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.d_model = 64;
  cfg.d_ff = 128;
  cfg.vocab_size = vocab_size;
  cfg.max_len = max_len;
  return cfg;
}

template <typename S>
Parameters<S> random_params(const ModelConfig& cfg, std::uint64_t seed, double scale) {
  Parameters<S> p = Parameters<S>::init(cfg, seed);
  std::mt19937_64 rng(seed * 7919 + 17);
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& [name, t] : p.tensors()) {
    for (Eigen::Index k = 0; k < t->size(); ++k) t->data()[k] += static_cast<S>(normal(rng));
  }
  return p;
}

template Parameters<float> random_params<float>(const ModelConfig&, std::uint64_t, double);
template Parameters<double> random_params<double>(const ModelConfig&, std::uint64_t, double);

RandomInstance random_instance(std::mt19937_64& rng, const ModelConfig& cfg, int max_segments,
                               int max_input_tokens, int response_len) {
  SegmentInput in = random_segment_input(rng, max_segments, max_input_tokens);
  std::uniform_int_distribution<int> tok(Vocab::kNumSpecial, cfg.vocab_size - 1);
  for (auto* group : {&in.context, &in.grounding, &in.controls}) {
    for (auto& seg : *group) {
      for (auto& t : seg) t = tok(rng);
    }
  }
  RandomInstance out;
  out.layout = build_layout(in, response_len);
  ModelInput input;
  input.input_ids = assemble_input(in, out.layout);
  SegmentLayout input_only = out.layout;
  input_only.total_len = out.layout.r_start;
  input_only.r_len = 0;
  input.embedding_ids = build_embedding_ids(input_only);
  input.mask = build_mask(input_only);
  std::vector<TokenId> response;
  for (int k = 0; k < response_len; ++k) response.push_back(tok(rng));
  out.inst = teacher_forced_instance(input, response);
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("cgrg-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<GroundedExample> toy_corpus() {
  std::vector<GroundedExample> out;
  GroundedExample a;
  a.context = {"have you heard about the orca at the aquarium ?"};
  a.grounding = {"the orca held the shark upside down .", "orcas live in pods .",
                 "the shark swam away after an hour ."};
  a.response = "the orca held a shark upside down for an hour";
  a.refs = std::vector<std::string>{"an orca flipped the shark over"};
  a.controls = {"upside down"};
  a.gc = {0};
  out.push_back(a);

  GroundedExample b;
  b.context = {"where did sam study ?", "i think it was in canada"};
  b.grounding = {"sam finished his phd at toronto in 2017 .", "sam taught history at ottawa in 2019 .",
                 "lena studied physics at tokyo in 2011 ."};
  b.response = "sam got a phd from toronto back in 2017";
  b.controls = {"toronto", "phd"};
  b.gc = {0};
  out.push_back(b);

  GroundedExample c;
  c.context = {"any news about the mars rover ?"};
  c.grounding = {"the rover drilled a rock sample on mars .", "the sample will return in 2031 ."};
  c.response = "it drilled a rock sample that comes back in 2031";
  c.controls = {"rock sample", "2031"};
  c.gc = {0, 1};
  out.push_back(c);
  return out;
}

std::filesystem::path write_toy_model(const std::filesystem::path& dir, const std::string& setting,
                                      int max_len) {
  const auto corpus = toy_corpus();
  std::vector<std::string> texts;
  for (const auto& ex : corpus) {
    texts.insert(texts.end(), ex.context.begin(), ex.context.end());
    texts.insert(texts.end(), ex.grounding.begin(), ex.grounding.end());
    texts.push_back(ex.response);
  }
  const Vocab vocab = Vocab::build(texts, 1);
  ModelConfig cfg = tiny_config(vocab.size(), max_len);
  std::filesystem::create_directories(dir);
  vocab.save(dir / "vocab.txt");
  IdfTable::from_examples(corpus).save(dir / "idf.tsv");
  const auto path = dir / "model.ckpt";
  save_checkpoint(path, Model{cfg, random_params<float>(cfg, 3)}, {{"setting", setting}, {"name", "toy"}});
  return path;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace cgrg::testing
