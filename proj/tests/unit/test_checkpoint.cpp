// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "cgrg/checkpoint.hpp"
#include "cgrg/error.hpp"
#include "fixtures.hpp"

namespace cgrg {
namespace {

Model random_model() {
  const ModelConfig cfg = testing::tiny_config();
  return Model{cfg, testing::random_params<float>(cfg, 21)};
}

TEST(Checkpoint, RoundTripReproducesLogitsExactly) {
  testing::TempDir dir;
  const Model m = random_model();
  save_checkpoint(dir / "m.ckpt", m, {{"setting", "X+C"}, {"seed", 3}});
  const Checkpoint ck = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(ck.model.config, m.config);
  EXPECT_EQ(ck.meta["setting"], "X+C");
  auto a = m.params.tensors();
  auto b = ck.model.params.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(*a[k].second, *b[k].second) << a[k].first;

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ri = testing::random_instance(rng, m.config);
    const auto& in = ri.inst;
    const auto x = forward<float>(m.params, m.config, in.token_ids, in.embedding_ids, in.mask);
    const auto y = forward<float>(ck.model.params, ck.model.config, in.token_ids, in.embedding_ids, in.mask);
    EXPECT_EQ(x.logits, y.logits);
  }
}

TEST(Checkpoint, SaveIsByteStable) {
  testing::TempDir dir;
  const Model m = random_model();
  save_checkpoint(dir / "a.ckpt", m, {{"k", 1}});
  save_checkpoint(dir / "b.ckpt", load_checkpoint(dir / "a.ckpt").model, {{"k", 1}});
  EXPECT_EQ(testing::read_file(dir / "a.ckpt"), testing::read_file(dir / "b.ckpt"));
}

TEST(Checkpoint, HeaderOnly) {
  testing::TempDir dir;
  save_checkpoint(dir / "m.ckpt", random_model(), {{"setting", "X"}});
  const auto h = read_checkpoint_header(dir / "m.ckpt");
  EXPECT_EQ(h["format"], "cgrg-checkpoint");
  EXPECT_EQ(h["meta"]["setting"], "X");
  EXPECT_EQ(ModelConfig::from_json(h["config"]), testing::tiny_config());
}

TEST(Checkpoint, MalformedFilesAreFormatErrors) {
  testing::TempDir dir;
  save_checkpoint(dir / "m.ckpt", random_model());
  const std::string bytes = testing::read_file(dir / "m.ckpt");
  {
    std::ofstream out(dir / "short.ckpt", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 100);
  }
  EXPECT_THROW(load_checkpoint(dir / "short.ckpt"), FormatError);
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "{\"format\":\"something-else\"}\n";
  }
  EXPECT_THROW(load_checkpoint(dir / "junk.ckpt"), FormatError);
  {
    std::ofstream out(dir / "text.ckpt", std::ios::binary);
    out << "not json\n";
  }
  EXPECT_THROW(load_checkpoint(dir / "text.ckpt"), FormatError);
  {
    std::ofstream out(dir / "empty.ckpt", std::ios::binary);
  }
  EXPECT_THROW(load_checkpoint(dir / "empty.ckpt"), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), Error);
}

TEST(Checkpoint, NonFiniteWeightsAreRejected) {
  testing::TempDir dir;
  Model m = random_model();
  m.params.lnf_bias(0, 0) = std::numeric_limits<float>::infinity();
  save_checkpoint(dir / "m.ckpt", m);
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt"), FormatError);
}

}  // namespace
}  // namespace cgrg
