// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cgrg/corpus.hpp"
#include "cgrg/maskbuilder.hpp"
#include "cgrg/model.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg::testing {

/// 2 layers, 2 heads, d = 64, short maximum length.
ModelConfig tiny_config(int vocab_size = 48, int max_len = 96);

/// Initialized parameters with every tensor (gains and biases included)
/// perturbed by N(0, scale^2) so that no gradient is structurally zero.
template <typename S>
Parameters<S> random_params(const ModelConfig& cfg, std::uint64_t seed, double scale = 0.2);

/// A random instance: segments and containment drawn at random, response of
/// `response_len` tokens, all token ids below cfg.vocab_size.
struct RandomInstance {
  SegmentLayout layout;
  TrainingInstance inst;
};
RandomInstance random_instance(std::mt19937_64& rng, const ModelConfig& cfg, int max_segments = 8,
                               int max_input_tokens = 40, int response_len = 4);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small hand-written corpus with controls already annotated.
std::vector<GroundedExample> toy_corpus();

/// Writes a randomly initialised model over the toy corpus vocabulary
/// (checkpoint, vocab.txt, idf.tsv) into `dir`; returns the checkpoint path.
std::filesystem::path write_toy_model(const std::filesystem::path& dir, const std::string& setting = "X+C+GC+IA",
                                      int max_len = 96);

std::string read_file(const std::filesystem::path& path);

}  // namespace cgrg::testing
