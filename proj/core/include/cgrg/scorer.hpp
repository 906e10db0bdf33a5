// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "cgrg/textproc.hpp"

namespace cgrg {

/// Next-token distribution for a fixed input and a growing response prefix.
/// This is the only view of a model the decoders need.
class NextTokenScorer {
 public:
  virtual ~NextTokenScorer() = default;
  virtual int vocab_size() const = 0;
  /// Number of response tokens that still fit after the input.
  virtual int capacity() const = 0;
  /// Natural-log probabilities of every vocabulary entry after `response`.
  virtual std::vector<double> next_logprobs(std::span<const TokenId> response) = 0;
};

}  // namespace cgrg
