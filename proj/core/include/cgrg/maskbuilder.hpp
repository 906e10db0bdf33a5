// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Segment layout, embedding ids and the inductive attention mask.
//
// The input sequence is laid out as X, G_C, C, R:
//   X    every context utterance followed by <eos>      type 0
//   G_j  grounding sentence j followed by <s>           type 1 + j
//   C_i  control phrase i followed by <c>               type 21 + i
//   R    response tokens                                type 31
// Position ids restart at 0 in every segment.
//
// Mask entry (a, b) is 0 when b is in the future, when a and b sit in two
// different control phrases, when they sit in two different grounding
// sentences, or when a is in C_i and b is in a sentence that does not contain
// C_i. Everything else is 1, so response rows see the whole prefix.

#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgrg/textproc.hpp"

namespace cgrg {

inline constexpr int kMaxSequenceLength = 512;
inline constexpr int kContextTypeId = 0;
inline constexpr int kFirstGroundingTypeId = 1;
inline constexpr int kFirstControlTypeId = 21;
inline constexpr int kResponseTypeId = 31;
inline constexpr int kNumTypeIds = 32;

/// Inclusive token span; empty when end < start.
struct Span {
  int start = 0;
  int end = -1;

  int length() const { return end - start + 1; }
  bool empty() const { return end < start; }
  bool contains(int pos) const { return pos >= start && pos <= end; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Token lists for the pieces of one instance, before separators are added.
struct SegmentInput {
  std::vector<std::vector<TokenId>> context;    // utterances, oldest first
  std::vector<std::vector<TokenId>> grounding;  // G_C (or G) sentences
  std::vector<std::vector<TokenId>> controls;   // control phrases
  std::vector<std::vector<int>> containment;    // per control: sentence indices
};

struct LayoutLimits {
  int max_sentences = 20;
  int max_phrases = 10;
  int max_len = kMaxSequenceLength;
};

struct SegmentLayout {
  Span x_span;
  std::vector<Span> g_spans;
  std::vector<Span> c_spans;
  int r_start = 0;
  int r_len = 0;
  std::vector<std::vector<int>> containment;  // per kept control, ascending
  int total_len = 0;
  int dropped_utterances = 0;  // oldest context turns removed to fit

  int input_len() const { return r_start; }
  friend bool operator==(const SegmentLayout&, const SegmentLayout&) = default;
};

/// Lays out the segments, truncating when over budget: sentences beyond the
/// limit or from the end first, then the oldest context utterances. Control
/// phrases beyond max_phrases are dropped; others are never truncated.
/// Throws SequenceTooLong when the instance still does not fit.
SegmentLayout build_layout(const SegmentInput& input, int r_len, const LayoutLimits& limits = {});

/// Input token ids (X, G, C with separators) matching `layout`.
std::vector<TokenId> assemble_input(const SegmentInput& input, const SegmentLayout& layout);

/// Square boolean matrix; (a, b) true when position a may attend to b.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(int len, bool value = false);

  static AttentionMask causal(int len);

  int size() const { return len_; }
  bool operator()(int a, int b) const {
    return bits_[static_cast<std::size_t>(a) * static_cast<std::size_t>(len_) +
                 static_cast<std::size_t>(b)] != 0;
  }
  void set(int a, int b, bool value) {
    bits_[static_cast<std::size_t>(a) * static_cast<std::size_t>(len_) +
          static_cast<std::size_t>(b)] = value ? 1 : 0;
  }
  const std::uint8_t* row(int a) const {
    return bits_.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(len_);
  }

  /// Grows to `new_len`; appended rows attend to every earlier position.
  AttentionMask extended(int new_len) const;

  /// True when the mask is causal and every row keeps its diagonal.
  bool is_well_formed() const;

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  int len_ = 0;
  std::vector<std::uint8_t> bits_;
};

AttentionMask build_mask(const SegmentLayout& layout);

struct EmbeddingIds {
  std::vector<int> type_ids;
  std::vector<int> pos_ids;

  std::size_t size() const { return type_ids.size(); }
  /// Appends `count` response positions continuing the response segment.
  void append_response(int count);
  friend bool operator==(const EmbeddingIds&, const EmbeddingIds&) = default;
};

EmbeddingIds build_embedding_ids(const SegmentLayout& layout);

/// {"len": L, "rows": [[start, count, start, count, ...], ...]} where each
/// (start, count) pair is a run of allowed columns.
nlohmann::json mask_to_rle(const AttentionMask& mask);
AttentionMask mask_from_rle(const nlohmann::json& rle);

nlohmann::json layout_to_json(const SegmentLayout& layout);

}  // namespace cgrg
