// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/maskbuilder.hpp"

#include <algorithm>
#include <numeric>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

int segment_len(const std::vector<std::vector<TokenId>>& segments, std::size_t first, std::size_t count) {
  int n = 0;
  for (std::size_t k = first; k < first + count; ++k) n += static_cast<int>(segments[k].size()) + 1;
  return n;
}

}  // namespace

SegmentLayout build_layout(const SegmentInput& input, int r_len, const LayoutLimits& limits) {
  if (r_len < 0) throw InvalidArgument("negative response length");
  if (limits.max_sentences < 0 || limits.max_sentences > kFirstControlTypeId - kFirstGroundingTypeId) {
    throw InvalidArgument("max_sentences exceeds the grounding type id range");
  }
  if (limits.max_phrases < 0 || limits.max_phrases > kResponseTypeId - kFirstControlTypeId) {
    throw InvalidArgument("max_phrases exceeds the control type id range");
  }
  if (input.containment.size() != input.controls.size()) {
    throw InvalidArgument("containment needs one entry per control phrase");
  }
  for (const auto& sentences : input.containment) {
    for (int j : sentences) {
      if (j < 0 || static_cast<std::size_t>(j) >= input.grounding.size()) {
        throw InvalidArgument("containment index out of range");
      }
    }
  }

  std::size_t n_sent = std::min(input.grounding.size(), static_cast<std::size_t>(limits.max_sentences));
  const std::size_t n_ctrl = std::min(input.controls.size(), static_cast<std::size_t>(limits.max_phrases));
  std::size_t first_utt = 0;

  auto total = [&] {
    return segment_len(input.context, first_utt, input.context.size() - first_utt) +
           segment_len(input.grounding, 0, n_sent) + segment_len(input.controls, 0, n_ctrl) + r_len;
  };
  while (total() > limits.max_len && n_sent > 0) --n_sent;
  while (total() > limits.max_len && first_utt + 1 < input.context.size()) ++first_utt;
  if (total() > limits.max_len) {
    throw SequenceTooLong(std::to_string(total()) + " > " + std::to_string(limits.max_len));
  }

  SegmentLayout layout;
  layout.dropped_utterances = static_cast<int>(first_utt);
  int pos = 0;
  const int x_len = segment_len(input.context, first_utt, input.context.size() - first_utt);
  layout.x_span = {0, x_len - 1};
  pos = x_len;
  for (std::size_t j = 0; j < n_sent; ++j) {
    const int len = static_cast<int>(input.grounding[j].size()) + 1;
    layout.g_spans.push_back({pos, pos + len - 1});
    pos += len;
  }
  for (std::size_t i = 0; i < n_ctrl; ++i) {
    const int len = static_cast<int>(input.controls[i].size()) + 1;
    layout.c_spans.push_back({pos, pos + len - 1});
    pos += len;
    std::vector<int> kept;
    for (int j : input.containment[i]) {
      if (static_cast<std::size_t>(j) < n_sent) kept.push_back(j);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    layout.containment.push_back(std::move(kept));
  }
  layout.r_start = pos;
  layout.r_len = r_len;
  layout.total_len = pos + r_len;
  return layout;
}

std::vector<TokenId> assemble_input(const SegmentInput& input, const SegmentLayout& layout) {
  std::vector<TokenId> ids;
  ids.reserve(static_cast<std::size_t>(layout.input_len()));
  for (std::size_t k = static_cast<std::size_t>(layout.dropped_utterances); k < input.context.size(); ++k) {
    ids.insert(ids.end(), input.context[k].begin(), input.context[k].end());
    ids.push_back(Vocab::kEosId);
  }
  for (std::size_t j = 0; j < layout.g_spans.size(); ++j) {
    ids.insert(ids.end(), input.grounding[j].begin(), input.grounding[j].end());
    ids.push_back(Vocab::kSentenceSepId);
  }
  for (std::size_t i = 0; i < layout.c_spans.size(); ++i) {
    ids.insert(ids.end(), input.controls[i].begin(), input.controls[i].end());
    ids.push_back(Vocab::kControlSepId);
  }
  return ids;
}

AttentionMask::AttentionMask(int len, bool value)
    : len_(len), bits_(static_cast<std::size_t>(len) * static_cast<std::size_t>(len), value ? 1 : 0) {
  if (len < 0) throw InvalidArgument("negative mask size");
}

AttentionMask AttentionMask::causal(int len) {
  AttentionMask m(len, false);
  for (int a = 0; a < len; ++a) {
    std::fill_n(m.bits_.begin() + static_cast<std::ptrdiff_t>(a) * len, a + 1, std::uint8_t{1});
  }
  return m;
}

AttentionMask AttentionMask::extended(int new_len) const {
  if (new_len < len_) throw InvalidArgument("mask can only grow");
  AttentionMask m(new_len, false);
  for (int a = 0; a < len_; ++a) std::copy_n(row(a), len_, m.bits_.begin() + static_cast<std::ptrdiff_t>(a) * new_len);
  for (int a = len_; a < new_len; ++a) {
    std::fill_n(m.bits_.begin() + static_cast<std::ptrdiff_t>(a) * new_len, a + 1, std::uint8_t{1});
  }
  return m;
}

bool AttentionMask::is_well_formed() const {
  for (int a = 0; a < len_; ++a) {
    if (!(*this)(a, a)) return false;
    for (int b = a + 1; b < len_; ++b) {
      if ((*this)(a, b)) return false;
    }
  }
  return true;
}

AttentionMask build_mask(const SegmentLayout& layout) {
  AttentionMask m = AttentionMask::causal(layout.total_len);
  auto clear_block = [&](const Span& rows, const Span& cols) {
    for (int a = rows.start; a <= rows.end; ++a) {
      for (int b = cols.start; b <= std::min(cols.end, a); ++b) m.set(a, b, false);
    }
  };
  const auto n_sent = layout.g_spans.size();
  const auto n_ctrl = layout.c_spans.size();
  for (std::size_t i = 0; i < n_ctrl; ++i) {
    for (std::size_t k = 0; k < n_ctrl; ++k) {
      if (k != i) clear_block(layout.c_spans[i], layout.c_spans[k]);
    }
    const auto& holds = layout.containment[i];
    for (std::size_t j = 0; j < n_sent; ++j) {
      if (!std::binary_search(holds.begin(), holds.end(), static_cast<int>(j))) {
        clear_block(layout.c_spans[i], layout.g_spans[j]);
      }
    }
  }
  for (std::size_t j = 0; j < n_sent; ++j) {
    for (std::size_t k = 0; k < n_sent; ++k) {
      if (k != j) clear_block(layout.g_spans[j], layout.g_spans[k]);
    }
  }
  return m;
}

void EmbeddingIds::append_response(int count) {
  int next = 0;
  if (!type_ids.empty() && type_ids.back() == kResponseTypeId) next = pos_ids.back() + 1;
  for (int k = 0; k < count; ++k) {
    type_ids.push_back(kResponseTypeId);
    pos_ids.push_back(next + k);
  }
}

EmbeddingIds build_embedding_ids(const SegmentLayout& layout) {
  EmbeddingIds ids;
  ids.type_ids.reserve(static_cast<std::size_t>(layout.total_len));
  ids.pos_ids.reserve(static_cast<std::size_t>(layout.total_len));
  auto emit = [&](const Span& span, int type) {
    for (int p = 0; p < span.length(); ++p) {
      ids.type_ids.push_back(type);
      ids.pos_ids.push_back(p);
    }
  };
  emit(layout.x_span, kContextTypeId);
  for (std::size_t j = 0; j < layout.g_spans.size(); ++j) {
    emit(layout.g_spans[j], kFirstGroundingTypeId + static_cast<int>(j));
  }
  for (std::size_t i = 0; i < layout.c_spans.size(); ++i) {
    emit(layout.c_spans[i], kFirstControlTypeId + static_cast<int>(i));
  }
  emit({layout.r_start, layout.r_start + layout.r_len - 1}, kResponseTypeId);
  return ids;
}

nlohmann::json mask_to_rle(const AttentionMask& mask) {
  nlohmann::json rows = nlohmann::json::array();
  for (int a = 0; a < mask.size(); ++a) {
    nlohmann::json runs = nlohmann::json::array();
    int b = 0;
    while (b < mask.size()) {
      if (!mask(a, b)) {
        ++b;
        continue;
      }
      const int start = b;
      while (b < mask.size() && mask(a, b)) ++b;
      runs.push_back(start);
      runs.push_back(b - start);
    }
    rows.push_back(std::move(runs));
  }
  return {{"len", mask.size()}, {"rows", std::move(rows)}};
}

AttentionMask mask_from_rle(const nlohmann::json& rle) {
  try {
    const int len = rle.at("len").get<int>();
    const auto& rows = rle.at("rows");
    if (len < 0 || !rows.is_array() || static_cast<int>(rows.size()) != len) {
      throw FormatError("mask rle: row count does not match len");
    }
    AttentionMask m(len, false);
    for (int a = 0; a < len; ++a) {
      const auto& runs = rows[static_cast<std::size_t>(a)];
      if (!runs.is_array() || runs.size() % 2 != 0) throw FormatError("mask rle: runs must come in pairs");
      for (std::size_t k = 0; k < runs.size(); k += 2) {
        const int start = runs[k].get<int>();
        const int count = runs[k + 1].get<int>();
        if (start < 0 || count < 0 || start + count > len) throw FormatError("mask rle: run out of range");
        for (int b = start; b < start + count; ++b) m.set(a, b, true);
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("mask rle: ") + e.what());
  }
}

nlohmann::json layout_to_json(const SegmentLayout& layout) {
  auto span_json = [](const Span& s) { return nlohmann::json::array({s.start, s.end}); };
  nlohmann::json g = nlohmann::json::array();
  for (const auto& s : layout.g_spans) g.push_back(span_json(s));
  nlohmann::json c = nlohmann::json::array();
  for (const auto& s : layout.c_spans) c.push_back(span_json(s));
  return {{"x_span", span_json(layout.x_span)},
          {"g_spans", std::move(g)},
          {"c_spans", std::move(c)},
          {"r_start", layout.r_start},
          {"containment", layout.containment},
          {"total_len", layout.total_len},
          {"dropped_utterances", layout.dropped_utterances}};
}

}  // namespace cgrg
