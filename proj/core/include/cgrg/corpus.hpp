// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Grounded conversation records, simulated user controls and dataset I/O.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgrg/wordlists.hpp"

namespace cgrg {

inline constexpr std::size_t kMaxControls = 10;
inline constexpr std::size_t kMaxGroundedSentences = 20;
inline constexpr std::size_t kMaxReferences = 5;

struct GroundedExample {
  std::vector<std::string> context;    // dialogue turns, oldest first
  std::vector<std::string> grounding;  // one entry per sentence
  std::string response;
  std::optional<std::vector<std::string>> refs;  // alternative references
  std::vector<std::string> controls;
  std::vector<int> gc;  // grounding indices holding at least one control

  friend bool operator==(const GroundedExample&, const GroundedExample&) = default;
};

/// The reference set used for multi-reference scoring: the response followed
/// by its alternatives, capped at kMaxReferences.
std::vector<std::string> reference_set(const GroundedExample& example);

struct ExtractionConfig {
  int max_ngram = 5;
  double df_threshold = 0.1;
  WordSet stopwords = default_stopwords();

  void validate() const;
};

/// Token -> fraction of grounding documents that contain it.
using DocFreq = std::unordered_map<std::string, double>;

/// Document frequencies where each example's grounding is one document.
DocFreq grounding_doc_freq(std::span<const GroundedExample> examples);

/// True when `needle` occurs as a contiguous run inside `haystack`.
bool contains_phrase(std::span<const std::string> haystack,
                     std::span<const std::string> needle);

/// Simulated user controls: informative n-grams shared by grounding and
/// response, edge function words stripped, context matches removed, maximal
/// matches only. Ordered by first occurrence in the response.
std::vector<std::string> extract_user_controls(const std::vector<std::string>& grounding,
                                               std::string_view response,
                                               const std::vector<std::string>& context,
                                               const ExtractionConfig& cfg,
                                               const DocFreq& doc_freq);

/// Ascending indices of grounding sentences containing any control phrase,
/// truncated to the first kMaxGroundedSentences.
std::vector<int> select_gc(const std::vector<std::string>& grounding,
                           const std::vector<std::string>& controls);

/// Keeps examples with at least one control, preserving order.
std::vector<GroundedExample> filter_dataset(std::vector<GroundedExample> examples);

/// Runs extraction with corpus-level document frequencies and fills
/// `controls` (capped at kMaxControls) and `gc` on every example.
void annotate_controls(std::vector<GroundedExample>& examples, const ExtractionConfig& cfg);

// JSONL persistence. Keys are written in a fixed order so that a
// write/read/write cycle is byte-identical.
nlohmann::ordered_json to_json(const GroundedExample& example);
GroundedExample example_from_json(const nlohmann::json& j);
std::string to_jsonl_line(const GroundedExample& example);
void write_jsonl(const std::filesystem::path& path, std::span<const GroundedExample> examples);
std::vector<GroundedExample> read_jsonl(const std::filesystem::path& path);

/// Sidecar describing how the dataset was normalized and annotated.
nlohmann::ordered_json dataset_meta(const ExtractionConfig& cfg);
void write_meta(const std::filesystem::path& path, const ExtractionConfig& cfg);

}  // namespace cgrg
