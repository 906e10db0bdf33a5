// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Retrieval-based control phrase prediction.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgrg/corpus.hpp"
#include "cgrg/wordlists.hpp"

namespace cgrg {

/// idf(t) = log(N / df(t)) over N grounding documents. Tokens never seen get
/// the weight of a singleton, log N.
class IdfTable {
 public:
  IdfTable() = default;

  /// Each document is a list of sentences.
  static IdfTable from_documents(const std::vector<std::vector<std::string>>& documents);
  static IdfTable from_examples(std::span<const GroundedExample> examples);
  /// Direct construction from document counts; used by tests and loaders.
  static IdfTable from_counts(long num_documents, std::unordered_map<std::string, long> counts);

  double idf(std::string_view token) const;
  long num_documents() const { return num_documents_; }

  /// TSV: a "#documents\t<N>" line then "token\tdf" lines, sorted by token.
  void save(const std::filesystem::path& path) const;
  static IdfTable load(const std::filesystem::path& path);

 private:
  long num_documents_ = 0;
  std::unordered_map<std::string, long> doc_counts_;
};

/// Returns (sentence index, score) pairs, best first. The score of a sentence
/// is the summed idf of the distinct tokens it shares with the context; ties
/// keep ascending index order.
std::vector<std::pair<int, double>> rank_sentences(const std::vector<std::string>& context,
                                                   const std::vector<std::string>& grounding,
                                                   const IdfTable& idf);

class NounPhraseDetector {
 public:
  virtual ~NounPhraseDetector() = default;
  /// Noun-phrase token runs found in one normalized sentence.
  virtual std::vector<std::vector<std::string>> chunks(
      const std::vector<std::string>& tokens) const = 0;
};

/// Maximal runs of tokens that are neither function words nor listed verbs.
class HeuristicChunker final : public NounPhraseDetector {
 public:
  HeuristicChunker();
  HeuristicChunker(WordSet stopwords, WordSet verbs, std::size_t max_len = 5);

  std::vector<std::vector<std::string>> chunks(
      const std::vector<std::string>& tokens) const override;

 private:
  WordSet stopwords_;
  WordSet verbs_;
  std::size_t max_len_;
};

struct PredictedControls {
  std::vector<std::string> phrases;  // at most two
  std::vector<double> scores;        // sentence frequency of each phrase
  std::vector<int> gc_indices;
};

struct PredictorConfig {
  std::size_t top_sentences = 50;
  std::size_t max_phrases = 2;
};

/// Ranks grounding sentences against the context, counts noun-phrase
/// occurrences over the top sentences and keeps the two most frequent.
/// Ties prefer higher summed idf, then fewer tokens, then lexicographic order.
PredictedControls predict_controls(const std::vector<std::string>& context,
                                   const std::vector<std::string>& grounding,
                                   const IdfTable& idf,
                                   const NounPhraseDetector& detector,
                                   const PredictorConfig& cfg = {});

}  // namespace cgrg
