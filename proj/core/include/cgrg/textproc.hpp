// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Word-level tokenization and vocabulary handling.
//
// Normalization lowercases ASCII letters, splits on whitespace and emits every
// ASCII punctuation character as its own token. Bytes >= 0x80 are treated as
// word characters so UTF-8 text passes through unchanged.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cgrg {

using TokenId = int;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kControlSepToken = "<c>";
inline constexpr std::string_view kSentenceSepToken = "<s>";

/// Splits text into normalized token strings.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> split(std::string_view text) const = 0;
};

/// Lowercase + whitespace/punctuation split.
class WordTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> split(std::string_view text) const override;
};

/// Normalized tokens of `text` using the word tokenizer.
std::vector<std::string> normalize(std::string_view text);

class Vocab {
 public:
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kUnkId = 1;
  static constexpr TokenId kEosId = 2;
  static constexpr TokenId kControlSepId = 3;
  static constexpr TokenId kSentenceSepId = 4;
  static constexpr int kNumSpecial = 5;

  /// Specials plus every token with count >= min_count, ordered by count
  /// descending then lexicographically.
  static Vocab build(const std::vector<std::string>& corpus_texts, int min_count,
                     const Tokenizer& tokenizer = WordTokenizer{});

  /// Validates that the first five entries are the special tokens.
  static Vocab from_tokens(std::vector<std::string> tokens);

  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(id_to_token_.size()); }
  bool contains(std::string_view token) const;
  /// Id of `token`, or kUnkId when absent.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }
  bool is_special(TokenId id) const { return id >= 0 && id < kNumSpecial; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

/// Token ids with the source strings they came from.
struct TokenSeq {
  std::vector<TokenId> ids;
  std::vector<std::string> surface;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

TokenSeq tokenize(std::string_view text, const Vocab& vocab,
                  const Tokenizer& tokenizer = WordTokenizer{});

/// Surface strings joined by single spaces.
std::string detokenize(const TokenSeq& seq);

/// Vocabulary strings for `ids` joined by single spaces; stops at the first
/// <eos> and skips padding.
std::string decode(std::span<const TokenId> ids, const Vocab& vocab);

/// Token ids of `text`; shorthand for tokenize(text, vocab).ids.
std::vector<TokenId> encode(std::string_view text, const Vocab& vocab);

}  // namespace cgrg
