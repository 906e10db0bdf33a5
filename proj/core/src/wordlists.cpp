// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/wordlists.hpp"

#include <algorithm>
#include <cctype>

namespace cgrg {

namespace detail {
extern const char* const kStopwordsText;
extern const char* const kVerbsText;
}  // namespace detail

WordSet parse_word_list(std::string_view text) {
  WordSet words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
      line.remove_prefix(1);
    }
    if (!line.empty() && line.front() != '#') words.emplace(line);
    pos = end + 1;
  }
  return words;
}

const WordSet& default_stopwords() {
  static const WordSet words = parse_word_list(detail::kStopwordsText);
  return words;
}

const WordSet& default_verbs() {
  static const WordSet words = parse_word_list(detail::kVerbsText);
  return words;
}

bool is_punctuation(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  });
}

bool is_function_token(std::string_view token, const WordSet& stopwords) {
  return is_punctuation(token) || stopwords.count(std::string(token)) > 0;
}

}  // namespace cgrg
