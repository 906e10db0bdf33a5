// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace cgrg {

using WordSet = std::unordered_set<std::string>;

/// Function words shipped in data/stopwords.txt.
const WordSet& default_stopwords();

/// Closed verb list shipped in data/verbs.txt, used by the noun-phrase chunker.
const WordSet& default_verbs();

/// Parses a one-word-per-line list; '#' starts a comment line.
WordSet parse_word_list(std::string_view text);

/// True for a token made entirely of ASCII punctuation.
bool is_punctuation(std::string_view token);

/// Stop-word or punctuation: the tokens that carry no content.
bool is_function_token(std::string_view token, const WordSet& stopwords);

}  // namespace cgrg
