// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> tokens = {
      std::string(kPadToken), std::string(kUnkToken), std::string(kEosToken),
      std::string(kControlSepToken), std::string(kSentenceSepToken)};
  return tokens;
}

}  // namespace

std::vector<std::string> WordTokenizer::split(std::string_view text) const {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c) || c == 0) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else if (c < 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return out;
}

std::vector<std::string> normalize(std::string_view text) {
  return WordTokenizer{}.split(text);
}

Vocab Vocab::build(const std::vector<std::string>& corpus_texts, int min_count,
                   const Tokenizer& tokenizer) {
  if (corpus_texts.empty()) throw InvalidArgument("empty corpus");
  if (min_count < 1) throw InvalidArgument("min_count must be >= 1");

  std::map<std::string, long> counts;
  for (const auto& text : corpus_texts) {
    for (auto& tok : tokenizer.split(text)) ++counts[std::move(tok)];
  }

  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, n] : counts) {
    if (n < min_count) continue;
    if (std::find(special_tokens().begin(), special_tokens().end(), tok) !=
        special_tokens().end()) {
      continue;
    }
    kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens = special_tokens();
  tokens.reserve(tokens.size() + kept.size());
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < special_tokens().size() ||
      !std::equal(special_tokens().begin(), special_tokens().end(), tokens.begin())) {
    throw FormatError("vocabulary must start with <pad>, <unk>, <eos>, <c>, <s>");
  }
  Vocab vocab;
  vocab.id_to_token_ = std::move(tokens);
  vocab.token_to_id_.reserve(vocab.id_to_token_.size());
  for (std::size_t i = 0; i < vocab.id_to_token_.size(); ++i) {
    auto [it, inserted] =
        vocab.token_to_id_.emplace(vocab.id_to_token_[i], static_cast<TokenId>(i));
    if (!inserted) throw FormatError("duplicate vocabulary entry: " + it->first);
  }
  return vocab;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary file " + path.string());
  for (const auto& tok : id_to_token_) out << tok << '\n';
}

bool Vocab::contains(std::string_view token) const {
  return token_to_id_.find(std::string(token)) != token_to_id_.end();
}

TokenId Vocab::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || id >= size()) throw InvalidArgument("token id out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

TokenSeq tokenize(std::string_view text, const Vocab& vocab, const Tokenizer& tokenizer) {
  TokenSeq seq;
  seq.surface = tokenizer.split(text);
  seq.ids.reserve(seq.surface.size());
  for (const auto& tok : seq.surface) seq.ids.push_back(vocab.id(tok));
  return seq;
}

std::string detokenize(const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.surface.size(); ++i) {
    if (i) out.push_back(' ');
    out += seq.surface[i];
  }
  return out;
}

std::string decode(std::span<const TokenId> ids, const Vocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id == Vocab::kEosId) break;
    if (id == Vocab::kPadId) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

std::vector<TokenId> encode(std::string_view text, const Vocab& vocab) {
  return tokenize(text, vocab).ids;
}

}  // namespace cgrg
