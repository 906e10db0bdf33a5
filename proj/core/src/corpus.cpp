// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "cgrg/error.hpp"
#include "cgrg/textproc.hpp"

namespace cgrg {

namespace {

using Tokens = std::vector<std::string>;

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<Tokens> normalize_all(const std::vector<std::string>& texts) {
  std::vector<Tokens> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(normalize(t));
  return out;
}

bool occurs_in_any(const std::vector<Tokens>& docs, std::span<const std::string> phrase) {
  return std::any_of(docs.begin(), docs.end(),
                     [&](const Tokens& d) { return contains_phrase(d, phrase); });
}

// `inner` is a strictly shorter contiguous run of `outer`.
bool is_proper_subspan(const Tokens& inner, const Tokens& outer) {
  return inner.size() < outer.size() && contains_phrase(outer, inner);
}

}  // namespace

std::vector<std::string> reference_set(const GroundedExample& example) {
  std::vector<std::string> refs{example.response};
  if (example.refs) {
    for (const auto& r : *example.refs) {
      if (refs.size() >= kMaxReferences) break;
      refs.push_back(r);
    }
  }
  return refs;
}

void ExtractionConfig::validate() const {
  if (max_ngram < 1) throw InvalidArgument("max_ngram must be >= 1");
  if (!(df_threshold > 0.0 && df_threshold <= 1.0)) {
    throw InvalidArgument("df_threshold must lie in (0, 1]");
  }
}

DocFreq grounding_doc_freq(std::span<const GroundedExample> examples) {
  DocFreq df;
  if (examples.empty()) return df;
  std::unordered_map<std::string, long> counts;
  for (const auto& ex : examples) {
    std::unordered_set<std::string> seen;
    for (const auto& sentence : ex.grounding) {
      for (auto& tok : normalize(sentence)) seen.insert(std::move(tok));
    }
    for (const auto& tok : seen) ++counts[tok];
  }
  const double n = static_cast<double>(examples.size());
  df.reserve(counts.size());
  for (const auto& [tok, c] : counts) df.emplace(tok, static_cast<double>(c) / n);
  return df;
}

bool contains_phrase(std::span<const std::string> haystack,
                     std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

std::vector<std::string> extract_user_controls(const std::vector<std::string>& grounding,
                                               std::string_view response,
                                               const std::vector<std::string>& context,
                                               const ExtractionConfig& cfg,
                                               const DocFreq& doc_freq) {
  cfg.validate();
  const std::vector<Tokens> ground = normalize_all(grounding);
  const std::vector<Tokens> ctx = normalize_all(context);
  const Tokens resp = normalize(response);

  auto is_function = [&](const std::string& t) { return is_function_token(t, cfg.stopwords); };
  auto informative = [&](std::span<const std::string> gram) {
    bool has_content = false;
    for (const auto& t : gram) {
      if (is_function(t)) continue;
      has_content = true;
      auto it = doc_freq.find(t);
      const double df = it == doc_freq.end() ? 0.0 : it->second;
      if (df > cfg.df_threshold) return false;
    }
    return has_content;
  };

  struct Candidate {
    Tokens tokens;
    std::size_t first_pos;
  };
  std::vector<Candidate> candidates;
  std::set<Tokens> seen;
  const auto max_n = static_cast<std::size_t>(cfg.max_ngram);
  for (std::size_t start = 0; start < resp.size(); ++start) {
    for (std::size_t n = 1; n <= max_n && start + n <= resp.size(); ++n) {
      std::span<const std::string> gram(resp.data() + start, n);
      // A gram with a function word at either edge has a shorter twin that
      // also matches; only the shorter one is kept.
      if (is_function(gram.front()) || is_function(gram.back())) continue;
      Tokens key(gram.begin(), gram.end());
      if (seen.count(key)) continue;
      if (!occurs_in_any(ground, gram)) continue;
      if (!informative(gram)) continue;
      if (occurs_in_any(ctx, gram)) continue;
      seen.insert(key);
      candidates.push_back({std::move(key), start});
    }
  }

  std::vector<std::string> out;
  for (const auto& cand : candidates) {
    const bool dominated = std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& o) {
      return is_proper_subspan(cand.tokens, o.tokens);
    });
    if (!dominated) out.push_back(join(cand.tokens));
  }
  return out;
}

std::vector<int> select_gc(const std::vector<std::string>& grounding,
                           const std::vector<std::string>& controls) {
  std::vector<int> out;
  if (controls.empty()) return out;
  const std::vector<Tokens> phrases = normalize_all(controls);
  for (std::size_t j = 0; j < grounding.size() && out.size() < kMaxGroundedSentences; ++j) {
    const Tokens sentence = normalize(grounding[j]);
    const bool hit = std::any_of(phrases.begin(), phrases.end(),
                                 [&](const Tokens& p) { return contains_phrase(sentence, p); });
    if (hit) out.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<GroundedExample> filter_dataset(std::vector<GroundedExample> examples) {
  std::erase_if(examples, [](const GroundedExample& ex) { return ex.controls.empty(); });
  return examples;
}

void annotate_controls(std::vector<GroundedExample>& examples, const ExtractionConfig& cfg) {
  const DocFreq df = grounding_doc_freq(examples);
  for (auto& ex : examples) {
    ex.controls = extract_user_controls(ex.grounding, ex.response, ex.context, cfg, df);
    if (ex.controls.size() > kMaxControls) ex.controls.resize(kMaxControls);
    ex.gc = select_gc(ex.grounding, ex.controls);
  }
}

nlohmann::ordered_json to_json(const GroundedExample& example) {
  nlohmann::ordered_json j;
  j["context"] = example.context;
  j["grounding"] = example.grounding;
  j["response"] = example.response;
  if (example.refs) j["refs"] = *example.refs;
  j["controls"] = example.controls;
  j["gc"] = example.gc;
  return j;
}

GroundedExample example_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("dataset record must be a JSON object");
  GroundedExample ex;
  try {
    ex.context = j.at("context").get<std::vector<std::string>>();
    ex.grounding = j.value("grounding", std::vector<std::string>{});
    ex.response = j.value("response", std::string{});
    if (j.contains("refs")) ex.refs = j.at("refs").get<std::vector<std::string>>();
    ex.controls = j.value("controls", std::vector<std::string>{});
    ex.gc = j.value("gc", std::vector<int>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dataset record: ") + e.what());
  }
  return ex;
}

std::string to_jsonl_line(const GroundedExample& example) {
  return to_json(example).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_jsonl(const std::filesystem::path& path, std::span<const GroundedExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& ex : examples) out << to_jsonl_line(ex) << '\n';
}

std::vector<GroundedExample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<GroundedExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(example_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::ordered_json dataset_meta(const ExtractionConfig& cfg) {
  nlohmann::ordered_json meta;
  meta["format"] = "cgrg-jsonl/1";
  meta["tokenizer"] = {{"kind", "word"},
                       {"lowercase", true},
                       {"split", "whitespace+ascii-punctuation"},
                       {"punctuation_tokens", true}};
  std::vector<std::string> stop(cfg.stopwords.begin(), cfg.stopwords.end());
  std::sort(stop.begin(), stop.end());
  meta["extraction"] = {{"max_ngram", cfg.max_ngram},
                        {"df_threshold", cfg.df_threshold},
                        {"stopword_count", stop.size()},
                        {"max_controls", kMaxControls},
                        {"max_gc_sentences", kMaxGroundedSentences}};
  return meta;
}

void write_meta(const std::filesystem::path& path, const ExtractionConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << dataset_meta(cfg).dump(2) << '\n';
}

}  // namespace cgrg
