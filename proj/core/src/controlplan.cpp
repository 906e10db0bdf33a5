// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/controlplan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cgrg/error.hpp"
#include "cgrg/textproc.hpp"

namespace cgrg {

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

IdfTable IdfTable::from_documents(const std::vector<std::vector<std::string>>& documents) {
  std::unordered_map<std::string, long> counts;
  for (const auto& doc : documents) {
    std::unordered_set<std::string> seen;
    for (const auto& sentence : doc) {
      for (auto& tok : normalize(sentence)) seen.insert(std::move(tok));
    }
    for (const auto& tok : seen) ++counts[tok];
  }
  return from_counts(static_cast<long>(documents.size()), std::move(counts));
}

IdfTable IdfTable::from_examples(std::span<const GroundedExample> examples) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(examples.size());
  for (const auto& ex : examples) docs.push_back(ex.grounding);
  return from_documents(docs);
}

IdfTable IdfTable::from_counts(long num_documents, std::unordered_map<std::string, long> counts) {
  if (num_documents < 0) throw InvalidArgument("negative document count");
  for (const auto& [tok, c] : counts) {
    if (c < 1 || c > num_documents) throw InvalidArgument("document count out of range for " + tok);
  }
  IdfTable t;
  t.num_documents_ = num_documents;
  t.doc_counts_ = std::move(counts);
  return t;
}

double IdfTable::idf(std::string_view token) const {
  if (num_documents_ == 0) return 0.0;
  auto it = doc_counts_.find(std::string(token));
  const long df = it == doc_counts_.end() ? 1 : it->second;
  return std::log(static_cast<double>(num_documents_) / static_cast<double>(df));
}

void IdfTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "#documents\t" << num_documents_ << '\n';
  std::map<std::string, long> sorted(doc_counts_.begin(), doc_counts_.end());
  for (const auto& [tok, c] : sorted) out << tok << '\t' << c << '\n';
}

IdfTable IdfTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("#documents\t", 0) != 0) {
    throw FormatError("idf table must start with a #documents line");
  }
  const long n = std::stol(line.substr(11));
  std::unordered_map<std::string, long> counts;
  while (std::getline(in, line)) {
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw FormatError("bad idf line: " + line);
    counts[line.substr(0, tab)] = std::stol(line.substr(tab + 1));
  }
  return from_counts(n, std::move(counts));
}

std::vector<std::pair<int, double>> rank_sentences(const std::vector<std::string>& context,
                                                   const std::vector<std::string>& grounding,
                                                   const IdfTable& idf) {
  std::unordered_set<std::string> ctx;
  for (const auto& utt : context) {
    for (auto& tok : normalize(utt)) ctx.insert(std::move(tok));
  }
  std::vector<std::pair<int, double>> ranked;
  ranked.reserve(grounding.size());
  for (std::size_t j = 0; j < grounding.size(); ++j) {
    const auto toks = normalize(grounding[j]);
    const std::set<std::string> unique(toks.begin(), toks.end());
    double score = 0.0;
    for (const auto& t : unique) {
      if (ctx.count(t)) score += idf.idf(t);
    }
    ranked.emplace_back(static_cast<int>(j), score);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

HeuristicChunker::HeuristicChunker() : HeuristicChunker(default_stopwords(), default_verbs()) {}

HeuristicChunker::HeuristicChunker(WordSet stopwords, WordSet verbs, std::size_t max_len)
    : stopwords_(std::move(stopwords)), verbs_(std::move(verbs)), max_len_(max_len) {}

std::vector<std::vector<std::string>> HeuristicChunker::chunks(
    const std::vector<std::string>& tokens) const {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> run;
  auto flush = [&] {
    // Runs longer than max_len are not phrase-sized; they are dropped.
    if (!run.empty() && run.size() <= max_len_) out.push_back(run);
    run.clear();
  };
  for (const auto& tok : tokens) {
    if (is_function_token(tok, stopwords_) || verbs_.count(tok)) {
      flush();
    } else {
      run.push_back(tok);
    }
  }
  flush();
  return out;
}

PredictedControls predict_controls(const std::vector<std::string>& context,
                                   const std::vector<std::string>& grounding,
                                   const IdfTable& idf,
                                   const NounPhraseDetector& detector,
                                   const PredictorConfig& cfg) {
  PredictedControls result;
  if (grounding.empty()) return result;

  const auto ranked = rank_sentences(context, grounding, idf);
  const std::size_t top = std::min(cfg.top_sentences, ranked.size());

  struct Stat {
    long sentences = 0;
    double idf_sum = 0.0;
    std::size_t length = 0;
  };
  std::map<std::string, Stat> stats;
  for (std::size_t r = 0; r < top; ++r) {
    const auto toks = normalize(grounding[static_cast<std::size_t>(ranked[r].first)]);
    std::set<std::string> in_sentence;
    for (const auto& chunk : detector.chunks(toks)) in_sentence.insert(join(chunk));
    for (const auto& phrase : in_sentence) {
      auto& s = stats[phrase];
      if (s.sentences == 0) {
        const auto ptoks = normalize(phrase);
        s.length = ptoks.size();
        for (const auto& t : ptoks) s.idf_sum += idf.idf(t);
      }
      ++s.sentences;
    }
  }

  std::vector<std::pair<std::string, Stat>> order(stats.begin(), stats.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.sentences != b.second.sentences) return a.second.sentences > b.second.sentences;
    if (a.second.idf_sum != b.second.idf_sum) return a.second.idf_sum > b.second.idf_sum;
    if (a.second.length != b.second.length) return a.second.length < b.second.length;
    return a.first < b.first;
  });

  for (std::size_t k = 0; k < order.size() && k < cfg.max_phrases; ++k) {
    const auto& [phrase, s] = order[k];
    // A later phrase that fully overlaps the first one is dropped, not replaced.
    if (k > 0 && normalize(phrase) == normalize(result.phrases.front())) continue;
    result.phrases.push_back(phrase);
    result.scores.push_back(static_cast<double>(s.sentences));
  }
  result.gc_indices = select_gc(grounding, result.phrases);
  return result;
}

}  // namespace cgrg
