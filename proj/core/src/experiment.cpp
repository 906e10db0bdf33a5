// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>

#include "cgrg/analysis.hpp"
#include "cgrg/error.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg {

namespace {

std::vector<std::string> example_texts(const GroundedExample& ex) {
  std::vector<std::string> texts = ex.context;
  texts.insert(texts.end(), ex.grounding.begin(), ex.grounding.end());
  texts.push_back(ex.response);
  if (ex.refs) texts.insert(texts.end(), ex.refs->begin(), ex.refs->end());
  texts.insert(texts.end(), ex.controls.begin(), ex.controls.end());
  return texts;
}

std::vector<std::string> id_strings(const std::vector<TokenId>& ids, const Vocab& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(vocab.token(id));
  return out;
}

}  // namespace

const SettingResult& ExperimentReport::row(Setting s) const {
  for (const auto& r : rows) {
    if (r.setting == s) return r;
  }
  throw InvalidArgument("report has no row for " + std::string(setting_name(s)));
}

const RatioSummary* ExperimentReport::ratio(Setting numerator, Setting denominator) const {
  for (const auto& r : ratios) {
    if (r.numerator == setting_name(numerator) && r.denominator == setting_name(denominator)) return &r;
  }
  return nullptr;
}

Vocab build_vocab(std::span<const GroundedExample> examples, int min_count) {
  std::vector<std::string> texts;
  for (const auto& ex : examples) {
    auto t = example_texts(ex);
    texts.insert(texts.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return Vocab::build(texts, min_count);
}

Model train_setting(std::span<const GroundedExample> examples, Setting s, const Vocab& vocab,
                    const ExperimentConfig& cfg, const ProgressLog& log) {
  std::vector<TrainingInstance> data;
  data.reserve(examples.size());
  for (const auto& ex : examples) data.push_back(build_training_instance(ex, s, vocab, limits_for(cfg.model)));
  ModelConfig mc = cfg.model;
  mc.vocab_size = vocab.size();
  const int every = std::max(1, cfg.hyper.steps / 10);
  TrainObserver observer;
  if (log) {
    observer = [&](const TrainLogEntry& e) {
      if (e.step % every == 0 || e.step == cfg.hyper.steps) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s step %d loss %.4f", std::string(setting_name(s)).c_str(),
                      e.step, e.loss);
        log(buf);
      }
    };
  }
  TrainResult r = train(data, mc, cfg.hyper, observer);
  return Model{mc, std::move(r.params)};
}

SettingResult evaluate_setting(const Model& model, const Vocab& vocab,
                               std::span<const GroundedExample> test, Setting s,
                               const DecodeParams& decode) {
  SettingResult out;
  out.setting = s;
  auto params = std::make_shared<const Parameters<float>>(model.params);
  DecodeParams dp = decode;
  dp.method = uses_decoding_constraints(s) ? DecodeMethod::kGbs : DecodeMethod::kGreedy;

  std::vector<Tokens> hyps;
  std::vector<std::vector<Tokens>> refs;
  int included = 0;
  double fact_sum = 0.0;
  int fact_n = 0;
  const WordSet& stop = default_stopwords();
  for (const auto& ex : test) {
    const ModelInput input = build_model_input(ex, s, vocab, dp.max_new_tokens, limits_for(model.config));
    CachedScorer<float> scorer(params, model.config, input.input_ids, input.embedding_ids, input.mask);
    Hypothesis h;
    if (dp.method == DecodeMethod::kGbs && !input.constraints.empty()) {
      try {
        h = grid_beam_search(scorer, input.constraints, dp);
      } catch (const ConstraintsUnsatisfiable&) {
        h = greedy(scorer, dp);
      }
    } else {
      h = greedy(scorer, dp);
    }
    Tokens tokens = id_strings(h.token_ids, vocab);
    if (includes_controls(tokens, ex.controls)) ++included;
    const double acc = fact_accuracy(tokens, ex, stop);
    if (acc >= 0.0) {
      fact_sum += acc;
      ++fact_n;
    }
    std::vector<Tokens> ex_refs;
    for (const auto& r : reference_set(ex)) ex_refs.push_back(normalize(r));
    refs.push_back(std::move(ex_refs));
    out.hypotheses.push_back(cgrg::decode(h.token_ids, vocab));
    hyps.push_back(std::move(tokens));
  }
  if (!test.empty()) out.inclusion_rate = static_cast<double>(included) / static_cast<double>(test.size());
  if (fact_n) out.fact_accuracy = fact_sum / fact_n;
  out.single_ref = score_responses(hyps, refs, false);
  out.multi_ref = score_responses(hyps, refs, true).corpus;
  return out;
}

ExperimentReport run_experiment(std::span<const GroundedExample> train,
                                std::span<const GroundedExample> test, const ExperimentConfig& cfg,
                                const ProgressLog& log) {
  if (train.empty()) throw InvalidArgument("empty training split");
  const Vocab vocab = build_vocab(train, cfg.vocab_min_count);
  std::map<Setting, Model> models;
  std::map<Setting, double> losses;
  auto model_for = [&](Setting s) -> const Model& {
    const Setting ts = training_setting(s);
    auto it = models.find(ts);
    if (it == models.end()) {
      if (log) log("training " + std::string(setting_name(ts)));
      it = models.emplace(ts, train_setting(train, ts, vocab, cfg, log)).first;
    }
    return it->second;
  };

  ExperimentReport report;
  for (Setting s : cfg.settings) {
    const Model& m = model_for(s);
    if (log) log("evaluating " + std::string(setting_name(s)));
    report.rows.push_back(evaluate_setting(m, vocab, test, s, cfg.decode));
  }

  if (cfg.probability_ratios) {
    const auto probes = entity_probes(test, default_stopwords());
    const std::pair<Setting, Setting> pairs[] = {{Setting::kXC, Setting::kXCGCIA},
                                                 {Setting::kXGC, Setting::kXCGCIA},
                                                 {Setting::kXC, Setting::kXCGC},
                                                 {Setting::kXGC, Setting::kXCGC}};
    for (const auto& [num, den] : pairs) {
      const bool have = std::count(cfg.settings.begin(), cfg.settings.end(), num) &&
                        std::count(cfg.settings.begin(), cfg.settings.end(), den);
      if (!have) continue;
      RatioSummary r{std::string(setting_name(num)), std::string(setting_name(den)),
                     probability_ratio(model_for(num), num, model_for(den), den, vocab, test, probes)};
      if (log && r.result.skipped) {
        log("probability ratio " + r.numerator + "/" + r.denominator + ": skipped " +
            std::to_string(r.result.skipped) + " probes with zero denominator");
      }
      report.ratios.push_back(std::move(r));
    }
  }
  return report;
}

nlohmann::ordered_json to_json(const ExperimentReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"setting", setting_name(r.setting)},
                    {"nist4", r.single_ref.corpus.nist4},
                    {"bleu4", r.single_ref.corpus.bleu4},
                    {"div2", r.single_ref.corpus.div2},
                    {"avg_len", r.single_ref.corpus.avg_len},
                    {"multi_ref_nist4", r.multi_ref.nist4},
                    {"multi_ref_bleu4", r.multi_ref.bleu4},
                    {"inclusion_rate", r.inclusion_rate},
                    {"fact_accuracy", r.fact_accuracy}});
  }
  nlohmann::ordered_json ratios = nlohmann::ordered_json::array();
  for (const auto& r : report.ratios) {
    ratios.push_back({{"numerator", r.numerator},
                      {"denominator", r.denominator},
                      {"ratio", r.result.ratio},
                      {"probes", r.result.used},
                      {"skipped", r.result.skipped}});
  }
  return {{"rows", std::move(rows)}, {"probability_ratios", std::move(ratios)}};
}

std::string format_table(const ExperimentReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-11s %7s %7s %7s %7s %9s %9s\n", "setting", "NIST", "BLEU",
                "Div-2", "Avg-L", "include", "fact-acc");
  out += buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-11s %7.3f %6.2f%% %6.2f%% %7.2f %8.1f%% %8.1f%%\n",
                  std::string(setting_name(r.setting)).c_str(), r.single_ref.corpus.nist4,
                  100.0 * r.single_ref.corpus.bleu4, 100.0 * r.single_ref.corpus.div2,
                  r.single_ref.corpus.avg_len, 100.0 * r.inclusion_rate, 100.0 * r.fact_accuracy);
    out += buf;
  }
  for (const auto& r : report.ratios) {
    std::snprintf(buf, sizeof buf, "p(%s) / p(%s) = %.3f over %d probes\n", r.numerator.c_str(),
                  r.denominator.c_str(), r.result.ratio, r.result.used);
    out += buf;
  }
  return out;
}

}  // namespace cgrg
