// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Trains one model per input setting on the same data with the same seed and
// scores greedy (or constrained) decodes on a held-out set.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgrg/analysis.hpp"
#include "cgrg/corpus.hpp"
#include "cgrg/decoder.hpp"
#include "cgrg/input_settings.hpp"
#include "cgrg/metrics.hpp"
#include "cgrg/model.hpp"
#include "cgrg/trainer.hpp"

namespace cgrg {

struct ExperimentConfig {
  ModelConfig model;  // vocab_size is filled in from the training data
  TrainHyper hyper;
  DecodeParams decode;  // method is chosen per setting
  std::vector<Setting> settings = all_settings();
  int vocab_min_count = 1;
  bool probability_ratios = true;
};

struct SettingResult {
  Setting setting = Setting::kX;
  double inclusion_rate = 0.0;
  double fact_accuracy = 0.0;
  ScoreReport single_ref;
  CorpusScore multi_ref;
  double final_loss = 0.0;
  std::vector<std::string> hypotheses;
};

struct RatioSummary {
  std::string numerator;
  std::string denominator;
  RatioResult result;
};

struct ExperimentReport {
  std::vector<SettingResult> rows;
  std::vector<RatioSummary> ratios;

  const SettingResult& row(Setting s) const;
  const RatioSummary* ratio(Setting numerator, Setting denominator) const;
};

using ProgressLog = std::function<void(const std::string&)>;

/// Builds the vocabulary from the training split.
Vocab build_vocab(std::span<const GroundedExample> examples, int min_count);

/// Trains the model behind one setting.
Model train_setting(std::span<const GroundedExample> examples, Setting s, const Vocab& vocab,
                    const ExperimentConfig& cfg, const ProgressLog& log = {});

/// Decodes every test example under `s` and scores it.
SettingResult evaluate_setting(const Model& model, const Vocab& vocab,
                               std::span<const GroundedExample> test, Setting s,
                               const DecodeParams& decode);

ExperimentReport run_experiment(std::span<const GroundedExample> train,
                                std::span<const GroundedExample> test, const ExperimentConfig& cfg,
                                const ProgressLog& log = {});

nlohmann::ordered_json to_json(const ExperimentReport& report);
/// Fixed-width text table, one row per setting.
std::string format_table(const ExperimentReport& report);

}  // namespace cgrg
