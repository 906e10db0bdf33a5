// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgrg/model.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg {

struct TrainHyper {
  double lr = 3e-4;
  int warmup_steps = 100;
  int batch_size = 16;
  int steps = 1000;
  std::uint64_t seed = 1;
  double clip_norm = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_dir;
  nlohmann::json checkpoint_meta = nlohmann::json::object();

  void validate() const;
  /// Linear warmup to `lr`, constant afterwards. Steps count from 1.
  double lr_at(int step) const;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

using TrainObserver = std::function<void(const TrainLogEntry&)>;

struct TrainResult {
  Parameters<float> params;
  std::vector<TrainLogEntry> log;
};

/// Adam with warmup and global-norm clipping over shuffled mini-batches.
/// Deterministic in hyper.seed. Throws TrainingDiverged on a non-finite loss
/// or gradient. Starts from `initial` when given, else from a fresh init.
TrainResult train(std::span<const TrainingInstance> data, const ModelConfig& cfg,
                  const TrainHyper& hyper, const TrainObserver& observer = {},
                  std::optional<Parameters<float>> initial = std::nullopt);

/// CSV with header `step,loss,lr`.
void write_train_log(const std::filesystem::path& path, std::span<const TrainLogEntry> log);

}  // namespace cgrg
