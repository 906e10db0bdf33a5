// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "cgrg/checkpoint.hpp"
#include "cgrg/error.hpp"

namespace cgrg {

void TrainHyper::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("lr must be finite and >= 0");
  if (warmup_steps < 0) throw InvalidArgument("warmup_steps must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  if (!(clip_norm > 0.0)) throw InvalidArgument("clip_norm must be > 0");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint_every must be >= 0");
}

double TrainHyper::lr_at(int step) const {
  if (warmup_steps == 0 || step >= warmup_steps) return lr;
  return lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
}

TrainResult train(std::span<const TrainingInstance> data, const ModelConfig& cfg,
                  const TrainHyper& hyper, const TrainObserver& observer,
                  std::optional<Parameters<float>> initial) {
  hyper.validate();
  if (data.empty()) throw InvalidArgument("empty training set");

  TrainResult result;
  result.params = initial ? std::move(*initial) : Parameters<float>::init(cfg, hyper.seed);
  result.params.check_shapes(cfg);
  Parameters<float>& params = result.params;
  Parameters<float> grad = Parameters<float>::zeros(cfg);
  Parameters<float> m1 = Parameters<float>::zeros(cfg);
  Parameters<float> m2 = Parameters<float>::zeros(cfg);
  auto p_t = params.tensors();
  auto g_t = grad.tensors();
  auto m1_t = m1.tensors();
  auto m2_t = m2.tensors();

  std::mt19937_64 rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::vector<TrainingInstance> batch;
  batch.reserve(static_cast<std::size_t>(hyper.batch_size));

  for (int step = 1; step <= hyper.steps; ++step) {
    batch.clear();
    while (batch.size() < static_cast<std::size_t>(hyper.batch_size)) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
      if (batch.size() == data.size()) break;
    }
    const float loss = loss_and_gradient<float>(params, cfg, batch, &grad);

    double sq = 0.0;
    for (const auto& g : g_t) sq += g.second->template cast<double>().squaredNorm();
    const double norm = std::sqrt(sq);
    if (!std::isfinite(loss) || !std::isfinite(norm)) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << ": loss " << loss << ", gradient norm " << norm
          << ", lr " << hyper.lr_at(step);
      throw TrainingDiverged(msg.str());
    }
    const float clip = norm > hyper.clip_norm ? static_cast<float>(hyper.clip_norm / norm) : 1.0f;

    const double lr = hyper.lr_at(step);
    const double bc1 = 1.0 - std::pow(hyper.beta1, step);
    const double bc2 = 1.0 - std::pow(hyper.beta2, step);
    const auto b1 = static_cast<float>(hyper.beta1);
    const auto b2 = static_cast<float>(hyper.beta2);
    const auto step_size = static_cast<float>(lr / bc1);
    const auto inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
    const auto eps = static_cast<float>(hyper.adam_eps);
    for (std::size_t k = 0; k < p_t.size(); ++k) {
      auto g = g_t[k].second->array() * clip;
      auto& m = *m1_t[k].second;
      auto& v = *m2_t[k].second;
      m.array() = b1 * m.array() + (1.0f - b1) * g;
      v.array() = b2 * v.array() + (1.0f - b2) * g.square();
      p_t[k].second->array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + eps);
    }

    TrainLogEntry entry{step, static_cast<double>(loss), lr};
    result.log.push_back(entry);
    if (observer) observer(entry);

    if (hyper.checkpoint_every > 0 && !hyper.checkpoint_dir.empty() &&
        step % hyper.checkpoint_every == 0) {
      nlohmann::json meta = hyper.checkpoint_meta;
      meta["step"] = step;
      save_checkpoint(hyper.checkpoint_dir / ("step-" + std::to_string(step) + ".ckpt"),
                      Model{cfg, params}, meta);
    }
  }
  return result;
}

void write_train_log(const std::filesystem::path& path, std::span<const TrainLogEntry> log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,loss,lr\n";
  out.precision(9);
  for (const auto& e : log) out << e.step << ',' << e.loss << ',' << e.lr << '\n';
}

}  // namespace cgrg
