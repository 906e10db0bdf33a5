// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include <memory>

#include <benchmark/benchmark.h>

#include "cgrg/decoder.hpp"
#include "cgrg/experiment.hpp"
#include "cgrg/input_settings.hpp"
#include "cgrg/metrics.hpp"
#include "cgrg/synthetic.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg {
namespace {

struct Corpus {
  std::vector<GroundedExample> examples;
  Vocab vocab;
  ModelConfig cfg;

  Corpus() {
    SyntheticSpec spec;
    spec.n_examples = 64;
    examples = generate_synthetic(spec);
    vocab = build_vocab(examples, 1);
    cfg.vocab_size = vocab.size();
    cfg.n_heads = 4;
  }

  std::vector<TrainingInstance> instances(Setting s, int n) const {
    std::vector<TrainingInstance> out;
    for (int k = 0; k < n; ++k) {
      out.push_back(build_training_instance(examples[static_cast<std::size_t>(k)], s, vocab, limits_for(cfg)));
    }
    return out;
  }
};

const Corpus& corpus() {
  static const Corpus c;
  return c;
}

void BM_BuildMask(benchmark::State& state) {
  const auto& c = corpus();
  const auto in = build_model_input(c.examples[0], Setting::kXCGCIA, c.vocab, 30, limits_for(c.cfg));
  for (auto _ : state) benchmark::DoNotOptimize(build_mask(in.layout));
  state.counters["len"] = static_cast<double>(in.layout.total_len);
}
BENCHMARK(BM_BuildMask);

void BM_Forward(benchmark::State& state) {
  const auto& c = corpus();
  const auto s = static_cast<Setting>(state.range(0));
  const auto p = Parameters<float>::init(c.cfg, 1);
  const auto inst = c.instances(s, 1)[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward<float>(p, c.cfg, inst.token_ids, inst.embedding_ids, inst.mask));
  }
  state.SetLabel(std::string(setting_name(s)));
  state.counters["tokens"] = static_cast<double>(inst.token_ids.size());
}
BENCHMARK(BM_Forward)->Arg(static_cast<int>(Setting::kX))->Arg(static_cast<int>(Setting::kXCGCIA));

void BM_TrainStep(benchmark::State& state) {
  const auto& c = corpus();
  const auto p = Parameters<float>::init(c.cfg, 1);
  const auto batch = c.instances(Setting::kXCGCIA, static_cast<int>(state.range(0)));
  Parameters<float> grad;
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient<float>(p, c.cfg, batch, &grad));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(16);

void BM_GridBeamSearch(benchmark::State& state) {
  const auto& c = corpus();
  auto p = std::make_shared<const Parameters<float>>(Parameters<float>::init(c.cfg, 1));
  const auto in = build_model_input(c.examples[0], Setting::kXCG, c.vocab, 30, limits_for(c.cfg));
  DecodeParams dp;
  dp.max_new_tokens = 12;
  dp.beam_per_bank = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CachedScorer<float> scorer(p, c.cfg, in.input_ids, in.embedding_ids, in.mask);
    benchmark::DoNotOptimize(grid_beam_search(scorer, in.constraints, dp));
  }
}
BENCHMARK(BM_GridBeamSearch)->Arg(2)->Arg(4);

void BM_ScoreResponses(benchmark::State& state) {
  const auto& c = corpus();
  std::vector<Tokens> hyps;
  std::vector<std::vector<Tokens>> refs;
  for (const auto& ex : c.examples) {
    hyps.push_back(normalize(ex.grounding[0]));
    refs.push_back({normalize(ex.response)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(score_responses(hyps, refs, true));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(hyps.size()));
}
BENCHMARK(BM_ScoreResponses);

}  // namespace
}  // namespace cgrg

BENCHMARK_MAIN();
