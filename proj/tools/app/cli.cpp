// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cgrg/checkpoint.hpp"
#include "cgrg/controlplan.hpp"
#include "cgrg/corpus.hpp"
#include "cgrg/error.hpp"
#include "cgrg/experiment.hpp"
#include "cgrg/metrics.hpp"
#include "cgrg/service.hpp"
#include "cgrg/synthetic.hpp"
#include "cgrg/trainer.hpp"
#include "http_server.hpp"

namespace fs = std::filesystem;

namespace cgrg::app {

namespace {

struct ModelOptions {
  ModelConfig model;
  TrainHyper hyper;
  int vocab_min_count = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--layers", model.n_layers, "Transformer layers")->capture_default_str();
    cmd.add_option("--heads", model.n_heads, "Attention heads")->capture_default_str();
    cmd.add_option("--d-model", model.d_model, "Hidden size")->capture_default_str();
    cmd.add_option("--d-ff", model.d_ff, "Feed-forward size")->capture_default_str();
    cmd.add_option("--max-len", model.max_len, "Maximum sequence length")->capture_default_str();
    cmd.add_option("--steps", hyper.steps, "Optimizer steps")->capture_default_str();
    cmd.add_option("--lr", hyper.lr, "Peak learning rate")->capture_default_str();
    cmd.add_option("--warmup", hyper.warmup_steps, "Linear warmup steps")->capture_default_str();
    cmd.add_option("--batch", hyper.batch_size, "Examples per step")->capture_default_str();
    cmd.add_option("--seed", hyper.seed, "Initialization and shuffling seed")->capture_default_str();
    cmd.add_option("--clip", hyper.clip_norm, "Global gradient norm clip")->capture_default_str();
    cmd.add_option("--vocab-min-count", vocab_min_count, "Drop rarer training tokens")->capture_default_str();
  }
};

struct DecodeOptions {
  std::string method = "greedy";
  int beam_per_bank = 4;
  int max_new_tokens = 30;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--method", method, "greedy or gbs")
        ->check(CLI::IsMember({"greedy", "gbs"}))
        ->capture_default_str();
    cmd.add_option("--beam", beam_per_bank, "Beam width per coverage bank")->capture_default_str();
    cmd.add_option("--max-new-tokens", max_new_tokens, "Decoding horizon")->capture_default_str();
  }
  DecodeParams params() const {
    DecodeParams p;
    p.method = parse_method(method);
    p.beam_per_bank = beam_per_bank;
    p.max_new_tokens = max_new_tokens;
    p.validate();
    return p;
  }
};

CLI::Validator setting_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          parse_setting(s);
          return {};
        } catch (const InvalidArgument& e) {
          return e.what();
        }
      },
      "SETTING");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

ExtractionConfig extraction_config(int max_ngram, double df_threshold, const std::string& stopwords_path) {
  ExtractionConfig cfg;
  cfg.max_ngram = max_ngram;
  cfg.df_threshold = df_threshold;
  if (!stopwords_path.empty()) {
    std::ifstream f(stopwords_path);
    if (!f) throw Error("cannot read " + stopwords_path);
    std::stringstream ss;
    ss << f.rdbuf();
    cfg.stopwords = parse_word_list(ss.str());
  }
  cfg.validate();
  return cfg;
}

fs::path meta_path_for(const fs::path& data) {
  return data.parent_path() / "meta.json";
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

// --- make-data --------------------------------------------------------------

struct MakeDataArgs {
  fs::path out;
  SyntheticSpec spec;
};

int make_data(const MakeDataArgs& a, std::ostream& out) {
  const auto examples = generate_synthetic(a.spec);
  ensure_parent(a.out);
  write_jsonl(a.out, examples);
  write_meta(meta_path_for(a.out), a.spec.extraction);
  out << "wrote " << examples.size() << " examples to " << a.out.string() << "\n";
  return kExitOk;
}

// --- extract-controls -------------------------------------------------------

struct ExtractArgs {
  fs::path in, out;
  int max_ngram = 5;
  double df_threshold = 0.1;
  std::string stopwords;
  bool keep_empty = false;
};

int extract_controls(const ExtractArgs& a, std::ostream& out) {
  const auto cfg = extraction_config(a.max_ngram, a.df_threshold, a.stopwords);
  auto examples = read_jsonl(a.in);
  const std::size_t before = examples.size();
  annotate_controls(examples, cfg);
  if (!a.keep_empty) examples = filter_dataset(std::move(examples));
  ensure_parent(a.out);
  write_jsonl(a.out, examples);
  write_meta(meta_path_for(a.out), cfg);
  out << "kept " << examples.size() << " of " << before << " examples\n";
  return kExitOk;
}

// --- predict-controls -------------------------------------------------------

struct PredictArgs {
  fs::path in, out;
  std::string idf;
};

int predict_controls_cmd(const PredictArgs& a, std::ostream& out) {
  const auto examples = read_jsonl(a.in);
  const IdfTable idf = a.idf.empty() ? IdfTable::from_examples(examples) : IdfTable::load(a.idf);
  const HeuristicChunker chunker;
  auto f = open_out(a.out);
  for (const auto& ex : examples) {
    const auto p = predict_controls(ex.context, ex.grounding, idf, chunker);
    nlohmann::ordered_json j;
    j["phrases"] = p.phrases;
    j["scores"] = p.scores;
    j["gc"] = p.gc_indices;
    f << j.dump() << "\n";
  }
  out << "wrote " << examples.size() << " predictions to " << a.out.string() << "\n";
  return kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  fs::path data, out_dir;
  std::string setting = "X+C+GC+IA";
  ModelOptions opts;
  int checkpoint_every = 0;
  bool quiet = false;
};

int train_cmd(TrainArgs a, std::ostream& out) {
  const auto examples = read_jsonl(a.data);
  if (examples.empty()) throw Error("no training examples in " + a.data.string());
  const Setting s = training_setting(parse_setting(a.setting));
  const Vocab vocab = build_vocab(examples, a.opts.vocab_min_count);
  std::vector<TrainingInstance> data;
  data.reserve(examples.size());
  for (const auto& ex : examples) data.push_back(build_training_instance(ex, s, vocab, limits_for(a.opts.model)));

  ModelConfig mc = a.opts.model;
  mc.vocab_size = vocab.size();
  nlohmann::json meta = {{"setting", std::string(setting_name(s))},
                         {"seed", a.opts.hyper.seed},
                         {"steps", a.opts.hyper.steps},
                         {"train_examples", examples.size()}};
  TrainHyper hyper = a.opts.hyper;
  hyper.checkpoint_every = a.checkpoint_every;
  hyper.checkpoint_dir = a.out_dir / "checkpoints";
  hyper.checkpoint_meta = meta;

  fs::create_directories(a.out_dir);
  vocab.save(a.out_dir / "vocab.txt");
  IdfTable::from_examples(examples).save(a.out_dir / "idf.tsv");

  const int every = std::max(1, hyper.steps / 20);
  TrainObserver observer = [&](const TrainLogEntry& e) {
    if (!a.quiet && (e.step % every == 0 || e.step == hyper.steps)) {
      out << "step " << e.step << " loss " << e.loss << " lr " << e.lr << "\n" << std::flush;
    }
  };
  TrainResult r = train(data, mc, hyper, observer);
  save_checkpoint(a.out_dir / "model.ckpt", Model{mc, std::move(r.params)}, meta);
  write_train_log(a.out_dir / "train_log.csv", r.log);
  out << "wrote " << (a.out_dir / "model.ckpt").string() << "\n";
  return kExitOk;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  fs::path checkpoint, in, out;
  std::string setting;
  DecodeOptions decode;
  bool predict = false;
};

int generate_cmd(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const auto snapshot = load_snapshot(a.checkpoint);
  const Service service(snapshot, a.checkpoint);
  const DecodeParams dp = a.decode.params();
  const std::string setting = a.setting.empty() ? std::string(setting_name(snapshot->default_setting)) : a.setting;
  const auto examples = read_jsonl(a.in);
  auto f = open_out(a.out);
  int failures = 0;
  for (const auto& ex : examples) {
    nlohmann::json req = {{"context", ex.context},
                          {"grounding", ex.grounding},
                          {"setting", setting},
                          {"decode",
                           {{"method", method_name(dp.method)},
                            {"beam_per_bank", dp.beam_per_bank},
                            {"max_new_tokens", dp.max_new_tokens}}}};
    if (!a.predict) req["controls"] = ex.controls;
    const HttpResult r = service.generate(req.dump());
    nlohmann::ordered_json line;
    if (r.status == 200) {
      const auto& best = r.body["candidates"][0];
      line["response"] = best["text"];
      line["logprob"] = best["logprob"];
      line["controls"] = r.body["used_controls"];
      line["gc"] = r.body["gc_indices"];
    } else {
      ++failures;
      line["response"] = "";
      line["error"] = r.body["error"];
    }
    f << line.dump() << "\n";
  }
  if (failures) err << "warning: " << failures << " examples failed to decode\n";
  out << "wrote " << examples.size() << " responses to " << a.out.string() << "\n";
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  fs::path hyp, data, out;
  bool multi_ref = false;
};

std::string hypothesis_text(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("response") && j["response"].is_string()) return j["response"];
  throw FormatError("hypothesis line must be a string or an object with \"response\"");
}

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  const auto lines = read_lines(a.hyp);
  const auto examples = read_jsonl(a.data);
  if (lines.size() != examples.size()) {
    throw FormatError("hypothesis count " + std::to_string(lines.size()) + " does not match data count " +
                      std::to_string(examples.size()));
  }
  std::vector<Tokens> hyps;
  std::vector<std::vector<Tokens>> refs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    hyps.push_back(normalize(hypothesis_text(lines[i])));
    std::vector<Tokens> r;
    for (const auto& text : reference_set(examples[i])) r.push_back(normalize(text));
    refs.push_back(std::move(r));
  }
  const auto report = to_json(score_responses(hyps, refs, a.multi_ref));
  if (a.out.empty()) {
    out << report.dump(2) << "\n";
  } else {
    open_out(a.out) << report.dump(2) << "\n";
  }
  return kExitOk;
}

// --- compare-settings -------------------------------------------------------

struct CompareArgs {
  std::string data, test;
  int synthetic_train = 5000;
  int synthetic_test = 500;
  std::uint64_t data_seed = 1;
  std::vector<std::string> settings;
  ModelOptions opts;
  DecodeOptions decode;
  fs::path out;
  bool no_ratios = false;
};

int compare_cmd(CompareArgs a, std::ostream& out, std::ostream& err) {
  std::vector<GroundedExample> train_set, test_set;
  if (!a.data.empty()) {
    train_set = read_jsonl(a.data);
    if (a.test.empty()) throw InvalidArgument("--data requires --test");
    test_set = read_jsonl(a.test);
  } else {
    SyntheticSpec spec;
    spec.seed = a.data_seed;
    spec.n_examples = a.synthetic_train + a.synthetic_test;
    auto all = generate_synthetic(spec);
    test_set.assign(all.begin() + a.synthetic_train, all.end());
    all.resize(a.synthetic_train);
    train_set = std::move(all);
  }
  ExperimentConfig cfg;
  cfg.model = a.opts.model;
  cfg.hyper = a.opts.hyper;
  cfg.vocab_min_count = a.opts.vocab_min_count;
  cfg.decode = a.decode.params();
  cfg.probability_ratios = !a.no_ratios;
  if (!a.settings.empty()) {
    cfg.settings.clear();
    for (const auto& s : a.settings) cfg.settings.push_back(parse_setting(s));
  }
  const auto report = run_experiment(train_set, test_set, cfg, [&err](const std::string& m) { err << m << "\n"; });
  out << format_table(report);
  if (!a.out.empty()) open_out(a.out) << to_json(report).dump(2) << "\n";
  return kExitOk;
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string config_file;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::string> checkpoint;
  std::optional<std::string> cors_origin;
  std::optional<int> threads;
};

ServerConfig server_config(const ServeArgs& a) {
  ServerConfig cfg;
  if (!a.config_file.empty()) cfg.apply_file(a.config_file);
  cfg.apply_env([](const char* name) { return std::getenv(name); });
  if (a.host) cfg.set("host", *a.host);
  if (a.port) cfg.set("port", std::to_string(*a.port));
  if (a.checkpoint) cfg.set("checkpoint", *a.checkpoint);
  if (a.cors_origin) cfg.set("cors_origin", *a.cors_origin);
  if (a.threads) cfg.set("threads", std::to_string(*a.threads));
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controllable grounded response generation toolkit", "cgrg"};
  app.require_subcommand(1);

  MakeDataArgs make;
  auto* c_make = app.add_subcommand("make-data", "Generate a synthetic grounded corpus as JSONL");
  c_make->add_option("--out", make.out, "Output JSONL")->required();
  c_make->add_option("--n", make.spec.n_examples, "Number of examples")->capture_default_str();
  c_make->add_option("--seed", make.spec.seed, "Generator seed")->capture_default_str();
  c_make->add_option("--entities", make.spec.n_entities, "Distinct people")->capture_default_str();
  c_make->add_option("--facts-per-entity", make.spec.n_facts_per_entity)->capture_default_str();
  c_make->add_option("--other-facts", make.spec.n_other_facts, "Distractor facts per document")
      ->capture_default_str();

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract-controls", "Annotate controls and G_C, drop examples without controls");
  c_extract->add_option("--in", extract.in, "Input JSONL")->required()->check(CLI::ExistingFile);
  c_extract->add_option("--out", extract.out, "Output JSONL")->required();
  c_extract->add_option("--max-ngram", extract.max_ngram)->capture_default_str();
  c_extract->add_option("--df-threshold", extract.df_threshold)->capture_default_str();
  c_extract->add_option("--stopwords", extract.stopwords, "Stop-word file, one per line")
      ->check(CLI::ExistingFile);
  c_extract->add_flag("--keep-empty", extract.keep_empty, "Keep examples without controls");

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict-controls", "Predict control phrases from context and grounding");
  c_predict->add_option("--in", predict.in, "Input JSONL")->required()->check(CLI::ExistingFile);
  c_predict->add_option("--out", predict.out, "Output JSONL")->required();
  c_predict->add_option("--idf", predict.idf, "idf.tsv; defaults to the input's grounding documents")
      ->check(CLI::ExistingFile);

  TrainArgs train_args;
  auto* c_train = app.add_subcommand("train", "Train a model for one input setting");
  c_train->add_option("--data", train_args.data, "Training JSONL")->required()->check(CLI::ExistingFile);
  c_train->add_option("--out", train_args.out_dir, "Output directory")->required();
  c_train->add_option("--setting", train_args.setting)->check(setting_validator())->capture_default_str();
  c_train->add_option("--checkpoint-every", train_args.checkpoint_every, "Periodic checkpoints, 0 = off")
      ->capture_default_str();
  c_train->add_flag("--quiet", train_args.quiet);
  train_args.opts.add_to(*c_train);

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Decode a response for every example");
  c_gen->add_option("--checkpoint", gen.checkpoint)->required()->check(CLI::ExistingFile);
  c_gen->add_option("--in", gen.in, "Input JSONL")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--out", gen.out, "Output JSONL")->required();
  c_gen->add_option("--setting", gen.setting, "Defaults to the checkpoint's setting")->check(setting_validator());
  c_gen->add_flag("--predict-controls", gen.predict, "Ignore gold controls and predict them");
  gen.decode.add_to(*c_gen);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score responses against references");
  c_eval->add_option("--hyp", eval.hyp, "Hypotheses JSONL")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--data", eval.data, "Reference JSONL")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval.out, "Write the report here instead of stdout");
  c_eval->add_flag("--multi-ref", eval.multi_ref, "Use every reference");

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare-settings", "Train and score every input setting");
  c_cmp->add_option("--data", cmp.data, "Training JSONL; synthetic data when omitted")->check(CLI::ExistingFile);
  c_cmp->add_option("--test", cmp.test, "Test JSONL")->check(CLI::ExistingFile);
  c_cmp->add_option("--train-size", cmp.synthetic_train)->capture_default_str();
  c_cmp->add_option("--test-size", cmp.synthetic_test)->capture_default_str();
  c_cmp->add_option("--data-seed", cmp.data_seed)->capture_default_str();
  c_cmp->add_option("--settings", cmp.settings, "Subset of settings")->check(setting_validator());
  c_cmp->add_option("--out", cmp.out, "JSON report");
  c_cmp->add_flag("--no-ratios", cmp.no_ratios, "Skip probability ratios");
  cmp.opts.add_to(*c_cmp);
  cmp.decode.add_to(*c_cmp);

  ServeArgs serve_args;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
  c_serve->add_option("--config", serve_args.config_file, "key=value config file")->check(CLI::ExistingFile);
  c_serve->add_option("--host", serve_args.host);
  c_serve->add_option("--port", serve_args.port);
  c_serve->add_option("--checkpoint", serve_args.checkpoint);
  c_serve->add_option("--cors-origin", serve_args.cors_origin);
  c_serve->add_option("--threads", serve_args.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "run '" << sub->get_name() << " --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*c_make) return make_data(make, out);
    if (*c_extract) return extract_controls(extract, out);
    if (*c_predict) return predict_controls_cmd(predict, out);
    if (*c_train) return train_cmd(train_args, out);
    if (*c_gen) return generate_cmd(gen, out, err);
    if (*c_eval) return eval_cmd(eval, out);
    if (*c_cmp) return compare_cmd(cmp, out, err);
    if (*c_serve) return serve(server_config(serve_args));
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cgrg::app
