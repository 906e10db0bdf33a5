// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/service.hpp"

#include <fstream>
#include <sstream>

#include "cgrg/checkpoint.hpp"
#include "cgrg/decoder.hpp"
#include "cgrg/error.hpp"
#include "cgrg/maskbuilder.hpp"
#include "cgrg/transformer.hpp"

namespace cgrg {

namespace {

// Carries an HTTP status out of the request parsing code.
struct RequestError {
  int status;
  std::string message;
};

HttpResult error_result(int status, const std::string& message) {
  return {status, {{"error", {{"status", status}, {"message", message}}}}};
}

nlohmann::json parse_body(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw RequestError{400, "request body is not valid JSON"};
  }
  if (!j.is_object()) throw RequestError{400, "request body must be a JSON object"};
  return j;
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw RequestError{400, std::string("missing field '") + key + "'"};
    return {};
  }
  const auto& v = j.at(key);
  if (!v.is_array()) throw RequestError{400, std::string("field '") + key + "' must be an array of strings"};
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw RequestError{400, std::string("field '") + key + "' must be an array of strings"};
    out.push_back(item.get<std::string>());
  }
  return out;
}

int int_field(const nlohmann::json& j, const char* key, int fallback, int lo, int hi) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw RequestError{400, std::string("field '") + key + "' must be an integer"};
  const auto x = v.get<long long>();
  if (x < lo || x > hi) {
    throw RequestError{400, std::string("field '") + key + "' must lie in [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]"};
  }
  return static_cast<int>(x);
}

IdfTable request_idf(const ModelSnapshot* model, const std::vector<std::string>& grounding) {
  if (model && model->idf) return *model->idf;
  // Without corpus statistics each grounding sentence counts as a document.
  std::vector<std::vector<std::string>> docs;
  for (const auto& s : grounding) docs.push_back({s});
  return IdfTable::from_documents(docs);
}

nlohmann::ordered_json span_json(const Span& s) { return nlohmann::ordered_json::array({s.start, s.end}); }

nlohmann::ordered_json layout_summary(const ModelInput& in, Setting s) {
  nlohmann::ordered_json g = nlohmann::ordered_json::array();
  for (const auto& sp : in.layout.g_spans) g.push_back(span_json(sp));
  nlohmann::ordered_json c = nlohmann::ordered_json::array();
  for (const auto& sp : in.layout.c_spans) c.push_back(span_json(sp));
  return {{"setting", setting_name(s)},
          {"inductive", in.inductive},
          {"input_len", in.layout.r_start},
          {"x_span", span_json(in.layout.x_span)},
          {"g_spans", std::move(g)},
          {"c_spans", std::move(c)},
          {"r_start", in.layout.r_start},
          {"sentence_indices", in.gc_indices},
          {"dropped_utterances", in.layout.dropped_utterances}};
}

nlohmann::ordered_json candidate_json(const Hypothesis& h, const Vocab& vocab) {
  nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
  for (TokenId id : h.token_ids) tokens.push_back(vocab.token(id));
  return {{"text", decode(h.token_ids, vocab)},
          {"logprob", h.logprob},
          {"tokens", std::move(tokens)},
          {"token_logprobs", h.token_logprobs}};
}

bool uses_controls(Setting s) { return s != Setting::kX && s != Setting::kXG; }

}  // namespace

std::shared_ptr<const ModelSnapshot> load_snapshot(const std::filesystem::path& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  auto snap = std::make_shared<ModelSnapshot>();
  const auto dir = checkpoint.parent_path();
  snap->vocab = Vocab::load(dir / "vocab.txt");
  if (snap->vocab.size() != ck.model.config.vocab_size) {
    throw FormatError("vocab.txt does not match the checkpoint vocabulary size");
  }
  if (std::filesystem::exists(dir / "idf.tsv")) snap->idf = IdfTable::load(dir / "idf.tsv");
  snap->config = ck.model.config;
  snap->params = std::make_shared<const Parameters<float>>(std::move(ck.model.params));
  snap->meta = ck.meta;
  if (ck.meta.contains("setting") && ck.meta["setting"].is_string()) {
    snap->default_setting = parse_setting(ck.meta["setting"].get<std::string>());
  }
  snap->name = ck.meta.value("name", checkpoint.filename().string());
  return snap;
}

Service::Service(std::shared_ptr<const ModelSnapshot> model, std::filesystem::path checkpoint)
    : model_(std::move(model)), checkpoint_(std::move(checkpoint)) {}

std::shared_ptr<const ModelSnapshot> Service::snapshot() const {
  std::lock_guard lock(mu_);
  return model_;
}

void Service::swap_model(std::shared_ptr<const ModelSnapshot> model, std::filesystem::path checkpoint) {
  std::lock_guard lock(mu_);
  model_ = std::move(model);
  checkpoint_ = std::move(checkpoint);
}

HttpResult Service::health() const {
  const auto m = snapshot();
  nlohmann::ordered_json model = nullptr;
  if (m) {
    model = {{"name", m->name},
             {"setting", setting_name(m->default_setting)},
             {"vocab_size", m->config.vocab_size},
             {"parameters", m->params->num_parameters()}};
  }
  return {200, {{"status", "ok"}, {"model", std::move(model)}}};
}

HttpResult Service::predict_controls(const std::string& body) const {
  try {
    const auto j = parse_body(body);
    const auto context = string_list(j, "context", false);
    const auto grounding = string_list(j, "grounding", false);
    if (context.empty() && grounding.empty()) {
      throw RequestError{400, "context and grounding are both empty"};
    }
    const auto m = snapshot();
    const IdfTable idf = request_idf(m.get(), grounding);
    const PredictedControls p = cgrg::predict_controls(context, grounding, idf, HeuristicChunker{});
    return {200, {{"phrases", p.phrases}, {"scores", p.scores}, {"gc", p.gc_indices}}};
  } catch (const RequestError& e) {
    return error_result(e.status, e.message);
  } catch (const Error& e) {
    return error_result(400, e.what());
  }
}

HttpResult Service::mask(const std::string& body) const {
  try {
    const auto j = parse_body(body);
    GroundedExample ex;
    ex.context = string_list(j, "context", true);
    ex.grounding = string_list(j, "grounding", false);
    ex.controls = string_list(j, "controls", false);
    if (ex.context.empty()) throw RequestError{400, "context must not be empty"};
    // Only token counts matter here, so any vocabulary will do.
    const Vocab vocab = Vocab::from_tokens({std::string(kPadToken), std::string(kUnkToken),
                                            std::string(kEosToken), std::string(kControlSepToken),
                                            std::string(kSentenceSepToken)});
    const Setting s = ex.controls.empty() ? Setting::kX : Setting::kXCGCIA;
    ModelInput in;
    try {
      in = build_model_input(ex, s, vocab, 0);
    } catch (const SequenceTooLong& e) {
      throw RequestError{413, e.what()};
    }
    return {200, {{"mask", mask_to_rle(in.mask)}, {"gc_indices", in.gc_indices},
                  {"layout_summary", layout_summary(in, s)}}};
  } catch (const RequestError& e) {
    return error_result(e.status, e.message);
  } catch (const Error& e) {
    return error_result(400, e.what());
  }
}

HttpResult Service::generate(const std::string& body) const {
  try {
    const auto j = parse_body(body);
    GroundedExample ex;
    ex.context = string_list(j, "context", true);
    ex.grounding = string_list(j, "grounding", false);
    if (ex.context.empty()) throw RequestError{400, "context must not be empty"};
    const bool controls_given = j.contains("controls");
    std::vector<std::string> controls = string_list(j, "controls", false);

    const auto m = snapshot();
    if (!m) throw RequestError{503, "model not loaded"};

    Setting s = m->default_setting;
    if (j.contains("setting")) {
      if (!j["setting"].is_string()) throw RequestError{400, "field 'setting' must be a string"};
      try {
        s = parse_setting(j["setting"].get<std::string>());
      } catch (const InvalidArgument& e) {
        throw RequestError{400, e.what()};
      }
    }
    DecodeParams dp;
    if (j.contains("decode")) {
      const auto& d = j["decode"];
      if (!d.is_object()) throw RequestError{400, "field 'decode' must be an object"};
      if (d.contains("method")) {
        if (!d["method"].is_string()) throw RequestError{400, "decode.method must be a string"};
        try {
          dp.method = parse_method(d["method"].get<std::string>());
        } catch (const InvalidArgument& e) {
          throw RequestError{400, e.what()};
        }
      }
      dp.beam_per_bank = int_field(d, "beam_per_bank", dp.beam_per_bank, 1, 64);
      dp.max_new_tokens = int_field(d, "max_new_tokens", dp.max_new_tokens, 1, m->config.max_len);
    }
    if (uses_decoding_constraints(s)) dp.method = DecodeMethod::kGbs;

    if (uses_controls(s) && !controls_given) {
      const IdfTable idf = request_idf(m.get(), ex.grounding);
      controls = cgrg::predict_controls(ex.context, ex.grounding, idf, HeuristicChunker{}).phrases;
    }
    if (!uses_controls(s)) controls.clear();
    if (controls.size() > kMaxControls) controls.resize(kMaxControls);
    ex.controls = controls;

    ModelInput in;
    try {
      in = build_model_input(ex, s, m->vocab, dp.max_new_tokens, limits_for(m->config));
    } catch (const SequenceTooLong& e) {
      throw RequestError{413, e.what()};
    }

    std::vector<std::vector<TokenId>> constraints;
    if (dp.method == DecodeMethod::kGbs) {
      for (const auto& c : controls) {
        auto ids = encode(c, m->vocab);
        if (ids.empty()) continue;
        if (std::find(ids.begin(), ids.end(), Vocab::kUnkId) != ids.end()) {
          throw RequestError{422, "control phrase '" + c + "' has words outside the model vocabulary"};
        }
        constraints.push_back(std::move(ids));
      }
    }

    CachedScorer<float> scorer(m->params, m->config, in.input_ids, in.embedding_ids, in.mask);
    std::vector<Hypothesis> hyps;
    try {
      if (dp.method == DecodeMethod::kGbs) {
        hyps = grid_beam_search_nbest(scorer, constraints, dp);
      } else {
        hyps.push_back(greedy(scorer, dp));
      }
    } catch (const ConstraintsUnsatisfiable& e) {
      throw RequestError{422, e.what()};
    }

    nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
    for (const auto& h : hyps) candidates.push_back(candidate_json(h, m->vocab));
    std::vector<int> gc = select_gc(ex.grounding, controls);
    if (s == Setting::kXGC || s == Setting::kXCGC || s == Setting::kXCGCIA) gc = in.gc_indices;

    nlohmann::ordered_json out{{"candidates", std::move(candidates)},
                               {"used_controls", controls},
                               {"gc_indices", gc},
                               {"layout_summary", layout_summary(in, s)}};
    if (j.value("include_mask", false)) out["mask_rle"] = mask_to_rle(in.mask);
    return {200, std::move(out)};
  } catch (const RequestError& e) {
    return error_result(e.status, e.message);
  } catch (const Error& e) {
    return error_result(400, e.what());
  }
}

HttpResult Service::reload(const std::string& body) {
  std::filesystem::path path;
  {
    std::lock_guard lock(mu_);
    path = checkpoint_;
  }
  try {
    if (!body.empty()) {
      const auto j = parse_body(body);
      if (j.contains("checkpoint")) {
        if (!j["checkpoint"].is_string()) throw RequestError{400, "field 'checkpoint' must be a string"};
        path = j["checkpoint"].get<std::string>();
      }
    }
    if (path.empty()) throw RequestError{400, "no checkpoint configured"};
    auto snap = load_snapshot(path);
    swap_model(snap, path);
    return {200, {{"status", "reloaded"}, {"model", snap->name}, {"checkpoint", path.string()}}};
  } catch (const RequestError& e) {
    return error_result(e.status, e.message);
  } catch (const std::exception& e) {
    return error_result(500, std::string("reload failed: ") + e.what());
  }
}

void ServerConfig::set(const std::string& key, const std::string& value) {
  auto to_int = [&](const std::string& v) {
    std::size_t used = 0;
    int x = 0;
    try {
      x = std::stoi(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw InvalidArgument("config key '" + key + "' needs an integer");
    return x;
  };
  if (key == "host") {
    host = value;
  } else if (key == "port") {
    port = to_int(value);
    if (port < 0 || port > 65535) throw InvalidArgument("port out of range");
  } else if (key == "checkpoint") {
    checkpoint = value;
  } else if (key == "cors_origin") {
    cors_origin = value;
  } else if (key == "max_body_bytes") {
    const int v = to_int(value);
    if (v < 1) throw InvalidArgument("max_body_bytes must be >= 1");
    max_body_bytes = static_cast<std::size_t>(v);
  } else if (key == "threads") {
    threads = to_int(value);
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

void ServerConfig::apply_file_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void ServerConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_file_text(ss.str());
}

void ServerConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  if (const char* v = getenv("CGRG_PORT"); v && *v) set("port", v);
  if (const char* v = getenv("CGRG_CHECKPOINT"); v && *v) set("checkpoint", v);
}

}  // namespace cgrg
