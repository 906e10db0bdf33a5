// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Transport-independent request handlers for the HTTP API and the server
// configuration. Handlers take the raw JSON body and return a status code
// with a JSON body; the HTTP binding lives in the tools.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cgrg/controlplan.hpp"
#include "cgrg/input_settings.hpp"
#include "cgrg/model.hpp"
#include "cgrg/textproc.hpp"

namespace cgrg {

/// Immutable model bundle shared by concurrent requests.
struct ModelSnapshot {
  std::string name;
  std::shared_ptr<const Parameters<float>> params;
  ModelConfig config;
  Vocab vocab;
  std::optional<IdfTable> idf;
  Setting default_setting = Setting::kXCGCIA;
  nlohmann::json meta;
};

/// Loads `checkpoint` plus vocab.txt (required) and idf.tsv (optional) from
/// the same directory.
std::shared_ptr<const ModelSnapshot> load_snapshot(const std::filesystem::path& checkpoint);

struct HttpResult {
  int status = 200;
  nlohmann::ordered_json body;
};

class Service {
 public:
  Service() = default;
  explicit Service(std::shared_ptr<const ModelSnapshot> model, std::filesystem::path checkpoint = {});

  HttpResult health() const;
  HttpResult generate(const std::string& body) const;
  HttpResult predict_controls(const std::string& body) const;
  HttpResult mask(const std::string& body) const;
  /// Body may name a new checkpoint; otherwise the current path is reloaded.
  HttpResult reload(const std::string& body);

  std::shared_ptr<const ModelSnapshot> snapshot() const;
  void swap_model(std::shared_ptr<const ModelSnapshot> model, std::filesystem::path checkpoint);

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const ModelSnapshot> model_;
  std::filesystem::path checkpoint_;
};

/// Server settings. Sources in increasing priority: config file, environment
/// (CGRG_PORT, CGRG_CHECKPOINT), command-line flags.
struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path checkpoint;
  std::string cors_origin = "*";
  std::size_t max_body_bytes = 1 << 20;
  int threads = 4;

  /// Applies `key=value` lines; '#' starts a comment. Unknown keys throw.
  void apply_file_text(const std::string& text);
  void apply_file(const std::filesystem::path& path);
  /// Reads CGRG_PORT and CGRG_CHECKPOINT through `getenv`.
  void apply_env(const std::function<const char*(const char*)>& getenv);
  void set(const std::string& key, const std::string& value);
};

}  // namespace cgrg
