// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "http_server.hpp"

#include <iostream>

namespace cgrg::app {

namespace {

void reply(httplib::Response& res, const HttpResult& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

void install_routes(httplib::Server& server, Service& service, const ServerConfig& config) {
  const std::string origin = config.cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.set_payload_max_length(config.max_body_bytes);

  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/v1/health", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.health());
  });
  server.Post("/v1/generate", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.generate(req.body));
  });
  server.Post("/v1/controls/predict", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.predict_controls(req.body));
  });
  server.Post("/v1/mask", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.mask(req.body));
  });
  server.Post("/v1/admin/reload", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.reload(req.body));
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const nlohmann::ordered_json body = {
        {"error", {{"status", res.status}, {"message", httplib::status_message(res.status)}}}};
    res.set_content(body.dump(), "application/json");
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    reply(res, {500, {{"error", {{"status", 500}, {"message", message}}}}});
  });
}

int serve(const ServerConfig& config) {
  Service service;
  if (!config.checkpoint.empty()) {
    service.swap_model(load_snapshot(config.checkpoint), config.checkpoint);
    std::cerr << "loaded " << config.checkpoint.string() << "\n";
  } else {
    std::cerr << "no checkpoint configured; /v1/generate returns 503 until /v1/admin/reload\n";
  }
  httplib::Server server;
  server.new_task_queue = [n = config.threads] { return new httplib::ThreadPool(static_cast<size_t>(n)); };
  install_routes(server, service, config);
  std::cerr << "listening on " << config.host << ":" << config.port << "\n";
  if (!server.listen(config.host, config.port)) {
    std::cerr << "error: cannot listen on " << config.host << ":" << config.port << "\n";
    return 2;
  }
  return 0;
}

}  // namespace cgrg::app
