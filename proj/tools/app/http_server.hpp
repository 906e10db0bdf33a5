// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Eigen must be seen before httplib, which leaves macros behind.
#include "cgrg/service.hpp"

#include <httplib.h>

namespace cgrg::app {

/// Registers the /v1 routes of `service` on `server`, with CORS headers for
/// `config.cors_origin`.
void install_routes(httplib::Server& server, Service& service, const ServerConfig& config);

/// Loads the configured checkpoint (if any) and blocks serving requests.
int serve(const ServerConfig& config);

}  // namespace cgrg::app
