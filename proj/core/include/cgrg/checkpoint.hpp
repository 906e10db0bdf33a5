// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint file: one line of JSON (format tag, model config, tensor
// manifest with name, shape and byte offset into the data section, free-form
// metadata) terminated by '\n', then raw little-endian float32 tensors in
// manifest order.

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "cgrg/model.hpp"

namespace cgrg {

struct Checkpoint {
  Model model;
  nlohmann::json meta = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const nlohmann::json& meta = nlohmann::json::object());
/// Throws FormatError on a malformed or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Header only, without reading the tensors.
nlohmann::json read_checkpoint_header(const std::filesystem::path& path);

}  // namespace cgrg
