// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

constexpr const char* kFormat = "cgrg-checkpoint";
constexpr int kVersion = 1;

void to_little_endian(std::vector<float>& values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = __builtin_bswap32(bits);
      v = std::bit_cast<float>(bits);
    }
  }
}

std::string read_header_line(std::ifstream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("checkpoint " + path.string() + ": missing header");
  return line;
}

nlohmann::json parse_header(const std::string& line, const std::filesystem::path& path) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + path.string() + ": bad header: " + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kFormat) {
    throw FormatError("checkpoint " + path.string() + ": not a cgrg checkpoint");
  }
  if (header.value("version", 0) != kVersion) {
    throw FormatError("checkpoint " + path.string() + ": unsupported version");
  }
  return header;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model, const nlohmann::json& meta) {
  model.params.check_shapes(model.config);
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["config"] = model.config.to_json();
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  const auto tensors = model.params.tensors();
  for (const auto& [name, t] : tensors) {
    manifest.push_back({{"name", name}, {"shape", {t->rows(), t->cols()}}, {"offset", offset}});
    offset += static_cast<std::size_t>(t->size()) * sizeof(float);
  }
  header["tensors"] = std::move(manifest);
  header["meta"] = meta;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << header.dump() << '\n';
    for (const auto& [name, t] : tensors) {
      std::vector<float> buf(t->data(), t->data() + t->size());
      to_little_endian(buf);
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_header(read_header_line(in, path), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const nlohmann::json header = parse_header(read_header_line(in, path), path);
  const std::streamoff data_start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::streamoff data_len = in.tellg() - data_start;

  Checkpoint ck;
  ck.model.config = ModelConfig::from_json(header.at("config"));
  ck.model.params = Parameters<float>::zeros(ck.model.config);
  ck.meta = header.value("meta", nlohmann::json::object());
  auto tensors = ck.model.params.tensors();
  const auto& manifest = header.at("tensors");
  if (!manifest.is_array() || manifest.size() != tensors.size()) {
    throw FormatError("checkpoint " + path.string() + ": manifest does not match the config");
  }
  try {
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const auto& entry = manifest[k];
      auto& [name, t] = tensors[k];
      if (entry.at("name").get<std::string>() != name) {
        throw FormatError("checkpoint " + path.string() + ": expected tensor " + name);
      }
      const auto shape = entry.at("shape").get<std::vector<long>>();
      if (shape.size() != 2 || shape[0] != t->rows() || shape[1] != t->cols()) {
        throw FormatError("checkpoint " + path.string() + ": tensor " + name + " has the wrong shape");
      }
      const auto offset = entry.at("offset").get<std::streamoff>();
      const auto bytes = static_cast<std::streamoff>(t->size() * static_cast<Eigen::Index>(sizeof(float)));
      if (offset < 0 || offset + bytes > data_len) {
        throw FormatError("checkpoint " + path.string() + ": truncated tensor " + name);
      }
      std::vector<float> buf(static_cast<std::size_t>(t->size()));
      in.seekg(data_start + offset);
      in.read(reinterpret_cast<char*>(buf.data()), bytes);
      if (!in) throw FormatError("checkpoint " + path.string() + ": read failed for " + name);
      to_little_endian(buf);
      std::memcpy(t->data(), buf.data(), static_cast<std::size_t>(bytes));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + path.string() + ": " + e.what());
  }
  if (!ck.model.params.all_finite()) throw FormatError("checkpoint " + path.string() + ": non-finite weights");
  return ck;
}

}  // namespace cgrg
