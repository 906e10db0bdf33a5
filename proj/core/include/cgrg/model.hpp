// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

// Model configuration and parameter storage for the decoder-only transformer.
//
// Parameters are templated on the scalar type: float for training, serving
// and checkpoints, double for the precision-sensitive checks. Every tensor
// is a row-major matrix; vectors are stored as 1 x n rows. Linear layers use
// the x * W convention.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace cgrg {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  int n_layers = 2;
  int n_heads = 2;
  int d_model = 64;
  int d_ff = 256;
  int vocab_size = 0;
  int max_len = 512;
  int n_type_ids = 32;

  int d_head() const { return d_model / n_heads; }
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename S>
struct LayerParameters {
  Matrix<S> ln1_gain, ln1_bias;
  Matrix<S> w_q, b_q, w_k, b_k, w_v, b_v;
  Matrix<S> w_o, b_o;
  Matrix<S> ln2_gain, ln2_bias;
  Matrix<S> w_ff1, b_ff1, w_ff2, b_ff2;
};

template <typename S>
struct Parameters {
  Matrix<S> tok_emb;   // vocab x d, also the output projection
  Matrix<S> type_emb;  // n_type_ids x d
  Matrix<S> pos_emb;   // max_len x d
  std::vector<LayerParameters<S>> layers;
  Matrix<S> lnf_gain, lnf_bias;

  /// Correctly shaped tensors, all zero.
  static Parameters zeros(const ModelConfig& cfg);
  /// Weights ~ N(0, 0.02^2), biases 0, layer-norm gains 1.
  static Parameters init(const ModelConfig& cfg, std::uint64_t seed);

  /// Every tensor with a stable dotted name, in checkpoint order.
  std::vector<std::pair<std::string, Matrix<S>*>> tensors();
  std::vector<std::pair<std::string, const Matrix<S>*>> tensors() const;

  std::size_t num_parameters() const;
  bool all_finite() const;
  void set_zero();
  /// Throws ShapeMismatch when a tensor does not match `cfg`.
  void check_shapes(const ModelConfig& cfg) const;

  template <typename T>
  Parameters<T> cast() const {
    Parameters<T> out;
    out.tok_emb = tok_emb.template cast<T>();
    out.type_emb = type_emb.template cast<T>();
    out.pos_emb = pos_emb.template cast<T>();
    out.lnf_gain = lnf_gain.template cast<T>();
    out.lnf_bias = lnf_bias.template cast<T>();
    out.layers.resize(layers.size());
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t k = 0; k < src.size(); ++k) *dst[k].second = src[k].second->template cast<T>();
    return out;
  }
};

extern template struct Parameters<float>;
extern template struct Parameters<double>;

/// A float parameter snapshot together with its configuration.
struct Model {
  ModelConfig config;
  Parameters<float> params;
};

}  // namespace cgrg
