// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/model.hpp"

#include <random>

#include "cgrg/error.hpp"

namespace cgrg {

void ModelConfig::validate() const {
  if (n_layers < 1) throw InvalidArgument("n_layers must be >= 1");
  if (n_heads < 1 || d_model < 1 || d_model % n_heads != 0) {
    throw InvalidArgument("d_model must be a positive multiple of n_heads");
  }
  if (d_ff < 1) throw InvalidArgument("d_ff must be >= 1");
  if (vocab_size < 1) throw InvalidArgument("vocab_size must be >= 1");
  if (max_len < 1) throw InvalidArgument("max_len must be >= 1");
  if (n_type_ids < 1) throw InvalidArgument("n_type_ids must be >= 1");
}

nlohmann::ordered_json ModelConfig::to_json() const {
  return {{"n_layers", n_layers}, {"n_heads", n_heads},       {"d_model", d_model},
          {"d_ff", d_ff},         {"vocab_size", vocab_size}, {"max_len", max_len},
          {"n_type_ids", n_type_ids}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.n_type_ids = j.at("n_type_ids").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

template <typename S>
Parameters<S> Parameters<S>::zeros(const ModelConfig& cfg) {
  cfg.validate();
  const int d = cfg.d_model;
  Parameters p;
  p.tok_emb = Matrix<S>::Zero(cfg.vocab_size, d);
  p.type_emb = Matrix<S>::Zero(cfg.n_type_ids, d);
  p.pos_emb = Matrix<S>::Zero(cfg.max_len, d);
  p.layers.resize(static_cast<std::size_t>(cfg.n_layers));
  for (auto& l : p.layers) {
    l.ln1_gain = Matrix<S>::Zero(1, d);
    l.ln1_bias = Matrix<S>::Zero(1, d);
    for (Matrix<S>* w : {&l.w_q, &l.w_k, &l.w_v, &l.w_o}) *w = Matrix<S>::Zero(d, d);
    for (Matrix<S>* b : {&l.b_q, &l.b_k, &l.b_v, &l.b_o}) *b = Matrix<S>::Zero(1, d);
    l.ln2_gain = Matrix<S>::Zero(1, d);
    l.ln2_bias = Matrix<S>::Zero(1, d);
    l.w_ff1 = Matrix<S>::Zero(d, cfg.d_ff);
    l.b_ff1 = Matrix<S>::Zero(1, cfg.d_ff);
    l.w_ff2 = Matrix<S>::Zero(cfg.d_ff, d);
    l.b_ff2 = Matrix<S>::Zero(1, d);
  }
  p.lnf_gain = Matrix<S>::Zero(1, d);
  p.lnf_bias = Matrix<S>::Zero(1, d);
  return p;
}

template <typename S>
Parameters<S> Parameters<S>::init(const ModelConfig& cfg, std::uint64_t seed) {
  Parameters p = zeros(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  auto fill = [&](Matrix<S>& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<S>(normal(rng));
  };
  fill(p.tok_emb);
  fill(p.type_emb);
  fill(p.pos_emb);
  for (auto& l : p.layers) {
    l.ln1_gain.setOnes();
    l.ln2_gain.setOnes();
    for (Matrix<S>* w : {&l.w_q, &l.w_k, &l.w_v, &l.w_o, &l.w_ff1, &l.w_ff2}) fill(*w);
  }
  p.lnf_gain.setOnes();
  return p;
}

template <typename S>
std::vector<std::pair<std::string, Matrix<S>*>> Parameters<S>::tensors() {
  std::vector<std::pair<std::string, Matrix<S>*>> out{
      {"tok_emb", &tok_emb}, {"type_emb", &type_emb}, {"pos_emb", &pos_emb}};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const std::string pre = "layers." + std::to_string(i) + ".";
    out.insert(out.end(), {{pre + "ln1.gain", &l.ln1_gain}, {pre + "ln1.bias", &l.ln1_bias},
                           {pre + "attn.w_q", &l.w_q},      {pre + "attn.b_q", &l.b_q},
                           {pre + "attn.w_k", &l.w_k},      {pre + "attn.b_k", &l.b_k},
                           {pre + "attn.w_v", &l.w_v},      {pre + "attn.b_v", &l.b_v},
                           {pre + "attn.w_o", &l.w_o},      {pre + "attn.b_o", &l.b_o},
                           {pre + "ln2.gain", &l.ln2_gain}, {pre + "ln2.bias", &l.ln2_bias},
                           {pre + "ff.w_1", &l.w_ff1},      {pre + "ff.b_1", &l.b_ff1},
                           {pre + "ff.w_2", &l.w_ff2},      {pre + "ff.b_2", &l.b_ff2}});
  }
  out.emplace_back("lnf.gain", &lnf_gain);
  out.emplace_back("lnf.bias", &lnf_bias);
  return out;
}

template <typename S>
std::vector<std::pair<std::string, const Matrix<S>*>> Parameters<S>::tensors() const {
  auto mutable_view = const_cast<Parameters*>(this)->tensors();
  std::vector<std::pair<std::string, const Matrix<S>*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, ptr] : mutable_view) out.emplace_back(std::move(name), ptr);
  return out;
}

template <typename S>
std::size_t Parameters<S>::num_parameters() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.second->size());
  return n;
}

template <typename S>
bool Parameters<S>::all_finite() const {
  for (const auto& t : tensors()) {
    if (!t.second->allFinite()) return false;
  }
  return true;
}

template <typename S>
void Parameters<S>::set_zero() {
  for (auto& t : tensors()) t.second->setZero();
}

template <typename S>
void Parameters<S>::check_shapes(const ModelConfig& cfg) const {
  const Parameters reference = zeros(cfg);
  const auto want = reference.tensors();
  const auto have = tensors();
  if (want.size() != have.size()) throw ShapeMismatch("parameter tensor count does not match config");
  for (std::size_t k = 0; k < want.size(); ++k) {
    if (want[k].second->rows() != have[k].second->rows() ||
        want[k].second->cols() != have[k].second->cols()) {
      throw ShapeMismatch("tensor " + want[k].first + " has the wrong shape");
    }
  }
}

template struct Parameters<float>;
template struct Parameters<double>;

}  // namespace cgrg
