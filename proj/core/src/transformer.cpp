// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

template <typename S>
using Col = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct LnCache {
  Matrix<S> xhat;
  Col<S> rstd;
};

template <typename S>
Matrix<S> layer_norm(const Matrix<S>& x, const Matrix<S>& gain, const Matrix<S>& bias,
                     LnCache<S>* cache) {
  const Col<S> mean = x.rowwise().mean();
  Matrix<S> xhat = x.colwise() - mean;
  const Col<S> var = xhat.array().square().rowwise().mean();
  const Col<S> rstd = (var.array() + static_cast<S>(kLnEps)).rsqrt();
  xhat = xhat.array().colwise() * rstd.array();
  Matrix<S> y = (xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = rstd;
  }
  return y;
}

// Accumulates the gain/bias gradients and returns the input gradient.
template <typename S>
Matrix<S> layer_norm_backward(const Matrix<S>& dy, const LnCache<S>& c, const Matrix<S>& gain,
                              Matrix<S>& dgain, Matrix<S>& dbias) {
  dgain.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const Matrix<S> dxhat = dy.array().rowwise() * gain.row(0).array();
  const Col<S> m1 = dxhat.rowwise().mean();
  const Col<S> m2 = (dxhat.array() * c.xhat.array()).rowwise().mean();
  Matrix<S> dx = (dxhat.colwise() - m1).array() - c.xhat.array().colwise() * m2.array();
  return dx.array().colwise() * c.rstd.array();
}

template <typename S>
S gelu(S x) {
  const S t = std::tanh(static_cast<S>(kGeluC) * (x + static_cast<S>(kGeluA) * x * x * x));
  return static_cast<S>(0.5) * x * (1 + t);
}

template <typename S>
S gelu_grad(S x) {
  const S c = static_cast<S>(kGeluC);
  const S a = static_cast<S>(kGeluA);
  const S t = std::tanh(c * (x + a * x * x * x));
  return static_cast<S>(0.5) * (1 + t) + static_cast<S>(0.5) * x * (1 - t * t) * c * (1 + 3 * a * x * x);
}

template <typename S>
void add_bias(Matrix<S>& m, const Matrix<S>& bias) {
  m.rowwise() += bias.row(0);
}

template <typename S>
struct LayerCache {
  LnCache<S> ln1, ln2;
  Matrix<S> a, q, k, v, o, b, h, g;
  std::vector<Matrix<S>> probs;  // per head
};

template <typename S>
struct Workspace {
  std::vector<LayerCache<S>> layers;
  LnCache<S> lnf;
  Matrix<S> z_rows;
  std::vector<int> rows;
};

void validate_inputs(const ModelConfig& cfg, std::span<const TokenId> ids, const EmbeddingIds& emb,
                     const AttentionMask& mask) {
  const auto len = ids.size();
  if (emb.type_ids.size() != len || emb.pos_ids.size() != len) {
    throw ShapeMismatch("embedding ids do not match the token count");
  }
  if (static_cast<std::size_t>(mask.size()) != len) {
    throw ShapeMismatch("mask is " + std::to_string(mask.size()) + " wide for " +
                        std::to_string(len) + " tokens");
  }
  if (len == 0) throw InvalidArgument("empty sequence");
  if (static_cast<int>(len) > cfg.max_len) {
    throw SequenceTooLong(std::to_string(len) + " > " + std::to_string(cfg.max_len));
  }
  for (std::size_t t = 0; t < len; ++t) {
    if (ids[t] < 0 || ids[t] >= cfg.vocab_size) throw InvalidArgument("token id out of range");
    if (emb.type_ids[t] < 0 || emb.type_ids[t] >= cfg.n_type_ids) {
      throw InvalidArgument("type id out of range");
    }
    if (emb.pos_ids[t] < 0 || emb.pos_ids[t] >= cfg.max_len) {
      throw InvalidArgument("position id out of range");
    }
    if (!mask(static_cast<int>(t), static_cast<int>(t))) {
      throw InvalidArgument("mask row without its diagonal");
    }
  }
}

template <typename S>
Matrix<S> mask_bias(const AttentionMask& mask) {
  const int len = mask.size();
  Matrix<S> bias(len, len);
  const S neg_inf = -std::numeric_limits<S>::infinity();
  for (int a = 0; a < len; ++a) {
    const std::uint8_t* row = mask.row(a);
    for (int b = 0; b < len; ++b) bias(a, b) = row[b] ? S(0) : neg_inf;
  }
  return bias;
}

// Softmax over each row; entries at -inf come out as exact zeros.
template <typename S>
void softmax_rows(Matrix<S>& m) {
  const Col<S> mx = m.rowwise().maxCoeff();
  m = (m.colwise() - mx).array().exp();
  const Col<S> sum = m.rowwise().sum();
  m = m.array().colwise() / sum.array();
}

template <typename S>
Matrix<S> run_forward(const Parameters<S>& p, const ModelConfig& cfg, std::span<const TokenId> ids,
                      const EmbeddingIds& emb, const AttentionMask& mask,
                      const std::vector<int>& rows, Workspace<S>* ws, ForwardTrace<S>* trace,
                      bool keep_hidden, bool keep_attention) {
  validate_inputs(cfg, ids, emb, mask);
  const int len = static_cast<int>(ids.size());
  const int d = cfg.d_model;
  const int dh = cfg.d_head();
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

  Matrix<S> x(len, d);
  for (int t = 0; t < len; ++t) {
    x.row(t) = p.tok_emb.row(ids[static_cast<std::size_t>(t)]) +
               p.type_emb.row(emb.type_ids[static_cast<std::size_t>(t)]) +
               p.pos_emb.row(emb.pos_ids[static_cast<std::size_t>(t)]);
  }
  if (trace && keep_hidden) trace->hidden.push_back(x);
  const Matrix<S> bias = mask_bias<S>(mask);
  if (ws) ws->layers.resize(p.layers.size());

  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& l = p.layers[li];
    LayerCache<S> local;
    LayerCache<S>& c = ws ? ws->layers[li] : local;
    c.a = layer_norm(x, l.ln1_gain, l.ln1_bias, &c.ln1);
    c.q = c.a * l.w_q;
    add_bias(c.q, l.b_q);
    c.k = c.a * l.w_k;
    add_bias(c.k, l.b_k);
    c.v = c.a * l.w_v;
    add_bias(c.v, l.b_v);
    c.o.resize(len, d);
    c.probs.resize(static_cast<std::size_t>(cfg.n_heads));
    if (trace && keep_attention) trace->attention.emplace_back();
    for (int h = 0; h < cfg.n_heads; ++h) {
      Matrix<S>& prob = c.probs[static_cast<std::size_t>(h)];
      prob.noalias() = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose();
      prob = prob * scale + bias;
      softmax_rows(prob);
      c.o.middleCols(h * dh, dh).noalias() = prob * c.v.middleCols(h * dh, dh);
      if (trace && keep_attention) trace->attention.back().push_back(prob);
    }
    x.noalias() += c.o * l.w_o;
    add_bias(x, l.b_o);
    c.b = layer_norm(x, l.ln2_gain, l.ln2_bias, &c.ln2);
    c.h = c.b * l.w_ff1;
    add_bias(c.h, l.b_ff1);
    c.g = c.h.unaryExpr([](S v) { return gelu(v); });
    x.noalias() += c.g * l.w_ff2;
    add_bias(x, l.b_ff2);
    if (trace && keep_hidden) trace->hidden.push_back(x);
  }

  Matrix<S> x_rows(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= len) throw InvalidArgument("logit row out of range");
    x_rows.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  }
  LnCache<S> lnf_local;
  Matrix<S> z = layer_norm(x_rows, p.lnf_gain, p.lnf_bias, ws ? &ws->lnf : &lnf_local);
  Matrix<S> logits = z * p.tok_emb.transpose();
  if (ws) {
    ws->z_rows = std::move(z);
    ws->rows = rows;
  }
  return logits;
}

template <typename S>
void run_backward(const Parameters<S>& p, const ModelConfig& cfg, std::span<const TokenId> ids,
                  const EmbeddingIds& emb, const Workspace<S>& ws, const Matrix<S>& dlogits,
                  Parameters<S>& grad) {
  const int len = static_cast<int>(ids.size());
  const int dh = cfg.d_head();
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

  grad.tok_emb.noalias() += dlogits.transpose() * ws.z_rows;
  const Matrix<S> dz = dlogits * p.tok_emb;
  const Matrix<S> dx_rows = layer_norm_backward(dz, ws.lnf, p.lnf_gain, grad.lnf_gain, grad.lnf_bias);
  Matrix<S> dx = Matrix<S>::Zero(len, cfg.d_model);
  for (std::size_t r = 0; r < ws.rows.size(); ++r) dx.row(ws.rows[r]) += dx_rows.row(static_cast<Eigen::Index>(r));

  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& l = p.layers[li];
    auto& gl = grad.layers[li];
    const auto& c = ws.layers[li];

    gl.w_ff2.noalias() += c.g.transpose() * dx;
    gl.b_ff2.row(0) += dx.colwise().sum();
    Matrix<S> dh_ff = dx * l.w_ff2.transpose();
    dh_ff = dh_ff.array() * c.h.unaryExpr([](S v) { return gelu_grad(v); }).array();
    gl.w_ff1.noalias() += c.b.transpose() * dh_ff;
    gl.b_ff1.row(0) += dh_ff.colwise().sum();
    const Matrix<S> db = dh_ff * l.w_ff1.transpose();
    dx += layer_norm_backward(db, c.ln2, l.ln2_gain, gl.ln2_gain, gl.ln2_bias);

    gl.w_o.noalias() += c.o.transpose() * dx;
    gl.b_o.row(0) += dx.colwise().sum();
    const Matrix<S> d_o = dx * l.w_o.transpose();
    Matrix<S> dq(len, cfg.d_model), dk(len, cfg.d_model), dv(len, cfg.d_model);
    for (int h = 0; h < cfg.n_heads; ++h) {
      const Matrix<S>& prob = c.probs[static_cast<std::size_t>(h)];
      const auto d_oh = d_o.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh).noalias() = prob.transpose() * d_oh;
      Matrix<S> dp = d_oh * c.v.middleCols(h * dh, dh).transpose();
      const Col<S> inner = (dp.array() * prob.array()).rowwise().sum();
      Matrix<S> ds = prob.array() * (dp.colwise() - inner).array();
      ds *= scale;
      dq.middleCols(h * dh, dh).noalias() = ds * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh).noalias() = ds.transpose() * c.q.middleCols(h * dh, dh);
    }
    gl.w_q.noalias() += c.a.transpose() * dq;
    gl.b_q.row(0) += dq.colwise().sum();
    gl.w_k.noalias() += c.a.transpose() * dk;
    gl.b_k.row(0) += dk.colwise().sum();
    gl.w_v.noalias() += c.a.transpose() * dv;
    gl.b_v.row(0) += dv.colwise().sum();
    Matrix<S> da = dq * l.w_q.transpose();
    da.noalias() += dk * l.w_k.transpose();
    da.noalias() += dv * l.w_v.transpose();
    dx += layer_norm_backward(da, c.ln1, l.ln1_gain, gl.ln1_gain, gl.ln1_bias);
  }

  for (int t = 0; t < len; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    grad.tok_emb.row(ids[ut]) += dx.row(t);
    grad.type_emb.row(emb.type_ids[ut]) += dx.row(t);
    grad.pos_emb.row(emb.pos_ids[ut]) += dx.row(t);
  }
}

std::vector<int> all_rows(std::size_t len) {
  std::vector<int> rows(len);
  for (std::size_t t = 0; t < len; ++t) rows[t] = static_cast<int>(t);
  return rows;
}

std::vector<int> response_rows(const TrainingInstance& inst) {
  const int m = inst.response_len();
  if (m < 1) throw InvalidArgument("empty response");
  if (inst.r_start < 1) throw InvalidArgument("response needs a non-empty input before it");
  if (static_cast<int>(inst.token_ids.size()) != inst.r_start + m) {
    throw ShapeMismatch("token count does not equal input length plus response length");
  }
  std::vector<int> rows(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) rows[static_cast<std::size_t>(k)] = inst.r_start - 1 + k;
  return rows;
}

}  // namespace

template <typename S>
ForwardTrace<S> forward(const Parameters<S>& params, const ModelConfig& cfg,
                        std::span<const TokenId> token_ids, const EmbeddingIds& embedding_ids,
                        const AttentionMask& mask, const ForwardOptions& opts) {
  ForwardTrace<S> trace;
  trace.logit_rows = opts.logit_rows ? *opts.logit_rows : all_rows(token_ids.size());
  trace.logits = run_forward<S>(params, cfg, token_ids, embedding_ids, mask, trace.logit_rows,
                                nullptr, &trace, opts.keep_hidden, opts.keep_attention);
  return trace;
}

template <typename S>
S loss(const ForwardTrace<S>& trace, std::span<const TokenId> targets, int r_start) {
  if (targets.size() < 2) throw InvalidArgument("empty response");
  double total = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const int pos = r_start - 1 + static_cast<int>(k);
    const auto it = std::find(trace.logit_rows.begin(), trace.logit_rows.end(), pos);
    if (it == trace.logit_rows.end()) throw InvalidArgument("trace has no logits for a response row");
    const auto row = trace.logits.row(it - trace.logit_rows.begin());
    if (targets[k] < 0 || targets[k] >= row.size()) throw InvalidArgument("target id out of range");
    total -= log_softmax_row(row)[static_cast<std::size_t>(targets[k])];
  }
  return static_cast<S>(total / static_cast<double>(targets.size()));
}

template <typename S>
S loss_and_gradient(const Parameters<S>& params, const ModelConfig& cfg,
                    std::span<const TrainingInstance> batch, Parameters<S>* grad) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  if (grad) {
    if (grad->layers.size() != params.layers.size()) *grad = Parameters<S>::zeros(cfg);
    grad->set_zero();
  }
  const S inv_batch = static_cast<S>(1.0 / static_cast<double>(batch.size()));
  S total = 0;
  Workspace<S> ws;
  for (const auto& inst : batch) {
    const std::vector<int> rows = response_rows(inst);
    Matrix<S> logits = run_forward<S>(params, cfg, inst.token_ids, inst.embedding_ids, inst.mask,
                                      rows, grad ? &ws : nullptr, nullptr, false, false);
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Col<S> mx = logits.rowwise().maxCoeff();
    Matrix<S> prob = (logits.colwise() - mx).array().exp();
    const Col<S> z = prob.rowwise().sum();
    S inst_loss = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const TokenId target = inst.targets[static_cast<std::size_t>(r)];
      if (target < 0 || target >= cfg.vocab_size) throw InvalidArgument("target id out of range");
      inst_loss -= logits(r, target) - mx(r) - std::log(z(r));
    }
    inst_loss /= static_cast<S>(n);
    total += inst_loss * inv_batch;
    if (grad) {
      prob = prob.array().colwise() / z.array();
      for (Eigen::Index r = 0; r < n; ++r) prob(r, inst.targets[static_cast<std::size_t>(r)]) -= 1;
      prob *= inv_batch / static_cast<S>(n);
      run_backward<S>(params, cfg, inst.token_ids, inst.embedding_ids, ws, prob, *grad);
    }
  }
  return total;
}

template <typename S>
CachedScorer<S>::CachedScorer(std::shared_ptr<const Parameters<S>> params, ModelConfig cfg,
                              std::span<const TokenId> input_ids,
                              const EmbeddingIds& input_embedding_ids,
                              const AttentionMask& input_mask)
    : params_(std::move(params)), cfg_(cfg), input_len_(static_cast<int>(input_ids.size())) {
  if (!params_) throw InvalidArgument("null parameters");
  if (cfg_.n_type_ids <= kResponseTypeId) throw InvalidArgument("config has no response type id");
  Workspace<S> ws;
  const std::vector<int> last{input_len_ - 1};
  const Matrix<S> logits = run_forward<S>(*params_, cfg_, input_ids, input_embedding_ids, input_mask,
                                          last, &ws, nullptr, false, false);
  for (auto& lc : ws.layers) {
    input_k_.push_back(std::move(lc.k));
    input_v_.push_back(std::move(lc.v));
  }
  auto root = std::make_shared<Node>();
  root->logprobs = log_softmax_row(logits.row(0));
  nodes_.emplace(std::vector<TokenId>{}, std::move(root));
}

template <typename S>
std::vector<double> CachedScorer<S>::next_logprobs(std::span<const TokenId> response) {
  return node_for(response)->logprobs;
}

template <typename S>
std::shared_ptr<const typename CachedScorer<S>::Node> CachedScorer<S>::node_for(
    std::span<const TokenId> response) {
  std::vector<TokenId> key(response.begin(), response.end());
  if (auto it = nodes_.find(key); it != nodes_.end()) return it->second;
  if (static_cast<int>(response.size()) > capacity()) {
    throw SequenceTooLong("response does not fit after the input");
  }
  auto parent = node_for(response.first(response.size() - 1));
  auto node = extend(parent, response.back());
  // Decoders only ever look one step back, so older prefixes can go.
  if (nodes_.size() > 4096) {
    const int keep_from = node->depth - 1;
    std::erase_if(nodes_, [&](const auto& kv) { return kv.second->depth < keep_from; });
  }
  nodes_.emplace(std::move(key), node);
  return node;
}

template <typename S>
std::shared_ptr<const typename CachedScorer<S>::Node> CachedScorer<S>::extend(
    const std::shared_ptr<const Node>& parent, TokenId token) {
  if (token < 0 || token >= cfg_.vocab_size) throw InvalidArgument("token id out of range");
  const auto& p = *params_;
  const int d = cfg_.d_model;
  const int dh = cfg_.d_head();
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
  const int pos = parent->depth;

  std::vector<const Node*> path;
  for (const Node* n = parent.get(); n && n->depth > 0; n = n->parent.get()) path.push_back(n);
  std::reverse(path.begin(), path.end());

  auto node = std::make_shared<Node>();
  node->parent = parent;
  node->depth = parent->depth + 1;
  Matrix<S> x = p.tok_emb.row(token) + p.type_emb.row(kResponseTypeId) + p.pos_emb.row(pos);
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& l = p.layers[li];
    const Matrix<S> a = layer_norm<S>(x, l.ln1_gain, l.ln1_bias, nullptr);
    Matrix<S> q = a * l.w_q + l.b_q;
    node->k.push_back(a * l.w_k + l.b_k);
    node->v.push_back(a * l.w_v + l.b_v);
    const Eigen::Index n_keys = input_len_ + static_cast<Eigen::Index>(path.size()) + 1;
    Matrix<S> keys(n_keys, d), values(n_keys, d);
    keys.topRows(input_len_) = input_k_[li];
    values.topRows(input_len_) = input_v_[li];
    for (std::size_t j = 0; j < path.size(); ++j) {
      keys.row(input_len_ + static_cast<Eigen::Index>(j)) = path[j]->k[li];
      values.row(input_len_ + static_cast<Eigen::Index>(j)) = path[j]->v[li];
    }
    keys.row(n_keys - 1) = node->k.back();
    values.row(n_keys - 1) = node->v.back();
    Matrix<S> o(1, d);
    for (int h = 0; h < cfg_.n_heads; ++h) {
      Matrix<S> s = q.middleCols(h * dh, dh) * keys.middleCols(h * dh, dh).transpose() * scale;
      softmax_rows(s);
      o.middleCols(h * dh, dh).noalias() = s * values.middleCols(h * dh, dh);
    }
    x.noalias() += o * l.w_o;
    x += l.b_o;
    const Matrix<S> b = layer_norm<S>(x, l.ln2_gain, l.ln2_bias, nullptr);
    Matrix<S> hid = b * l.w_ff1 + l.b_ff1;
    hid = hid.unaryExpr([](S v) { return gelu(v); });
    x.noalias() += hid * l.w_ff2;
    x += l.b_ff2;
  }
  const Matrix<S> z = layer_norm<S>(x, p.lnf_gain, p.lnf_bias, nullptr);
  const Matrix<S> logits = z * p.tok_emb.transpose();
  node->logprobs = log_softmax_row(logits.row(0));
  return node;
}

template ForwardTrace<float> forward(const Parameters<float>&, const ModelConfig&,
                                     std::span<const TokenId>, const EmbeddingIds&,
                                     const AttentionMask&, const ForwardOptions&);
template ForwardTrace<double> forward(const Parameters<double>&, const ModelConfig&,
                                      std::span<const TokenId>, const EmbeddingIds&,
                                      const AttentionMask&, const ForwardOptions&);
template float loss(const ForwardTrace<float>&, std::span<const TokenId>, int);
template double loss(const ForwardTrace<double>&, std::span<const TokenId>, int);
template float loss_and_gradient(const Parameters<float>&, const ModelConfig&,
                                 std::span<const TrainingInstance>, Parameters<float>*);
template double loss_and_gradient(const Parameters<double>&, const ModelConfig&,
                                  std::span<const TrainingInstance>, Parameters<double>*);
template class CachedScorer<float>;
template class CachedScorer<double>;

}  // namespace cgrg
