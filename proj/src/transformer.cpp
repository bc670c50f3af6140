// Copyright 2026 The VJMHT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vjmht/transformer.hpp"

#include <cmath>

namespace vjmht::nn {

void StackConfig::validate() const {
  if (dim == 0 || heads == 0 || ffn == 0) throw InvalidArgument("stack dims must be positive");
  if (dim % heads != 0) {
    throw InvalidArgument("model dim " + std::to_string(dim) + " not divisible by " +
                          std::to_string(heads) + " heads");
  }
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

EncoderLayerParams EncoderLayerParams::init(const StackConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const std::size_t d = cfg.dim, dh = cfg.head_dim();
  EncoderLayerParams p;
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    p.wq.push_back(glorot_uniform(d, dh, rng));
    p.wk.push_back(glorot_uniform(d, dh, rng));
    p.wv.push_back(glorot_uniform(d, dh, rng));
  }
  p.wo = glorot_uniform(d, d, rng);
  p.w1 = glorot_uniform(d, cfg.ffn, rng);
  p.b1 = Tensor(1, cfg.ffn);
  p.w2 = glorot_uniform(cfg.ffn, d, rng);
  p.b2 = Tensor(1, d);
  p.ln1_gain = Tensor(1, d, 1.0);
  p.ln1_bias = Tensor(1, d);
  p.ln2_gain = Tensor(1, d, 1.0);
  p.ln2_bias = Tensor(1, d);
  return p;
}

namespace {

template <typename Self, typename Fn>
void visit_layer(Self& p, const std::string& prefix, const Fn& fn) {
  for (std::size_t h = 0; h < p.wq.size(); ++h) {
    const auto tag = std::to_string(h);
    fn(prefix + "attn.wq." + tag, p.wq[h]);
    fn(prefix + "attn.wk." + tag, p.wk[h]);
    fn(prefix + "attn.wv." + tag, p.wv[h]);
  }
  fn(prefix + "attn.wo", p.wo);
  fn(prefix + "ffn.w1", p.w1);
  fn(prefix + "ffn.b1", p.b1);
  fn(prefix + "ffn.w2", p.w2);
  fn(prefix + "ffn.b2", p.b2);
  fn(prefix + "ln1.gain", p.ln1_gain);
  fn(prefix + "ln1.bias", p.ln1_bias);
  fn(prefix + "ln2.gain", p.ln2_gain);
  fn(prefix + "ln2.bias", p.ln2_bias);
}

}  // namespace

void EncoderLayerParams::visit(const std::string& prefix, const ParamVisitor& fn) {
  visit_layer(*this, prefix, fn);
}

void EncoderLayerParams::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  visit_layer(*this, prefix, fn);
}

EncoderStackParams EncoderStackParams::init(const StackConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  EncoderStackParams s;
  for (std::size_t l = 0; l < cfg.layers; ++l) s.layers.push_back(EncoderLayerParams::init(cfg, rng));
  return s;
}

void EncoderStackParams::visit(const std::string& prefix, const ParamVisitor& fn) {
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].visit(prefix + std::to_string(l) + ".", fn);
}

void EncoderStackParams::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].visit(prefix + std::to_string(l) + ".", fn);
}

namespace {

template <typename Layer>
EncoderLayerVars bind_layer(Tape& tape, Layer& p) {
  EncoderLayerVars v;
  for (std::size_t h = 0; h < p.wq.size(); ++h) {
    v.wq.push_back(tape.param(p.wq[h]));
    v.wk.push_back(tape.param(p.wk[h]));
    v.wv.push_back(tape.param(p.wv[h]));
  }
  v.wo = tape.param(p.wo);
  v.w1 = tape.param(p.w1);
  v.b1 = tape.param(p.b1);
  v.w2 = tape.param(p.w2);
  v.b2 = tape.param(p.b2);
  v.ln1_gain = tape.param(p.ln1_gain);
  v.ln1_bias = tape.param(p.ln1_bias);
  v.ln2_gain = tape.param(p.ln2_gain);
  v.ln2_bias = tape.param(p.ln2_bias);
  return v;
}

template <typename Stack>
EncoderStackVars bind_stack(Tape& tape, Stack& p) {
  EncoderStackVars out;
  out.reserve(p.layers.size());
  for (auto& layer : p.layers) out.push_back(bind_layer(tape, layer));
  return out;
}

}  // namespace

EncoderLayerVars bind(Tape& tape, EncoderLayerParams& p) { return bind_layer(tape, p); }
EncoderLayerVars bind(Tape& tape, const EncoderLayerParams& p) { return bind_layer(tape, p); }
EncoderStackVars bind(Tape& tape, EncoderStackParams& p) { return bind_stack(tape, p); }
EncoderStackVars bind(Tape& tape, const EncoderStackParams& p) { return bind_stack(tape, p); }

Tensor sinusoidal_positional_encoding(std::size_t n, std::size_t d) {
  if (d == 0 || d % 2 != 0) throw InvalidArgument("positional encoding dim must be even, got " + std::to_string(d));
  Tensor pe(n, d);
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double freq = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) / freq;
      pe(pos, 2 * i) = std::sin(angle);
      pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

Var multi_head_attention(Var q, Var k, Var v, const AttentionMask& mask, const EncoderLayerVars& p,
                         std::vector<Tensor>* weights) {
  const std::size_t heads = p.wq.size();
  if (heads == 0) throw InvalidArgument("attention needs at least one head");
  if (mask.size() != q.rows() || mask.size() != k.rows()) {
    throw DimensionError("attention mask size " + std::to_string(mask.size()) + " does not match " +
                         std::to_string(q.rows()) + " tokens");
  }
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(p.wq.front().cols()));
  std::vector<Var> head_out;
  head_out.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = matmul(q, p.wq[h]);
    Var kh = matmul(k, p.wk[h]);
    Var vh = matmul(v, p.wv[h]);
    Var logits = scale(matmul(qh, transpose(kh)), inv_sqrt_dh);
    Var attn = softmax(logits, mask);
    if (weights) weights->push_back(attn.value());
    head_out.push_back(matmul(attn, vh));
  }
  Var cat = heads == 1 ? head_out.front() : concat_cols(head_out);
  return matmul(cat, p.wo);
}

Var feed_forward(Var x, const EncoderLayerVars& p) {
  Var hidden = relu(add_row(matmul(x, p.w1), p.b1));
  return add_row(matmul(hidden, p.w2), p.b2);
}

Var encoder_layer(Var x, const AttentionMask& mask, const EncoderLayerVars& p, std::vector<Tensor>* weights) {
  Var attn = multi_head_attention(x, x, x, mask, p, weights);
  Var x1 = layer_norm(add(attn, x), p.ln1_gain, p.ln1_bias);
  return layer_norm(add(feed_forward(x1, p), x1), p.ln2_gain, p.ln2_bias);
}

Var encoder_stack(Var x, const AttentionMask& mask, const EncoderStackVars& stack, AttentionTrace* trace) {
  if (trace) trace->layers.clear();
  for (const auto& layer : stack) {
    std::vector<Tensor>* w = nullptr;
    if (trace) w = &trace->layers.emplace_back();
    x = encoder_layer(x, mask, layer, w);
  }
  return x;
}

}  // namespace vjmht::nn
