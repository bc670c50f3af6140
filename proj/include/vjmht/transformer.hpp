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

#pragma once

// Post-norm Transformer encoder: multi-head self-attention and a
// position-wise feed-forward network, each wrapped as
// LayerNorm(sublayer(X) + X).

#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vjmht/autodiff.hpp"

namespace vjmht::nn {

using ad::AttentionMask;
using ad::Tape;
using ad::Tensor;
using ad::Var;

struct StackConfig {
  std::size_t dim = 0;
  std::size_t heads = 1;
  std::size_t ffn = 0;
  std::size_t layers = 0;

  void validate() const;
  std::size_t head_dim() const { return dim / heads; }
};

using ParamVisitor = std::function<void(const std::string& name, Tensor& t)>;
using ConstParamVisitor = std::function<void(const std::string& name, const Tensor& t)>;

/// Uniform Glorot initialisation in [-sqrt(6/(fan_in+fan_out)), +...].
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

struct EncoderLayerParams {
  std::vector<Tensor> wq, wk, wv;  // one d x d_h matrix per head
  Tensor wo;                       // d x d
  Tensor w1, b1;                   // d x d', 1 x d'
  Tensor w2, b2;                   // d' x d, 1 x d
  Tensor ln1_gain, ln1_bias;
  Tensor ln2_gain, ln2_bias;

  static EncoderLayerParams init(const StackConfig& cfg, std::mt19937_64& rng);

  std::size_t heads() const { return wq.size(); }
  std::size_t dim() const { return wo.rows(); }
  std::size_t ffn() const { return w1.cols(); }

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;
};

struct EncoderStackParams {
  std::vector<EncoderLayerParams> layers;

  static EncoderStackParams init(const StackConfig& cfg, std::mt19937_64& rng);

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;
};

/// Layer parameters recorded on a tape.
struct EncoderLayerVars {
  std::vector<Var> wq, wk, wv;
  Var wo, w1, b1, w2, b2;
  Var ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

using EncoderStackVars = std::vector<EncoderLayerVars>;

/// Mutable parameters receive gradients; const ones are recorded as constants.
EncoderLayerVars bind(Tape& tape, EncoderLayerParams& p);
EncoderLayerVars bind(Tape& tape, const EncoderLayerParams& p);
EncoderStackVars bind(Tape& tape, EncoderStackParams& p);
EncoderStackVars bind(Tape& tape, const EncoderStackParams& p);

/// Attention weights captured during a forward pass, indexed [layer][head].
struct AttentionTrace {
  std::vector<std::vector<Tensor>> layers;
};

/// PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(same).
Tensor sinusoidal_positional_encoding(std::size_t n, std::size_t d);

/// softmax(Q Wq_i (K Wk_i)^T / sqrt(d_h), mask) V Wv_i per head, heads
/// concatenated then projected by Wo. Head weights are appended to
/// `weights` when given.
Var multi_head_attention(Var q, Var k, Var v, const AttentionMask& mask, const EncoderLayerVars& p,
                         std::vector<Tensor>* weights = nullptr);

/// max(0, X W1 + b1) W2 + b2, row by row.
Var feed_forward(Var x, const EncoderLayerVars& p);

Var encoder_layer(Var x, const AttentionMask& mask, const EncoderLayerVars& p,
                  std::vector<Tensor>* weights = nullptr);

/// Applies every layer in order under the same mask.
Var encoder_stack(Var x, const AttentionMask& mask, const EncoderStackVars& stack,
                  AttentionTrace* trace = nullptr);

}  // namespace vjmht::nn
