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

// Hierarchical co-summarization model.
//
// Frame level: every shot is encoded independently by the F-Transformer
// with a learnable shot token prepended; the token's output, projected to
// d_s, is the shot embedding.
//
// Shot level: the shot embeddings of N videos are concatenated, each video
// prefixed by the shared video token, and encoded jointly by the
// S-Transformer under a mask that keeps each video token on its own video.
// A score head reads concat(shot rep, video rep).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vjmht/autodiff.hpp"
#include "vjmht/transformer.hpp"
#include "vjmht/video.hpp"

namespace vjmht::model {

using ad::AttentionMask;
using ad::Tape;
using ad::Tensor;
using ad::Var;

struct ModelConfig {
  std::size_t d_f = 1024;
  std::size_t d_s = 512;
  std::size_t d_v = 512;
  std::size_t f_layers = 2;
  std::size_t f_heads = 2;
  std::size_t f_ffn = 4096;
  std::size_t s_layers = 3;
  std::size_t s_heads = 2;
  std::size_t s_ffn = 2048;

  void validate() const;
  nn::StackConfig f_stack() const { return {d_f, f_heads, f_ffn, f_layers}; }
  nn::StackConfig s_stack() const { return {d_s, s_heads, s_ffn, s_layers}; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct VjmhtParams {
  ModelConfig config;
  Tensor shot_token;   // 1 x d_f
  Tensor video_token;  // 1 x d_s
  nn::EncoderStackParams f_stack;
  nn::EncoderStackParams s_stack;
  Tensor proj_fs_w, proj_fs_b;  // d_f x d_s, 1 x d_s
  Tensor proj_sv_w, proj_sv_b;  // d_s x d_v, 1 x d_v
  Tensor score_w;               // 2 d_v x 1
  Tensor score_b;               // 1 x 1

  /// Seeded Glorot init. Values are rounded to single precision so that the
  /// float32 model file round-trips exactly.
  static VjmhtParams init(const ModelConfig& config, std::uint64_t seed);

  /// Visits every parameter tensor in a fixed order with a stable name.
  void visit(const nn::ParamVisitor& fn);
  void visit(const nn::ConstParamVisitor& fn) const;

  std::vector<Tensor*> tensors();
  void set_requires_grad(bool on);
  void zero_grad();
  void round_to_float();
  std::size_t parameter_count() const;
};

/// Parameters recorded on one tape.
struct BoundModel {
  const ModelConfig* config = nullptr;
  Var shot_token, video_token;
  nn::EncoderStackVars f_stack, s_stack;
  Var proj_fs_w, proj_fs_b, proj_sv_w, proj_sv_b;
  Var score_w, score_b;
};

BoundModel bind(Tape& tape, VjmhtParams& params);
BoundModel bind(Tape& tape, const VjmhtParams& params);

/// Where every video's tokens sit in the concatenated shot-level sequence.
struct TokenLayout {
  std::vector<std::size_t> video_token;         // position of video n's token
  std::vector<std::vector<std::size_t>> shots;  // positions of its shots
  std::size_t total = 0;

  /// Layout [v; s^1_1..s^1_P1; v; s^2_1..] for the given shot counts.
  static TokenLayout from_shot_counts(std::span<const std::size_t> counts);
  std::size_t videos() const { return video_token.size(); }
};

/// Video-token rows see only their own video's shots and themselves. Shot
/// rows see every shot of every video plus their own video token.
AttentionMask build_joint_mask(const TokenLayout& layout);

/// Shot embedding (1 x d_s) for frames L x d_f, L >= 1.
Var encode_shot(const BoundModel& m, Var frames);

/// Embeddings of all shots of a video stacked as P x d_s.
Var encode_shots(const BoundModel& m, Var features, const ShotBoundaries& cuts);

struct JointReps {
  TokenLayout layout;
  std::vector<Var> video_reps;  // r^n, 1 x d_v each
  std::vector<Var> shot_reps;   // r^n_i stacked, P^n x d_v each
};

/// Runs the shot-level encoder over N videos' shot embeddings (each
/// P^n x d_s, P^n >= 1). Positional indices restart at every video token.
JointReps joint_encode(const BoundModel& m, const std::vector<Var>& shot_embeddings,
                       nn::AttentionTrace* trace = nullptr);

/// p_i = concat(r_i, r) W_p + b_p for every shot; returns P x 1.
Var predict_scores(const BoundModel& m, Var shot_reps, Var video_rep);

/// Broadcasts shot scores (P x 1) to frames (M x 1).
Var expand_scores(Var shot_scores, const ShotBoundaries& cuts);

/// Representation of the score-weighted summary of one video: shot
/// embeddings scaled by their scores, encoded alone (no joint modelling).
Var encode_summary(const BoundModel& m, Var shot_embeddings, Var shot_scores);

/// (1 / (d_v N)) sum_n ||r_sum^n - r^n||^2 over the given pairs.
Var reconstruction_loss(const std::vector<Var>& summary_reps, const std::vector<Var>& video_reps);

/// Mean squared error between predicted and ground-truth frame scores.
Var supervised_loss(Var frame_scores, Var gt_scores);

/// (mean(frame scores) - epsilon)^2.
Var regularization_loss(Var frame_scores, double epsilon);

struct LossWeights {
  double alpha = 0.01;
  double beta = 0.1;
  double epsilon = 0.5;
};

/// L_sup + alpha L_rec + beta L_reg, or without L_sup when unsupervised
/// (`sup` is then ignored and may be empty).
Var total_loss(std::optional<Var> sup, Var rec, Var reg, double alpha, double beta, bool supervised);

/// Every term of one optimisation step over a joint batch.
struct BatchLoss {
  Var total;
  std::optional<Var> sup;
  Var rec;
  Var reg;
  std::vector<Var> frame_scores;  // M^n x 1 per video
};

/// Full training forward for a joint batch. Reconstruction is computed for
/// the first video only. Supervised mode needs gt_scores on every video.
BatchLoss batch_loss(const BoundModel& m, std::span<const VideoRecord* const> videos, const LossWeights& w,
                     bool supervised);

/// Plain values of a forward pass.
struct ModelOutput {
  std::vector<double> shot_scores;
  std::vector<double> frame_scores;
  Tensor video_rep;  // 1 x d_v
  Tensor shot_reps;  // P x d_v
  std::optional<Tensor> summary_rep;
};

/// Single-video inference (joint modelling with N = 1). The video must carry
/// boundaries.
ModelOutput forward_single(const VjmhtParams& params, const VideoRecord& video, bool with_summary = false);

/// Inference for several slots; null slots are skipped. Each video is run
/// on its own, as at test time.
std::vector<ModelOutput> forward_each(const VjmhtParams& params, std::span<const VideoRecord* const> slots);

/// Flat model file: one line of JSON header naming parameters and shapes,
/// then raw little-endian float32 values in header order.
void save_params(const VjmhtParams& params, const std::filesystem::path& path);
VjmhtParams load_params(const std::filesystem::path& path);
std::string serialize_params(const VjmhtParams& params);
VjmhtParams deserialize_params(const std::string& bytes);

}  // namespace vjmht::model
