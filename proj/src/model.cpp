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

#include "vjmht/model.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "le_bytes.hpp"

namespace vjmht::model {

void ModelConfig::validate() const {
  if (d_f % 2 != 0 || d_s % 2 != 0) throw InvalidArgument("d_f and d_s must be even for positional encodings");
  if (d_v == 0) throw InvalidArgument("d_v must be positive");
  f_stack().validate();
  s_stack().validate();
}

VjmhtParams VjmhtParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  VjmhtParams p;
  p.config = config;
  p.shot_token = nn::glorot_uniform(1, config.d_f, rng);
  p.video_token = nn::glorot_uniform(1, config.d_s, rng);
  p.f_stack = nn::EncoderStackParams::init(config.f_stack(), rng);
  p.s_stack = nn::EncoderStackParams::init(config.s_stack(), rng);
  p.proj_fs_w = nn::glorot_uniform(config.d_f, config.d_s, rng);
  p.proj_fs_b = Tensor(1, config.d_s);
  p.proj_sv_w = nn::glorot_uniform(config.d_s, config.d_v, rng);
  p.proj_sv_b = Tensor(1, config.d_v);
  p.score_w = nn::glorot_uniform(2 * config.d_v, 1, rng);
  p.score_b = Tensor(1, 1);
  p.round_to_float();
  return p;
}

namespace {

template <typename Self, typename Fn>
void visit_params(Self& p, const Fn& fn) {
  fn("shot_token", p.shot_token);
  fn("video_token", p.video_token);
  p.f_stack.visit("f_stack.", fn);
  p.s_stack.visit("s_stack.", fn);
  fn("proj_fs.w", p.proj_fs_w);
  fn("proj_fs.b", p.proj_fs_b);
  fn("proj_sv.w", p.proj_sv_w);
  fn("proj_sv.b", p.proj_sv_b);
  fn("score.w", p.score_w);
  fn("score.b", p.score_b);
}

template <typename Params>
BoundModel bind_model(Tape& tape, Params& p) {
  BoundModel m;
  m.config = &p.config;
  m.shot_token = tape.param(p.shot_token);
  m.video_token = tape.param(p.video_token);
  m.f_stack = nn::bind(tape, p.f_stack);
  m.s_stack = nn::bind(tape, p.s_stack);
  m.proj_fs_w = tape.param(p.proj_fs_w);
  m.proj_fs_b = tape.param(p.proj_fs_b);
  m.proj_sv_w = tape.param(p.proj_sv_w);
  m.proj_sv_b = tape.param(p.proj_sv_b);
  m.score_w = tape.param(p.score_w);
  m.score_b = tape.param(p.score_b);
  return m;
}

}  // namespace

void VjmhtParams::visit(const nn::ParamVisitor& fn) { visit_params(*this, fn); }
void VjmhtParams::visit(const nn::ConstParamVisitor& fn) const { visit_params(*this, fn); }

std::vector<Tensor*> VjmhtParams::tensors() {
  std::vector<Tensor*> out;
  visit([&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

void VjmhtParams::set_requires_grad(bool on) {
  for (auto* t : tensors()) t->set_requires_grad(on);
}

void VjmhtParams::zero_grad() {
  for (auto* t : tensors()) t->zero_grad();
}

void VjmhtParams::round_to_float() {
  for (auto* t : tensors()) ad::round_to_float(*t);
}

std::size_t VjmhtParams::parameter_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

BoundModel bind(Tape& tape, VjmhtParams& params) { return bind_model(tape, params); }
BoundModel bind(Tape& tape, const VjmhtParams& params) { return bind_model(tape, params); }

// -- joint layout ---------------------------------------------------------

TokenLayout TokenLayout::from_shot_counts(std::span<const std::size_t> counts) {
  TokenLayout layout;
  std::size_t pos = 0;
  for (std::size_t p : counts) {
    layout.video_token.push_back(pos++);
    auto& shots = layout.shots.emplace_back();
    for (std::size_t i = 0; i < p; ++i) shots.push_back(pos++);
  }
  layout.total = pos;
  return layout;
}

AttentionMask build_joint_mask(const TokenLayout& layout) {
  const std::size_t n = layout.total;
  std::vector<std::uint8_t> bits(n * n, 0);
  auto allow = [&](std::size_t i, std::size_t j) { bits[i * n + j] = 1; };
  for (std::size_t v = 0; v < layout.videos(); ++v) {
    const std::size_t vt = layout.video_token[v];
    allow(vt, vt);
    for (std::size_t s : layout.shots[v]) {
      allow(vt, s);
      allow(s, vt);
      for (std::size_t w = 0; w < layout.videos(); ++w) {
        for (std::size_t other : layout.shots[w]) allow(s, other);
      }
    }
  }
  return AttentionMask(n, std::move(bits));
}

// -- forward --------------------------------------------------------------

Var encode_shot(const BoundModel& m, Var frames) {
  const std::size_t len = frames.rows();
  if (len == 0) throw InvalidArgument("encode_shot: empty shot");
  if (frames.cols() != m.config->d_f) throw DimensionError("encode_shot: frame dim != d_f");
  Tape& tape = *frames.tape;
  Var seq = ad::concat_rows({m.shot_token, frames});
  seq = ad::add(seq, tape.constant(nn::sinusoidal_positional_encoding(len + 1, m.config->d_f)));
  Var enc = nn::encoder_stack(seq, AttentionMask::full(len + 1), m.f_stack);
  return ad::add_row(ad::matmul(ad::slice_rows(enc, 0, 1), m.proj_fs_w), m.proj_fs_b);
}

Var encode_shots(const BoundModel& m, Var features, const ShotBoundaries& cuts) {
  if (cuts.frame_count() != features.rows()) {
    throw InvalidArgument("boundaries cover " + std::to_string(cuts.frame_count()) + " frames, video has " +
                          std::to_string(features.rows()));
  }
  std::vector<Var> shots;
  shots.reserve(cuts.shot_count());
  for (std::size_t i = 0; i < cuts.shot_count(); ++i) {
    shots.push_back(encode_shot(m, ad::slice_rows(features, cuts.begin(i), cuts.length(i))));
  }
  return shots.size() == 1 ? shots.front() : ad::concat_rows(shots);
}

namespace {

// [v; shots] + PE(1 + P), encoded under `mask`, projected to d_v.
Var shot_level(const BoundModel& m, const std::vector<Var>& shot_embeddings, const AttentionMask& mask,
               nn::AttentionTrace* trace) {
  Tape& tape = *shot_embeddings.front().tape;
  std::vector<Var> parts;
  std::size_t total = 0;
  for (const auto& s : shot_embeddings) total += 1 + s.rows();
  Tensor pe(total, m.config->d_s);
  std::size_t row = 0;
  for (const auto& s : shot_embeddings) {
    parts.push_back(m.video_token);
    parts.push_back(s);
    const Tensor block = nn::sinusoidal_positional_encoding(1 + s.rows(), m.config->d_s);
    for (std::size_t r = 0; r < block.rows(); ++r, ++row) {
      for (std::size_t c = 0; c < block.cols(); ++c) pe(row, c) = block(r, c);
    }
  }
  Var seq = ad::add(ad::concat_rows(parts), tape.constant(std::move(pe)));
  Var enc = nn::encoder_stack(seq, mask, m.s_stack, trace);
  return ad::add_row(ad::matmul(enc, m.proj_sv_w), m.proj_sv_b);
}

}  // namespace

JointReps joint_encode(const BoundModel& m, const std::vector<Var>& shot_embeddings, nn::AttentionTrace* trace) {
  if (shot_embeddings.empty()) throw InvalidArgument("joint_encode: no videos");
  std::vector<std::size_t> counts;
  for (const auto& s : shot_embeddings) {
    if (s.rows() == 0) throw InvalidArgument("joint_encode: video without shots");
    if (s.cols() != m.config->d_s) throw DimensionError("joint_encode: shot embedding dim != d_s");
    counts.push_back(s.rows());
  }
  JointReps out;
  out.layout = TokenLayout::from_shot_counts(counts);
  Var reps = shot_level(m, shot_embeddings, build_joint_mask(out.layout), trace);
  for (std::size_t v = 0; v < counts.size(); ++v) {
    const std::size_t vt = out.layout.video_token[v];
    out.video_reps.push_back(ad::slice_rows(reps, vt, 1));
    out.shot_reps.push_back(ad::slice_rows(reps, vt + 1, counts[v]));
  }
  return out;
}

Var predict_scores(const BoundModel& m, Var shot_reps, Var video_rep) {
  const std::size_t p = shot_reps.rows();
  Var video = ad::gather_rows(video_rep, std::vector<std::size_t>(p, 0));
  Var cat = ad::concat_cols({shot_reps, video});
  return ad::add_row(ad::matmul(cat, m.score_w), m.score_b);
}

Var expand_scores(Var shot_scores, const ShotBoundaries& cuts) {
  if (shot_scores.rows() != cuts.shot_count() || shot_scores.cols() != 1) {
    throw DimensionError("expand_scores: " + std::to_string(shot_scores.rows()) + " scores for " +
                         std::to_string(cuts.shot_count()) + " shots");
  }
  return ad::gather_rows(shot_scores, cuts.frame_to_shot());
}

Var encode_summary(const BoundModel& m, Var shot_embeddings, Var shot_scores) {
  if (shot_scores.rows() != shot_embeddings.rows() || shot_scores.cols() != 1) {
    throw DimensionError("encode_summary: scores and shot embeddings are not aligned");
  }
  Var weighted = ad::mul_rows(shot_embeddings, shot_scores);
  Var reps = shot_level(m, {weighted}, AttentionMask::full(1 + weighted.rows()), nullptr);
  return ad::slice_rows(reps, 0, 1);
}

Var reconstruction_loss(const std::vector<Var>& summary_reps, const std::vector<Var>& video_reps) {
  if (summary_reps.size() != video_reps.size() || summary_reps.empty()) {
    throw DimensionError("reconstruction_loss: unmatched representation lists");
  }
  // mse over the stacked N x d_v matrices is exactly (1/(d_v N)) sum ||.||^2
  return ad::mse(ad::concat_rows(summary_reps), ad::concat_rows(video_reps));
}

Var supervised_loss(Var frame_scores, Var gt_scores) {
  if (frame_scores.rows() != gt_scores.rows() || frame_scores.cols() != gt_scores.cols()) {
    throw DimensionError("supervised_loss: " + std::to_string(frame_scores.rows()) + " predictions vs " +
                         std::to_string(gt_scores.rows()) + " ground-truth scores");
  }
  return ad::mse(frame_scores, gt_scores);
}

Var regularization_loss(Var frame_scores, double epsilon) {
  return ad::square(ad::add_scalar(ad::mean(frame_scores), -epsilon));
}

Var total_loss(std::optional<Var> sup, Var rec, Var reg, double alpha, double beta, bool supervised) {
  if (alpha < 0.0 || beta < 0.0) throw InvalidArgument("loss weights must be non-negative");
  Var rest = ad::add(ad::scale(rec, alpha), ad::scale(reg, beta));
  if (!supervised) return rest;
  if (!sup) throw InvalidArgument("supervised total loss needs L_sup");
  return ad::add(*sup, rest);
}

BatchLoss batch_loss(const BoundModel& m, std::span<const VideoRecord* const> videos, const LossWeights& w,
                     bool supervised) {
  if (videos.empty()) throw InvalidArgument("batch_loss: empty batch");
  Tape& tape = *m.shot_token.tape;
  std::vector<Var> embeddings;
  for (const auto* v : videos) {
    if (!v->boundaries) throw InvalidArgument("video " + v->id + " has no shot boundaries");
    if (supervised && !v->gt_scores) throw InvalidArgument("video " + v->id + " has no ground-truth scores");
    embeddings.push_back(encode_shots(m, tape.constant(v->features), *v->boundaries));
  }
  JointReps joint = joint_encode(m, embeddings);

  BatchLoss out;
  std::vector<Var> sups, regs;
  Var first_scores;
  const double inv_n = 1.0 / static_cast<double>(videos.size());
  for (std::size_t n = 0; n < videos.size(); ++n) {
    Var scores = predict_scores(m, joint.shot_reps[n], joint.video_reps[n]);
    if (n == 0) first_scores = scores;
    Var frames = expand_scores(scores, *videos[n]->boundaries);
    out.frame_scores.push_back(frames);
    regs.push_back(regularization_loss(frames, w.epsilon));
    if (supervised) sups.push_back(supervised_loss(frames, tape.constant(Tensor::column(*videos[n]->gt_scores))));
  }
  auto average = [&](const std::vector<Var>& terms) {
    Var acc = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
    return terms.size() == 1 ? acc : ad::scale(acc, inv_n);
  };
  out.reg = average(regs);
  if (supervised) out.sup = average(sups);

  Var summary = encode_summary(m, embeddings.front(), first_scores);
  out.rec = reconstruction_loss({summary}, {joint.video_reps.front()});
  out.total = total_loss(out.sup, out.rec, out.reg, w.alpha, w.beta, supervised);
  return out;
}

ModelOutput forward_single(const VjmhtParams& params, const VideoRecord& video, bool with_summary) {
  if (!video.boundaries) throw InvalidArgument("video " + video.id + " has no shot boundaries");
  Tape tape;
  const BoundModel m = bind(tape, params);
  Var emb = encode_shots(m, tape.constant(video.features), *video.boundaries);
  JointReps joint = joint_encode(m, {emb});
  Var scores = predict_scores(m, joint.shot_reps.front(), joint.video_reps.front());
  Var frames = expand_scores(scores, *video.boundaries);

  ModelOutput out;
  out.shot_scores = scores.value().values();
  out.frame_scores = frames.value().values();
  out.video_rep = joint.video_reps.front().value();
  out.shot_reps = joint.shot_reps.front().value();
  if (with_summary) out.summary_rep = encode_summary(m, emb, scores).value();
  return out;
}

std::vector<ModelOutput> forward_each(const VjmhtParams& params, std::span<const VideoRecord* const> slots) {
  std::vector<ModelOutput> out;
  for (const auto* v : slots) {
    if (v) out.push_back(forward_single(params, *v));
  }
  return out;
}

// -- serialization ----------------------------------------------------------

namespace {

constexpr const char* kFormat = "vjmht-params";

nlohmann::json config_json(const ModelConfig& c) {
  return {{"d_f", c.d_f},         {"d_s", c.d_s},       {"d_v", c.d_v},
          {"f_layers", c.f_layers}, {"f_heads", c.f_heads}, {"f_ffn", c.f_ffn},
          {"s_layers", c.s_layers}, {"s_heads", c.s_heads}, {"s_ffn", c.s_ffn}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_f = j.at("d_f");
  c.d_s = j.at("d_s");
  c.d_v = j.at("d_v");
  c.f_layers = j.at("f_layers");
  c.f_heads = j.at("f_heads");
  c.f_ffn = j.at("f_ffn");
  c.s_layers = j.at("s_layers");
  c.s_heads = j.at("s_heads");
  c.s_ffn = j.at("s_ffn");
  return c;
}

}  // namespace

std::string serialize_params(const VjmhtParams& params) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["config"] = config_json(params.config);
  auto list = nlohmann::json::array();
  params.visit([&](const std::string& name, const Tensor& t) {
    list.push_back({{"name", name}, {"shape", {t.rows(), t.cols()}}});
  });
  header["params"] = std::move(list);

  std::string out = header.dump();
  out.push_back('\n');
  params.visit([&](const std::string&, const Tensor& t) {
    for (double v : t.data()) detail::put_f32(out, static_cast<float>(v));
  });
  return out;
}

VjmhtParams deserialize_params(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw FormatError("model file: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: bad header JSON: ") + e.what());
  }
  if (header.value("format", "") != kFormat || header.value("version", 0) != 1) {
    throw FormatError("model file: unsupported format or version");
  }
  // Shapes come from the config; the header list must agree with them.
  VjmhtParams p = VjmhtParams::init(config_from_json(header.at("config")), 0);
  const auto& list = header.at("params");
  std::size_t idx = 0;
  std::size_t off = nl + 1;
  p.visit([&](const std::string& name, Tensor& t) {
    if (idx >= list.size()) throw FormatError("model file: header lists too few parameters");
    const auto& e = list[idx++];
    if (e.at("name") != name || e.at("shape")[0] != t.rows() || e.at("shape")[1] != t.cols()) {
      throw FormatError("model file: parameter " + std::to_string(idx - 1) + " does not match " + name);
    }
    const std::size_t need = off + 4 * t.size();
    if (need > bytes.size()) {
      throw FormatError("model file truncated at byte " + std::to_string(bytes.size()) + ", expected at least " +
                        std::to_string(need));
    }
    for (double& v : t.data()) {
      v = static_cast<double>(detail::get_f32(bytes, off));
      off += 4;
    }
  });
  if (idx != list.size()) throw FormatError("model file: header lists extra parameters");
  if (off != bytes.size()) {
    throw FormatError("model file has " + std::to_string(bytes.size() - off) + " trailing bytes");
  }
  for (auto* t : p.tensors()) {
    if (!t->all_finite()) throw NumericError("model file contains non-finite values");
  }
  return p;
}

void save_params(const VjmhtParams& params, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  const std::string bytes = serialize_params(params);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

VjmhtParams load_params(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_params(ss.str());
}

}  // namespace vjmht::model
