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

#include "vjmht/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace vjmht::gradcheck {

model::ModelConfig GradcheckConfig::toy_model() {
  model::ModelConfig c;
  c.d_f = 8;
  c.d_s = 6;
  c.d_v = 6;
  c.f_layers = 1;
  c.f_heads = 2;
  c.f_ffn = 16;
  c.s_layers = 2;
  c.s_heads = 2;
  c.s_ffn = 12;
  return c;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

std::vector<VideoRecord> toy_videos(std::size_t d_f, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VideoRecord> out(2);
  for (std::size_t n = 0; n < out.size(); ++n) {
    auto& v = out[n];
    v.id = "toy_" + std::to_string(n);
    v.features = ad::Tensor(6, d_f);
    for (double& x : v.features.data()) x = gauss(rng);
    v.gt_scores = std::vector<double>(6);
    for (double& s : *v.gt_scores) s = unit(rng);
    v.boundaries = ShotBoundaries({0, 3, 6});
  }
  return out;
}

double loss_value(const model::VjmhtParams& params, const std::vector<const VideoRecord*>& batch,
                  const model::LossWeights& w, bool supervised) {
  ad::Tape tape;
  const auto bound = model::bind(tape, params);
  return model::batch_loss(bound, batch, w, supervised).total.value()[0];
}

}  // namespace

GradcheckResult run(const GradcheckConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto params = model::VjmhtParams::init(cfg.model, cfg.seed);
  const auto videos = toy_videos(cfg.model.d_f, rng);
  const std::vector<const VideoRecord*> batch{&videos[0], &videos[1]};

  params.set_requires_grad(true);
  params.zero_grad();
  {
    ad::Tape tape;
    const auto bound = model::bind(tape, params);
    tape.backward(model::batch_loss(bound, batch, cfg.weights, cfg.supervised).total);
  }

  std::vector<std::string> names;
  std::vector<ad::Tensor*> tensors;
  params.visit([&](const std::string& name, ad::Tensor& t) {
    names.push_back(name);
    tensors.push_back(&t);
  });
  std::vector<std::size_t> offsets{0};
  for (const auto* t : tensors) offsets.push_back(offsets.back() + t->size());
  std::uniform_int_distribution<std::size_t> pick(0, offsets.back() - 1);

  GradcheckResult res;
  for (std::size_t c = 0; c < cfg.coordinates; ++c) {
    const std::size_t flat = pick(rng);
    const auto k = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin()) - 1;
    const std::size_t idx = flat - offsets[k];
    ad::Tensor& t = *tensors[k];
    const double analytic = t.grad()[idx];
    const double orig = t[idx];
    t[idx] = orig + cfg.step;
    const double up = loss_value(params, batch, cfg.weights, cfg.supervised);
    t[idx] = orig - cfg.step;
    const double down = loss_value(params, batch, cfg.weights, cfg.supervised);
    t[idx] = orig;
    const double numeric = (up - down) / (2.0 * cfg.step);

    const double rel = relative_error(analytic, numeric);
    res.max_absolute_error = std::max(res.max_absolute_error, std::abs(analytic - numeric));
    if (res.worst.empty() || rel > res.max_relative_error) {
      res.max_relative_error = rel;
      res.worst = names[k] + "[" + std::to_string(idx) + "]";
    }
    ++res.checked;
  }
  return res;
}

}  // namespace vjmht::gradcheck
