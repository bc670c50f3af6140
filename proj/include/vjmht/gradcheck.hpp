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

// End-to-end finite-difference check of the training loss.

#include <cstddef>
#include <cstdint>
#include <string>

#include "vjmht/model.hpp"

namespace vjmht::gradcheck {

struct GradcheckConfig {
  std::uint64_t seed = 0;
  std::size_t coordinates = 256;  // sampled parameter entries
  double step = 1e-5;             // central-difference h
  bool supervised = true;
  model::ModelConfig model = toy_model();
  model::LossWeights weights{};

  /// d_f = 8, d_s = d_v = 6, two heads, one F layer and two S layers.
  static model::ModelConfig toy_model();
};

struct GradcheckResult {
  std::size_t checked = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::string worst;  // "<param name>[index]"
};

/// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Two videos of two 3-frame shots each, random features and gt. Compares
/// the tape gradient of total_loss with central differences on randomly
/// sampled coordinates across all parameters.
GradcheckResult run(const GradcheckConfig& cfg);

}  // namespace vjmht::gradcheck
