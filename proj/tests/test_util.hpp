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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "vjmht/autodiff.hpp"

namespace vjmht::testing {

inline ad::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  ad::Tensor t(rows, cols);
  for (double& x : t.data()) x = g(rng);
  return t;
}

inline double max_abs_diff(const ad::Tensor& a, const ad::Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

using OpFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Loss = mse(op(inputs), fixed random target). Returns the largest relative
// error between tape gradients and central differences over every input
// coordinate.
inline double max_grad_error(std::vector<ad::Tensor>& inputs, const OpFn& op, std::uint64_t seed = 1,
                             double h = 1e-6) {
  std::mt19937_64 rng(seed);
  ad::Tensor target;
  auto loss_of = [&](bool with_grad) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (auto& t : inputs) vars.push_back(with_grad ? tape.param(t) : tape.param(std::as_const(t)));
    const ad::Var out = op(tape, vars);
    if (target.empty()) target = random_tensor(out.rows(), out.cols(), rng);
    const ad::Var loss = ad::mse(out, tape.constant(target));
    if (with_grad) tape.backward(loss);
    return loss.value()[0];
  };
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  loss_of(true);
  double worst = 0.0;
  for (auto& t : inputs) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + h;
      const double up = loss_of(false);
      t[i] = orig - h;
      const double down = loss_of(false);
      t[i] = orig;
      const double numeric = (up - down) / (2 * h);
      const double analytic = t.grad()[i];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
  }
  return worst;
}

}  // namespace vjmht::testing
