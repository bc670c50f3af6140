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

#include "vjmht/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace vjmht::ad {

// -- Tensor ---------------------------------------------------------------

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("tensor data has " + std::to_string(data_.size()) +
                         " values, shape needs " + std::to_string(rows * cols));
  }
}

Tensor Tensor::row(std::vector<double> data) {
  const auto n = data.size();
  return Tensor(1, n, std::move(data));
}

Tensor Tensor::column(std::vector<double> data) {
  const auto n = data.size();
  return Tensor(n, 1, std::move(data));
}

void Tensor::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on) {
    grad_.assign(data_.size(), 0.0);
  } else {
    grad_.clear();
  }
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_str() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

// -- AttentionMask --------------------------------------------------------

AttentionMask::AttentionMask(std::size_t n, std::vector<std::uint8_t> allowed)
    : n_(n), bits_(std::move(allowed)) {
  if (bits_.size() != n * n) throw DimensionError("attention mask must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (!bits_[i * n + i]) {
      throw InvalidArgument("attention mask row " + std::to_string(i) + " hides its own token");
    }
  }
}

AttentionMask AttentionMask::full(std::size_t n) {
  return AttentionMask(n, std::vector<std::uint8_t>(n * n, 1));
}

AttentionMask AttentionMask::permuted(std::span<const std::size_t> perm) const {
  // New token k is old token perm[k].
  if (perm.size() != n_) throw DimensionError("permutation size mismatch");
  std::vector<std::uint8_t> out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i * n_ + j] = bits_[perm[i] * n_ + perm[j]];
  }
  return AttentionMask(n_, std::move(out));
}

// -- Tape -----------------------------------------------------------------

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::push(const char* op, Tensor value, bool needs_grad, BackwardFn fn, Tensor* bound) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  if (nodes_.size() >= UINT32_MAX) throw Error("tape overflow");
  Node node;
  node.needs_grad = needs_grad;
  if (needs_grad) node.grad.assign(value.size(), 0.0);
  node.value = std::move(value);
  node.backward = std::move(fn);
  node.bound = bound;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) { return push("constant", std::move(value), false, nullptr, nullptr); }

Var Tape::param(Tensor& param) {
  Tensor copy(param.rows(), param.cols(), std::vector<double>(param.data().begin(), param.data().end()));
  const bool g = param.requires_grad();
  return push("param", std::move(copy), g, nullptr, g ? &param : nullptr);
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
  bool needs = false;
  for (const auto& p : parents) {
    if (p.tape != this) throw Error(std::string(op) + ": operand recorded on another tape");
    needs = needs || nodes_[p.id].needs_grad;
  }
  return push(op, std::move(value), needs, needs ? std::move(fn) : nullptr, nullptr);
}

Var Tape::record(const char* op, Tensor value, const std::vector<Var>& parents, BackwardFn fn) {
  bool needs = false;
  for (const auto& p : parents) {
    if (p.tape != this) throw Error(std::string(op) + ": operand recorded on another tape");
    needs = needs || nodes_[p.id].needs_grad;
  }
  return push(op, std::move(value), needs, needs ? std::move(fn) : nullptr, nullptr);
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw Error("backward: loss belongs to another tape");
  const auto& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DimensionError("backward requires a scalar loss, got " + lv.shape_str());
  }
  if (backward_done_) throw Error("backward already run on this tape");
  backward_done_ = true;
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].grad[0] = 1.0;
  for (std::int64_t i = loss.id; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.needs_grad) continue;
    for (double g : node.grad) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient during backward");
    }
    if (node.backward) node.backward(*this, static_cast<std::uint32_t>(i));
    if (node.bound) {
      auto dst = node.bound->grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
    }
  }
}

// -- helpers --------------------------------------------------------------

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw DimensionError(std::string(op) + ": " + what);
}

std::string shapes(const Tensor& a, const Tensor& b) { return a.shape_str() + " vs " + b.shape_str(); }

// C += A * B, all row-major; A is m x k, B is k x n.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = a[i * k + t];
      if (av == 0.0) continue;
      const double* brow = b + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul", "inner dimensions differ " + shapes(a, b));
  Tensor c(a.rows(), b.cols());
  gemm_acc(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

void round_to_float(Tensor& t) {
  for (double& v : t.data()) v = static_cast<double>(static_cast<float>(v));
}

// -- ops ------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& tp = *a.tape;
  Tensor out = matmul(a.value(), b.value());
  return tp.record("matmul", std::move(out), {a, b}, [a, b](Tape& t, std::uint32_t self) {
    const auto& av = t.value(a.id);
    const auto& bv = t.value(b.id);
    const auto& g = t.grad(self);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    if (t.needs_grad(a.id)) {
      // dA = dC * B^T
      auto& ga = t.grad(a.id);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * bv[p * n + j];
          ga[i * k + p] += s;
        }
      }
    }
    if (t.needs_grad(b.id)) {
      // dB = A^T * dC
      auto& gb = t.grad(b.id);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av_ip = av[i * k + p];
          if (av_ip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av_ip * g[i * n + j];
        }
      }
    }
  });
}

Var transpose(Var a) {
  const auto& av = a.value();
  Tensor out(av.cols(), av.rows());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    for (std::size_t j = 0; j < av.cols(); ++j) out(j, i) = av(i, j);
  }
  return a.tape->record("transpose", std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& av = t.value(a.id);
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    const std::size_t r = av.rows(), c = av.cols();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
    }
  });
}

namespace {

Var add_impl(Var a, Var b, double sign, const char* op) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require(av.same_shape(bv), op, shapes(av, bv));
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * bv[i];
  return a.tape->record(op, std::move(out), {a, b}, [a, b, sign](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    if (t.needs_grad(a.id)) {
      auto& ga = t.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs_grad(b.id)) {
      auto& gb = t.grad(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return add_impl(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return add_impl(a, b, -1.0, "sub"); }

Var add_row(Var a, Var b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require(bv.rows() == 1 && bv.cols() == av.cols(), "add_row", shapes(av, bv));
  Tensor out = av;
  const std::size_t n = av.rows(), d = av.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out(i, j) += bv[j];
  }
  return a.tape->record("add_row", std::move(out), {a, b}, [a, b, n, d](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    if (t.needs_grad(a.id)) {
      auto& ga = t.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs_grad(b.id)) {
      auto& gb = t.grad(b.id);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
      }
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  return a.tape->record("scale", std::move(out), {a}, [a, s](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.data()) v += s;
  return a.tape->record("add_scalar", std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var mul_rows(Var a, Var s) {
  const auto& av = a.value();
  const auto& sv = s.value();
  require(sv.cols() == 1 && sv.rows() == av.rows(), "mul_rows", shapes(av, sv));
  Tensor out = av;
  const std::size_t n = av.rows(), d = av.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out(i, j) *= sv[i];
  }
  return a.tape->record("mul_rows", std::move(out), {a, s}, [a, s, n, d](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    const auto& av = t.value(a.id);
    const auto& sv = t.value(s.id);
    if (t.needs_grad(a.id)) {
      auto& ga = t.grad(a.id);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ga[i * d + j] += sv[i] * g[i * d + j];
      }
    }
    if (t.needs_grad(s.id)) {
      auto& gs = t.grad(s.id);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += av[i * d + j] * g[i * d + j];
        gs[i] += acc;
      }
    }
  });
}

Var relu(Var a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return a.tape->record("relu", std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    const auto& av = t.value(a.id);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > 0.0) ga[i] += g[i];
    }
  });
}

Var square(Var a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = v * v;
  return a.tape->record("square", std::move(out), {a}, [a](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    const auto& av = t.value(a.id);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * av[i] * g[i];
  });
}

Var softmax(Var a, std::span<const std::uint8_t> allowed) {
  const auto& av = a.value();
  const std::size_t n = av.rows(), m = av.cols();
  const bool masked = !allowed.empty();
  if (masked) require(allowed.size() == n * m, "softmax", "mask size must match logits " + av.shape_str());
  auto ok = [&](std::size_t i, std::size_t j) { return !masked || allowed[i * m + j] != 0; };
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (ok(i, j)) mx = std::max(mx, av(i, j));
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw InvalidArgument("softmax: row " + std::to_string(i) + " is fully masked");
    }
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (ok(i, j)) {
        out(i, j) = std::exp(av(i, j) - mx);
        z += out(i, j);
      }
    }
    for (std::size_t j = 0; j < m; ++j) out(i, j) /= z;
  }
  return a.tape->record("softmax", std::move(out), {a}, [a, n, m](Tape& t, std::uint32_t self) {
    // dx_ij = y_ij * (g_ij - sum_k g_ik y_ik); masked y are 0 so they get 0.
    const auto& y = t.value(self);
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
      for (std::size_t j = 0; j < m; ++j) ga[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  require(d >= 2, "layer_norm", "needs at least 2 features per row");
  require(gain.value().rows() == 1 && gain.value().cols() == d, "layer_norm", "gain shape");
  require(bias.value().rows() == 1 && bias.value().cols() == d, "layer_norm", "bias shape");
  if (!(eps > 0.0)) throw InvalidArgument("layer_norm: eps must be positive");

  const auto& gv = gain.value();
  const auto& bv = bias.value();
  Tensor out(n, d);
  // Cache normalized values and inverse std for backward.
  auto xhat = std::make_shared<std::vector<double>>(n * d);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xv(i, j);
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xv(i, j) - mu;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xv(i, j) - mu) * is;
      (*xhat)[i * d + j] = h;
      out(i, j) = h * gv[j] + bv[j];
    }
  }
  return x.tape->record(
      "layer_norm", std::move(out), {x, gain, bias},
      [x, gain, bias, n, d, xhat, inv_std](Tape& t, std::uint32_t self) {
        const auto& g = t.grad(self);
        const auto& gv = t.value(gain.id);
        if (t.needs_grad(gain.id)) {
          auto& gg = t.grad(gain.id);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) gg[j] += g[i * d + j] * (*xhat)[i * d + j];
          }
        }
        if (t.needs_grad(bias.id)) {
          auto& gb = t.grad(bias.id);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
          }
        }
        if (t.needs_grad(x.id)) {
          auto& gx = t.grad(x.id);
          const double inv_d = 1.0 / static_cast<double>(d);
          for (std::size_t i = 0; i < n; ++i) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              const double dh = g[i * d + j] * gv[j];
              mean_dh += dh;
              mean_dh_h += dh * (*xhat)[i * d + j];
            }
            mean_dh *= inv_d;
            mean_dh_h *= inv_d;
            for (std::size_t j = 0; j < d; ++j) {
              const double dh = g[i * d + j] * gv[j];
              gx[i * d + j] += (*inv_std)[i] * (dh - mean_dh - (*xhat)[i * d + j] * mean_dh_h);
            }
          }
        }
      });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  const std::size_t d = parts.front().cols();
  std::size_t n = 0;
  for (const auto& p : parts) {
    require(p.cols() == d, "concat_rows", "column counts differ");
    n += p.rows();
  }
  Tensor out(n, d);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const auto src = p.value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(off));
    off += src.size();
  }
  return parts.front().tape->record("concat_rows", std::move(out), parts, [parts](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t sz = t.value(p.id).size();
      if (t.needs_grad(p.id)) {
        auto& gp = t.grad(p.id);
        for (std::size_t k = 0; k < sz; ++k) gp[k] += g[off + k];
      }
      off += sz;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t n = parts.front().rows();
  std::size_t d = 0;
  for (const auto& p : parts) {
    require(p.rows() == n, "concat_cols", "row counts differ");
    d += p.cols();
  }
  Tensor out(n, d);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const auto& pv = p.value();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < pv.cols(); ++j) out(i, off + j) = pv(i, j);
    }
    off += pv.cols();
  }
  return parts.front().tape->record("concat_cols", std::move(out), parts, [parts, n, d](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t c = t.value(p.id).cols();
      if (t.needs_grad(p.id)) {
        auto& gp = t.grad(p.id);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < c; ++j) gp[i * c + j] += g[i * d + off + j];
        }
      }
      off += c;
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  const auto& av = a.value();
  require(begin + count <= av.rows() && count > 0, "slice_rows", "range out of bounds");
  const std::size_t d = av.cols();
  std::vector<double> data(av.data().begin() + static_cast<std::ptrdiff_t>(begin * d),
                           av.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * d));
  return a.tape->record("slice_rows", Tensor(count, d, std::move(data)), {a},
                        [a, begin, d](Tape& t, std::uint32_t self) {
                          const auto& g = t.grad(self);
                          auto& ga = t.grad(a.id);
                          for (std::size_t k = 0; k < g.size(); ++k) ga[begin * d + k] += g[k];
                        });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const auto& av = a.value();
  require(begin + count <= av.cols() && count > 0, "slice_cols", "range out of bounds");
  const std::size_t n = av.rows(), d = av.cols();
  Tensor out(n, count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < count; ++j) out(i, j) = av(i, begin + j);
  }
  return a.tape->record("slice_cols", std::move(out), {a}, [a, begin, count, n, d](Tape& t, std::uint32_t self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < count; ++j) ga[i * d + begin + j] += g[i * count + j];
    }
  });
}

Var gather_rows(Var a, std::vector<std::size_t> index) {
  const auto& av = a.value();
  const std::size_t d = av.cols();
  if (index.empty()) throw DimensionError("gather_rows: empty index");
  Tensor out(index.size(), d);
  for (std::size_t r = 0; r < index.size(); ++r) {
    require(index[r] < av.rows(), "gather_rows", "row index out of range");
    for (std::size_t j = 0; j < d; ++j) out(r, j) = av(index[r], j);
  }
  return a.tape->record("gather_rows", std::move(out), {a},
                        [a, d, index = std::move(index)](Tape& t, std::uint32_t self) {
                          const auto& g = t.grad(self);
                          auto& ga = t.grad(a.id);
                          for (std::size_t r = 0; r < index.size(); ++r) {
                            for (std::size_t j = 0; j < d; ++j) ga[index[r] * d + j] += g[r * d + j];
                          }
                        });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape->record("sum", Tensor::scalar(s), {a}, [a](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad(a.id)) v += g;
  });
}

Var mean(Var a) {
  const double inv = 1.0 / static_cast<double>(a.value().size());
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape->record("mean", Tensor::scalar(s * inv), {a}, [a, inv](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0] * inv;
    for (double& v : t.grad(a.id)) v += g;
  });
}

Var mse(Var a, Var b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require(av.same_shape(bv), "mse", shapes(av, bv));
  const double inv = 1.0 / static_cast<double>(av.size());
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    s += d * d;
  }
  return a.tape->record("mse", Tensor::scalar(s * inv), {a, b}, [a, b, inv](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    const auto& av = t.value(a.id);
    const auto& bv = t.value(b.id);
    if (t.needs_grad(a.id)) {
      auto& ga = t.grad(a.id);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * inv * (av[i] - bv[i]) * g;
    }
    if (t.needs_grad(b.id)) {
      auto& gb = t.grad(b.id);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= 2.0 * inv * (av[i] - bv[i]) * g;
    }
  });
}

}  // namespace vjmht::ad
