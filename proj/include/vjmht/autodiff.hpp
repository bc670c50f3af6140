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

// Dense row-major matrices with a reverse-mode gradient tape.
//
// Every quantity is a 2-D matrix; vectors are 1 x d rows and scalars are
// 1 x 1. Values are double precision throughout so that finite-difference
// checks stay meaningful.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vjmht/error.hpp"

namespace vjmht::ad {

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor row(std::vector<double> data);
  static Tensor column(std::vector<double> data);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  /// Marks the tensor as a learnable leaf; allocates a zeroed gradient.
  void set_requires_grad(bool on);
  bool requires_grad() const { return requires_grad_; }
  std::span<double> grad() { return grad_; }
  std::span<const double> grad() const { return grad_; }
  void zero_grad();

  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

/// Row-wise boolean attention pattern; allowed(i, j) means token i may
/// attend to token j.
class AttentionMask {
 public:
  AttentionMask() = default;
  /// Validates that every row has an allowed entry and the diagonal is set.
  AttentionMask(std::size_t n, std::vector<std::uint8_t> allowed);

  static AttentionMask full(std::size_t n);

  std::size_t size() const { return n_; }
  bool allowed(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }

  std::span<const std::uint8_t> bits() const { return bits_; }

  AttentionMask permuted(std::span<const std::size_t> perm) const;

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

class Tape;

/// Handle to a node recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records a value that never receives gradient.
  Var constant(Tensor value);

  /// Records a view of `param`. If it requires grad, backward() adds the
  /// gradient into param.grad(). The tensor must outlive the tape.
  Var param(Tensor& param);
  /// Read-only parameters are recorded as constants.
  Var param(const Tensor& param) { return constant(param); }

  /// Records the result of an op. `parents` determine whether the node
  /// carries a gradient buffer.
  Var record(const char* op, Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(const char* op, Tensor value, const std::vector<Var>& parents, BackwardFn fn);

  /// Reverse sweep from a 1x1 loss. Each node is visited once, in reverse
  /// order of recording.
  void backward(Var loss);

  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool needs_grad(std::uint32_t id) const { return nodes_[id].needs_grad; }
  /// Gradient buffer of a node (empty if it carries none).
  std::vector<double>& grad(std::uint32_t id) { return nodes_[id].grad; }
  const std::vector<double>& grad(std::uint32_t id) const { return nodes_[id].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    bool needs_grad = false;
    BackwardFn backward;
    Tensor* bound = nullptr;
  };

  Var push(const char* op, Tensor value, bool needs_grad, BackwardFn fn, Tensor* bound);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// -- ops ------------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// a[n x d] + b[1 x d], b added to every row.
Var add_row(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
/// a[n x d] with row i multiplied by s[i] (s is n x 1).
Var mul_rows(Var a, Var s);
Var relu(Var a);
Var square(Var a);
/// Row softmax with max subtraction. `allowed` is either empty (no mask) or
/// holds rows*cols flags; disallowed entries get weight exactly 0.
Var softmax(Var a, std::span<const std::uint8_t> allowed = {});
inline Var softmax(Var a, const AttentionMask& mask) { return softmax(a, mask.bits()); }
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, std::vector<std::size_t> index);
Var sum(Var a);
Var mean(Var a);
/// Mean of squared differences.
Var mse(Var a, Var b);

// -- plain helpers --------------------------------------------------------

/// Naive product used by tests and non-differentiable code.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Rounds every entry to the nearest single-precision value.
void round_to_float(Tensor& t);

}  // namespace vjmht::ad
