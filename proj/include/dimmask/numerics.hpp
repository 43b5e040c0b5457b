// Copyright 2026 The dimmask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIMMASK_NUMERICS_HPP
#define DIMMASK_NUMERICS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimmask {

/// Bad user input: malformed files, unknown flags, out-of-range ids.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running an otherwise valid request (e.g. divergence).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kTrain, kEval };

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out = a * b, with a fixed summation order.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b.
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T.
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);

/// Logistic function; stable over the whole finite range.
double sigmoid(double x);

/// ln(1 + e^x) as max(x, 0) + ln(1 + e^-|x|).
double softplus(double x);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based uniform source. A draw depends only on
/// (seed, key, counter), so streams can be replayed from any position and
/// keyed streams never interfere with each other.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t key, std::uint64_t counter = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double next_uniform();
  /// Standard normal (Box-Muller, consumes two draws).
  double next_normal();
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t next_below(std::uint64_t n);

  bool operator==(const RngStream&) const = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t base_ = 0;
};

/// Draws n uniforms in [0, 1) and advances the stream counter by n.
std::vector<double> uniform_draws(RngStream& rng, std::size_t n);

/// Derives a child seed; used for per-run and per-layer stream keys.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace dimmask

#endif  // DIMMASK_NUMERICS_HPP
