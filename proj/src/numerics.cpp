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

#include "dimmask/numerics.hpp"

#include <cmath>
#include <numbers>

namespace dimmask {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

void check_shape(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("matrix shape mismatch in ") + what);
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check_shape(a.cols() == b.rows(), "matmul");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
  else out.fill(0.0);
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    const auto ar = a.row(i);
    for (std::size_t k = 0; k < ar.size(); ++k) {
      const double s = ar[k];
      if (s == 0.0) continue;  // ReLU activations are mostly zero
      const double* br = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += s * br[j];
    }
  }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check_shape(a.rows() == b.rows(), "matmul_at_b");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out = Matrix(a.cols(), b.cols());
  else out.fill(0.0);
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto ar = a.row(r);
    const double* br = b.row(r).data();
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const double s = ar[i];
      if (s == 0.0) continue;
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += s * br[j];
    }
  }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_shape(a.cols() == b.cols(), "matmul_a_bt");
  Matrix bt(b.cols(), b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) bt(c, r) = b(r, c);
  matmul(a, bt, out);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed + kGolden * (mix64(salt) | 1));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t key, std::uint64_t counter)
    : seed_(seed), key_(key), counter_(counter), base_(mix64(seed ^ mix64(key + kGolden))) {}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(base_ + (c + 1) * kGolden);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const double u1 = 1.0 - next_uniform();  // (0, 1]
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  // Lemire-style multiply-shift; the bias is below 2^-64 * n.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::vector<double> uniform_draws(RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.next_uniform();
  return out;
}

}  // namespace dimmask
