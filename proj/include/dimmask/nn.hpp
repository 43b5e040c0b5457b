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

#ifndef DIMMASK_NN_HPP
#define DIMMASK_NN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dimmask/numerics.hpp"

namespace dimmask {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First and second moment estimates for one parameter block.
struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update; step is 1-based.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
               const AdamConfig& config, std::uint64_t step);

struct EmbeddingTable {
  std::size_t vocab = 0;
  std::size_t dim = 0;
  Matrix weights;

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t vocab, std::size_t dim) : vocab(vocab), dim(dim), weights(vocab, dim) {}

  /// Uniform in [-1/sqrt(dim), 1/sqrt(dim)].
  void init_uniform(RngStream& rng);
};

/// Row gather. Throws InputError naming `feature` and the offending row.
Matrix embed_forward(const EmbeddingTable& table, std::span<const std::uint32_t> ids,
                     const std::string& feature = "");

/// Scatter-add of `grad_out` rows into `grad_table`; duplicate ids accumulate.
void embed_backward(std::span<const std::uint32_t> ids, const Matrix& grad_out, Matrix& grad_table);

enum class Activation { kNone, kRelu };

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Matrix weights;  // in x out
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim)
      : in_dim(in_dim), out_dim(out_dim), weights(in_dim, out_dim), bias(out_dim, 0.0) {}

  /// Glorot-uniform weights, zero bias.
  void init_glorot(RngStream& rng);
};

Matrix dense_forward(const DenseLayer& layer, const Matrix& x, Activation act);

struct DenseGrad {
  Matrix grad_x;
  Matrix grad_weights;
  std::vector<double> grad_bias;
};

/// `y` is the forward output (post-activation); relu'(0) = 0.
DenseGrad dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& y,
                         const Matrix& grad_y, Activation act);

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad_logits;
};

/// Mean binary cross-entropy on logits.
BceResult bce_loss(std::span<const double> logits, std::span<const double> labels);

}  // namespace dimmask

#endif  // DIMMASK_NN_HPP
