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

// Dimension mask layer.
//
// A mask layer sits right after an embedding lookup and lets only the leading
// `effective_dim` columns through. The width is a single trainable scalar,
// `scaled_effective_dim` (sed), with effective_dim x2 = max(0, sed * d).
// Column i gets a mask value clip((x2 - i) / slope, 0, 1): a linear ramp of
// width `slope` ending at x2. During training the mask is not applied
// directly; each element is multiplied by a noisy gate
//
//     z = sigmoid(alpha * (2 * mask - y - 0.5)),   y ~ U(0, 1)
//
// so downstream weights cannot undo a partial mask by rescaling. At
// evaluation time the gate is replaced by its expectation over y.

#ifndef DIMMASK_DML_HPP
#define DIMMASK_DML_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dimmask/numerics.hpp"

namespace dimmask {

enum class RegularizerKind { kL1, kL2 };

std::string to_string(RegularizerKind kind);
/// Accepts "l1"/"L1"/"l2"/"L2".
RegularizerKind parse_regularizer(std::string_view text);

struct Regularizer {
  RegularizerKind kind = RegularizerKind::kL1;
  double weight = 0.001;
};

/// Hyperparameters of one mask layer.
struct MaskConfig {
  double slope = 2.0;
  double alpha = 5.0;
  Regularizer regularizer;

  void validate() const;
};

/// Trainable state of one mask layer.
struct MaskState {
  double scaled_effective_dim = 0.0;
  std::size_t original_dim = 1;
  MaskConfig config;
  std::uint64_t layer_id = 0;

  /// sed0 = initial_effective_dim / original_dim.
  static MaskState create(std::size_t original_dim, double initial_effective_dim,
                          const MaskConfig& config, std::uint64_t layer_id);

  /// x2 = max(0, sed * d), unclamped above.
  double effective_dim() const;
  void validate() const;
};

struct MaskProfile {
  std::vector<double> mask;
  std::vector<double> premask;
  double x2 = 0.0;
};

MaskProfile compute_mask(const MaskState& state);

/// z = sigmoid(alpha * (2 * mask[c] - y - 0.5)) for one element.
double gate_value(double mask, double y, double alpha);

/// Fresh gate sample for a rows x mask.size() block. Writes the uniform draws
/// to `draws` when non-null.
Matrix sample_gate(std::span<const double> mask, std::size_t rows, double alpha, RngStream& rng,
                   Matrix* draws = nullptr);

/// Closed-form E_y[z] for a single mask value.
double expected_gate(double mask, double alpha);
std::vector<double> expected_gate(std::span<const double> mask, double alpha);

/// Everything backward() needs from a forward pass.
struct GateCache {
  Mode mode = Mode::kTrain;
  MaskProfile profile;
  Matrix inputs;
  Matrix draws;  // train mode only
  Matrix gate;   // z, rows x d
};

struct MaskForward {
  Matrix outputs;
  GateCache cache;
};

/// Applies the mask layer. Train mode consumes rows * d draws from `rng`.
MaskForward mask_forward(const MaskState& state, const Matrix& inputs, Mode mode, RngStream& rng);

/// Train-mode forward with caller-supplied draws (y held fixed).
MaskForward mask_forward_with_draws(const MaskState& state, const Matrix& inputs, Matrix draws);

struct MaskGrad {
  Matrix grad_inputs;
  double grad_sed = 0.0;
};

/// Reparameterized backward pass; y is taken from the cache.
MaskGrad mask_backward(const MaskState& state, const GateCache& cache, const Matrix& grad_out);

struct RegularizationTerm {
  double loss = 0.0;
  double grad_sed = 0.0;
};

RegularizationTerm regularization(const MaskState& state);

/// ceil(min(x2, d)): the hard dimension that replaces the layer.
std::size_t finalize_dim(const MaskState& state);

}  // namespace dimmask

#endif  // DIMMASK_DML_HPP
