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

// CTR model: per-feature embedding lookup, optional mask layer per feature,
// concatenation, ReLU MLP, single-logit sigmoid head, BCE loss.

#ifndef DIMMASK_MODEL_HPP
#define DIMMASK_MODEL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimmask/dml.hpp"
#include "dimmask/nn.hpp"
#include "dimmask/numerics.hpp"

namespace dimmask {

struct FeatureSpec {
  std::string name;
  std::size_t buckets = 1;
  std::size_t base_dim = 16;
  bool use_dml = false;
  double initial_effective_dim = 0.0;
  MaskConfig mask;

  /// Trimmed models may carry zero-width features; trainable specs may not.
  void validate(bool allow_zero_width = false) const;
};

struct ModelSpec {
  std::vector<FeatureSpec> features;
  std::vector<std::size_t> hidden = {128, 64};

  std::size_t input_width() const;
  std::size_t mask_count() const;
  void validate(bool allow_zero_width = false) const;
};

/// Bucketized ids for a block of rows, stored feature-major.
struct Batch {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::vector<std::uint32_t> ids;
  std::vector<double> labels;

  Batch() = default;
  Batch(std::size_t rows, std::size_t features)
      : rows(rows), features(features), ids(rows * features, 0), labels(rows, 0.0) {}

  std::uint32_t& id(std::size_t row, std::size_t feature) { return ids[feature * rows + row]; }
  std::uint32_t id(std::size_t row, std::size_t feature) const { return ids[feature * rows + row]; }
  std::span<const std::uint32_t> feature_ids(std::size_t feature) const {
    return {ids.data() + feature * rows, rows};
  }
};

/// Gradients laid out exactly like Model::parameter_blocks().
struct Gradients {
  std::vector<std::vector<double>> blocks;
};

struct StepResult {
  double total_loss = 0.0;
  double bce_loss = 0.0;
  double reg_loss = 0.0;
  std::vector<double> probabilities;
  /// x2 per feature; NaN for features without a mask layer.
  std::vector<double> effective_dims;
  Gradients grads;
};

class Model {
 public:
  Model() = default;
  /// Initializes every parameter from `seed`; mask layers start at each
  /// feature's initial_effective_dim.
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<EmbeddingTable>& tables() { return tables_; }
  const std::vector<EmbeddingTable>& tables() const { return tables_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<std::optional<MaskState>>& masks() { return masks_; }
  const std::vector<std::optional<MaskState>>& masks() const { return masks_; }
  bool has_masks() const;

  /// Parameter storage in serialization order: embedding tables, then dense
  /// layers (weights then bias, input side first), then one scalar per mask.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  std::size_t parameter_count() const;

  /// Full pass with loss = BCE + sum of mask regularization terms. Train mode
  /// draws fresh gate noise from each mask's stream. Gradients are filled
  /// when `with_grads` is set.
  StepResult forward_backward(const Batch& batch, Mode mode, bool with_grads);

  /// Eval-mode click probabilities; does not touch the gate streams.
  std::vector<double> predict(const Batch& batch) const;

  /// Replaces the spec after a structural edit (used by trimming).
  void reset_structure(ModelSpec spec, std::vector<EmbeddingTable> tables,
                       std::vector<DenseLayer> layers);

  const std::vector<RngStream>& gate_streams() const { return gate_streams_; }

 private:
  struct Trace;
  void run_forward(const Batch& batch, Mode mode, Trace& trace, std::vector<RngStream>* streams) const;

  ModelSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<EmbeddingTable> tables_;
  std::vector<DenseLayer> layers_;
  std::vector<std::optional<MaskState>> masks_;
  std::vector<RngStream> gate_streams_;  // one per feature, used only when masked
};

/// Adam over every parameter block of a model.
class ModelOptimizer {
 public:
  ModelOptimizer(const Model& model, AdamConfig config);

  void step(Model& model, const Gradients& grads);
  std::uint64_t steps_taken() const { return step_; }

 private:
  AdamConfig config_;
  std::vector<AdamMoments> moments_;
  std::uint64_t step_ = 0;
};

}  // namespace dimmask

#endif  // DIMMASK_MODEL_HPP
