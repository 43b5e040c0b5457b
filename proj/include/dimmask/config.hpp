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

// Run configuration. The on-disk form is a flat JSON object whose keys mirror
// the fields below; unknown keys are rejected so that a misspelled
// hyperparameter never silently falls back to its default.

#ifndef DIMMASK_CONFIG_HPP
#define DIMMASK_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dimmask/dml.hpp"
#include "dimmask/model.hpp"
#include "dimmask/nn.hpp"

namespace dimmask {

enum class InitStrategy { kExpand, kShrink };
enum class DataKind { kSynthetic, kAvazu };

std::string to_string(InitStrategy s);

struct DataSource {
  DataKind kind = DataKind::kSynthetic;
  std::filesystem::path path;
  /// Synthetic files: trailing fraction of rows held out for testing.
  double test_fraction = 0.1;
  /// Avazu: optional reservoir-sampled row cap (0 = all rows).
  std::size_t row_cap = 0;
  std::uint64_t cap_seed = 0;
};

/// Per-feature overrides; unset fields inherit the run-level defaults.
struct FeatureOverride {
  std::string name;
  std::optional<std::size_t> buckets;
  std::optional<std::size_t> base_dim;
  std::optional<bool> use_dml;
  std::optional<double> initial_effective_dim;
  std::optional<double> slope;
  std::optional<double> alpha;
  std::optional<RegularizerKind> regularizer;
  std::optional<double> regularizer_weight;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 1;
  std::size_t batch_size = 1024;
  AdamConfig optimizer;
  InitStrategy init_strategy = InitStrategy::kExpand;
  std::size_t log_every = 1;
  std::size_t eval_every = 0;  // 0 = evaluate once at the end
  std::filesystem::path output_dir = "run";
  std::vector<std::size_t> hidden = {128, 64};
  DataSource data;

  // Mask-layer defaults applied to every feature.
  std::size_t base_dim = 16;
  bool use_dml = true;
  double slope = 2.0;
  double alpha = 5.0;
  RegularizerKind regularizer = RegularizerKind::kL1;
  /// Unset: 0 for expand, 0.001 for shrink.
  std::optional<double> regularizer_weight;
  /// Unset: 3 for expand, base_dim for shrink.
  std::optional<double> initial_effective_dim;

  /// Empty: derived from the dataset's columns.
  std::vector<FeatureOverride> features;

  void validate() const;

  double effective_weight() const;
  double effective_initial_dim(std::size_t base_dim) const;

  /// Builds the model spec for a dataset with the given feature columns.
  ModelSpec resolve_model(const std::vector<std::string>& dataset_features,
                          const std::vector<std::size_t>& dataset_buckets) const;
};

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace dimmask

#endif  // DIMMASK_CONFIG_HPP
