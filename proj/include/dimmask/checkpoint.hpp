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

// Run directory checkpoint:
//   spec.json  - model spec, hyperparameters, seed, finalized dims
//   params.bin - "DMLC", u32 LE version 1, then every parameter block as
//                f64 LE in Model::parameter_blocks() order

#ifndef DIMMASK_CHECKPOINT_HPP
#define DIMMASK_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "dimmask/model.hpp"

namespace dimmask {

inline constexpr std::uint32_t kParamsVersion = 1;

struct Checkpoint {
  Model model;
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::uint64_t steps = 0;
  double train_positive_rate = 0.5;
  bool trimmed = false;

  /// Per-feature hard dimension: finalize_dim for masked features, base_dim
  /// otherwise.
  std::vector<std::size_t> finalized_dims() const;
  std::size_t total_dims() const;
  std::size_t zero_dim_features() const;
};

nlohmann::json spec_to_json(const Checkpoint& ckpt);

void write_params(const Model& model, const std::filesystem::path& path);
void read_params(Model& model, const std::filesystem::path& path);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace dimmask

#endif  // DIMMASK_CHECKPOINT_HPP
