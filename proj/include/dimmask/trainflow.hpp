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

#ifndef DIMMASK_TRAINFLOW_HPP
#define DIMMASK_TRAINFLOW_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dimmask/checkpoint.hpp"
#include "dimmask/config.hpp"
#include "dimmask/data.hpp"
#include "dimmask/metrics.hpp"

namespace dimmask {

/// One logged effective-dimension value.
struct DimRecord {
  std::uint64_t step = 0;
  std::string feature;
  double x2 = 0.0;
  std::size_t ceil_dim = 0;
};
using DimTrajectory = std::vector<DimRecord>;

struct MetricRecord {
  std::uint64_t step = 0;
  std::string split;
  EvalReport report;
};

struct LossRecord {
  double total = 0.0;
  double bce = 0.0;
  double reg = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  DimTrajectory trajectory;
  std::vector<MetricRecord> metrics;
  EvalReport test_report;
  std::vector<LossRecord> losses;  // one per step
  /// Per feature: first step where the trailing 500-step range of x2 fell
  /// below 0.25. Reporting only; training always runs every epoch.
  std::vector<std::optional<std::uint64_t>> plateau_step;
};

struct LoadedData {
  Dataset train;
  Dataset test;
};

/// Loads the configured data source and projects it onto the resolved model.
LoadedData load_data(const RunConfig& config, ModelSpec& spec_out);

/// Trains on already-loaded data; `spec` must match the datasets' columns.
TrainResult train(const RunConfig& config, const ModelSpec& spec, const Dataset& train_set,
                  const Dataset& test_set);

/// Loads data, trains, and writes the run directory.
TrainResult train(const RunConfig& config);

/// Writes spec.json, params.bin, dims.csv and metrics.csv.
void write_run(const TrainResult& result, const std::filesystem::path& dir);

void write_dims_csv(const DimTrajectory& trajectory, const std::filesystem::path& path);
void write_metrics_csv(const std::vector<MetricRecord>& rows, const std::filesystem::path& path,
                       bool append = false);

std::vector<std::optional<std::uint64_t>> detect_plateaus(const DimTrajectory& trajectory,
                                                          const std::vector<std::string>& features,
                                                          std::uint64_t window = 500,
                                                          double tolerance = 0.25);

/// Replaces every mask layer by its hard dimension: keeps the first n_f
/// columns of each masked table scaled by their expected gate, and drops the
/// matching rows of the first dense layer.
Checkpoint trim(const Checkpoint& ckpt);

/// Eval-mode report of a checkpoint on a dataset.
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& data);

struct SweepRow {
  std::string run_id;
  std::optional<RegularizerKind> regularizer;  // empty for the baseline
  std::optional<double> weight;
  std::size_t total_dims = 0;
  double test_rce = 0.0;
  std::optional<double> test_auc;
  std::size_t zero_dim_features = 0;
  std::vector<std::size_t> dims;
  bool ok = true;
  std::string error;
};

/// One run per (regularizer, weight) plus a no-mask baseline. Each run gets
/// its own directory under `out_dir` and a seed derived from the base seed.
/// Failed runs are recorded and the sweep continues.
std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<RegularizerKind>& regularizers,
                            const std::vector<double>& weights, const std::filesystem::path& out_dir,
                            std::size_t jobs = 1);

void write_frontier_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace dimmask

#endif  // DIMMASK_TRAINFLOW_HPP
