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

#ifndef DIMMASK_PLOT_HPP
#define DIMMASK_PLOT_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace dimmask {

struct FrontierPoint {
  std::string run_id;
  std::string regularizer;  // empty for the baseline
  std::string weight;
  double total_dims = 0.0;
  double rce = 0.0;
};

/// Parses frontier.csv; rows of failed runs (empty metrics) are skipped.
std::vector<FrontierPoint> read_frontier_csv(const std::filesystem::path& path);

/// Total dims (x) against test RCE (y), one marker per run, baseline drawn as
/// a distinct square. Fixed 800x600 viewBox; output depends only on input.
std::string render_frontier_svg(const std::vector<FrontierPoint>& points);

}  // namespace dimmask

#endif  // DIMMASK_PLOT_HPP
