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

#ifndef DIMMASK_METRICS_HPP
#define DIMMASK_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>

namespace dimmask {

struct EvalReport {
  double logloss = 0.0;
  double rce = 0.0;
  std::optional<double> auc;  // absent for single-class labels
  std::size_t n = 0;
  double naive_ce = 0.0;
};

/// Relative cross entropy in percent: (baseline - pred) * 100 / baseline.
double rce(double ce_pred, double ce_baseline);

/// Mean cross entropy of a constant predictor emitting `positive_rate`.
double naive_baseline_ce(double positive_rate, std::span<const std::uint8_t> labels);

/// Mean cross entropy of probability predictions, clamped to [1e-15, 1-1e-15].
double logloss(std::span<const double> probs, std::span<const std::uint8_t> labels);

/// ROC AUC via the rank-sum statistic with average ranks for ties.
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Full report; the naive baseline uses the training-split positive rate.
EvalReport evaluate(std::span<const double> probs, std::span<const std::uint8_t> labels,
                    double train_positive_rate);

}  // namespace dimmask

#endif  // DIMMASK_METRICS_HPP
