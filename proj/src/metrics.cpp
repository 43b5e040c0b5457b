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

#include "dimmask/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dimmask/numerics.hpp"

namespace dimmask {

double rce(double ce_pred, double ce_baseline) {
  if (!(ce_baseline > 0.0)) throw std::domain_error("rce: baseline cross entropy must be > 0");
  return (ce_baseline - ce_pred) * 100.0 / ce_baseline;
}

double naive_baseline_ce(double p, std::span<const std::uint8_t> labels) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("naive baseline rate must lie in (0, 1)");
  if (labels.empty()) throw InputError("naive baseline: no labels");
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double total = 0.0;
  for (auto y : labels) total -= y ? lp : lq;
  return total / static_cast<double>(labels.size());
}

double logloss(std::span<const double> probs, std::span<const std::uint8_t> labels) {
  if (probs.size() != labels.size() || probs.empty())
    throw InputError("logloss: need equal, non-empty probability and label vectors");
  constexpr double kEps = 1e-15;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kEps, 1.0 - kEps);
    total -= labels[i] ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(probs.size());
}

std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw InputError("auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (auto y : labels) pos += y ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]]) rank_sum += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(pos);
  const double nn = static_cast<double>(neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

EvalReport evaluate(std::span<const double> probs, std::span<const std::uint8_t> labels,
                    double train_positive_rate) {
  EvalReport r;
  r.n = probs.size();
  r.logloss = logloss(probs, labels);
  r.naive_ce = naive_baseline_ce(train_positive_rate, labels);
  r.rce = rce(r.logloss, r.naive_ce);
  r.auc = auc(probs, labels);
  return r;
}

}  // namespace dimmask
