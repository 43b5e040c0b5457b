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


#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dimmask/metrics.hpp"
#include "dimmask/numerics.hpp"

using namespace dimmask;

namespace {

double brute_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  return wins / pairs;
}

// Random instance with both classes present and deliberate ties.
void random_instance(RngStream& rng, std::vector<double>& s, std::vector<std::uint8_t>& y) {
  const std::size_t n = 2 + rng.next_below(199);
  s.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::round(rng.next_uniform() * 20.0) / 20.0;
    y[i] = rng.next_uniform() < 0.3 ? 1 : 0;
  }
  y[0] = 1;
  y[1] = 0;
}

}  // namespace

TEST_CASE("rce examples") {
  CHECK(rce(0.7, 0.7) == 0.0);
  CHECK(rce(0.4, 0.5) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(rce(1.1, 1.0) == doctest::Approx(-10.0).epsilon(1e-14));
  CHECK_THROWS_AS(rce(0.3, 0.0), std::domain_error);
  CHECK_THROWS_AS(rce(0.3, -1.0), std::domain_error);
}

TEST_CASE("naive baseline cross entropy") {
  const std::vector<std::uint8_t> labels = {1, 0, 0, 0, 0};
  CHECK(naive_baseline_ce(0.2, labels) == doctest::Approx(0.5004024235381879).epsilon(1e-14));
  const std::vector<std::uint8_t> mixed = {1, 1, 0, 1, 0, 0, 0};
  CHECK(naive_baseline_ce(0.5, mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double q = 3.0 / 7.0;
  CHECK(naive_baseline_ce(q, mixed) ==
        doctest::Approx(-(q * std::log(q) + (1 - q) * std::log(1 - q))).epsilon(1e-14));
  CHECK_THROWS_AS(naive_baseline_ce(0.0, labels), std::domain_error);
  CHECK_THROWS_AS(naive_baseline_ce(1.0, labels), std::domain_error);
}

TEST_CASE("naive baseline scored against itself has zero rce") {
  RngStream rng(4, 4);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint8_t> y(1 + rng.next_below(300));
    for (auto& v : y) v = rng.next_uniform() < 0.25 ? 1 : 0;
    const double p = 0.05 + 0.9 * rng.next_uniform();
    const std::vector<double> probs(y.size(), p);
    const EvalReport r = evaluate(probs, y, p);
    CHECK(r.rce == 0.0);
    CHECK(r.n == y.size());
  }
}

TEST_CASE("logloss clamps and validates") {
  const std::vector<double> p = {1.0, 0.0};
  const std::vector<std::uint8_t> y = {0, 1};
  const double hi = 1.0 - 1e-15;  // rounds to the nearest double below 1
  const double expect = 0.5 * (-std::log1p(-hi) - std::log(1e-15));
  CHECK(logloss(p, y) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(logloss(std::vector<double>{}, std::vector<std::uint8_t>{}), InputError);
}

TEST_CASE("auc examples") {
  CHECK(*auc(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}) == 1.0);
  CHECK(*auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<std::uint8_t>{1, 0, 1}) == 0.5);
  CHECK(*auc(std::vector<double>{0.8, 0.7, 0.6, 0.5}, std::vector<std::uint8_t>{1, 0, 1, 0}) == 0.75);
  CHECK(!auc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1}).has_value());
  const std::vector<double> probs = {0.4, 0.6};
  CHECK(!evaluate(probs, std::vector<std::uint8_t>{0, 0}, 0.3).auc.has_value());
}

TEST_CASE("rank-sum auc equals pairwise brute force") {
  RngStream rng(13, 0);
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  for (int t = 0; t < 200; ++t) {
    random_instance(rng, s, y);
    const double a = *auc(s, y);
    CHECK(std::abs(a - brute_auc(s, y)) <= 1e-12);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  RngStream rng(14, 0);
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  for (int t = 0; t < 100; ++t) {
    random_instance(rng, s, y);
    const double base = *auc(s, y);
    std::vector<double> e(s), lin(s);
    for (auto& v : e) v = std::exp(v);
    for (auto& v : lin) v = 3.0 * v + 1.0;
    CHECK(std::abs(*auc(e, y) - base) <= 1e-12);
    CHECK(std::abs(*auc(lin, y) - base) <= 1e-12);
  }
}
