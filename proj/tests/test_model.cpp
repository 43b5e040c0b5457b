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
#include <vector>

#include "dimmask/model.hpp"
#include "test_util.hpp"

using namespace dimmask;

namespace {

ModelSpec two_feature_spec(bool dml, std::vector<std::size_t> hidden = {128, 64}) {
  ModelSpec spec;
  spec.hidden = std::move(hidden);
  for (int f = 0; f < 2; ++f) {
    FeatureSpec fs;
    fs.name = "f" + std::to_string(f);
    fs.buckets = 5;
    fs.base_dim = 4;
    fs.use_dml = dml;
    fs.initial_effective_dim = 2.5;
    fs.mask.regularizer = {f == 0 ? RegularizerKind::kL1 : RegularizerKind::kL2, 0.01};
    spec.features.push_back(fs);
  }
  return spec;
}

Batch random_batch(std::size_t rows, std::size_t features, std::size_t vocab, RngStream& rng) {
  Batch b(rows, features);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < features; ++f) b.id(r, f) = static_cast<std::uint32_t>(rng.next_below(vocab));
    b.labels[r] = rng.next_uniform() < 0.4 ? 1.0 : 0.0;
  }
  return b;
}

bool near_ramp_kink(const MaskState& s) {
  const double x2 = s.effective_dim();
  for (std::size_t i = 0; i < s.original_dim; ++i) {
    const double pre = (x2 - static_cast<double>(i)) / s.config.slope;
    if (std::abs(pre) < 1e-3 || std::abs(pre - 1.0) < 1e-3) return true;
  }
  return x2 < 1e-3;
}

}  // namespace

TEST_CASE("end-to-end gradients match central differences with frozen gate draws") {
  RngStream rng(2718, 1);
  int points = 0;
  for (int attempt = 0; points < 5 && attempt < 50; ++attempt) {
    Model base(two_feature_spec(true, {6, 5}), 100 + attempt);
    for (auto& m : base.masks()) m->scaled_effective_dim = 0.05 + 0.9 * rng.next_uniform();
    bool kink = false;
    for (auto& m : base.masks()) kink = kink || near_ramp_kink(*m);
    if (kink) continue;
    for (auto& t : base.tables())
      for (auto& v : t.weights.values()) v = rng.next_normal();
    // Nonzero biases keep dead rows off the ReLU kink at exactly 0.
    for (auto& l : base.layers())
      for (auto& v : l.bias) v = 0.3 * rng.next_normal();
    const Batch batch = random_batch(3, 2, 5, rng);

    Model analytic = base;
    const StepResult res = analytic.forward_backward(batch, Mode::kTrain, true);
    const auto blocks = base.parameter_blocks();
    REQUIRE(res.grads.blocks.size() == blocks.size());
    const double h = 1e-6;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t i = 0; i < blocks[b].size(); ++i) {
        Model plus = base, minus = base;
        plus.parameter_blocks()[b][i] += h;
        minus.parameter_blocks()[b][i] -= h;
        const double fd = (plus.forward_backward(batch, Mode::kTrain, false).total_loss -
                           minus.forward_backward(batch, Mode::kTrain, false).total_loss) /
                          (2 * h);
        const double an = res.grads.blocks[b][i];
        INFO("block " << b << " index " << i << " fd " << fd << " analytic " << an);
        CHECK(std::abs(fd - an) <= 1e-5 * std::max({std::abs(fd), std::abs(an), 1e-5}));
      }
    }
    ++points;
  }
  CHECK(points == 5);
}

TEST_CASE("total loss minus BCE equals the summed regularization") {
  RngStream rng(3, 3);
  Model m(two_feature_spec(true), 9);
  m.masks()[0]->scaled_effective_dim = 0.37;
  m.masks()[1]->scaled_effective_dim = -0.12;
  const Batch b = random_batch(16, 2, 5, rng);
  for (Mode mode : {Mode::kTrain, Mode::kEval}) {
    const auto r = m.forward_backward(b, mode, true);
    const double reg = regularization(*m.masks()[0]).loss + regularization(*m.masks()[1]).loss;
    CHECK(std::abs((r.total_loss - r.bce_loss) - reg) <= 1e-12);
    CHECK(r.reg_loss == doctest::Approx(reg).epsilon(1e-15));
  }
}

TEST_CASE("masked model at saturation equals a plain model with pre-scaled tables") {
  RngStream rng(6, 6);
  ModelSpec masked_spec = two_feature_spec(true);
  for (auto& f : masked_spec.features) f.mask.regularizer.weight = 0.0;
  Model masked(masked_spec, 21);
  // x2 >= d - 1 + slope puts every premask at or above 1.
  for (auto& mk : masked.masks()) mk->scaled_effective_dim = (4.0 - 1.0 + 2.0) / 4.0;
  Model plain(two_feature_spec(false), 21);
  plain.layers() = masked.layers();
  const double g = expected_gate(1.0, 5.0);
  for (std::size_t f = 0; f < 2; ++f) {
    plain.tables()[f] = masked.tables()[f];
    for (auto& v : plain.tables()[f].weights.values()) v *= g;
  }
  const Batch b = random_batch(32, 2, 5, rng);
  CHECK(masked.predict(b) == plain.predict(b));
}

TEST_CASE("a model without masks matches its baseline bitwise and reports NaN dims") {
  RngStream rng(8, 1);
  Model a(two_feature_spec(false), 5), b(two_feature_spec(false), 5);
  const Batch batch = random_batch(10, 2, 5, rng);
  const auto ra = a.forward_backward(batch, Mode::kTrain, true);
  const auto rb = b.forward_backward(batch, Mode::kTrain, true);
  CHECK(ra.total_loss == rb.total_loss);
  CHECK(ra.reg_loss == 0.0);
  CHECK(ra.total_loss == ra.bce_loss);
  CHECK(std::isnan(ra.effective_dims[0]));
  CHECK(!a.has_masks());
  CHECK(ra.probabilities == a.predict(batch));
}

TEST_CASE("masks do not change how tables and dense layers are initialized") {
  Model with(two_feature_spec(true), 77), without(two_feature_spec(false), 77);
  for (std::size_t f = 0; f < 2; ++f) CHECK(with.tables()[f].weights == without.tables()[f].weights);
  for (std::size_t l = 0; l < with.layers().size(); ++l)
    CHECK(with.layers()[l].weights == without.layers()[l].weights);
  CHECK(with.masks()[0]->scaled_effective_dim == 2.5 / 4.0);
}

TEST_CASE("first dense layer holds (sum of feature dims) x 128 weights") {
  ModelSpec spec = two_feature_spec(false);
  spec.features[0].base_dim = 7;
  spec.features[1].base_dim = 3;
  Model m(spec, 1);
  CHECK(m.layers()[0].weights.rows() == 10);
  CHECK(m.layers()[0].weights.cols() == 128);
  CHECK(m.layers()[1].weights.rows() == 128);
  CHECK(m.layers()[1].weights.cols() == 64);
  CHECK(m.layers()[2].weights.cols() == 1);
  const std::size_t expected = 5 * 7 + 5 * 3 + 10 * 128 + 128 + 128 * 64 + 64 + 64 + 1;
  CHECK(m.parameter_count() == expected);
  Model masked(two_feature_spec(true), 1);
  CHECK(masked.parameter_count() == 2 * 5 * 4 + 8 * 128 + 128 + 128 * 64 + 64 + 64 + 1 + 2);
}

TEST_CASE("fixed seed gives a bitwise-identical loss trajectory") {
  auto trajectory = [] {
    RngStream data(50, 0);
    Model m(two_feature_spec(true, {16, 8}), 11);
    ModelOptimizer opt(m, AdamConfig{});
    std::vector<double> losses;
    for (int s = 0; s < 30; ++s) {
      const Batch b = random_batch(8, 2, 5, data);
      const auto r = m.forward_backward(b, Mode::kTrain, true);
      losses.push_back(r.total_loss);
      opt.step(m, r.grads);
    }
    return losses;
  };
  CHECK(trajectory() == trajectory());
}

TEST_CASE("predict leaves gate streams untouched; train mode advances them") {
  RngStream rng(2, 2);
  Model m(two_feature_spec(true), 3);
  const Batch b = random_batch(4, 2, 5, rng);
  const auto before = m.gate_streams();
  (void)m.predict(b);
  (void)m.forward_backward(b, Mode::kEval, false);
  CHECK(m.gate_streams() == before);
  (void)m.forward_backward(b, Mode::kTrain, false);
  CHECK(m.gate_streams()[0].counter() == before[0].counter() + 4 * 4);
}

TEST_CASE("spec validation") {
  ModelSpec spec = two_feature_spec(true);
  spec.features[1].name = "f0";
  CHECK_THROWS_AS(Model(spec, 1), InputError);
  spec = two_feature_spec(true);
  spec.features[0].initial_effective_dim = 4.5;
  CHECK_THROWS_AS(Model(spec, 1), InputError);
  spec = two_feature_spec(true);
  spec.features[0].base_dim = 0;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec.features[0].use_dml = false;
  CHECK_NOTHROW(spec.validate(true));
  CHECK_THROWS_AS(spec.validate(false), InputError);
}
