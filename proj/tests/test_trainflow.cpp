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
#include <sstream>

#include "dimmask/trainflow.hpp"
#include "test_util.hpp"

using namespace dimmask;

namespace {

Dataset small_synth(std::size_t rows, std::uint64_t seed = 1, std::size_t irrelevant = 0) {
  SynthConfig sc;
  sc.planted = {4, 4};
  sc.irrelevant = irrelevant;
  sc.rows = rows;
  sc.vocab = 100;
  sc.seed = seed;
  return gen_synthetic(sc);
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.base_dim = 6;
  cfg.hidden = {16, 8};
  cfg.batch_size = 64;
  return cfg;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

// Masked checkpoint with hand-placed effective dims.
Checkpoint masked_checkpoint(std::vector<double> x2) {
  ModelSpec spec;
  spec.hidden = {8, 4};
  for (std::size_t f = 0; f < x2.size(); ++f) {
    FeatureSpec fs;
    fs.name = "f" + std::to_string(f);
    fs.buckets = 5;
    fs.base_dim = 4;
    fs.use_dml = true;
    fs.initial_effective_dim = 1.0;
    spec.features.push_back(fs);
  }
  Checkpoint ck{Model(spec, 7)};
  for (std::size_t f = 0; f < x2.size(); ++f) ck.model.masks()[f]->scaled_effective_dim = x2[f] / 4.0;
  return ck;
}

}  // namespace

TEST_CASE("trim with nothing masked rescales the whole table by the saturated gate") {
  // x2 = d - 1 + slope puts every column at mask 1.
  const Checkpoint ck = masked_checkpoint({5.0});
  const Checkpoint t = trim(ck);
  const double g = expected_gate(1.0, 5.0);
  CHECK(g == doctest::Approx(0.9843326394365622).epsilon(1e-15));
  REQUIRE(t.model.tables()[0].dim == 4);
  const auto& before = ck.model.tables()[0].weights;
  const auto& after = t.model.tables()[0].weights;
  for (std::size_t v = 0; v < 5; ++v)
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(after(v, c) - before(v, c) * g) <= 1e-15);
  CHECK(t.model.layers()[0].weights == ck.model.layers()[0].weights);
  CHECK(!t.model.has_masks());
  CHECK(t.trimmed);
}

TEST_CASE("trim keeps leading columns and drops their dense rows") {
  // f0: x2 = 2.5 keeps 3 columns; f1: x2 = 0 keeps none.
  const Checkpoint ck = masked_checkpoint({2.5, 0.0});
  const Checkpoint t = trim(ck);
  CHECK(t.model.spec().features[0].base_dim == 3);
  CHECK(t.model.spec().features[1].base_dim == 0);
  CHECK(t.model.tables()[1].dim == 0);
  CHECK(t.model.spec().input_width() == 3);
  const auto& w0 = ck.model.layers()[0].weights;
  const auto& w1 = t.model.layers()[0].weights;
  REQUIRE(w1.rows() == 3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < w1.cols(); ++c) CHECK(w1(r, c) == w0(r, c));
  CHECK(t.model.layers()[0].bias == ck.model.layers()[0].bias);
  CHECK(t.total_dims() == 3);
  CHECK(t.zero_dim_features() == 1);

  // Columns below n_f - slope sit at mask 1.
  const double g1 = expected_gate(1.0, 5.0);
  const auto& a = ck.model.tables()[0].weights;
  const auto& b = t.model.tables()[0].weights;
  for (std::size_t v = 0; v < 5; ++v) CHECK(std::abs(b(v, 0) - a(v, 0) * g1) <= 1e-15);
  // Column 1 has premask 0.75, column 2 has 0.25.
  for (std::size_t v = 0; v < 5; ++v) {
    CHECK(b(v, 1) == a(v, 1) * expected_gate(0.75, 5.0));
    CHECK(b(v, 2) == a(v, 2) * expected_gate(0.25, 5.0));
  }
}

TEST_CASE("trimmed checkpoints survive a save/load cycle and predict identically") {
  testutil::TempDir tmp;
  const Checkpoint t = trim(masked_checkpoint({2.5, 0.0}));
  save_checkpoint(t, tmp.path());
  const Checkpoint back = load_checkpoint(tmp.path());
  CHECK(back.trimmed);
  CHECK(back.model.spec().features[1].base_dim == 0);
  Batch b(3, 2);
  b.id(1, 0) = 4;
  b.id(2, 1) = 2;
  CHECK(back.model.predict(b) == t.model.predict(b));
}

TEST_CASE("trim refuses checkpoints without masks") {
  ModelSpec spec;
  FeatureSpec fs;
  fs.name = "a";
  fs.buckets = 3;
  fs.base_dim = 2;
  spec.features.push_back(fs);
  CHECK_THROWS_AS(trim(Checkpoint{Model(spec, 1)}), InputError);
}

TEST_CASE("plateau detection") {
  DimTrajectory traj;
  // Ramps for 600 steps, then holds within 0.1.
  for (std::uint64_t s = 1; s <= 2000; ++s) {
    const double x2 = s <= 600 ? 3.0 + 0.01 * static_cast<double>(s) : 9.0 + 0.1 * std::sin(0.1 * s);
    traj.push_back({s, "a", x2, 0});
    traj.push_back({s, "b", 1.0 + 0.002 * static_cast<double>(s), 0});
  }
  const auto p = detect_plateaus(traj, {"a", "b"});
  REQUIRE(p[0].has_value());
  CHECK(*p[0] > 600);
  CHECK(*p[0] <= 1101);
  CHECK(!p[1].has_value());
  // Never reported before a full window exists.
  DimTrajectory flat;
  for (std::uint64_t s = 1; s <= 499; ++s) flat.push_back({s, "a", 2.0, 0});
  CHECK(!detect_plateaus(flat, {"a"})[0].has_value());
}

TEST_CASE("non-finite loss aborts with the step number") {
  const Dataset ds = small_synth(2000);
  RunConfig cfg = small_config();
  cfg.optimizer.learning_rate = 1e300;
  const ModelSpec spec = cfg.resolve_model(ds.feature_names, ds.buckets);
  try {
    (void)train(cfg, spec, ds.slice(0, 1500), ds.slice(1500, 2000));
    FAIL("expected RuntimeFailure");
  } catch (const RuntimeFailure& e) {
    CHECK(std::string(e.what()).find("non-finite loss at step") != std::string::npos);
  }
}

TEST_CASE("runs without masks log no dimensions and repeat bitwise") {
  testutil::TempDir tmp;
  const Dataset ds = small_synth(3000);
  RunConfig cfg = small_config();
  cfg.use_dml = false;
  const ModelSpec spec = cfg.resolve_model(ds.feature_names, ds.buckets);
  const TrainResult a = train(cfg, spec, ds.slice(0, 2500), ds.slice(2500, 3000));
  const TrainResult b = train(cfg, spec, ds.slice(0, 2500), ds.slice(2500, 3000));
  write_run(a, tmp / "a");
  write_run(b, tmp / "b");
  CHECK(testutil::read_file(tmp / "a" / "dims.csv") == "step,feature,x2,ceil_dim\n");
  CHECK(testutil::read_file(tmp / "a" / "params.bin") == testutil::read_file(tmp / "b" / "params.bin"));
  for (const auto& l : a.losses) CHECK(l.reg == 0.0);
  const auto metrics = lines_of(testutil::read_file(tmp / "a" / "metrics.csv"));
  REQUIRE(metrics.size() == 2);
  CHECK(metrics[0] == "step,split,logloss,auc,rce");
  CHECK(metrics[1].rfind(std::to_string(a.checkpoint.steps) + ",test,", 0) == 0);
}

TEST_CASE("masked runs: additivity at every step, increasing dims.csv steps") {
  testutil::TempDir tmp;
  const Dataset ds = small_synth(3000);
  RunConfig cfg = small_config();
  cfg.regularizer_weight = 1e-3;
  cfg.log_every = 5;
  cfg.eval_every = 20;
  const ModelSpec spec = cfg.resolve_model(ds.feature_names, ds.buckets);
  const TrainResult r = train(cfg, spec, ds.slice(0, 2500), ds.slice(2500, 3000));
  for (const auto& l : r.losses) CHECK(std::abs((l.total - l.bce) - l.reg) <= 1e-12);
  write_run(r, tmp.path());
  const auto dims = lines_of(testutil::read_file(tmp / "dims.csv"));
  REQUIRE(dims.size() > 3);
  long prev = 0;
  for (std::size_t i = 1; i < dims.size(); i += 2) {
    const long step = std::stol(dims[i]);
    CHECK(step > prev);
    CHECK(step % 5 == 0);
    CHECK(std::stol(dims[i + 1]) == step);
    prev = step;
  }
  // Evaluations at every 20 steps plus the final one.
  CHECK(r.metrics.size() == r.checkpoint.steps / 20 + (r.checkpoint.steps % 20 ? 1 : 0));
}

TEST_CASE("init 3, slope 2, weight 0, alpha 5 are accepted and echoed into spec.json") {
  testutil::TempDir tmp;
  const auto cfg_json = nlohmann::json::parse(R"({
    "initial_effective_dim": 3, "slope": 2.0, "regularizer_weight": 0.0, "alpha": 5.0,
    "base_dim": 6, "hidden": [16, 8], "batch_size": 64})");
  const RunConfig cfg = parse_run_config(cfg_json);
  const Dataset ds = small_synth(1000);
  const ModelSpec spec = cfg.resolve_model(ds.feature_names, ds.buckets);
  const TrainResult r = train(cfg, spec, ds.slice(0, 800), ds.slice(800, 1000));
  write_run(r, tmp.path());
  const auto j = nlohmann::json::parse(testutil::read_file(tmp / "spec.json"));
  for (const auto& f : j.at("features")) {
    CHECK(f.at("initial_effective_dim").get<double>() == 3.0);
    CHECK(f.at("slope").get<double>() == 2.0);
    CHECK(f.at("regularizer_weight").get<double>() == 0.0);
    CHECK(f.at("alpha").get<double>() == 5.0);
  }
  const auto& hp = j.at("hyperparameters");
  CHECK(hp.at("initial_effective_dim").get<double>() == 3.0);
  CHECK(hp.at("slope").get<double>() == 2.0);
  CHECK(hp.at("regularizer_weight").get<double>() == 0.0);
  CHECK(hp.at("alpha").get<double>() == 5.0);
}

TEST_CASE("sweep writes a baseline row plus one row per grid point") {
  testutil::TempDir tmp;
  write_synthetic(small_synth(2000, 3, 1), tmp / "data.csv", 100);
  RunConfig cfg = small_config();
  cfg.data.path = tmp / "data.csv";
  const auto rows = sweep(cfg, {RegularizerKind::kL1, RegularizerKind::kL2}, {1e-2, 1e-3, 1e-4, 1e-5},
                          tmp / "sweep", 2);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].run_id == "baseline");
  CHECK(!rows[0].regularizer.has_value());
  CHECK(rows[0].total_dims == 3 * 6);
  for (const auto& r : rows) CHECK(r.ok);
  const auto csv = lines_of(testutil::read_file(tmp / "sweep" / "frontier.csv"));
  REQUIRE(csv.size() == 10);
  CHECK(csv[0] == "run_id,regularizer,weight,total_dims,test_rce,test_auc,zero_dim_features");
  CHECK(csv[1].rfind("baseline,,,18,", 0) == 0);
  CHECK(csv[2].rfind("l1_0.01,l1,0.01,", 0) == 0);
  CHECK(std::filesystem::exists(tmp / "sweep" / "l2_1e-05" / "params.bin"));

  // A single-thread sweep gives the same frontier.
  (void)sweep(cfg, {RegularizerKind::kL1, RegularizerKind::kL2}, {1e-2, 1e-3, 1e-4, 1e-5}, tmp / "serial", 1);
  CHECK(testutil::read_file(tmp / "serial" / "frontier.csv") ==
        testutil::read_file(tmp / "sweep" / "frontier.csv"));
}

TEST_CASE("sweep records failed runs and keeps going") {
  testutil::TempDir tmp;
  write_synthetic(small_synth(1000), tmp / "data.csv", 100);
  RunConfig cfg = small_config();
  cfg.data.path = tmp / "data.csv";
  cfg.optimizer.learning_rate = 1e300;
  const auto rows = sweep(cfg, {RegularizerKind::kL1}, {1e-3}, tmp / "sweep", 1);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) CHECK(!r.ok);
  const auto csv = lines_of(testutil::read_file(tmp / "sweep" / "frontier.csv"));
  CHECK(csv[1] == "baseline,,,,,,");
}

TEST_CASE("unregularized expand runs grow their effective dimension") {
  SynthConfig sc;
  sc.planted = {8, 8};
  sc.rows = 100000;
  const Dataset ds = gen_synthetic(sc);
  RunConfig cfg;
  cfg.batch_size = 256;
  cfg.epochs = 2;
  const ModelSpec spec = cfg.resolve_model(ds.feature_names, ds.buckets);
  const TrainResult r = train(cfg, spec, ds.slice(0, 90000), ds.slice(90000, 100000));
  for (const auto& name : ds.feature_names) {
    std::vector<double> x2;
    for (const auto& rec : r.trajectory)
      if (rec.feature == name) x2.push_back(rec.x2);
    REQUIRE(x2.size() > 300);
    // 100-step moving average, sampled every 100 steps.
    std::vector<double> ma;
    for (std::size_t end = 100; end <= x2.size(); end += 100) {
      double s = 0;
      for (std::size_t i = end - 100; i < end; ++i) s += x2[i];
      ma.push_back(s / 100.0);
    }
    INFO("feature " << name);
    CHECK(x2.front() == doctest::Approx(3.0).epsilon(0.01));
    CHECK(ma.back() > ma.front() + 0.5);
    for (std::size_t i = 1; i < ma.size(); ++i) CHECK(ma[i] >= ma[i - 1] - 0.1);
  }
}
