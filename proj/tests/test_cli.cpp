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

#include <sstream>

#include "cli.hpp"
#include "test_util.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "dimmask");
  std::ostringstream out, err;
  const int code = dimmask::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("usage errors exit 1 with help on stderr; --help exits 0") {
  auto r = run({"train", "--config", "x.json", "--bogus"});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "--bogus"));
  CHECK(contains(r.err, "--config"));
  CHECK(r.out.empty());

  r = run({});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "gen-synth"));

  r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "sweep"));

  r = run({"gen-synth", "--out", "x.csv", "--features", "2", "--planted", "1,2,3"});
  CHECK(r.code == 1);
  r = run({"train", "--config", "/nonexistent/config.json"});
  CHECK(r.code == 1);
}

TEST_CASE("gen-synth is byte-deterministic") {
  testutil::TempDir tmp;
  const std::vector<std::string> args = {"--features", "3",   "--vocab", "40", "--planted", "2,3,4",
                                         "--irrelevant", "1", "--rows", "500", "--seed", "9"};
  auto a = args, b = args;
  a.insert(a.begin(), {"gen-synth", "--out", (tmp / "a.csv").string()});
  b.insert(b.begin(), {"gen-synth", "--out", (tmp / "b.csv").string()});
  CHECK(run(a).code == 0);
  CHECK(run(b).code == 0);
  const std::string text = testutil::read_file(tmp / "a.csv");
  CHECK(text == testutil::read_file(tmp / "b.csv"));
  CHECK(text.rfind("#DMLSYN v1 seed=9 planted=2,3,4,0", 0) == 0);
}

TEST_CASE("train without masks, then eval, trim refusal, sweep and plot") {
  testutil::TempDir tmp;
  REQUIRE(run({"gen-synth", "--out", (tmp / "d.csv").string(), "--features", "2", "--vocab", "50", "--rows",
               "1500", "--irrelevant", "1"})
              .code == 0);
  const std::string plain = R"({"data_path": "d.csv", "use_dml": false, "base_dim": 4,
                                "hidden": [8, 4], "batch_size": 64, "output_dir": "plain"})";
  testutil::write_file(tmp / "plain.json", plain);
  auto r = run({"train", "--config", (tmp / "plain.json").string(), "--out", (tmp / "run").string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "rce="));
  CHECK(contains(r.out, "auc="));
  CHECK(testutil::read_file(tmp / "run" / "dims.csv") == "step,feature,x2,ceil_dim\n");

  r = run({"eval", "--model", (tmp / "run").string(), "--data", (tmp / "d.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "n=1500"));
  CHECK(contains(r.out, "auc="));
  CHECK(contains(testutil::read_file(tmp / "run" / "metrics.csv"), ",eval,"));

  r = run({"trim", "--model", (tmp / "run").string(), "--out", (tmp / "trimmed").string()});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "no mask layers"));

  testutil::write_file(tmp / "dml.json", R"({"data_path": "d.csv", "base_dim": 4, "hidden": [8, 4],
                                             "batch_size": 64, "epochs": 1})");
  r = run({"sweep", "--config", (tmp / "dml.json").string(), "--reg", "l1,l2", "--weights",
           "1e-2,1e-3,1e-4,1e-5", "--out", (tmp / "sw").string(), "--jobs", "3"});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "9 runs, 0 failed"));

  r = run({"trim", "--model", (tmp / "sw" / "l1_0.001").string(), "--out", (tmp / "trimmed").string()});
  CHECK(r.code == 0);
  r = run({"eval", "--model", (tmp / "trimmed").string(), "--data", (tmp / "d.csv").string()});
  CHECK(r.code == 0);

  CHECK(run({"plot", "--runs", (tmp / "sw").string(), "--out", (tmp / "a.svg").string()}).code == 0);
  CHECK(run({"plot", "--runs", (tmp / "sw").string(), "--out", (tmp / "b.svg").string()}).code == 0);
  const std::string svg = testutil::read_file(tmp / "a.svg");
  CHECK(svg == testutil::read_file(tmp / "b.svg"));
  CHECK(contains(svg, "<svg"));
  CHECK(contains(svg, "baseline"));
}

TEST_CASE("runtime failures exit 2") {
  testutil::TempDir tmp;
  REQUIRE(run({"gen-synth", "--out", (tmp / "d.csv").string(), "--features", "2", "--vocab", "20", "--rows",
               "400"})
              .code == 0);
  testutil::write_file(tmp / "bad.json", R"({"data_path": "d.csv", "base_dim": 4, "hidden": [8],
                                             "batch_size": 32, "learning_rate": 1e300})");
  const auto r = run({"train", "--config", (tmp / "bad.json").string(), "--out", (tmp / "run").string()});
  CHECK(r.code == 2);
  CHECK(contains(r.err, "non-finite loss"));
}
