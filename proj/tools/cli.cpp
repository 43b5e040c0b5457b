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

#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dimmask/checkpoint.hpp"
#include "dimmask/config.hpp"
#include "dimmask/data.hpp"
#include "dimmask/log.hpp"
#include "dimmask/metrics.hpp"
#include "dimmask/plot.hpp"
#include "dimmask/trainflow.hpp"

namespace dimmask::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void print_report(std::ostream& out, const EvalReport& r) {
  out << "n=" << r.n << " logloss=" << fixed6(r.logloss) << " naive_ce=" << fixed6(r.naive_ce)
      << " rce=" << fixed6(r.rce) << " auc=" << (r.auc ? fixed6(*r.auc) : std::string("n/a")) << "\n";
}

Dataset load_eval_data(const std::filesystem::path& path) {
  if (is_synthetic_file(path)) return read_synthetic(path);
  const auto features = default_avazu_features(16, false, MaskConfig{}, 0.0);
  AvazuOptions opts;
  opts.split = SplitRule::kAllTrain;
  return ingest_avazu(path, features, opts).train;
}

struct Args {
  // train
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  // eval / trim
  std::string model;
  std::string data;
  // gen-synth
  std::size_t features = 4;
  std::size_t vocab = 1000;
  std::string planted = "4";
  std::size_t irrelevant = 0;
  std::size_t rows = 200000;
  double noise = 0.5;
  std::uint64_t synth_seed = 1;
  // sweep
  std::string regs = "l1,l2";
  std::string weights = "1e-2,1e-3,1e-4,1e-5";
  std::size_t jobs = 1;
  // plot
  std::string runs;
};

int cmd_train(const Args& a, std::ostream& out) {
  RunConfig cfg = load_run_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (!a.out.empty()) cfg.output_dir = a.out;
  const TrainResult r = train(cfg);
  out << "run: " << cfg.output_dir.string() << "\n";
  const auto dims = r.checkpoint.finalized_dims();
  const auto& spec = r.checkpoint.model.spec();
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    if (!spec.features[f].use_dml) continue;
    out << "  " << spec.features[f].name << ": x2=" << fixed6(r.checkpoint.model.masks()[f]->effective_dim())
        << " dim=" << dims[f];
    if (r.plateau_step[f]) out << " (plateau at step " << *r.plateau_step[f] << ")";
    out << "\n";
  }
  out << "total_dims=" << r.checkpoint.total_dims() << " ";
  print_report(out, r.test_report);
  return kOk;
}

int cmd_eval(const Args& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const Dataset data = load_eval_data(a.data);
  const EvalReport r = evaluate_checkpoint(ckpt, data);
  print_report(out, r);
  write_metrics_csv({MetricRecord{ckpt.steps, "eval", r}}, std::filesystem::path(a.model) / "metrics.csv",
                    true);
  return kOk;
}

int cmd_gen_synth(const Args& a, std::ostream& out) {
  SynthConfig sc;
  const auto planted = split_list(a.planted);
  if (planted.empty()) throw InputError("--planted needs at least one value");
  if (planted.size() != 1 && planted.size() != a.features)
    throw InputError("--planted must list one value or exactly --features values");
  for (std::size_t f = 0; f < a.features; ++f) {
    const auto& text = planted.size() == 1 ? planted[0] : planted[f];
    try {
      sc.planted.push_back(std::stoi(text));
    } catch (const std::exception&) {
      throw InputError("bad planted dimension '" + text + "'");
    }
  }
  sc.irrelevant = a.irrelevant;
  sc.vocab = a.vocab;
  sc.rows = a.rows;
  sc.noise = a.noise;
  sc.seed = a.synth_seed;
  const Dataset ds = gen_synthetic(sc);
  write_synthetic(ds, a.out, sc.vocab);
  out << "wrote " << ds.rows << " rows, " << ds.feature_count() << " features, positive rate "
      << fixed6(ds.positive_rate()) << " to " << a.out << "\n";
  return kOk;
}

int cmd_trim(const Args& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const Checkpoint trimmed = trim(ckpt);
  save_checkpoint(trimmed, a.out);
  const auto& spec = trimmed.model.spec();
  out << "trimmed " << ckpt.model.spec().input_width() << " -> " << spec.input_width() << " dims:";
  for (const auto& f : spec.features) out << " " << f.name << "=" << f.base_dim;
  out << "\n";
  return kOk;
}

int cmd_sweep(const Args& a, std::ostream& out) {
  const RunConfig cfg = load_run_config(a.config);
  std::vector<RegularizerKind> regs;
  for (const auto& r : split_list(a.regs)) regs.push_back(parse_regularizer(r));
  std::vector<double> weights;
  for (const auto& w : split_list(a.weights)) {
    try {
      weights.push_back(std::stod(w));
    } catch (const std::exception&) {
      throw InputError("bad weight '" + w + "'");
    }
  }
  if (regs.empty() || weights.empty()) throw InputError("sweep needs at least one regularizer and weight");
  const auto rows = sweep(cfg, regs, weights, a.out, std::max<std::size_t>(1, a.jobs));
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  out << "frontier: " << (std::filesystem::path(a.out) / "frontier.csv").string() << " (" << rows.size()
      << " runs, " << failed << " failed)\n";
  return failed == rows.size() ? kRuntimeError : kOk;
}

int cmd_plot(const Args& a, std::ostream& out) {
  const auto points = read_frontier_csv(std::filesystem::path(a.runs) / "frontier.csv");
  const std::string svg = render_frontier_svg(points);
  std::ofstream f(a.out, std::ios::binary);
  if (!f) throw InputError("cannot write " + a.out);
  f << svg;
  out << "wrote " << points.size() << " points to " << a.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn embedding dimensions with mask layers, then trim the model."};
  app.require_subcommand(1);
  Args a;

  auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON run config");
  train_cmd->add_option("--config", a.config, "Run config (JSON)")->required();
  train_cmd->add_option("--seed", a.seed, "Override the config seed");
  train_cmd->add_option("--out", a.out, "Override the output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run directory on a data file");
  eval_cmd->add_option("--model", a.model, "Run directory")->required();
  eval_cmd->add_option("--data", a.data, "Synthetic or Avazu CSV file")->required();

  auto* gen_cmd = app.add_subcommand("gen-synth", "Generate a planted-dimension synthetic dataset");
  gen_cmd->add_option("--out", a.out, "Output file")->required();
  gen_cmd->add_option("--features", a.features, "Relevant features")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--vocab", a.vocab, "Ids per feature")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--planted", a.planted, "Latent dims k1,k2,... (or one value for all)");
  gen_cmd->add_option("--irrelevant", a.irrelevant, "Extra features unrelated to the label");
  gen_cmd->add_option("--rows", a.rows, "Rows")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--noise", a.noise, "Logit noise scale")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", a.synth_seed, "Generator seed");

  auto* trim_cmd = app.add_subcommand("trim", "Replace mask layers by their learned hard dimension");
  trim_cmd->add_option("--model", a.model, "Run directory")->required();
  trim_cmd->add_option("--out", a.out, "Output run directory")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Regularizer x weight sweep plus a baseline run");
  sweep_cmd->add_option("--config", a.config, "Base run config (JSON)")->required();
  sweep_cmd->add_option("--reg", a.regs, "Regularizers, e.g. l1,l2");
  sweep_cmd->add_option("--weights", a.weights, "Regularizer weights");
  sweep_cmd->add_option("--out", a.out, "Sweep output directory")->required();
  sweep_cmd->add_option("--jobs", a.jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto* plot_cmd = app.add_subcommand("plot", "Render frontier.csv as an SVG scatter");
  plot_cmd->add_option("--runs", a.runs, "Sweep directory holding frontier.csv")->required();
  plot_cmd->add_option("--out", a.out, "Output SVG")->required();

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kInputError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(a, out);
    if (eval_cmd->parsed()) return cmd_eval(a, out);
    if (gen_cmd->parsed()) return cmd_gen_synth(a, out);
    if (trim_cmd->parsed()) return cmd_trim(a, out);
    if (sweep_cmd->parsed()) return cmd_sweep(a, out);
    if (plot_cmd->parsed()) return cmd_plot(a, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kRuntimeError;
  }
  err << app.help();
  return kInputError;
}

}  // namespace dimmask::cli
