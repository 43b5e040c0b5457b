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

#include "dimmask/trainflow.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <thread>

#include "dimmask/log.hpp"

namespace dimmask {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

constexpr std::size_t kEvalChunk = 8192;

std::vector<double> predict_all(const Model& model, const Dataset& ds) {
  std::vector<double> probs;
  probs.reserve(ds.rows);
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < ds.rows; begin += kEvalChunk) {
    const std::size_t end = std::min(ds.rows, begin + kEvalChunk);
    idx.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) idx[i - begin] = i;
    const auto p = model.predict(ds.gather(idx));
    probs.insert(probs.end(), p.begin(), p.end());
  }
  return probs;
}

EvalReport evaluate_model(const Model& model, const Dataset& ds, double train_rate) {
  const auto probs = predict_all(model, ds);
  return evaluate(probs, ds.labels, train_rate);
}

}  // namespace

LoadedData load_data(const RunConfig& config, ModelSpec& spec_out) {
  LoadedData out;
  if (config.data.path.empty()) throw InputError("config has no data_path");
  if (config.data.kind == DataKind::kSynthetic) {
    Dataset all = read_synthetic(config.data.path);
    spec_out = config.resolve_model(all.feature_names, all.buckets);
    all = all.project(spec_out);
    const auto n_test = static_cast<std::size_t>(
        std::llround(config.data.test_fraction * static_cast<double>(all.rows)));
    out.train = all.slice(0, all.rows - n_test);
    out.test = all.slice(all.rows - n_test, all.rows);
  } else {
    const auto defaults = default_avazu_features(config.base_dim, config.use_dml, MaskConfig{}, 0.0);
    std::vector<std::string> names;
    std::vector<std::size_t> buckets;
    for (const auto& f : defaults) {
      names.push_back(f.name);
      buckets.push_back(f.buckets);
    }
    spec_out = config.resolve_model(names, buckets);
    AvazuOptions opts;
    opts.row_cap = config.data.row_cap;
    opts.cap_seed = config.data.cap_seed;
    AvazuIngest ing = ingest_avazu(config.data.path, spec_out.features, opts);
    if (ing.skipped > 0) log::info("skipped ", ing.skipped, " unparseable rows of ", ing.parsed + ing.skipped);
    out.train = std::move(ing.train);
    out.test = std::move(ing.test);
  }
  if (out.train.rows == 0) throw InputError("training split is empty");
  return out;
}

std::vector<std::optional<std::uint64_t>> detect_plateaus(const DimTrajectory& trajectory,
                                                          const std::vector<std::string>& features,
                                                          std::uint64_t window, double tolerance) {
  std::vector<std::optional<std::uint64_t>> result(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    std::deque<const DimRecord*> win;
    for (const auto& rec : trajectory) {
      if (rec.feature != features[f]) continue;
      win.push_back(&rec);
      while (rec.step - win.front()->step >= window) win.pop_front();
      if (rec.step < window) continue;
      double lo = win.front()->x2, hi = lo;
      for (const auto* r : win) {
        lo = std::min(lo, r->x2);
        hi = std::max(hi, r->x2);
      }
      if (hi - lo < tolerance) {
        result[f] = rec.step;
        break;
      }
    }
  }
  return result;
}

TrainResult train(const RunConfig& config, const ModelSpec& spec, const Dataset& train_set,
                  const Dataset& test_set) {
  config.validate();
  const double train_rate = train_set.positive_rate();
  if (!(train_rate > 0.0 && train_rate < 1.0))
    throw InputError("training labels are single-class; the naive baseline is undefined");

  TrainResult res{.checkpoint = Checkpoint{Model(spec, config.seed)}, .trajectory = {}, .metrics = {},
                  .test_report = {}, .losses = {}, .plateau_step = {}};
  res.checkpoint.hyperparameters = to_json(config);
  res.checkpoint.train_positive_rate = train_rate;
  Model& model = res.checkpoint.model;
  ModelOptimizer opt(model, config.optimizer);

  const Dataset& eval_set = test_set.rows > 0 ? test_set : train_set;
  const std::string eval_split = test_set.rows > 0 ? "test" : "train";

  std::uint64_t step = 0;
  Batch batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    BatchIterator it(train_set, config.batch_size, derive_seed(config.seed, 0xe90c0000 + epoch));
    while (it.next(batch)) {
      ++step;
      StepResult sr = model.forward_backward(batch, Mode::kTrain, true);
      if (!std::isfinite(sr.total_loss))
        throw RuntimeFailure("non-finite loss at step " + std::to_string(step));
      res.losses.push_back({sr.total_loss, sr.bce_loss, sr.reg_loss});
      if (config.log_every > 0 && step % config.log_every == 0) {
        for (std::size_t f = 0; f < spec.features.size(); ++f) {
          const auto& m = model.masks()[f];
          if (!m) continue;
          const double x2 = sr.effective_dims[f];
          const auto ceil_dim = static_cast<std::size_t>(
              std::ceil(std::min(x2, static_cast<double>(m->original_dim))));
          res.trajectory.push_back({step, spec.features[f].name, x2, ceil_dim});
        }
      }
      opt.step(model, sr.grads);
      if (config.eval_every > 0 && step % config.eval_every == 0) {
        res.metrics.push_back({step, eval_split, evaluate_model(model, eval_set, train_rate)});
        log::info("step ", step, " ", eval_split, " rce=", fixed6(res.metrics.back().report.rce));
      }
      if (step % 200 == 0) log::debug("step ", step, " loss=", sr.total_loss);
    }
  }
  res.checkpoint.steps = step;
  res.test_report = evaluate_model(model, eval_set, train_rate);
  if (res.metrics.empty() || res.metrics.back().step != step)
    res.metrics.push_back({step, eval_split, res.test_report});

  std::vector<std::string> names;
  for (const auto& f : spec.features)
    if (f.use_dml) names.push_back(f.name);
  const auto plateaus = detect_plateaus(res.trajectory, names);
  res.plateau_step.assign(spec.features.size(), std::nullopt);
  for (std::size_t f = 0, k = 0; f < spec.features.size(); ++f)
    if (spec.features[f].use_dml) res.plateau_step[f] = plateaus[k++];
  return res;
}

TrainResult train(const RunConfig& config) {
  ModelSpec spec;
  const LoadedData data = load_data(config, spec);
  log::info("training on ", data.train.rows, " rows, testing on ", data.test.rows, " rows");
  TrainResult res = train(config, spec, data.train, data.test);
  write_run(res, config.output_dir);
  return res;
}

void write_dims_csv(const DimTrajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << "step,feature,x2,ceil_dim\n";
  for (const auto& r : trajectory)
    out << r.step << ',' << r.feature << ',' << fixed6(r.x2) << ',' << r.ceil_dim << '\n';
}

void write_metrics_csv(const std::vector<MetricRecord>& rows, const std::filesystem::path& path,
                       bool append) {
  const bool fresh = !append || !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::binary | (fresh ? std::ios::trunc : std::ios::app));
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  if (fresh) out << "step,split,logloss,auc,rce\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.split << ',' << fixed6(r.report.logloss) << ','
        << (r.report.auc ? fixed6(*r.report.auc) : "") << ',' << fixed6(r.report.rce) << '\n';
  }
}

void write_run(const TrainResult& result, const std::filesystem::path& dir) {
  save_checkpoint(result.checkpoint, dir);
  write_dims_csv(result.trajectory, dir / "dims.csv");
  write_metrics_csv(result.metrics, dir / "metrics.csv");
}

Checkpoint trim(const Checkpoint& ckpt) {
  const Model& src = ckpt.model;
  if (!src.has_masks()) throw InputError("checkpoint has no mask layers to trim");
  const auto& spec = src.spec();
  ModelSpec new_spec = spec;
  std::vector<EmbeddingTable> tables;
  std::vector<std::size_t> keep_rows;  // surviving rows of the first dense layer
  std::size_t offset = 0;
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    const auto& table = src.tables()[f];
    const auto& mask = src.masks()[f];
    const std::size_t d = spec.features[f].base_dim;
    if (!mask) {
      tables.push_back(table);
      for (std::size_t c = 0; c < d; ++c) keep_rows.push_back(offset + c);
      offset += d;
      continue;
    }
    const std::size_t n = finalize_dim(*mask);
    const auto profile = compute_mask(*mask);
    const auto gate = expected_gate(profile.mask, mask->config.alpha);
    EmbeddingTable t(table.vocab, n);
    for (std::size_t v = 0; v < table.vocab; ++v)
      for (std::size_t c = 0; c < n; ++c) t.weights(v, c) = table.weights(v, c) * gate[c];
    tables.push_back(std::move(t));
    for (std::size_t c = 0; c < n; ++c) keep_rows.push_back(offset + c);
    offset += d;
    auto& fs = new_spec.features[f];
    fs.base_dim = n;
    fs.use_dml = false;
    fs.initial_effective_dim = 0.0;
  }
  std::vector<DenseLayer> layers = src.layers();
  const DenseLayer& first = src.layers().front();
  DenseLayer cut(keep_rows.size(), first.out_dim);
  for (std::size_t i = 0; i < keep_rows.size(); ++i) {
    const auto from = first.weights.row(keep_rows[i]);
    std::copy(from.begin(), from.end(), cut.weights.row(i).begin());
  }
  cut.bias = first.bias;
  layers.front() = std::move(cut);

  Checkpoint out{ckpt.model};
  out.model.reset_structure(std::move(new_spec), std::move(tables), std::move(layers));
  out.hyperparameters = ckpt.hyperparameters;
  out.steps = ckpt.steps;
  out.train_positive_rate = ckpt.train_positive_rate;
  out.trimmed = true;
  return out;
}

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& data) {
  const Dataset projected = data.project(ckpt.model.spec());
  if (projected.rows == 0) throw InputError("evaluation set is empty");
  return evaluate_model(ckpt.model, projected, ckpt.train_positive_rate);
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<RegularizerKind>& regularizers,
                            const std::vector<double>& weights, const std::filesystem::path& out_dir,
                            std::size_t jobs) {
  base.validate();
  for (double w : weights)
    if (!(w >= 0.0)) throw InputError("sweep weights must be >= 0");
  ModelSpec base_spec;
  const LoadedData data = load_data(base, base_spec);
  std::filesystem::create_directories(out_dir);

  struct Plan {
    SweepRow row;
    RunConfig config;
  };
  std::vector<Plan> plans;
  auto row_named = [](std::string id) {
    SweepRow r;
    r.run_id = std::move(id);
    return r;
  };
  {
    Plan p{row_named("baseline"), base};
    p.config.use_dml = false;
    for (auto& f : p.config.features) f.use_dml = false;
    plans.push_back(std::move(p));
  }
  for (auto kind : regularizers) {
    for (double w : weights) {
      Plan p{row_named(to_string(kind) + "_" + short_num(w)), base};
      p.row.regularizer = kind;
      p.row.weight = w;
      p.config.regularizer = kind;
      p.config.regularizer_weight = w;
      for (auto& f : p.config.features) {
        f.regularizer.reset();
        f.regularizer_weight.reset();
      }
      plans.push_back(std::move(p));
    }
  }
  for (std::size_t i = 0; i < plans.size(); ++i) {
    plans[i].config.seed = derive_seed(base.seed, i);
    plans[i].config.output_dir = out_dir / plans[i].row.run_id;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      Plan& p = plans[i];
      try {
        const ModelSpec spec = p.config.resolve_model(data.train.feature_names, data.train.buckets);
        TrainResult r = train(p.config, spec, data.train, data.test);
        write_run(r, p.config.output_dir);
        p.row.dims = r.checkpoint.finalized_dims();
        p.row.total_dims = r.checkpoint.total_dims();
        p.row.zero_dim_features = r.checkpoint.zero_dim_features();
        p.row.test_rce = r.test_report.rce;
        p.row.test_auc = r.test_report.auc;
        log::info("sweep ", p.row.run_id, ": dims=", p.row.total_dims, " rce=", fixed6(p.row.test_rce));
      } catch (const std::exception& e) {
        p.row.ok = false;
        p.row.error = e.what();
        log::info("sweep ", p.row.run_id, " failed: ", e.what());
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, plans.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<SweepRow> rows;
  for (auto& p : plans) rows.push_back(std::move(p.row));
  write_frontier_csv(rows, out_dir / "frontier.csv");
  return rows;
}

void write_frontier_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << "run_id,regularizer,weight,total_dims,test_rce,test_auc,zero_dim_features\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << (r.regularizer ? to_string(*r.regularizer) : "") << ','
        << (r.weight ? short_num(*r.weight) : "") << ',';
    if (r.ok) {
      out << r.total_dims << ',' << fixed6(r.test_rce) << ',' << (r.test_auc ? fixed6(*r.test_auc) : "")
          << ',' << r.zero_dim_features;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

}  // namespace dimmask
