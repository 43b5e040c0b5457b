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

#include "dimmask/config.hpp"

#include <fstream>
#include <set>

namespace dimmask {

using nlohmann::json;

std::string to_string(InitStrategy s) { return s == InitStrategy::kExpand ? "expand" : "shrink"; }

namespace {

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw InputError("config key '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

double get_number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) throw InputError("config key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InputError("unknown " + where + " key '" + it.key() + "'");
}

const std::set<std::string> kFeatureKeys = {"name",  "buckets", "base_dim",    "use_dml",
                                            "initial_effective_dim", "slope", "alpha",
                                            "regularizer", "regularizer_weight"};

const std::set<std::string> kRunKeys = {
    "seed",         "epochs",      "batch_size",   "learning_rate", "beta1",
    "beta2",        "epsilon",     "init_strategy", "log_every",    "eval_every",
    "output_dir",   "hidden",      "data_kind",    "data_path",     "test_fraction",
    "row_cap",      "cap_seed",    "base_dim",     "use_dml",       "slope",
    "alpha",        "regularizer", "regularizer_weight", "initial_effective_dim", "features"};

}  // namespace

double RunConfig::effective_weight() const {
  if (regularizer_weight) return *regularizer_weight;
  return init_strategy == InitStrategy::kExpand ? 0.0 : 0.001;
}

double RunConfig::effective_initial_dim(std::size_t dim) const {
  if (initial_effective_dim) return std::min(*initial_effective_dim, static_cast<double>(dim));
  return init_strategy == InitStrategy::kExpand ? std::min(3.0, static_cast<double>(dim))
                                                : static_cast<double>(dim);
}

void RunConfig::validate() const {
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  optimizer.validate();
  if (base_dim < 1) throw InputError("base_dim must be >= 1");
  MaskConfig m{slope, alpha, {regularizer, effective_weight()}};
  m.validate();
  if (initial_effective_dim && *initial_effective_dim < 0.0)
    throw InputError("initial_effective_dim must be >= 0");
  if (!(data.test_fraction >= 0.0 && data.test_fraction < 1.0))
    throw InputError("test_fraction must lie in [0, 1)");
  for (auto h : hidden)
    if (h < 1) throw InputError("hidden layer widths must be >= 1");
  std::set<std::string> names;
  for (const auto& f : features) {
    if (!names.insert(f.name).second) throw InputError("duplicate feature '" + f.name + "'");
    if (f.regularizer_weight && *f.regularizer_weight < 0.0)
      throw InputError("feature '" + f.name + "': regularizer_weight must be >= 0");
  }
}

ModelSpec RunConfig::resolve_model(const std::vector<std::string>& dataset_features,
                                   const std::vector<std::size_t>& dataset_buckets) const {
  ModelSpec spec;
  spec.hidden = hidden;
  auto dataset_buckets_of = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < dataset_features.size(); ++i)
      if (dataset_features[i] == name) return dataset_buckets[i];
    return std::nullopt;
  };
  auto build = [&](const FeatureOverride& o) {
    FeatureSpec f;
    f.name = o.name;
    const auto known = dataset_buckets_of(o.name);
    if (!known) throw InputError("config references unknown feature '" + o.name + "'");
    f.buckets = o.buckets.value_or(*known);
    f.base_dim = o.base_dim.value_or(base_dim);
    f.use_dml = o.use_dml.value_or(use_dml);
    f.mask.slope = o.slope.value_or(slope);
    f.mask.alpha = o.alpha.value_or(alpha);
    f.mask.regularizer.kind = o.regularizer.value_or(regularizer);
    f.mask.regularizer.weight = o.regularizer_weight.value_or(effective_weight());
    f.initial_effective_dim = o.initial_effective_dim ? *o.initial_effective_dim
                                                      : effective_initial_dim(f.base_dim);
    return f;
  };
  if (features.empty()) {
    for (const auto& name : dataset_features) {
      FeatureOverride o;
      o.name = name;
      spec.features.push_back(build(o));
    }
  } else {
    for (const auto& o : features) spec.features.push_back(build(o));
  }
  spec.validate();
  return spec;
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  reject_unknown(j, kRunKeys, "config");
  RunConfig c;
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("epochs")) c.epochs = get_count(j, "epochs");
  if (j.contains("batch_size")) c.batch_size = get_count(j, "batch_size");
  if (j.contains("learning_rate")) c.optimizer.learning_rate = get_number(j, "learning_rate");
  if (j.contains("beta1")) c.optimizer.beta1 = get_number(j, "beta1");
  if (j.contains("beta2")) c.optimizer.beta2 = get_number(j, "beta2");
  if (j.contains("epsilon")) c.optimizer.epsilon = get_number(j, "epsilon");
  if (j.contains("init_strategy")) {
    const auto s = get_as<std::string>(j, "init_strategy");
    if (s == "expand") c.init_strategy = InitStrategy::kExpand;
    else if (s == "shrink") c.init_strategy = InitStrategy::kShrink;
    else throw InputError("init_strategy must be 'expand' or 'shrink'");
  }
  if (j.contains("log_every")) c.log_every = get_count(j, "log_every");
  if (j.contains("eval_every")) c.eval_every = get_count(j, "eval_every");
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("hidden")) {
    c.hidden.clear();
    if (!j.at("hidden").is_array()) throw InputError("config key 'hidden' must be an array");
    for (const auto& h : j.at("hidden")) {
      if (!h.is_number_integer() || h.get<long long>() < 1)
        throw InputError("hidden layer widths must be positive integers");
      c.hidden.push_back(h.get<std::size_t>());
    }
  }
  if (j.contains("data_kind")) {
    const auto s = get_as<std::string>(j, "data_kind");
    if (s == "synthetic") c.data.kind = DataKind::kSynthetic;
    else if (s == "avazu") c.data.kind = DataKind::kAvazu;
    else throw InputError("data_kind must be 'synthetic' or 'avazu'");
  }
  if (j.contains("data_path")) {
    std::filesystem::path p = get_as<std::string>(j, "data_path");
    c.data.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (j.contains("test_fraction")) c.data.test_fraction = get_number(j, "test_fraction");
  if (j.contains("row_cap")) c.data.row_cap = get_count(j, "row_cap");
  if (j.contains("cap_seed")) c.data.cap_seed = get_as<std::uint64_t>(j, "cap_seed");
  if (j.contains("base_dim")) c.base_dim = get_count(j, "base_dim");
  if (j.contains("use_dml")) c.use_dml = get_as<bool>(j, "use_dml");
  if (j.contains("slope")) c.slope = get_number(j, "slope");
  if (j.contains("alpha")) c.alpha = get_number(j, "alpha");
  if (j.contains("regularizer")) c.regularizer = parse_regularizer(get_as<std::string>(j, "regularizer"));
  if (j.contains("regularizer_weight")) c.regularizer_weight = get_number(j, "regularizer_weight");
  if (j.contains("initial_effective_dim"))
    c.initial_effective_dim = get_number(j, "initial_effective_dim");
  if (j.contains("features")) {
    if (!j.at("features").is_array()) throw InputError("config key 'features' must be an array");
    for (const auto& fj : j.at("features")) {
      if (!fj.is_object()) throw InputError("each feature entry must be an object");
      reject_unknown(fj, kFeatureKeys, "feature");
      if (!fj.contains("name")) throw InputError("feature entry needs a 'name'");
      FeatureOverride o;
      o.name = get_as<std::string>(fj, "name");
      if (fj.contains("buckets")) o.buckets = get_count(fj, "buckets");
      if (fj.contains("base_dim")) o.base_dim = get_count(fj, "base_dim");
      if (fj.contains("use_dml")) o.use_dml = get_as<bool>(fj, "use_dml");
      if (fj.contains("initial_effective_dim"))
        o.initial_effective_dim = get_number(fj, "initial_effective_dim");
      if (fj.contains("slope")) o.slope = get_number(fj, "slope");
      if (fj.contains("alpha")) o.alpha = get_number(fj, "alpha");
      if (fj.contains("regularizer"))
        o.regularizer = parse_regularizer(get_as<std::string>(fj, "regularizer"));
      if (fj.contains("regularizer_weight")) o.regularizer_weight = get_number(fj, "regularizer_weight");
      c.features.push_back(std::move(o));
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.optimizer.learning_rate;
  j["beta1"] = c.optimizer.beta1;
  j["beta2"] = c.optimizer.beta2;
  j["epsilon"] = c.optimizer.epsilon;
  j["init_strategy"] = to_string(c.init_strategy);
  j["log_every"] = c.log_every;
  j["eval_every"] = c.eval_every;
  j["hidden"] = c.hidden;
  j["data_kind"] = c.data.kind == DataKind::kSynthetic ? "synthetic" : "avazu";
  j["data_path"] = c.data.path.string();
  j["test_fraction"] = c.data.test_fraction;
  j["row_cap"] = c.data.row_cap;
  j["cap_seed"] = c.data.cap_seed;
  j["base_dim"] = c.base_dim;
  j["use_dml"] = c.use_dml;
  j["slope"] = c.slope;
  j["alpha"] = c.alpha;
  j["regularizer"] = to_string(c.regularizer);
  j["regularizer_weight"] = c.effective_weight();
  if (c.initial_effective_dim) j["initial_effective_dim"] = *c.initial_effective_dim;
  else j["initial_effective_dim"] = c.effective_initial_dim(c.base_dim);
  if (!c.features.empty()) {
    json fs = json::array();
    for (const auto& o : c.features) {
      json f;
      f["name"] = o.name;
      if (o.buckets) f["buckets"] = *o.buckets;
      if (o.base_dim) f["base_dim"] = *o.base_dim;
      if (o.use_dml) f["use_dml"] = *o.use_dml;
      if (o.initial_effective_dim) f["initial_effective_dim"] = *o.initial_effective_dim;
      if (o.slope) f["slope"] = *o.slope;
      if (o.alpha) f["alpha"] = *o.alpha;
      if (o.regularizer) f["regularizer"] = to_string(*o.regularizer);
      if (o.regularizer_weight) f["regularizer_weight"] = *o.regularizer_weight;
      fs.push_back(std::move(f));
    }
    j["features"] = std::move(fs);
  }
  return j;
}

}  // namespace dimmask
