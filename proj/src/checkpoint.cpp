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

#include "dimmask/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dimmask {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'D', 'M', 'L', 'C'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

}  // namespace

std::vector<std::size_t> Checkpoint::finalized_dims() const {
  std::vector<std::size_t> dims;
  const auto& masks = model.masks();
  for (std::size_t f = 0; f < model.spec().features.size(); ++f)
    dims.push_back(masks[f] ? finalize_dim(*masks[f]) : model.spec().features[f].base_dim);
  return dims;
}

std::size_t Checkpoint::total_dims() const {
  std::size_t total = 0;
  for (auto d : finalized_dims()) total += d;
  return total;
}

std::size_t Checkpoint::zero_dim_features() const {
  std::size_t n = 0;
  for (auto d : finalized_dims()) n += d == 0 ? 1 : 0;
  return n;
}

json spec_to_json(const Checkpoint& ckpt) {
  const auto& spec = ckpt.model.spec();
  const auto dims = ckpt.finalized_dims();
  json j;
  j["format"] = "dimmask-checkpoint";
  j["version"] = kParamsVersion;
  j["seed"] = ckpt.model.seed();
  j["steps"] = ckpt.steps;
  j["train_positive_rate"] = ckpt.train_positive_rate;
  j["trimmed"] = ckpt.trimmed;
  j["hidden"] = spec.hidden;
  json fs = json::array();
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    const auto& fe = spec.features[f];
    json o;
    o["name"] = fe.name;
    o["buckets"] = fe.buckets;
    o["base_dim"] = fe.base_dim;
    o["use_dml"] = fe.use_dml;
    o["initial_effective_dim"] = fe.initial_effective_dim;
    o["slope"] = fe.mask.slope;
    o["alpha"] = fe.mask.alpha;
    o["regularizer"] = to_string(fe.mask.regularizer.kind);
    o["regularizer_weight"] = fe.mask.regularizer.weight;
    if (const auto& m = ckpt.model.masks()[f]) o["effective_dim"] = m->effective_dim();
    o["finalized_dim"] = dims[f];
    fs.push_back(std::move(o));
  }
  j["features"] = std::move(fs);
  j["total_dims"] = ckpt.total_dims();
  j["hyperparameters"] = ckpt.hyperparameters;
  return j;
}

void write_params(const Model& model, const std::filesystem::path& path) {
  std::string buf(kMagic, 4);
  put_le<std::uint32_t>(buf, kParamsVersion);
  for (const auto& block : model.parameter_blocks())
    for (double v : block) put_le<double>(buf, v);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

void read_params(Model& model, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw InputError(path.string() + ": not a DMLC parameter file");
  const auto version = get_le<std::uint32_t>(buf.data() + 4);
  if (version != kParamsVersion)
    throw InputError(path.string() + ": unsupported version " + std::to_string(version));
  const std::size_t expected = 8 + 8 * model.parameter_count();
  if (buf.size() != expected)
    throw InputError(path.string() + ": size " + std::to_string(buf.size()) + " does not match the model spec (" +
                     std::to_string(expected) + " bytes)");
  const unsigned char* p = buf.data() + 8;
  for (auto block : model.parameter_blocks())
    for (double& v : block) {
      v = get_le<double>(p);
      p += 8;
    }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "spec.json", std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write " + (dir / "spec.json").string());
    out << spec_to_json(ckpt).dump(2) << "\n";
  }
  write_params(ckpt.model, dir / "params.bin");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "spec.json");
  if (!in) throw InputError("no spec.json in " + dir.string());
  json j;
  try {
    j = json::parse(in);
    ModelSpec spec;
    spec.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    for (const auto& o : j.at("features")) {
      FeatureSpec f;
      f.name = o.at("name").get<std::string>();
      f.buckets = o.at("buckets").get<std::size_t>();
      f.base_dim = o.at("base_dim").get<std::size_t>();
      f.use_dml = o.at("use_dml").get<bool>();
      f.initial_effective_dim = o.at("initial_effective_dim").get<double>();
      f.mask.slope = o.at("slope").get<double>();
      f.mask.alpha = o.at("alpha").get<double>();
      f.mask.regularizer.kind = parse_regularizer(o.at("regularizer").get<std::string>());
      f.mask.regularizer.weight = o.at("regularizer_weight").get<double>();
      spec.features.push_back(std::move(f));
    }
    Checkpoint ckpt{Model(std::move(spec), j.at("seed").get<std::uint64_t>())};
    ckpt.steps = j.at("steps").get<std::uint64_t>();
    ckpt.train_positive_rate = j.at("train_positive_rate").get<double>();
    ckpt.trimmed = j.at("trimmed").get<bool>();
    ckpt.hyperparameters = j.value("hyperparameters", json::object());
    read_params(ckpt.model, dir / "params.bin");
    return ckpt;
  } catch (const json::exception& e) {
    throw InputError(dir.string() + "/spec.json: " + e.what());
  }
}

}  // namespace dimmask
