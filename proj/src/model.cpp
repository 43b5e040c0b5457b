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

#include "dimmask/model.hpp"

#include <cmath>
#include <limits>

namespace dimmask {

namespace {

// Stream-key namespaces for parameter initialization and gate noise.
constexpr std::uint64_t kTableKey = 0x7461626c65000000ULL;
constexpr std::uint64_t kDenseKey = 0x64656e7365000000ULL;
constexpr std::uint64_t kGateKey = 0x6761746500000000ULL;

}  // namespace

void FeatureSpec::validate(bool allow_zero_width) const {
  if (name.empty()) throw InputError("feature name must not be empty");
  if (buckets < 1) throw InputError("feature '" + name + "': buckets must be >= 1");
  if (base_dim < 1 && !(allow_zero_width && !use_dml))
    throw InputError("feature '" + name + "': base_dim must be >= 1");
  if (use_dml) {
    if (!(initial_effective_dim >= 0.0) ||
        initial_effective_dim > static_cast<double>(base_dim))
      throw InputError("feature '" + name + "': initial_effective_dim must lie in [0, base_dim]");
    mask.validate();
  }
}

std::size_t ModelSpec::input_width() const {
  std::size_t w = 0;
  for (const auto& f : features) w += f.base_dim;
  return w;
}

std::size_t ModelSpec::mask_count() const {
  std::size_t n = 0;
  for (const auto& f : features) n += f.use_dml ? 1 : 0;
  return n;
}

void ModelSpec::validate(bool allow_zero_width) const {
  if (features.empty()) throw InputError("model needs at least one feature");
  for (std::size_t i = 0; i < features.size(); ++i) {
    features[i].validate(allow_zero_width);
    for (std::size_t j = 0; j < i; ++j)
      if (features[j].name == features[i].name)
        throw InputError("duplicate feature name '" + features[i].name + "'");
  }
  for (auto h : hidden)
    if (h < 1) throw InputError("hidden layer widths must be >= 1");
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  spec_.validate(true);
  const std::size_t nf = spec_.features.size();
  tables_.reserve(nf);
  masks_.resize(nf);
  gate_streams_.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fs = spec_.features[f];
    tables_.emplace_back(fs.buckets, fs.base_dim);
    RngStream init(seed_, kTableKey + f);
    tables_.back().init_uniform(init);
    if (fs.use_dml) masks_[f] = MaskState::create(fs.base_dim, fs.initial_effective_dim, fs.mask, f);
    gate_streams_.emplace_back(seed_, kGateKey + f);
  }
  std::size_t in = spec_.input_width();
  std::vector<std::size_t> widths = spec_.hidden;
  widths.push_back(1);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    layers_.emplace_back(in, widths[l]);
    RngStream init(seed_, kDenseKey + l);
    layers_.back().init_glorot(init);
    in = widths[l];
  }
}

bool Model::has_masks() const {
  for (const auto& m : masks_)
    if (m) return true;
  return false;
}

std::vector<std::span<double>> Model::parameter_blocks() {
  std::vector<std::span<double>> blocks;
  for (auto& t : tables_) blocks.push_back(t.weights.values());
  for (auto& l : layers_) {
    blocks.push_back(l.weights.values());
    blocks.push_back(l.bias);
  }
  for (auto& m : masks_)
    if (m) blocks.emplace_back(&m->scaled_effective_dim, 1);
  return blocks;
}

std::vector<std::span<const double>> Model::parameter_blocks() const {
  std::vector<std::span<const double>> blocks;
  for (auto& t : tables_) blocks.push_back(t.weights.values());
  for (auto& l : layers_) {
    blocks.push_back(l.weights.values());
    blocks.push_back(l.bias);
  }
  for (auto& m : masks_)
    if (m) blocks.emplace_back(&m->scaled_effective_dim, 1);
  return blocks;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : parameter_blocks()) n += b.size();
  return n;
}

struct Model::Trace {
  std::vector<std::optional<GateCache>> gates;
  std::vector<Matrix> activations;  // [0] = concatenated input, then each layer output
  std::vector<double> effective_dims;
};

void Model::run_forward(const Batch& batch, Mode mode, Trace& trace,
                        std::vector<RngStream>* streams) const {
  const std::size_t nf = spec_.features.size();
  if (batch.features != nf)
    throw InputError("batch has " + std::to_string(batch.features) + " features, model expects " +
                     std::to_string(nf));
  trace.gates.assign(nf, std::nullopt);
  trace.effective_dims.assign(nf, std::numeric_limits<double>::quiet_NaN());
  trace.activations.clear();

  Matrix input(batch.rows, spec_.input_width());
  std::size_t offset = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fs = spec_.features[f];
    Matrix emb = embed_forward(tables_[f], batch.feature_ids(f), fs.name);
    if (masks_[f]) {
      RngStream scratch;
      RngStream& rng = streams ? (*streams)[f] : scratch;
      if (mode == Mode::kTrain && !streams)
        throw std::logic_error("train-mode forward needs gate streams");
      MaskForward mf = mask_forward(*masks_[f], emb, mode, rng);
      trace.effective_dims[f] = mf.cache.profile.x2;
      emb = std::move(mf.outputs);
      trace.gates[f] = std::move(mf.cache);
    }
    for (std::size_t r = 0; r < batch.rows; ++r) {
      const auto src = emb.row(r);
      std::copy(src.begin(), src.end(), input.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += fs.base_dim;
  }
  trace.activations.push_back(std::move(input));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Activation act = l + 1 < layers_.size() ? Activation::kRelu : Activation::kNone;
    trace.activations.push_back(dense_forward(layers_[l], trace.activations.back(), act));
  }
}

StepResult Model::forward_backward(const Batch& batch, Mode mode, bool with_grads) {
  if (batch.rows == 0) throw InputError("empty batch");
  Trace trace;
  run_forward(batch, mode, trace, &gate_streams_);

  const Matrix& logits_m = trace.activations.back();
  std::vector<double> logits(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) logits[r] = logits_m(r, 0);
  BceResult bce = bce_loss(logits, batch.labels);

  StepResult res;
  res.bce_loss = bce.loss;
  res.effective_dims = trace.effective_dims;
  res.probabilities.resize(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) res.probabilities[r] = sigmoid(logits[r]);
  std::vector<double> reg_grads(masks_.size(), 0.0);
  for (std::size_t f = 0; f < masks_.size(); ++f) {
    if (!masks_[f]) continue;
    const RegularizationTerm term = regularization(*masks_[f]);
    res.reg_loss += term.loss;
    reg_grads[f] = term.grad_sed;
  }
  res.total_loss = res.bce_loss + res.reg_loss;
  if (!with_grads) return res;

  // Reverse pass, layer blocks written straight into the gradient layout.
  const std::size_t nf = spec_.features.size();
  const std::size_t nl = layers_.size();
  res.grads.blocks.resize(nf + 2 * nl + spec_.mask_count());
  Matrix grad(batch.rows, 1);
  for (std::size_t r = 0; r < batch.rows; ++r) grad(r, 0) = bce.grad_logits[r];
  for (std::size_t l = nl; l-- > 0;) {
    const Activation act = l + 1 < nl ? Activation::kRelu : Activation::kNone;
    DenseGrad dg =
        dense_backward(layers_[l], trace.activations[l], trace.activations[l + 1], grad, act);
    auto wv = dg.grad_weights.values();
    res.grads.blocks[nf + 2 * l].assign(wv.begin(), wv.end());
    res.grads.blocks[nf + 2 * l + 1] = std::move(dg.grad_bias);
    grad = std::move(dg.grad_x);
  }

  std::size_t offset = 0;
  std::size_t mask_slot = nf + 2 * nl;
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t d = spec_.features[f].base_dim;
    Matrix g(batch.rows, d);
    for (std::size_t r = 0; r < batch.rows; ++r) {
      const auto src = grad.row(r).subspan(offset, d);
      std::copy(src.begin(), src.end(), g.row(r).begin());
    }
    offset += d;
    if (masks_[f]) {
      MaskGrad mg = mask_backward(*masks_[f], *trace.gates[f], g);
      res.grads.blocks[mask_slot++] = {mg.grad_sed + reg_grads[f]};
      g = std::move(mg.grad_inputs);
    }
    Matrix table_grad(tables_[f].vocab, d);
    embed_backward(batch.feature_ids(f), g, table_grad);
    auto tv = table_grad.values();
    res.grads.blocks[f].assign(tv.begin(), tv.end());
  }
  return res;
}

std::vector<double> Model::predict(const Batch& batch) const {
  Trace trace;
  run_forward(batch, Mode::kEval, trace, nullptr);
  std::vector<double> p(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) p[r] = sigmoid(trace.activations.back()(r, 0));
  return p;
}

void Model::reset_structure(ModelSpec spec, std::vector<EmbeddingTable> tables,
                            std::vector<DenseLayer> layers) {
  spec.validate(true);
  if (tables.size() != spec.features.size()) throw InputError("table count does not match spec");
  spec_ = std::move(spec);
  tables_ = std::move(tables);
  layers_ = std::move(layers);
  masks_.assign(spec_.features.size(), std::nullopt);
  gate_streams_.clear();
  for (std::size_t f = 0; f < spec_.features.size(); ++f) gate_streams_.emplace_back(seed_, kGateKey + f);
}

ModelOptimizer::ModelOptimizer(const Model& model, AdamConfig config) : config_(config) {
  config_.validate();
  for (const auto& b : model.parameter_blocks()) moments_.emplace_back(b.size());
}

void ModelOptimizer::step(Model& model, const Gradients& grads) {
  auto blocks = model.parameter_blocks();
  if (blocks.size() != grads.blocks.size() || blocks.size() != moments_.size())
    throw std::logic_error("optimizer: gradient layout does not match the model");
  ++step_;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    adam_step(blocks[i], grads.blocks[i], moments_[i], config_, step_);
}

}  // namespace dimmask
