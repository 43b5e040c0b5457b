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

#include "dimmask/nn.hpp"

#include <cmath>

namespace dimmask {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw InputError("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw InputError("beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be > 0");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& moments,
               const AdamConfig& config, std::uint64_t step) {
  if (params.size() != grads.size() || moments.m.size() != params.size())
    throw std::invalid_argument("adam_step: block size mismatch");
  if (step < 1) throw std::invalid_argument("adam_step: step index starts at 1");
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  double* m = moments.m.data();
  double* v = moments.v.data();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
  }
}

void EmbeddingTable::init_uniform(RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(dim, 1)));
  for (auto& w : weights.values()) w = (2.0 * rng.next_uniform() - 1.0) * bound;
}

Matrix embed_forward(const EmbeddingTable& table, std::span<const std::uint32_t> ids,
                     const std::string& feature) {
  Matrix out(ids.size(), table.dim);
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (ids[b] >= table.vocab)
      throw InputError("feature '" + feature + "' row " + std::to_string(b) + ": id " +
                       std::to_string(ids[b]) + " outside vocabulary of " +
                       std::to_string(table.vocab));
    const auto src = table.weights.row(ids[b]);
    std::copy(src.begin(), src.end(), out.row(b).begin());
  }
  return out;
}

void embed_backward(std::span<const std::uint32_t> ids, const Matrix& grad_out, Matrix& grad_table) {
  for (std::size_t b = 0; b < ids.size(); ++b) {
    auto dst = grad_table.row(ids[b]);
    const auto src = grad_out.row(b);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

void DenseLayer::init_glorot(RngStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (auto& w : weights.values()) w = (2.0 * rng.next_uniform() - 1.0) * bound;
  std::fill(bias.begin(), bias.end(), 0.0);
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& x, Activation act) {
  if (x.cols() != layer.in_dim)
    throw InputError("dense layer expects " + std::to_string(layer.in_dim) + " inputs, got " +
                     std::to_string(x.cols()));
  Matrix y;
  matmul(x, layer.weights, y);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] += layer.bias[j];
      if (act == Activation::kRelu && !(row[j] > 0.0)) row[j] = 0.0;
    }
  }
  return y;
}

DenseGrad dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& y,
                         const Matrix& grad_y, Activation act) {
  if (grad_y.rows() != x.rows() || grad_y.cols() != layer.out_dim || y.cols() != layer.out_dim)
    throw InputError("dense backward: shape mismatch");
  Matrix pre_grad = grad_y;
  if (act == Activation::kRelu) {
    auto g = pre_grad.values();
    auto out = y.values();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!(out[i] > 0.0)) g[i] = 0.0;
  }
  DenseGrad dg;
  matmul_at_b(x, pre_grad, dg.grad_weights);
  dg.grad_bias.assign(layer.out_dim, 0.0);
  for (std::size_t r = 0; r < pre_grad.rows(); ++r) {
    const auto row = pre_grad.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) dg.grad_bias[j] += row[j];
  }
  matmul_a_bt(pre_grad, layer.weights, dg.grad_x);
  return dg;
}

BceResult bce_loss(std::span<const double> logits, std::span<const double> labels) {
  if (logits.empty()) throw InputError("bce_loss: empty batch");
  if (logits.size() != labels.size()) throw InputError("bce_loss: logits/labels length mismatch");
  BceResult r;
  r.grad_logits.resize(logits.size());
  const double n = static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double y = labels[i];
    if (y != 0.0 && y != 1.0) throw InputError("bce_loss: labels must be 0 or 1");
    total += softplus(logits[i]) - y * logits[i];
    r.grad_logits[i] = (sigmoid(logits[i]) - y) / n;
  }
  r.loss = total / n;
  return r;
}

}  // namespace dimmask
