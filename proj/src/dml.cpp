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

#include "dimmask/dml.hpp"

#include <cmath>

namespace dimmask {

std::string to_string(RegularizerKind kind) { return kind == RegularizerKind::kL1 ? "l1" : "l2"; }

RegularizerKind parse_regularizer(std::string_view text) {
  if (text == "l1" || text == "L1") return RegularizerKind::kL1;
  if (text == "l2" || text == "L2") return RegularizerKind::kL2;
  throw InputError("unknown regularizer '" + std::string(text) + "' (expected l1 or l2)");
}

void MaskConfig::validate() const {
  if (!(slope > 0.0) || !std::isfinite(slope)) throw InputError("slope must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be > 0");
  if (!(regularizer.weight >= 0.0) || !std::isfinite(regularizer.weight))
    throw InputError("regularizer weight must be >= 0");
}

MaskState MaskState::create(std::size_t original_dim, double initial_effective_dim,
                            const MaskConfig& config, std::uint64_t layer_id) {
  if (original_dim < 1) throw InputError("mask layer needs original_dim >= 1");
  if (!(initial_effective_dim >= 0.0) || initial_effective_dim > static_cast<double>(original_dim))
    throw InputError("initial_effective_dim must lie in [0, original_dim]");
  MaskState s;
  s.scaled_effective_dim = initial_effective_dim / static_cast<double>(original_dim);
  s.original_dim = original_dim;
  s.config = config;
  s.layer_id = layer_id;
  s.validate();
  return s;
}

double MaskState::effective_dim() const {
  return std::max(0.0, scaled_effective_dim * static_cast<double>(original_dim));
}

void MaskState::validate() const {
  if (original_dim < 1) throw InputError("mask layer needs original_dim >= 1");
  if (!std::isfinite(scaled_effective_dim)) throw RuntimeFailure("scaled_effective_dim is not finite");
  config.validate();
}

MaskProfile compute_mask(const MaskState& state) {
  MaskProfile p;
  p.x2 = state.effective_dim();
  const std::size_t d = state.original_dim;
  p.mask.resize(d);
  p.premask.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double pre = (p.x2 - static_cast<double>(i)) / state.config.slope;
    p.premask[i] = pre;
    p.mask[i] = std::clamp(pre, 0.0, 1.0);
  }
  return p;
}

double gate_value(double mask, double y, double alpha) {
  return sigmoid(alpha * (2.0 * mask - y - 0.5));
}

Matrix sample_gate(std::span<const double> mask, std::size_t rows, double alpha, RngStream& rng,
                   Matrix* draws) {
  const std::size_t d = mask.size();
  Matrix z(rows, d);
  if (draws) *draws = Matrix(rows, d);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double y = rng.next_uniform();
      if (draws) (*draws)(r, c) = y;
      z(r, c) = gate_value(mask[c], y, alpha);
    }
  }
  return z;
}

double expected_gate(double mask, double alpha) {
  // Integral of sigmoid(alpha * (2m - 0.5 - y)) over y in [0, 1].
  return (softplus(alpha * (2.0 * mask - 0.5)) - softplus(alpha * (2.0 * mask - 1.5))) / alpha;
}

std::vector<double> expected_gate(std::span<const double> mask, double alpha) {
  std::vector<double> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = expected_gate(mask[i], alpha);
  return out;
}

namespace {

void require_width(const MaskState& state, const Matrix& inputs) {
  if (inputs.cols() != state.original_dim)
    throw InputError("mask layer expects " + std::to_string(state.original_dim) + " columns, got " +
                     std::to_string(inputs.cols()));
}

Matrix gated(const Matrix& inputs, const Matrix& gate) {
  Matrix out(inputs.rows(), inputs.cols());
  auto o = out.values();
  auto x = inputs.values();
  auto z = gate.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * z[i];
  return out;
}

}  // namespace

MaskForward mask_forward(const MaskState& state, const Matrix& inputs, Mode mode, RngStream& rng) {
  require_width(state, inputs);
  if (mode == Mode::kEval) {
    MaskForward f;
    f.cache.mode = Mode::kEval;
    f.cache.profile = compute_mask(state);
    const auto eg = expected_gate(f.cache.profile.mask, state.config.alpha);
    f.cache.gate = Matrix(inputs.rows(), inputs.cols());
    for (std::size_t r = 0; r < inputs.rows(); ++r)
      std::copy(eg.begin(), eg.end(), f.cache.gate.row(r).begin());
    f.outputs = gated(inputs, f.cache.gate);
    f.cache.inputs = inputs;
    return f;
  }
  MaskForward f;
  f.cache.mode = Mode::kTrain;
  f.cache.profile = compute_mask(state);
  f.cache.gate = sample_gate(f.cache.profile.mask, inputs.rows(), state.config.alpha, rng,
                             &f.cache.draws);
  f.outputs = gated(inputs, f.cache.gate);
  f.cache.inputs = inputs;
  return f;
}

MaskForward mask_forward_with_draws(const MaskState& state, const Matrix& inputs, Matrix draws) {
  require_width(state, inputs);
  if (draws.rows() != inputs.rows() || draws.cols() != inputs.cols())
    throw InputError("gate draws do not match the input shape");
  MaskForward f;
  f.cache.mode = Mode::kTrain;
  f.cache.profile = compute_mask(state);
  f.cache.gate = Matrix(inputs.rows(), inputs.cols());
  for (std::size_t r = 0; r < inputs.rows(); ++r)
    for (std::size_t c = 0; c < inputs.cols(); ++c)
      f.cache.gate(r, c) = gate_value(f.cache.profile.mask[c], draws(r, c), state.config.alpha);
  f.cache.draws = std::move(draws);
  f.outputs = gated(inputs, f.cache.gate);
  f.cache.inputs = inputs;
  return f;
}

MaskGrad mask_backward(const MaskState& state, const GateCache& cache, const Matrix& grad_out) {
  if (grad_out.rows() != cache.gate.rows() || grad_out.cols() != cache.gate.cols())
    throw InputError("mask backward: gradient shape does not match the cached forward pass");
  const std::size_t d = state.original_dim;
  const double alpha = state.config.alpha;

  // d mask_c / d sed: d / slope inside the ramp, 0 on the clipped plateaus
  // and whenever max(0, sed * d) is not in its linear region.
  std::vector<double> dmask_dsed(d, 0.0);
  if (state.scaled_effective_dim * static_cast<double>(d) > 0.0) {
    for (std::size_t c = 0; c < d; ++c) {
      const double pre = cache.profile.premask[c];
      if (pre > 0.0 && pre < 1.0) dmask_dsed[c] = static_cast<double>(d) / state.config.slope;
    }
  }

  // Eval mode uses E[z]; its mask derivative is 2 * (sigmoid(a) - sigmoid(b)).
  std::vector<double> eval_dz(d, 0.0);
  if (cache.mode == Mode::kEval) {
    for (std::size_t c = 0; c < d; ++c) {
      const double m = cache.profile.mask[c];
      eval_dz[c] = 2.0 * (sigmoid(alpha * (2.0 * m - 0.5)) - sigmoid(alpha * (2.0 * m - 1.5)));
    }
  }

  MaskGrad g;
  g.grad_inputs = Matrix(grad_out.rows(), d);
  double grad_sed = 0.0;
  for (std::size_t r = 0; r < grad_out.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double z = cache.gate(r, c);
      const double go = grad_out(r, c);
      g.grad_inputs(r, c) = go * z;
      if (dmask_dsed[c] != 0.0) {
        const double dz_dmask = cache.mode == Mode::kTrain ? 2.0 * alpha * z * (1.0 - z) : eval_dz[c];
        grad_sed += go * cache.inputs(r, c) * dz_dmask * dmask_dsed[c];
      }
    }
  }
  g.grad_sed = grad_sed;
  return g;
}

RegularizationTerm regularization(const MaskState& state) {
  const double w = state.config.regularizer.weight;
  const double s = state.scaled_effective_dim;
  if (state.config.regularizer.kind == RegularizerKind::kL1) {
    const double sign = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    return {w * std::abs(s), w * sign};
  }
  return {w * s * s, 2.0 * w * s};
}

std::size_t finalize_dim(const MaskState& state) {
  const double x2 = std::min(state.effective_dim(), static_cast<double>(state.original_dim));
  return static_cast<std::size_t>(std::ceil(x2));
}

}  // namespace dimmask
