// Copyright 2026 The gLSTM Captioner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "glstm/cells.hpp"

#include <cmath>

#include "glstm/error.hpp"

namespace glstm {
namespace {

GateWeights zero_gate(std::size_t hidden, std::size_t input) {
  return {Matrix(hidden, input), Matrix(hidden, hidden), Vector(hidden)};
}

void fill_uniform(Matrix& m, Rng& rng) {
  const double s = m.cols() ? 1.0 / std::sqrt(static_cast<double>(m.cols())) : 0.0;
  for (double& v : m.values()) v = rng.uniform(-s, s);
}

using GuidedTerms = GuidanceBias;

GuidedTerms guided_terms(const GuidanceWeights& w, const Vector& g) {
  return {matvec(w.input_gate, g), matvec(w.forget_gate, g), matvec(w.output_gate, g),
          matvec(w.candidate, g)};
}

Vector pre_activation(const GateWeights& gate, bool use_bias, const Vector& x,
                      const Vector& m, const Vector* extra) {
  Vector z = matvec(gate.from_input, x);
  add_matvec_inplace(z, gate.from_hidden, m);
  if (use_bias) add_inplace(z, gate.bias);
  if (extra) add_inplace(z, *extra);
  return z;
}

void check_step_dims(const LstmParams& p, const Vector& x, const CellState& prev) {
  const std::size_t h = p.hidden_dim();
  if (x.dim() != p.input_dim() || prev.c.dim() != h || prev.m.dim() != h) {
    throw ShapeError("cell step: input " + std::to_string(x.dim()) + " / state (" +
                     std::to_string(prev.c.dim()) + "," + std::to_string(prev.m.dim()) +
                     ") do not match cell (input " + std::to_string(p.input_dim()) +
                     ", hidden " + std::to_string(h) + ")");
  }
}

StepResult step_impl(const LstmParams& p, const GuidedTerms* extra, const Vector& x,
                     const CellState& prev) {
  check_step_dims(p, x, prev);
  StepRecord rec;
  rec.input = x;
  rec.prev_c = prev.c;
  rec.prev_m = prev.m;
  rec.input_gate = sigmoid(pre_activation(p.input_gate, p.use_bias, x, prev.m,
                                          extra ? &extra->input_gate : nullptr));
  rec.forget_gate = sigmoid(pre_activation(p.forget_gate, p.use_bias, x, prev.m,
                                           extra ? &extra->forget_gate : nullptr));
  rec.output_gate = sigmoid(pre_activation(p.output_gate, p.use_bias, x, prev.m,
                                           extra ? &extra->output_gate : nullptr));
  rec.candidate = tanh_act(pre_activation(p.candidate, p.use_bias, x, prev.m,
                                          extra ? &extra->candidate : nullptr));
  const std::size_t h = p.hidden_dim();
  rec.c = Vector(h);
  rec.m = Vector(h);
  for (std::size_t k = 0; k < h; ++k) {
    rec.c[k] = rec.forget_gate[k] * prev.c[k] + rec.input_gate[k] * rec.candidate[k];
    rec.m[k] = rec.output_gate[k] * rec.c[k];
  }
  CellState next{rec.c, rec.m};
  return {std::move(next), std::move(rec)};
}

SequenceResult forward_impl(const LstmParams& p, const GuidedTerms* extra,
                            std::span<const Vector> inputs, const CellState& init) {
  if (inputs.empty()) throw BadInputError("sequence_forward: empty input sequence");
  SequenceResult out;
  out.outputs.reserve(inputs.size());
  out.cache.steps.reserve(inputs.size());
  CellState state = init;
  for (const Vector& x : inputs) {
    StepResult r = step_impl(p, extra, x, state);
    out.outputs.push_back(r.state.m);
    state = std::move(r.state);
    out.cache.steps.push_back(std::move(r.record));
  }
  out.final_state = std::move(state);
  return out;
}

void check_guidance(const GlstmParams& p, const Vector& g) {
  if (g.dim() != p.guidance_dim()) {
    throw ShapeError("gLSTM: guidance has dim " + std::to_string(g.dim()) +
                     ", cell expects " + std::to_string(p.guidance_dim()));
  }
}

// Pre-activation gradients of one step.
struct GateDeltas {
  Vector input_gate, forget_gate, output_gate, candidate;
};

// Shared BPTT loop. `gate_sums` accumulates the pre-activation gradients over
// time so the caller can form guidance-weight gradients.
LstmGradients backward_impl(const LstmParams& p, const SequenceCache& cache,
                            std::span<const Vector> grad_outputs,
                            const CellState* grad_final, GateDeltas* gate_sums) {
  const std::size_t steps = cache.steps.size();
  if (grad_outputs.size() != steps) {
    throw BadInputError("sequence_backward: " + std::to_string(grad_outputs.size()) +
                        " output gradients for a cache of " + std::to_string(steps) +
                        " steps");
  }
  const std::size_t h = p.hidden_dim();
  LstmGradients grads;
  grads.params = LstmParams::zeros(h, p.input_dim(), p.use_bias);
  grads.inputs.resize(steps);

  Vector dm_next = grad_final ? grad_final->m : Vector(h);
  Vector dc_next = grad_final ? grad_final->c : Vector(h);
  if (dm_next.dim() != h || dc_next.dim() != h) {
    throw ShapeError("sequence_backward: final-state gradient has wrong dimension");
  }

  for (std::size_t t = steps; t-- > 0;) {
    const StepRecord& r = cache.steps[t];
    if (grad_outputs[t].dim() != h) {
      throw ShapeError("sequence_backward: output gradient " + std::to_string(t) +
                       " has dim " + std::to_string(grad_outputs[t].dim()));
    }
    GateDeltas dz{Vector(h), Vector(h), Vector(h), Vector(h)};
    Vector dc_prev(h);
    for (std::size_t k = 0; k < h; ++k) {
      const double dm = grad_outputs[t][k] + dm_next[k];
      const double d_out = dm * r.c[k];
      const double dc = dm * r.output_gate[k] + dc_next[k];
      const double d_forget = dc * r.prev_c[k];
      const double d_in = dc * r.candidate[k];
      const double d_cand = dc * r.input_gate[k];
      dc_prev[k] = dc * r.forget_gate[k];
      dz.input_gate[k] = d_in * r.input_gate[k] * (1.0 - r.input_gate[k]);
      dz.forget_gate[k] = d_forget * r.forget_gate[k] * (1.0 - r.forget_gate[k]);
      dz.output_gate[k] = d_out * r.output_gate[k] * (1.0 - r.output_gate[k]);
      dz.candidate[k] = d_cand * (1.0 - r.candidate[k] * r.candidate[k]);
    }

    Vector dx(p.input_dim());
    Vector dm_prev(h);
    auto accumulate = [&](const GateWeights& w, GateWeights& gw, const Vector& delta) {
      add_outer_inplace(gw.from_input, delta, r.input);
      add_outer_inplace(gw.from_hidden, delta, r.prev_m);
      if (p.use_bias) add_inplace(gw.bias, delta);
      add_inplace(dx, matvec_transposed(w.from_input, delta));
      add_inplace(dm_prev, matvec_transposed(w.from_hidden, delta));
    };
    accumulate(p.input_gate, grads.params.input_gate, dz.input_gate);
    accumulate(p.forget_gate, grads.params.forget_gate, dz.forget_gate);
    accumulate(p.output_gate, grads.params.output_gate, dz.output_gate);
    accumulate(p.candidate, grads.params.candidate, dz.candidate);

    if (gate_sums) {
      add_inplace(gate_sums->input_gate, dz.input_gate);
      add_inplace(gate_sums->forget_gate, dz.forget_gate);
      add_inplace(gate_sums->output_gate, dz.output_gate);
      add_inplace(gate_sums->candidate, dz.candidate);
    }
    grads.inputs[t] = std::move(dx);
    dm_next = std::move(dm_prev);
    dc_next = std::move(dc_prev);
  }
  grads.initial = {std::move(dc_next), std::move(dm_next)};
  return grads;
}

}  // namespace

LstmParams LstmParams::zeros(std::size_t hidden, std::size_t input, bool use_bias) {
  LstmParams p;
  p.input_gate = zero_gate(hidden, input);
  p.forget_gate = zero_gate(hidden, input);
  p.output_gate = zero_gate(hidden, input);
  p.candidate = zero_gate(hidden, input);
  p.use_bias = use_bias;
  return p;
}

LstmParams LstmParams::random(std::size_t hidden, std::size_t input, bool use_bias,
                              Rng& rng) {
  LstmParams p = zeros(hidden, input, use_bias);
  for (GateWeights* g : {&p.input_gate, &p.forget_gate, &p.output_gate, &p.candidate}) {
    fill_uniform(g->from_input, rng);
    fill_uniform(g->from_hidden, rng);
  }
  if (use_bias) p.forget_gate.bias.fill(1.0);
  return p;
}

GuidanceWeights GuidanceWeights::zeros(std::size_t hidden, std::size_t guidance) {
  return {Matrix(hidden, guidance), Matrix(hidden, guidance), Matrix(hidden, guidance),
          Matrix(hidden, guidance)};
}

GuidanceWeights GuidanceWeights::random(std::size_t hidden, std::size_t guidance, Rng& rng) {
  GuidanceWeights w = zeros(hidden, guidance);
  for (Matrix* m : {&w.input_gate, &w.forget_gate, &w.output_gate, &w.candidate})
    fill_uniform(*m, rng);
  return w;
}

BoundCell::BoundCell(const GlstmParams& p, const Vector& g) : params_(&p.lstm) {
  check_guidance(p, g);
  bias_ = guided_terms(p.guidance, g);
}

StepResult BoundCell::step(const Vector& x, const CellState& prev) const {
  return step_impl(*params_, bias_ ? &*bias_ : nullptr, x, prev);
}

StepResult lstm_step(const LstmParams& p, const Vector& x, const CellState& prev) {
  return step_impl(p, nullptr, x, prev);
}

StepResult glstm_step(const GlstmParams& p, const Vector& x, const Vector& g,
                      const CellState& prev) {
  check_guidance(p, g);
  const GuidedTerms terms = guided_terms(p.guidance, g);
  return step_impl(p.lstm, &terms, x, prev);
}

SequenceResult sequence_forward(const LstmParams& p, std::span<const Vector> inputs,
                                const CellState& init) {
  return forward_impl(p, nullptr, inputs, init);
}

SequenceResult sequence_forward(const GlstmParams& p, std::span<const Vector> inputs,
                                const Vector& g, const CellState& init) {
  check_guidance(p, g);
  const GuidedTerms terms = guided_terms(p.guidance, g);
  SequenceResult out = forward_impl(p.lstm, &terms, inputs, init);
  out.cache.guidance = g;
  return out;
}

LstmGradients sequence_backward(const LstmParams& p, const SequenceCache& cache,
                                std::span<const Vector> grad_outputs,
                                const CellState* grad_final) {
  return backward_impl(p, cache, grad_outputs, grad_final, nullptr);
}

GlstmGradients sequence_backward(const GlstmParams& p, const SequenceCache& cache,
                                 std::span<const Vector> grad_outputs,
                                 const CellState* grad_final) {
  if (!cache.guidance) {
    throw BadInputError("sequence_backward: cache was produced without guidance");
  }
  const Vector& g = *cache.guidance;
  const std::size_t h = p.hidden_dim();
  GateDeltas sums{Vector(h), Vector(h), Vector(h), Vector(h)};
  LstmGradients base = backward_impl(p.lstm, cache, grad_outputs, grad_final, &sums);

  GlstmGradients out;
  out.params.lstm = std::move(base.params);
  out.params.guidance = GuidanceWeights::zeros(h, g.dim());
  add_outer_inplace(out.params.guidance.input_gate, sums.input_gate, g);
  add_outer_inplace(out.params.guidance.forget_gate, sums.forget_gate, g);
  add_outer_inplace(out.params.guidance.output_gate, sums.output_gate, g);
  add_outer_inplace(out.params.guidance.candidate, sums.candidate, g);
  out.guidance = matvec_transposed(p.guidance.input_gate, sums.input_gate);
  add_inplace(out.guidance, matvec_transposed(p.guidance.forget_gate, sums.forget_gate));
  add_inplace(out.guidance, matvec_transposed(p.guidance.output_gate, sums.output_gate));
  add_inplace(out.guidance, matvec_transposed(p.guidance.candidate, sums.candidate));
  out.inputs = std::move(base.inputs);
  out.initial = std::move(base.initial);
  return out;
}

}  // namespace glstm
