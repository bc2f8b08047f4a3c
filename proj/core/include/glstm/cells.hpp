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

#pragma once

// LSTM without peepholes and its guided variant (gLSTM). The guided cell adds
// a learned projection of a per-sequence guidance vector g to every gate and
// to the candidate cell input; g is fixed for the whole sequence.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glstm/numkit.hpp"
#include "glstm/random.hpp"

namespace glstm {

// Weights feeding one gate (or the candidate cell input).
struct GateWeights {
  Matrix from_input;   // hidden x input
  Matrix from_hidden;  // hidden x hidden
  Vector bias;         // hidden; ignored when the cell runs without biases
};

struct LstmParams {
  GateWeights input_gate;
  GateWeights forget_gate;
  GateWeights output_gate;
  GateWeights candidate;
  bool use_bias = true;

  static LstmParams zeros(std::size_t hidden, std::size_t input, bool use_bias = true);
  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; forget bias starts at 1.
  static LstmParams random(std::size_t hidden, std::size_t input, bool use_bias, Rng& rng);

  std::size_t hidden_dim() const noexcept { return input_gate.from_hidden.rows(); }
  std::size_t input_dim() const noexcept { return input_gate.from_input.cols(); }

  // Visits every trainable tensor in a fixed order. Biases are skipped when
  // use_bias is off.
  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    visit(*this, fn);
  }
  template <class Fn>
  void for_each_tensor(Fn&& fn) const {
    visit(*this, fn);
  }

 private:
  template <class Self, class Fn>
  static void visit(Self& self, Fn& fn) {
    auto one = [&](auto& gate, const char* name) {
      fn(std::string(name) + ".from_input", gate.from_input.values());
      fn(std::string(name) + ".from_hidden", gate.from_hidden.values());
      if (self.use_bias) fn(std::string(name) + ".bias", gate.bias.values());
    };
    one(self.input_gate, "input_gate");
    one(self.forget_gate, "forget_gate");
    one(self.output_gate, "output_gate");
    one(self.candidate, "candidate");
  }
};

// Guidance projections, hidden x guidance-dim each.
struct GuidanceWeights {
  Matrix input_gate;
  Matrix forget_gate;
  Matrix output_gate;
  Matrix candidate;

  static GuidanceWeights zeros(std::size_t hidden, std::size_t guidance);
  static GuidanceWeights random(std::size_t hidden, std::size_t guidance, Rng& rng);

  std::size_t guidance_dim() const noexcept { return input_gate.cols(); }

  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    visit(*this, fn);
  }
  template <class Fn>
  void for_each_tensor(Fn&& fn) const {
    visit(*this, fn);
  }

 private:
  template <class Self, class Fn>
  static void visit(Self& self, Fn& fn) {
    fn(std::string("input_gate.from_guidance"), self.input_gate.values());
    fn(std::string("forget_gate.from_guidance"), self.forget_gate.values());
    fn(std::string("output_gate.from_guidance"), self.output_gate.values());
    fn(std::string("candidate.from_guidance"), self.candidate.values());
  }
};

struct GlstmParams {
  LstmParams lstm;
  GuidanceWeights guidance;

  std::size_t hidden_dim() const noexcept { return lstm.hidden_dim(); }
  std::size_t input_dim() const noexcept { return lstm.input_dim(); }
  std::size_t guidance_dim() const noexcept { return guidance.guidance_dim(); }

  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    lstm.for_each_tensor(fn);
    guidance.for_each_tensor(fn);
  }
  template <class Fn>
  void for_each_tensor(Fn&& fn) const {
    lstm.for_each_tensor(fn);
    guidance.for_each_tensor(fn);
  }
};

struct CellState {
  Vector c;  // memory cell
  Vector m;  // hidden output

  static CellState zeros(std::size_t hidden) { return {Vector(hidden), Vector(hidden)}; }
};

// Activations of one forward step, kept for the backward pass.
struct StepRecord {
  Vector input;
  Vector prev_c;
  Vector prev_m;
  Vector input_gate;
  Vector forget_gate;
  Vector output_gate;
  Vector candidate;  // tanh of the candidate pre-activation
  Vector c;
  Vector m;
};

struct StepResult {
  CellState state;
  StepRecord record;
};

struct SequenceCache {
  std::vector<StepRecord> steps;
  std::optional<Vector> guidance;  // set for gLSTM sequences
};

struct SequenceResult {
  std::vector<Vector> outputs;  // m_1 .. m_L
  CellState final_state;
  SequenceCache cache;
};

// Guidance projection for each gate; constant over a sequence.
struct GuidanceBias {
  Vector input_gate, forget_gate, output_gate, candidate;
};

// A cell with its guidance (if any) bound for the duration of one sequence.
// Borrows the parameters; they must outlive the BoundCell.
class BoundCell {
 public:
  explicit BoundCell(const LstmParams& p) : params_(&p) {}
  BoundCell(const GlstmParams& p, const Vector& g);

  StepResult step(const Vector& x, const CellState& prev) const;
  const LstmParams& params() const noexcept { return *params_; }

 private:
  const LstmParams* params_;
  std::optional<GuidanceBias> bias_;
};

StepResult lstm_step(const LstmParams& p, const Vector& x, const CellState& prev);
StepResult glstm_step(const GlstmParams& p, const Vector& x, const Vector& g,
                      const CellState& prev);

SequenceResult sequence_forward(const LstmParams& p, std::span<const Vector> inputs,
                                const CellState& init);
SequenceResult sequence_forward(const GlstmParams& p, std::span<const Vector> inputs,
                                const Vector& g, const CellState& init);

struct LstmGradients {
  LstmParams params;
  std::vector<Vector> inputs;
  CellState initial;
};

struct GlstmGradients {
  GlstmParams params;
  std::vector<Vector> inputs;
  Vector guidance;
  CellState initial;
};

// Exact gradients of the scalar loss whose derivative with respect to m_l is
// grad_outputs[l]. `grad_final`, when given, is the incoming gradient on the
// final (c, m) state, which lets a split sequence be differentiated in parts.
LstmGradients sequence_backward(const LstmParams& p, const SequenceCache& cache,
                                std::span<const Vector> grad_outputs,
                                const CellState* grad_final = nullptr);
GlstmGradients sequence_backward(const GlstmParams& p, const SequenceCache& cache,
                                 std::span<const Vector> grad_outputs,
                                 const CellState* grad_final = nullptr);

}  // namespace glstm
