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

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glstm/captioner.hpp"

namespace glstm::testing {

// Extended-precision re-implementation of the caption loss, written directly
// from the model equations. Serves as the finite-difference oracle so that
// central differences are not swamped by 64-bit roundoff.
class ReferenceModel {
 public:
  using Real = long double;

  explicit ReferenceModel(const CaptionModel& model, const Vector* guidance = nullptr)
      : dims_(model.dims()), bias_(model.base_cell().use_bias) {
    model.for_each_tensor([&](const std::string& name, std::span<const double> s) {
      tensors_[name] = std::vector<Real>(s.begin(), s.end());
      order_.push_back(name);
    });
    if (guidance) tensors_["guidance"] = std::vector<Real>(guidance->raw().begin(), guidance->raw().end());
  }

  std::vector<Real>& tensor(const std::string& name) { return tensors_.at(name); }
  const std::vector<std::string>& model_tensors() const { return order_; }

  Real loss(const Vector& feature, const TokenSequence& caption,
            const std::vector<Vector>& input_masks = {},
            const std::vector<Vector>& output_masks = {}) const {
    const std::size_t e = dims_.embed, h = dims_.hidden, k = dims_.vocab;
    std::vector<std::vector<Real>> inputs;
    inputs.push_back(mat_vec("image_projection", e, dims_.feature, to_real(feature)));
    const auto& emb = t("word_embedding");
    for (std::size_t l = 0; l + 1 < caption.size(); ++l) {
      std::vector<Real> x(e);
      for (std::size_t r = 0; r < e; ++r) x[r] = emb[r * k + caption[l]];
      inputs.push_back(x);
    }
    for (std::size_t l = 0; l < input_masks.size(); ++l)
      for (std::size_t r = 0; r < e; ++r) inputs[l][r] *= input_masks[l][r];

    std::vector<Real> c(h, 0), m(h, 0);
    Real total = 0;
    for (std::size_t l = 0; l < inputs.size(); ++l) {
      const auto i = gate("input_gate", inputs[l], m, false);
      const auto f = gate("forget_gate", inputs[l], m, false);
      const auto o = gate("output_gate", inputs[l], m, false);
      const auto u = gate("candidate", inputs[l], m, true);
      for (std::size_t r = 0; r < h; ++r) {
        c[r] = f[r] * c[r] + i[r] * u[r];
        m[r] = o[r] * c[r];
      }
      std::vector<Real> out = m;
      if (l < output_masks.size())
        for (std::size_t r = 0; r < h; ++r) out[r] *= output_masks[l][r];
      std::vector<Real> logits = mat_vec("decoder", k, h, out);
      const auto& b = t("decoder_bias");
      Real peak = -INFINITY;
      for (std::size_t w = 0; w < k; ++w) peak = std::max(peak, logits[w] += b[w]);
      Real z = 0;
      for (std::size_t w = 0; w < k; ++w) z += std::exp(logits[w] - peak);
      total -= logits[caption[l]] - peak - std::log(z);
    }
    return total;
  }

 private:
  static std::vector<Real> to_real(const Vector& v) { return {v.raw().begin(), v.raw().end()}; }

  const std::vector<Real>& t(const std::string& name) const { return tensors_.at(name); }

  std::vector<Real> mat_vec(const std::string& name, std::size_t rows, std::size_t cols,
                            const std::vector<Real>& v) const {
    const auto& a = t(name);
    std::vector<Real> out(rows, 0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t q = 0; q < cols; ++q) out[r] += a[r * cols + q] * v[q];
    return out;
  }

  std::vector<Real> gate(const std::string& name, const std::vector<Real>& x,
                         const std::vector<Real>& m, bool candidate) const {
    const std::size_t h = dims_.hidden;
    std::vector<Real> z = mat_vec("cell." + name + ".from_input", h, dims_.embed, x);
    const auto zm = mat_vec("cell." + name + ".from_hidden", h, h, m);
    for (std::size_t r = 0; r < h; ++r) z[r] += zm[r];
    if (bias_) {
      const auto& b = t("cell." + name + ".bias");
      for (std::size_t r = 0; r < h; ++r) z[r] += b[r];
    }
    if (dims_.guidance > 0) {
      const auto zg = mat_vec("cell." + name + ".from_guidance", h, dims_.guidance, t("guidance"));
      for (std::size_t r = 0; r < h; ++r) z[r] += zg[r];
    }
    for (auto& v : z) v = candidate ? std::tanh(v) : 1 / (1 + std::exp(-v));
    return z;
  }

  ModelDims dims_;
  bool bias_;
  std::map<std::string, std::vector<Real>> tensors_;
  std::vector<std::string> order_;
};

}  // namespace glstm::testing
