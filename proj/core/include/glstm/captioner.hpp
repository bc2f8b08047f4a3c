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

// Caption model: the projected image feature is the first element of the
// input sequence, word embeddings follow, and a linear decoder plus softmax
// turns each hidden output m_l into the distribution of the next word.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "glstm/cells.hpp"
#include "glstm/numkit.hpp"
#include "glstm/random.hpp"
#include "glstm/textcorpus.hpp"

namespace glstm {

enum class CellKind { kLstm, kGlstm };

std::string_view cell_kind_name(CellKind kind);
CellKind parse_cell_kind(std::string_view name);

struct ModelDims {
  std::size_t feature = 0;
  std::size_t vocab = 0;
  std::size_t embed = 256;
  std::size_t hidden = 256;
  std::size_t guidance = 0;  // 0 for a plain LSTM

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct ModelOptions {
  bool cell_bias = true;
  // Start the guidance projections at zero instead of random values.
  bool zero_guidance_init = false;
};

struct CaptionModel {
  Matrix image_projection;  // embed x feature
  Matrix word_embedding;    // embed x vocab; column w embeds token w
  std::variant<LstmParams, GlstmParams> cell;
  Matrix decoder;        // vocab x hidden
  Vector decoder_bias;   // vocab
  std::shared_ptr<const Vocabulary> vocab;

  static CaptionModel create(CellKind kind, const ModelDims& dims,
                             std::shared_ptr<const Vocabulary> vocab,
                             const ModelOptions& options, std::uint64_t seed);

  ModelDims dims() const;
  CellKind kind() const noexcept {
    return std::holds_alternative<GlstmParams>(cell) ? CellKind::kGlstm : CellKind::kLstm;
  }
  bool guided() const noexcept { return kind() == CellKind::kGlstm; }
  const LstmParams& base_cell() const;
  LstmParams& base_cell();

  // Same shapes, all zeros.
  CaptionModel zeros_like() const;
  std::size_t parameter_count() const;

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
    fn(std::string("image_projection"), self.image_projection.values());
    fn(std::string("word_embedding"), self.word_embedding.values());
    std::visit(
        [&](auto& c) {
          c.for_each_tensor([&](const std::string& name, auto span) { fn("cell." + name, span); });
        },
        self.cell);
    fn(std::string("decoder"), self.decoder.values());
    fn(std::string("decoder_bias"), self.decoder_bias.values());
  }
};

struct AssembledSequence {
  std::vector<Vector> inputs;  // image step first, then one embedding per word
  TokenSequence targets;       // the caption itself, END last
};

// Throws BadInputError if the caption does not end with END.
AssembledSequence assemble_sequence(const CaptionModel& model, const Vector& image_feature,
                                    const TokenSequence& caption);

struct LossReport {
  double nll = 0.0;
  std::size_t tokens = 0;
  std::vector<double> step_nll;

  double perplexity() const;
};

// Inverted dropout on the cell inputs and on m_l before the decoder.
struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;
};

struct ForwardPass {
  LossReport report;
  Vector image_feature;
  TokenSequence caption;
  std::optional<Vector> guidance;
  std::vector<Vector> input_masks;   // empty without dropout
  std::vector<Vector> output_masks;  // empty without dropout
  std::vector<Vector> dropped_outputs;
  std::vector<Vector> probabilities;
  SequenceCache cell_cache;
  std::uint64_t model_tag = 0;
};

ForwardPass forward_loss(const CaptionModel& model, const Vector& image_feature,
                         const TokenSequence& caption, const Vector* guidance = nullptr,
                         const DropoutSpec& dropout = {});

struct ModelGradients {
  CaptionModel params;  // same layout as the model
  std::optional<Vector> guidance;
};

// Throws BadInputError when the pass was recorded against a model of a
// different shape.
ModelGradients backward(const CaptionModel& model, const ForwardPass& pass);

// Next-word log-probabilities during generation.
struct InferenceState {
  CellState cell;
  Vector log_probs;
};

class Inference {
 public:
  // `guidance` is required for gLSTM models and must outlive this object.
  Inference(const CaptionModel& model, const Vector* guidance);
  InferenceState begin(const Vector& image_feature) const;
  InferenceState advance(const InferenceState& state, TokenId token) const;
  const CaptionModel& model() const noexcept { return *model_; }

 private:
  InferenceState emit(CellState cell) const;
  const CaptionModel* model_;
  BoundCell cell_;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;
  double grad_clip = 5.0;
  double dropout = 0.5;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_nll = 0.0;
  std::size_t train_tokens = 0;
  double val_nll = 0.0;
  std::size_t val_tokens = 0;
  bool improved = false;

  double train_perplexity() const;
  double val_perplexity() const;
};

// Everything needed to continue training exactly where it stopped.
struct TrainState {
  CaptionModel current;
  CaptionModel accumulators;  // RMSProp running mean of squared gradients
  std::size_t epochs_done = 0;
  std::size_t best_epoch = 0;
  double best_val_nll = 0.0;
  double initial_val_nll = 0.0;
  std::size_t stale_epochs = 0;
  std::vector<EpochLog> log;
};

struct TrainResult {
  CaptionModel model;  // best validation snapshot
  TrainState state;
};

using GuidanceProvider = std::function<Vector(const CorpusItem&)>;

// Stochastic RMSProp over (image, caption) pairs of the training split with
// early stopping on validation NLL. Pass `resume` to continue a previous run;
// `on_epoch` is called after every epoch.
TrainResult train(const CaptionModel& initial, const Corpus& corpus,
                  const GuidanceProvider& guidance, const TrainConfig& config,
                  const TrainState* resume = nullptr,
                  const std::function<void(const EpochLog&, const TrainState&)>& on_epoch = {});

// Total NLL over every caption of a split, no dropout.
LossReport evaluate_split(const CaptionModel& model, const Corpus& corpus, Split split,
                          const GuidanceProvider& guidance);

// Free-form string annotations stored alongside a checkpoint.
using CheckpointMeta = std::map<std::string, std::string>;

struct Checkpoint {
  CaptionModel model;
  std::optional<TrainConfig> config;
  std::optional<TrainState> state;
  CheckpointMeta meta;
};

// "GLSC" container. The JSON header records dims, cell kind, optional config
// echo, the vocabulary and its checksum, then the tensor table.
std::string serialize_checkpoint(const CaptionModel& model, const TrainConfig* config = nullptr,
                                 const TrainState* state = nullptr,
                                 const CheckpointMeta* meta = nullptr);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const CaptionModel& model, const std::filesystem::path& path,
                     const TrainConfig* config = nullptr, const TrainState* state = nullptr,
                     const CheckpointMeta* meta = nullptr);
CaptionModel load_checkpoint(const std::filesystem::path& path);
Checkpoint load_checkpoint_full(const std::filesystem::path& path);

}  // namespace glstm
