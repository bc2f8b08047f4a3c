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

#include "glstm/captioner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "glstm/binary_io.hpp"
#include "glstm/error.hpp"
#include "json.hpp"

namespace glstm {

using nlohmann::json;

namespace {

constexpr std::string_view kCheckpointMagic = "GLSC";
constexpr std::uint32_t kCheckpointVersion = 1;

void fill_uniform(Matrix& m, std::size_t fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : m.values()) v = rng.uniform(-s, s);
}

CaptionModel zero_model(CellKind kind, const ModelDims& d,
                        std::shared_ptr<const Vocabulary> vocab, bool cell_bias) {
  CaptionModel m;
  m.image_projection = Matrix(d.embed, d.feature);
  m.word_embedding = Matrix(d.embed, d.vocab);
  LstmParams lstm = LstmParams::zeros(d.hidden, d.embed, cell_bias);
  if (kind == CellKind::kGlstm) {
    m.cell = GlstmParams{std::move(lstm), GuidanceWeights::zeros(d.hidden, d.guidance)};
  } else {
    m.cell = std::move(lstm);
  }
  m.decoder = Matrix(d.vocab, d.hidden);
  m.decoder_bias = Vector(d.vocab);
  m.vocab = std::move(vocab);
  return m;
}

std::uint64_t dims_tag(const ModelDims& d, CellKind kind) {
  std::uint64_t h = io::fnv1a("");
  for (std::size_t v : {d.feature, d.vocab, d.embed, d.hidden, d.guidance,
                        static_cast<std::size_t>(kind)}) {
    h = io::fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
  }
  return h;
}

Vector dropout_mask(std::size_t dim, const DropoutSpec& spec) {
  Vector mask(dim);
  const double keep = 1.0 - spec.rate;
  for (std::size_t i = 0; i < dim; ++i) mask[i] = spec.rng->uniform() < keep ? 1.0 / keep : 0.0;
  return mask;
}

std::vector<std::span<double>> spans_of(CaptionModel& m) {
  std::vector<std::span<double>> out;
  m.for_each_tensor([&](const std::string&, std::span<double> s) { out.push_back(s); });
  return out;
}

std::vector<std::span<const double>> spans_of(const CaptionModel& m) {
  std::vector<std::span<const double>> out;
  m.for_each_tensor([&](const std::string&, std::span<const double> s) { out.push_back(s); });
  return out;
}

struct Example {
  std::size_t item = 0;
  TokenSequence caption;
};

std::vector<Example> examples_for(const Corpus& corpus, Split split, const Vocabulary& vocab) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    const auto& item = corpus.items[i];
    if (item.split != split) continue;
    for (const auto& text : item.captions) out.push_back({i, encode(tokenize(text), vocab)});
  }
  return out;
}

std::vector<std::optional<Vector>> guidance_table(const CaptionModel& model,
                                                  const Corpus& corpus, Split split,
                                                  const GuidanceProvider& guidance) {
  std::vector<std::optional<Vector>> table(corpus.items.size());
  if (!model.guided()) return table;
  if (!guidance) throw BadInputError("gLSTM model needs a guidance source");
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    if (corpus.items[i].split == split) table[i] = guidance(corpus.items[i]);
  }
  return table;
}

LossReport evaluate_examples(const CaptionModel& model, const Corpus& corpus,
                             const std::vector<Example>& examples,
                             const std::vector<std::optional<Vector>>& guidance) {
  LossReport total;
  for (const auto& ex : examples) {
    const auto& g = guidance[ex.item];
    ForwardPass pass = forward_loss(model, corpus.items[ex.item].feature, ex.caption,
                                    g ? &*g : nullptr);
    total.nll += pass.report.nll;
    total.tokens += pass.report.tokens;
  }
  return total;
}

void rmsprop_update(CaptionModel& params, CaptionModel& accumulators,
                    const CaptionModel& grads, const TrainConfig& cfg) {
  auto p = spans_of(params);
  auto r = spans_of(accumulators);
  auto g = spans_of(grads);
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      const double gi = std::clamp(g[t][i], -cfg.grad_clip, cfg.grad_clip);
      r[t][i] = cfg.rms_decay * r[t][i] + (1.0 - cfg.rms_decay) * gi * gi;
      p[t][i] -= cfg.learning_rate * gi / (std::sqrt(r[t][i]) + cfg.rms_epsilon);
    }
  }
}

json dims_json(const ModelDims& d) {
  return {{"feature", d.feature}, {"vocab", d.vocab}, {"embed", d.embed},
          {"hidden", d.hidden}, {"guidance", d.guidance}};
}

json config_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"rms_decay", c.rms_decay},
          {"rms_epsilon", c.rms_epsilon},     {"grad_clip", c.grad_clip},
          {"dropout", c.dropout},             {"max_epochs", c.max_epochs},
          {"patience", c.patience},           {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.rms_decay = j.at("rms_decay").get<double>();
  c.rms_epsilon = j.at("rms_epsilon").get<double>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json epoch_json(const EpochLog& e) {
  return {{"epoch", e.epoch},         {"train_nll", e.train_nll}, {"train_tokens", e.train_tokens},
          {"val_nll", e.val_nll},     {"val_tokens", e.val_tokens}, {"improved", e.improved}};
}

EpochLog epoch_from_json(const json& j) {
  EpochLog e;
  e.epoch = j.at("epoch").get<std::size_t>();
  e.train_nll = j.at("train_nll").get<double>();
  e.train_tokens = j.at("train_tokens").get<std::size_t>();
  e.val_nll = j.at("val_nll").get<double>();
  e.val_tokens = j.at("val_tokens").get<std::size_t>();
  e.improved = j.at("improved").get<bool>();
  return e;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void append_tensors(const CaptionModel& m, std::vector<double>& out) {
  m.for_each_tensor([&](const std::string&, std::span<const double> s) {
    out.insert(out.end(), s.begin(), s.end());
  });
}

std::size_t read_tensors(CaptionModel& m, std::span<const double> payload, std::size_t offset) {
  m.for_each_tensor([&](const std::string& name, std::span<double> s) {
    if (offset + s.size() > payload.size()) {
      throw TruncatedFileError("checkpoint payload ends inside tensor '" + name + "'");
    }
    std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(offset), s.size(), s.begin());
    offset += s.size();
  });
  return offset;
}

}  // namespace

std::string_view cell_kind_name(CellKind kind) {
  return kind == CellKind::kGlstm ? "glstm" : "lstm";
}

CellKind parse_cell_kind(std::string_view name) {
  if (name == "lstm") return CellKind::kLstm;
  if (name == "glstm") return CellKind::kGlstm;
  throw BadInputError("unknown cell kind '" + std::string(name) + "'");
}

CaptionModel CaptionModel::create(CellKind kind, const ModelDims& dims,
                                  std::shared_ptr<const Vocabulary> vocab,
                                  const ModelOptions& options, std::uint64_t seed) {
  if (!vocab || vocab->size() != dims.vocab) {
    throw BadInputError("CaptionModel: vocabulary size does not match dims.vocab");
  }
  if ((kind == CellKind::kGlstm) != (dims.guidance > 0)) {
    throw BadInputError("CaptionModel: guidance dim must be set iff the cell is gLSTM");
  }
  if (dims.feature == 0 || dims.embed == 0 || dims.hidden == 0) {
    throw BadInputError("CaptionModel: dimensions must be positive");
  }
  Rng rng(seed);
  CaptionModel m = zero_model(kind, dims, std::move(vocab), options.cell_bias);
  fill_uniform(m.image_projection, dims.feature, rng);
  fill_uniform(m.word_embedding, dims.vocab, rng);
  // Guidance weights are drawn last so the remaining parameters match an LSTM
  // created from the same seed.
  m.base_cell() = LstmParams::random(dims.hidden, dims.embed, options.cell_bias, rng);
  fill_uniform(m.decoder, dims.hidden, rng);
  if (auto* g = std::get_if<GlstmParams>(&m.cell)) {
    g->guidance = options.zero_guidance_init
                      ? GuidanceWeights::zeros(dims.hidden, dims.guidance)
                      : GuidanceWeights::random(dims.hidden, dims.guidance, rng);
  }
  return m;
}

ModelDims CaptionModel::dims() const {
  ModelDims d;
  d.feature = image_projection.cols();
  d.vocab = word_embedding.cols();
  d.embed = image_projection.rows();
  d.hidden = decoder.cols();
  if (const auto* g = std::get_if<GlstmParams>(&cell)) d.guidance = g->guidance_dim();
  return d;
}

const LstmParams& CaptionModel::base_cell() const {
  if (const auto* g = std::get_if<GlstmParams>(&cell)) return g->lstm;
  return std::get<LstmParams>(cell);
}

LstmParams& CaptionModel::base_cell() {
  if (auto* g = std::get_if<GlstmParams>(&cell)) return g->lstm;
  return std::get<LstmParams>(cell);
}

CaptionModel CaptionModel::zeros_like() const {
  return zero_model(kind(), dims(), vocab, base_cell().use_bias);
}

std::size_t CaptionModel::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, std::span<const double> s) { n += s.size(); });
  return n;
}

AssembledSequence assemble_sequence(const CaptionModel& model, const Vector& image_feature,
                                    const TokenSequence& caption) {
  const Vocabulary& vocab = *model.vocab;
  if (caption.empty() || caption.back() != vocab.end_id()) {
    throw BadInputError("assemble_sequence: caption must end with END");
  }
  AssembledSequence seq;
  seq.inputs.reserve(caption.size());
  seq.inputs.push_back(matvec(model.image_projection, image_feature));
  for (std::size_t l = 0; l + 1 < caption.size(); ++l) {
    if (caption[l] >= vocab.size()) throw BadInputError("assemble_sequence: token out of range");
    seq.inputs.push_back(model.word_embedding.column(caption[l]));
  }
  seq.targets = caption;
  return seq;
}

double LossReport::perplexity() const {
  return tokens ? std::exp(nll / static_cast<double>(tokens)) : 1.0;
}

ForwardPass forward_loss(const CaptionModel& model, const Vector& image_feature,
                         const TokenSequence& caption, const Vector* guidance,
                         const DropoutSpec& dropout) {
  if (model.guided() && !guidance) throw BadInputError("forward_loss: gLSTM needs guidance");
  AssembledSequence seq = assemble_sequence(model, image_feature, caption);
  const std::size_t steps = seq.inputs.size();
  const bool drop = dropout.rate > 0.0 && dropout.rng;

  ForwardPass pass;
  pass.image_feature = image_feature;
  pass.caption = caption;
  pass.model_tag = dims_tag(model.dims(), model.kind());
  if (drop) {
    for (auto& x : seq.inputs) {
      pass.input_masks.push_back(dropout_mask(x.dim(), dropout));
      x = hadamard(x, pass.input_masks.back());
    }
  }

  SequenceResult run;
  if (const auto* g = std::get_if<GlstmParams>(&model.cell)) {
    pass.guidance = *guidance;
    run = sequence_forward(*g, seq.inputs, *guidance, CellState::zeros(g->hidden_dim()));
  } else {
    const auto& p = std::get<LstmParams>(model.cell);
    run = sequence_forward(p, seq.inputs, CellState::zeros(p.hidden_dim()));
  }

  pass.report.tokens = steps;
  pass.report.step_nll.reserve(steps);
  for (std::size_t l = 0; l < steps; ++l) {
    Vector m = run.outputs[l];
    if (drop) {
      pass.output_masks.push_back(dropout_mask(m.dim(), dropout));
      m = hadamard(m, pass.output_masks.back());
    }
    Vector logits = matvec(model.decoder, m);
    add_inplace(logits, model.decoder_bias);
    const Vector logp = log_softmax(logits);
    const double nll = -logp[seq.targets[l]];
    pass.report.step_nll.push_back(nll);
    pass.report.nll += nll;
    Vector probs(logp.dim());
    for (std::size_t k = 0; k < probs.dim(); ++k) probs[k] = std::exp(logp[k]);
    pass.probabilities.push_back(std::move(probs));
    pass.dropped_outputs.push_back(std::move(m));
  }
  pass.cell_cache = std::move(run.cache);
  return pass;
}

ModelGradients backward(const CaptionModel& model, const ForwardPass& pass) {
  if (pass.model_tag != dims_tag(model.dims(), model.kind())) {
    throw BadInputError("backward: forward pass was recorded for a different model");
  }
  ModelGradients out{model.zeros_like(), std::nullopt};
  CaptionModel& g = out.params;
  const std::size_t steps = pass.probabilities.size();
  const bool drop = !pass.output_masks.empty();

  std::vector<Vector> grad_m(steps);
  for (std::size_t l = 0; l < steps; ++l) {
    Vector dlogits = pass.probabilities[l];
    dlogits[pass.caption[l]] -= 1.0;
    add_outer_inplace(g.decoder, dlogits, pass.dropped_outputs[l]);
    add_inplace(g.decoder_bias, dlogits);
    grad_m[l] = matvec_transposed(model.decoder, dlogits);
    if (drop) grad_m[l] = hadamard(grad_m[l], pass.output_masks[l]);
  }

  std::vector<Vector> grad_inputs;
  if (const auto* p = std::get_if<GlstmParams>(&model.cell)) {
    GlstmGradients cg = sequence_backward(*p, pass.cell_cache, grad_m);
    std::get<GlstmParams>(g.cell) = std::move(cg.params);
    out.guidance = std::move(cg.guidance);
    grad_inputs = std::move(cg.inputs);
  } else {
    LstmGradients cg = sequence_backward(std::get<LstmParams>(model.cell), pass.cell_cache, grad_m);
    std::get<LstmParams>(g.cell) = std::move(cg.params);
    grad_inputs = std::move(cg.inputs);
  }

  for (std::size_t l = 0; l < steps; ++l) {
    Vector dx = std::move(grad_inputs[l]);
    if (!pass.input_masks.empty()) dx = hadamard(dx, pass.input_masks[l]);
    if (l == 0) {
      add_outer_inplace(g.image_projection, dx, pass.image_feature);
    } else {
      const TokenId word = pass.caption[l - 1];
      for (std::size_t r = 0; r < dx.dim(); ++r) g.word_embedding(r, word) += dx[r];
    }
  }
  return out;
}

namespace {

BoundCell bind_cell(const CaptionModel& model, const Vector* guidance) {
  if (const auto* g = std::get_if<GlstmParams>(&model.cell)) {
    if (!guidance) throw BadInputError("Inference: gLSTM model needs a guidance vector");
    return BoundCell(*g, *guidance);
  }
  return BoundCell(std::get<LstmParams>(model.cell));
}

}  // namespace

Inference::Inference(const CaptionModel& model, const Vector* guidance)
    : model_(&model), cell_(bind_cell(model, guidance)) {}

InferenceState Inference::emit(CellState cell) const {
  Vector logits = matvec(model_->decoder, cell.m);
  add_inplace(logits, model_->decoder_bias);
  return {std::move(cell), log_softmax(logits)};
}

InferenceState Inference::begin(const Vector& image_feature) const {
  const Vector x = matvec(model_->image_projection, image_feature);
  return emit(cell_.step(x, CellState::zeros(model_->dims().hidden)).state);
}

InferenceState Inference::advance(const InferenceState& state, TokenId token) const {
  if (token >= model_->word_embedding.cols()) throw BadInputError("Inference: token out of range");
  return emit(cell_.step(model_->word_embedding.column(token), state.cell).state);
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !(rms_epsilon > 0.0) || !(grad_clip > 0.0)) {
    throw BadInputError("TrainConfig: learning rate must be >= 0, epsilon and clip > 0");
  }
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) {
    throw BadInputError("TrainConfig: RMSProp decay must be in [0, 1)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw BadInputError("TrainConfig: dropout must be in [0, 1)");
  }
  if (max_epochs == 0) throw BadInputError("TrainConfig: max_epochs must be >= 1");
}

double EpochLog::train_perplexity() const {
  return train_tokens ? std::exp(train_nll / static_cast<double>(train_tokens)) : 1.0;
}

double EpochLog::val_perplexity() const {
  return val_tokens ? std::exp(val_nll / static_cast<double>(val_tokens)) : 1.0;
}

LossReport evaluate_split(const CaptionModel& model, const Corpus& corpus, Split split,
                          const GuidanceProvider& guidance) {
  const auto examples = examples_for(corpus, split, *model.vocab);
  const auto table = guidance_table(model, corpus, split, guidance);
  return evaluate_examples(model, corpus, examples, table);
}

TrainResult train(const CaptionModel& initial, const Corpus& corpus,
                  const GuidanceProvider& guidance, const TrainConfig& config,
                  const TrainState* resume,
                  const std::function<void(const EpochLog&, const TrainState&)>& on_epoch) {
  config.validate();
  const Vocabulary& vocab = *initial.vocab;
  const auto train_examples = examples_for(corpus, Split::kTrain, vocab);
  const auto val_examples = examples_for(corpus, Split::kVal, vocab);
  if (train_examples.empty() || val_examples.empty()) {
    throw BadInputError("train: training and validation splits must both be nonempty");
  }
  const auto train_guidance = guidance_table(initial, corpus, Split::kTrain, guidance);
  const auto val_guidance = guidance_table(initial, corpus, Split::kVal, guidance);

  TrainResult result;
  result.model = initial;
  TrainState& st = result.state;
  st.current = initial;
  st.accumulators = initial.zeros_like();
  if (resume) {
    st = *resume;
    result.model = initial;
  } else {
    st.initial_val_nll = evaluate_examples(initial, corpus, val_examples, val_guidance).nll;
    st.best_val_nll = st.initial_val_nll;
  }
  if (resume && st.stale_epochs >= config.patience && st.epochs_done > 0) return result;

  std::vector<std::size_t> order(train_examples.size());
  while (st.epochs_done < config.max_epochs) {
    const std::size_t epoch = st.epochs_done + 1;
    Rng order_rng(config.seed, 2 * epoch);
    Rng dropout_rng(config.seed, 2 * epoch + 1);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[order_rng.below(i)]);
    }

    EpochLog log;
    log.epoch = epoch;
    const DropoutSpec dropout{config.dropout, &dropout_rng};
    for (std::size_t idx : order) {
      const Example& ex = train_examples[idx];
      const auto& g = train_guidance[ex.item];
      ForwardPass pass = forward_loss(st.current, corpus.items[ex.item].feature, ex.caption,
                                      g ? &*g : nullptr, dropout);
      if (!std::isfinite(pass.report.nll)) {
        throw DivergenceError("training diverged: non-finite loss in epoch " +
                              std::to_string(epoch));
      }
      log.train_nll += pass.report.nll;
      log.train_tokens += pass.report.tokens;
      ModelGradients grads = backward(st.current, pass);
      rmsprop_update(st.current, st.accumulators, grads.params, config);
    }

    const LossReport val = evaluate_examples(st.current, corpus, val_examples, val_guidance);
    if (!std::isfinite(val.nll)) {
      throw DivergenceError("training diverged: non-finite validation loss in epoch " +
                            std::to_string(epoch));
    }
    log.val_nll = val.nll;
    log.val_tokens = val.tokens;
    st.epochs_done = epoch;
    if (val.nll < st.best_val_nll) {
      log.improved = true;
      st.best_val_nll = val.nll;
      st.best_epoch = epoch;
      st.stale_epochs = 0;
      result.model = st.current;
    } else {
      ++st.stale_epochs;
    }
    st.log.push_back(log);
    if (on_epoch) on_epoch(log, st);
    if (st.stale_epochs >= config.patience) break;
  }
  return result;
}

std::string serialize_checkpoint(const CaptionModel& model, const TrainConfig* config,
                                 const TrainState* state, const CheckpointMeta* meta) {
  json header;
  header["format"] = "glstm-checkpoint";
  header["cell"] = std::string(cell_kind_name(model.kind()));
  header["cell_bias"] = model.base_cell().use_bias;
  header["dims"] = dims_json(model.dims());
  header["vocab"] = model.vocab->tokens();
  header["vocab_checksum"] = hex64(model.vocab->checksum());
  if (config) header["config"] = config_json(*config);
  if (meta) header["meta"] = *meta;
  json tensors = json::array();
  model.for_each_tensor([&](const std::string& name, std::span<const double> s) {
    tensors.push_back({{"name", name}, {"size", s.size()}});
  });
  header["tensors"] = std::move(tensors);

  io::Container c;
  append_tensors(model, c.payload);
  if (state) {
    json log = json::array();
    for (const auto& e : state->log) log.push_back(epoch_json(e));
    header["train_state"] = {{"epochs_done", state->epochs_done},
                             {"best_epoch", state->best_epoch},
                             {"best_val_nll", state->best_val_nll},
                             {"initial_val_nll", state->initial_val_nll},
                             {"stale_epochs", state->stale_epochs},
                             {"log", std::move(log)}};
    append_tensors(state->current, c.payload);
    append_tensors(state->accumulators, c.payload);
  }
  c.header_json = header.dump();
  return io::encode_container(kCheckpointMagic, kCheckpointVersion, c);
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  io::Container c = io::decode_container(bytes, kCheckpointMagic, kCheckpointVersion);
  try {
    const json header = json::parse(c.header_json);
    const CellKind kind = parse_cell_kind(header.at("cell").get<std::string>());
    const json& d = header.at("dims");
    ModelDims dims{d.at("feature").get<std::size_t>(), d.at("vocab").get<std::size_t>(),
                   d.at("embed").get<std::size_t>(), d.at("hidden").get<std::size_t>(),
                   d.at("guidance").get<std::size_t>()};
    auto vocab = std::make_shared<const Vocabulary>(
        Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>()));
    if (hex64(vocab->checksum()) != header.at("vocab_checksum").get<std::string>()) {
      throw ChecksumError("checkpoint: vocabulary checksum mismatch");
    }
    if (vocab->size() != dims.vocab) {
      throw ChecksumError("checkpoint: vocabulary size disagrees with recorded dims");
    }
    Checkpoint out{zero_model(kind, dims, vocab, header.at("cell_bias").get<bool>()),
                   std::nullopt, std::nullopt, {}};
    std::size_t offset = read_tensors(out.model, c.payload, 0);
    if (header.contains("config")) out.config = config_from_json(header.at("config"));
    if (header.contains("meta")) out.meta = header.at("meta").get<CheckpointMeta>();
    if (header.contains("train_state")) {
      const json& s = header.at("train_state");
      TrainState st;
      st.current = out.model.zeros_like();
      st.accumulators = out.model.zeros_like();
      st.epochs_done = s.at("epochs_done").get<std::size_t>();
      st.best_epoch = s.at("best_epoch").get<std::size_t>();
      st.best_val_nll = s.at("best_val_nll").get<double>();
      st.initial_val_nll = s.at("initial_val_nll").get<double>();
      st.stale_epochs = s.at("stale_epochs").get<std::size_t>();
      for (const auto& e : s.at("log")) st.log.push_back(epoch_from_json(e));
      offset = read_tensors(st.current, c.payload, offset);
      offset = read_tensors(st.accumulators, c.payload, offset);
      out.state = std::move(st);
    }
    if (offset != c.payload.size()) {
      throw MalformedInputError("checkpoint: " + std::to_string(c.payload.size() - offset) +
                                " trailing values after the declared tensors");
    }
    return out;
  } catch (const json::exception& e) {
    throw MalformedInputError(std::string("checkpoint: malformed header: ") + e.what());
  }
}

void save_checkpoint(const CaptionModel& model, const std::filesystem::path& path,
                     const TrainConfig* config, const TrainState* state,
                     const CheckpointMeta* meta) {
  io::write_file_atomic(path, serialize_checkpoint(model, config, state, meta));
}

CaptionModel load_checkpoint(const std::filesystem::path& path) {
  return std::move(load_checkpoint_full(path).model);
}

Checkpoint load_checkpoint_full(const std::filesystem::path& path) {
  return deserialize_checkpoint(io::read_file(path));
}

}  // namespace glstm
