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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "glstm/binary_io.hpp"
#include "glstm/captioner.hpp"
#include "glstm/decoder.hpp"
#include "glstm/error.hpp"
#include "glstm/metrics.hpp"
#include "glstm/semspace.hpp"
#include "glstm/textcorpus.hpp"
#include "json.hpp"

namespace glstm::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void require_flag(const std::string& value, const char* flag) {
  if (value.empty()) throw BadInputError(std::string("missing required flag ") + flag);
}

std::vector<std::string> training_captions(const Corpus& corpus) {
  std::vector<std::string> texts;
  for (const CorpusItem* item : corpus.split(Split::kTrain))
    texts.insert(texts.end(), item->captions.begin(), item->captions.end());
  return texts;
}

CcaPairing parse_pairing(const std::string& name) {
  if (name == "caption") return CcaPairing::kPerCaption;
  if (name == "image") return CcaPairing::kPerImage;
  throw BadInputError("unknown CCA pairing '" + name + "' (expected caption|image)");
}

RetVocabulary parse_ret_vocab(const std::string& name) {
  if (name == "cca") return RetVocabulary::kCca;
  if (name == "lstm") return RetVocabulary::kLstm;
  throw BadInputError("unknown ret vocabulary '" + name + "' (expected cca|lstm)");
}

// Owns everything a guidance vector may be built from.
struct GuidanceContext {
  GuidanceKind kind = GuidanceKind::kImg;
  std::optional<LoadedCca> cca;
  std::optional<SemanticIndex> index;
  GuidanceSources sources;

  Vector build(const Vector& feature) const { return build_guidance(kind, feature, sources).vector; }
};

std::unique_ptr<GuidanceContext> make_guidance(GuidanceKind kind, const std::string& cca_path,
                                               RetVocabulary ret_vocab, std::size_t top_t,
                                               const Vocabulary* lstm_vocab) {
  auto ctx = std::make_unique<GuidanceContext>();
  ctx->kind = kind;
  if (kind != GuidanceKind::kImg) {
    if (cca_path.empty()) {
      throw BadInputError(std::string(guidance_kind_name(kind)) +
                          " guidance needs a CCA model (--cca)");
    }
    ctx->cca = load_cca(cca_path);
    ctx->sources.cca = &ctx->cca->model;
    ctx->sources.vectorizer = &ctx->cca->vectorizer;
    if (kind == GuidanceKind::kRet) {
      ctx->index = load_index(index_path_for(cca_path));
      ctx->sources.index = &*ctx->index;
    }
  }
  ctx->sources.ret_vocabulary = ret_vocab;
  ctx->sources.lstm_vocab = lstm_vocab;
  ctx->sources.top_t = top_t;
  return ctx;
}

ordered_json epoch_record(const EpochLog& e) {
  ordered_json j;
  j["epoch"] = e.epoch;
  j["train_nll"] = e.train_nll;
  j["train_tokens"] = e.train_tokens;
  j["train_ppl"] = e.train_perplexity();
  j["val_nll"] = e.val_nll;
  j["val_tokens"] = e.val_tokens;
  j["val_ppl"] = e.val_perplexity();
  j["improved"] = e.improved;
  return j;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::size_t decode_threads(std::size_t items) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GLSTM_THREADS")) {
    try {
      n = std::max<std::size_t>(1, std::stoul(env));
    } catch (const std::exception&) {
      throw BadInputError("GLSTM_THREADS must be a positive integer");
    }
  }
  return std::min(n, std::max<std::size_t>(items, 1));
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    io::write_file_atomic(path, text);
  }
}

}  // namespace

std::string index_path_for(const std::string& cca_path) { return cca_path + ".index"; }

void cmd_cca_fit(const RunConfig& config, std::ostream& out) {
  require_flag(config.manifest, "--manifest");
  require_flag(config.out, "--out");
  const Corpus corpus = load_manifest(config.manifest);
  const auto train = corpus.split(Split::kTrain);
  if (train.empty()) throw BadInputError("manifest has no training split");

  const TfIdfVectorizer vectorizer =
      TfIdfVectorizer::fit(training_captions(corpus), config.bow_vocab);
  const CcaTrainingViews views =
      cca_training_views(train, vectorizer, parse_pairing(config.cca_pairing));
  const CcaModel model =
      fit_cca(views.images, views.texts, {config.cca_dim, config.cca_p, config.cca_ridge});
  const SemanticIndex index = build_index(model, vectorizer, train);

  const std::string model_bytes = serialize_cca(model, vectorizer);
  const std::string index_bytes = serialize_index(index);
  io::write_file_atomic(config.out, model_bytes);
  io::write_file_atomic(index_path_for(config.out), index_bytes);

  out << "canonical correlations (top " << std::min<std::size_t>(10, model.dim()) << "):";
  for (std::size_t j = 0; j < std::min<std::size_t>(10, model.dim()); ++j)
    out << ' ' << std::setprecision(6) << model.correlations[j];
  out << "\nwrote " << config.out << " and " << index_path_for(config.out) << " ("
      << index.refs.size() << " indexed captions)\n";
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  require_flag(config.manifest, "--manifest");
  require_flag(config.out, "--out");
  const Corpus corpus = load_manifest(config.manifest);

  TrainConfig tc;
  tc.learning_rate = config.lr;
  tc.dropout = config.dropout;
  tc.max_epochs = config.epochs;
  tc.patience = config.patience;
  tc.seed = config.seed;
  tc.validate();

  std::optional<Checkpoint> resumed;
  if (!config.resume.empty()) {
    resumed = load_checkpoint_full(config.resume);
    if (!resumed->state) throw BadInputError(config.resume + " holds no training state");
  }

  const CellKind kind =
      resumed ? resumed->model.kind() : parse_cell_kind(config.cell);
  std::string guidance_name = config.guidance;
  if (resumed && resumed->meta.contains("guidance")) guidance_name = resumed->meta.at("guidance");
  if (kind == CellKind::kLstm && !guidance_name.empty()) {
    throw BadInputError("--guidance requires --cell glstm");
  }
  if (kind == CellKind::kGlstm && guidance_name.empty()) {
    throw BadInputError("--cell glstm requires --guidance {ret,emb,img}");
  }

  std::shared_ptr<const Vocabulary> vocab =
      resumed ? resumed->model.vocab
              : std::make_shared<const Vocabulary>(
                    build_vocab(training_captions(corpus), config.min_count));

  std::unique_ptr<GuidanceContext> guide;
  CheckpointMeta meta;
  if (kind == CellKind::kGlstm) {
    guide = make_guidance(parse_guidance_kind(guidance_name), config.cca,
                          parse_ret_vocab(config.ret_vocab), config.top_t, vocab.get());
    meta["guidance"] = guidance_name;
    meta["ret_vocab"] = config.ret_vocab;
    meta["top_t"] = std::to_string(config.top_t);
  }
  GuidanceProvider provider;
  if (guide) provider = [&](const CorpusItem& item) { return guide->build(item.feature); };

  CaptionModel initial;
  if (resumed) {
    initial = resumed->model;
  } else {
    ModelDims dims{corpus.feature_dim, vocab->size(), config.embed, config.hidden, 0};
    if (guide) dims.guidance = guidance_dim(guide->kind, corpus.feature_dim, guide->sources);
    initial = CaptionModel::create(kind, dims, vocab,
                                   {!config.no_cell_bias, config.zero_guidance_init}, config.seed);
  }

  std::string log_text;
  if (resumed) {
    for (const auto& e : resumed->state->log) log_text += epoch_record(e).dump() + "\n";
  }
  const TrainResult result =
      train(initial, corpus, provider, tc, resumed ? &*resumed->state : nullptr,
            [&](const EpochLog& e, const TrainState&) {
              log_text += epoch_record(e).dump() + "\n";
              out << "epoch " << e.epoch << ": train ppl " << e.train_perplexity() << ", val ppl "
                  << e.val_perplexity() << (e.improved ? " *" : "") << "\n";
            });

  const LossReport final_train = evaluate_split(result.model, corpus, Split::kTrain, provider);
  io::write_file_atomic(config.out, serialize_checkpoint(result.model, &tc, nullptr, &meta));
  if (!config.state_out.empty()) {
    io::write_file_atomic(config.state_out,
                          serialize_checkpoint(result.model, &tc, &result.state, &meta));
  }
  io::write_file_atomic(config.log.empty() ? config.out + ".log.jsonl" : config.log, log_text);
  out << "early stop: best epoch " << result.state.best_epoch << " of "
      << result.state.epochs_done << " run\n";
  out << "final train perplexity " << std::setprecision(10) << final_train.perplexity() << "\n";
}

void cmd_generate(const RunConfig& config, std::ostream& out) {
  require_flag(config.manifest, "--manifest");
  require_flag(config.model, "--model");
  const Corpus corpus = load_manifest(config.manifest);
  const Checkpoint ckpt = load_checkpoint_full(config.model);
  const CaptionModel& model = ckpt.model;
  const auto items = corpus.split(parse_split(config.split));
  if (items.empty()) throw BadInputError("manifest has no items in split '" + config.split + "'");

  std::unique_ptr<GuidanceContext> guide;
  if (model.guided()) {
    if (!ckpt.meta.contains("guidance")) {
      throw BadInputError("gLSTM checkpoint does not record its guidance kind");
    }
    const std::size_t top_t =
        ckpt.meta.contains("top_t") ? std::stoul(ckpt.meta.at("top_t")) : config.top_t;
    const std::string ret_vocab =
        ckpt.meta.contains("ret_vocab") ? ckpt.meta.at("ret_vocab") : config.ret_vocab;
    guide = make_guidance(parse_guidance_kind(ckpt.meta.at("guidance")), config.cca,
                          parse_ret_vocab(ret_vocab), top_t, model.vocab.get());
  }

  DecodeConfig dc;
  dc.beam_width = config.beam_width;
  dc.max_length = config.max_length;
  dc.norm.kind = parse_norm_kind(config.norm);
  dc.norm.power = config.norm_power;
  if (dc.norm.kind == NormKind::kMinHinge || dc.norm.kind == NormKind::kMaxHinge ||
      dc.norm.kind == NormKind::kGaussian) {
    const LengthStats stats = length_stats(corpus);
    dc.norm.mean = stats.mean;
    dc.norm.stddev = stats.stddev;
  }
  dc.validate();

  struct Line {
    std::string id;
    std::string text;
  };
  std::vector<Line> lines(items.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        const CorpusItem& item = *items[i];
        std::optional<Vector> g;
        if (guide) g = guide->build(item.feature);
        const DecodeResult r = beam_search(model, item.feature, g ? &*g : nullptr, dc);
        ordered_json j;
        j["id"] = item.id;
        j["caption"] = join(decode(r.best.tokens, *model.vocab));
        j["score"] = r.best_score;
        j["length"] = r.best.word_length();
        lines[i] = {item.id, j.dump()};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t threads = decode_threads(items.size());
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return a.id < b.id; });
  std::string text;
  for (const auto& l : lines) text += l.text + "\n";
  emit(config.out, text, out);
}

void cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err) {
  require_flag(config.generated, "--generated");
  require_flag(config.manifest, "--manifest");
  const Corpus corpus = load_manifest(config.manifest);
  const Split split = parse_split(config.split);
  const std::string text = io::read_file(config.generated);

  std::vector<EvalPair> pairs;
  std::vector<std::size_t> lengths;
  std::vector<std::string> unknown;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                                    : j.at("id").dump();
      const CorpusItem* item = corpus.find(id);
      if (!item || item->split != split) {
        unknown.push_back(id);
        continue;
      }
      EvalPair pair;
      pair.candidate = tokenize(j.at("caption").get<std::string>());
      for (const auto& c : item->captions) pair.references.push_back(tokenize(c));
      lengths.push_back(pair.candidate.size());
      pairs.push_back(std::move(pair));
    } catch (const json::exception& e) {
      throw MalformedInputError(config.generated + ": bad generation line: " + e.what());
    }
  }
  if (!unknown.empty()) {
    std::string ids;
    for (const auto& id : unknown) ids += (ids.empty() ? "" : ", ") + id;
    throw BadInputError("generated ids not found in the " + config.split +
                        " split: " + ids);
  }
  if (pairs.empty()) throw BadInputError(config.generated + ": no generations to evaluate");

  const BleuReport report = bleu(pairs);
  const std::string report_json = bleu_report_json(report);
  if (!config.out.empty()) io::write_file_atomic(config.out, report_json + "\n");
  const LengthStats stats = length_stats(lengths);
  ordered_json len;
  len["length_mean"] = stats.mean;
  len["length_std"] = stats.stddev;
  out << report_json << "\n" << len.dump() << "\n";
  err << "note: METEOR and CIDEr are not computed by this tool\n";
}

void cmd_retrieve(const RunConfig& config, std::ostream& out) {
  require_flag(config.cca, "--cca");
  const LoadedCca cca = load_cca(config.cca);
  const SemanticIndex index = load_index(index_path_for(config.cca));

  Vector feature;
  if (!config.feature_file.empty()) {
    const Matrix rows = load_features(config.feature_file);
    if (rows.rows() == 0) throw BadInputError(config.feature_file + ": no feature rows");
    auto r = rows.row(0);
    feature = Vector(std::vector<double>(r.begin(), r.end()));
  } else {
    require_flag(config.image_id, "--image-id or --feature-file");
    require_flag(config.manifest, "--manifest");
    const Corpus corpus = load_manifest(config.manifest);
    const CorpusItem* item = corpus.find(config.image_id);
    if (!item) throw BadInputError("unknown image id '" + config.image_id + "'");
    feature = item->feature;
  }

  const auto hits = retrieve(cca.model, index, feature, config.top_t);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const CaptionRef& ref = index.refs[hits[i].row];
    out << (i + 1) << '\t' << std::setprecision(9) << hits[i].score << '\t' << ref.item_id
        << '\t' << ref.caption_index << '\t' << ref.text << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Guided-LSTM image caption generation"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) { sub->add_option("--manifest", cfg.manifest, "Dataset manifest (JSON)"); };

  auto* cca_fit = app.add_subcommand("cca-fit", "Fit TF-IDF and normalized CCA on the training split");
  common(cca_fit);
  cca_fit->add_option("--cca-dim", cfg.cca_dim, "Dimension of the shared space");
  cca_fit->add_option("--cca-p", cfg.cca_p, "Power applied to canonical correlations");
  cca_fit->add_option("--cca-ridge", cfg.cca_ridge, "Relative covariance ridge");
  cca_fit->add_option("--cca-pairing", cfg.cca_pairing, "caption | image");
  cca_fit->add_option("--bow-vocab", cfg.bow_vocab, "TF-IDF vocabulary size");
  cca_fit->add_option("--seed", cfg.seed, "Seed (fitting is deterministic)");
  cca_fit->add_option("--out", cfg.out, "Output CCA model path");

  auto* train_cmd = app.add_subcommand("train", "Train an LSTM or gLSTM caption model");
  common(train_cmd);
  train_cmd->add_option("--cell", cfg.cell, "lstm | glstm");
  train_cmd->add_option("--guidance", cfg.guidance, "ret | emb | img");
  train_cmd->add_option("--cca", cfg.cca, "CCA model (ret/emb guidance)");
  train_cmd->add_option("--top-t", cfg.top_t, "Retrieved captions for ret guidance");
  train_cmd->add_option("--ret-vocab", cfg.ret_vocab, "cca | lstm word list for ret guidance");
  train_cmd->add_option("--hidden", cfg.hidden, "Hidden size");
  train_cmd->add_option("--embed", cfg.embed, "Embedding size");
  train_cmd->add_option("--lr", cfg.lr, "RMSProp learning rate");
  train_cmd->add_option("--dropout", cfg.dropout, "Dropout rate");
  train_cmd->add_option("--epochs", cfg.epochs, "Maximum epochs");
  train_cmd->add_option("--patience", cfg.patience, "Early-stopping patience");
  train_cmd->add_option("--min-count", cfg.min_count, "Vocabulary frequency threshold");
  train_cmd->add_option("--seed", cfg.seed, "Seed");
  train_cmd->add_flag("--zero-guidance-init", cfg.zero_guidance_init,
                      "Start guidance projections at zero");
  train_cmd->add_flag("--no-cell-bias", cfg.no_cell_bias, "Run cells without gate biases");
  train_cmd->add_option("--resume", cfg.resume, "Continue from a --state-out checkpoint");
  train_cmd->add_option("--state-out", cfg.state_out, "Also write a resumable checkpoint");
  train_cmd->add_option("--log", cfg.log, "Training log path (JSONL)");
  train_cmd->add_option("--out", cfg.out, "Output checkpoint path");

  auto* generate_cmd = app.add_subcommand("generate", "Decode captions for a split");
  common(generate_cmd);
  generate_cmd->add_option("--model", cfg.model, "Checkpoint");
  generate_cmd->add_option("--cca", cfg.cca, "CCA model (ret/emb guidance)");
  generate_cmd->add_option("--norm", cfg.norm, "none | polynomial | min-hinge | max-hinge | gaussian");
  generate_cmd->add_option("--norm-power", cfg.norm_power, "Polynomial exponent m");
  generate_cmd->add_option("--beam-width", cfg.beam_width, "Beam width");
  generate_cmd->add_option("--max-length", cfg.max_length, "Maximum tokens including END");
  generate_cmd->add_option("--top-t", cfg.top_t, "Retrieved captions for ret guidance");
  generate_cmd->add_option("--split", cfg.split, "Split to decode");
  generate_cmd->add_option("--seed", cfg.seed, "Seed (decoding is deterministic)");
  generate_cmd->add_option("--out", cfg.out, "Output JSONL (stdout if omitted)");

  auto* eval_cmd = app.add_subcommand("eval", "Corpus BLEU of generated captions");
  common(eval_cmd);
  eval_cmd->add_option("--generated", cfg.generated, "Generated captions JSONL");
  eval_cmd->add_option("--split", cfg.split, "Split the ids belong to");
  eval_cmd->add_option("--out", cfg.out, "Write the BLEU report JSON here");

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Nearest training captions for an image");
  common(retrieve_cmd);
  retrieve_cmd->add_option("--cca", cfg.cca, "CCA model");
  retrieve_cmd->add_option("--image-id", cfg.image_id, "Manifest item id");
  retrieve_cmd->add_option("--feature-file", cfg.feature_file, "Feature file (first row used)");
  retrieve_cmd->add_option("--top-t", cfg.top_t, "Number of captions");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help;
    const int code = app.exit(e, help, help);
    (code == 0 ? out : err) << help.str();
    return code == 0 ? 0 : static_cast<int>(ErrorFamily::kBadInput);
  }

  try {
    if (cca_fit->parsed()) {
      cmd_cca_fit(cfg, out);
    } else if (train_cmd->parsed()) {
      cmd_train(cfg, out);
    } else if (generate_cmd->parsed()) {
      cmd_generate(cfg, out);
    } else if (eval_cmd->parsed()) {
      cmd_eval(cfg, out, err);
    } else if (retrieve_cmd->parsed()) {
      cmd_retrieve(cfg, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace glstm::cli
