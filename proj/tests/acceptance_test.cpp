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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "glstm/binary_io.hpp"
#include "glstm/captioner.hpp"
#include "glstm/decoder.hpp"
#include "glstm/metrics.hpp"
#include "glstm/semspace.hpp"
#include "support/test_support.hpp"

namespace glstm {
namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int cli_run(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "glstm");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "cli failure (%d): %s\n", code, e.str().c_str());
  return code;
}

Verdict gradient_oracle() {
  Verdict v;
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (CellKind kind : {CellKind::kLstm, CellKind::kGlstm}) {
    for (bool bias : {true, false}) {
      for (std::size_t steps = 4; steps <= 6; ++steps) {
        const bool guided = kind == CellKind::kGlstm;
        const CaptionModel m = CaptionModel::create(kind, {6, 8, 5, 5, guided ? 3u : 0u},
                                                    testing::word_vocab(6), {bias, false},
                                                    1000 + steps * 2 + bias);
        Rng rng(steps * 31 + bias);
        const Vector f = testing::random_vector(6, rng);
        const Vector g = testing::random_vector(3, rng);
        const TokenSequence cap = testing::random_caption(*m.vocab, steps - 1, rng);
        const auto r = testing::check_model_gradients(m, f, cap, guided ? &g : nullptr, 1e-5);
        checked += r.checked;
        if (r.worst > worst) {
          worst = r.worst;
          where = std::string(cell_kind_name(kind)) + " " + r.worst_name;
        }
      }
    }
  }
  v.require(worst < 1e-4, "relative error " + fmt("%.3g", worst) + " at " + where);
  v.detail = v.detail.empty() ? fmt("%.0f entries, max relative error %.2e", checked, worst)
                              : v.detail;
  return v;
}

Verdict reduction_invariant() {
  Verdict v;
  double worst = 0.0;
  std::size_t decodes = 0;
  auto vocab = testing::word_vocab(8);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelDims dims{6, 10, 6, 6, 0};
    const CaptionModel lstm = CaptionModel::create(CellKind::kLstm, dims, vocab, {}, seed);
    ModelDims gdims = dims;
    gdims.guidance = 4;
    const CaptionModel zero_w =
        CaptionModel::create(CellKind::kGlstm, gdims, vocab, {true, true}, seed);
    const CaptionModel random_w =
        CaptionModel::create(CellKind::kGlstm, gdims, vocab, {true, false}, seed);
    Rng rng(seed);
    for (int item = 0; item < 5; ++item) {
      const Vector f = testing::random_vector(6, rng, -2.0, 2.0);
      const Vector g = testing::random_vector(4, rng);
      const Vector g0(4);
      const TokenSequence cap = testing::random_caption(*vocab, 2 + rng.below(6), rng);
      const double base = forward_loss(lstm, f, cap).report.nll;
      worst = std::max(worst, std::abs(base - forward_loss(zero_w, f, cap, &g).report.nll));
      worst = std::max(worst, std::abs(base - forward_loss(random_w, f, cap, &g0).report.nll));
      DecodeConfig c;
      c.beam_width = 3;
      c.max_length = 12;
      const auto expect = beam_search(lstm, f, nullptr, c).best.tokens;
      v.require(beam_search(zero_w, f, &g, c).best.tokens == expect, "caption differs (zero guidance weights)");
      v.require(beam_search(random_w, f, &g0, c).best.tokens == expect, "caption differs (zero guidance vector)");
      decodes += 2;
    }
  }
  v.require(worst <= 1e-12, "loss difference " + fmt("%.3g", worst));

  // End to end through the command line: zero-initialised guidance and lr 0.
  testing::TempDir dir("reduction");
  testing::write_manifest(dir.file("m.json"), testing::topic_corpus(12, 4, 8, 6, 21));
  std::vector<std::string> base = {"train", "--manifest", dir.file("m.json"), "--epochs", "1",
                                   "--lr", "0", "--hidden", "8", "--embed", "8",
                                   "--min-count", "1", "--seed", "9"};
  auto lstm = base;
  lstm.insert(lstm.end(), {"--out", dir.file("lstm.glsc")});
  auto glstm = base;
  glstm.insert(glstm.end(), {"--out", dir.file("glstm.glsc"), "--cell", "glstm", "--guidance",
                             "img", "--zero-guidance-init"});
  std::string gen_a, gen_b;
  const bool ran = cli_run(lstm) == 0 && cli_run(glstm) == 0 &&
                   cli_run({"generate", "--manifest", dir.file("m.json"), "--model",
                            dir.file("lstm.glsc")}, &gen_a) == 0 &&
                   cli_run({"generate", "--manifest", dir.file("m.json"), "--model",
                            dir.file("glstm.glsc")}, &gen_b) == 0;
  v.require(ran, "command-line runs failed");
  if (ran) {
    v.require(io::read_file(dir.file("lstm.glsc.log.jsonl")) ==
                  io::read_file(dir.file("glstm.glsc.log.jsonl")),
              "training logs differ");
    v.require(gen_a == gen_b && !gen_a.empty(), "generated captions differ");
  }
  if (v.pass) {
    v.detail = fmt("max loss difference %.1e over 100 losses, %.0f captions identical, CLI run identical",
                   worst, static_cast<double>(decodes));
  }
  return v;
}

Verdict beam_oracle() {
  Verdict v;
  std::size_t comparisons = 0;
  std::map<std::size_t, std::size_t> lengths;
  auto vocab = testing::word_vocab(4);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CaptionModel m = CaptionModel::create(CellKind::kLstm, {4, 6, 6, 6, 0}, vocab, {}, seed);
    Rng rng(seed + 500);
    // Sharpen the output distribution so the search problems are not all trivial.
    for (double& w : m.decoder.values()) w *= 25.0;
    for (double& b : m.decoder_bias.values()) b = rng.uniform(-1.5, 1.5);
    m.decoder_bias[vocab->end_id()] -= 1.5;
    const Vector f = testing::random_vector(4, rng, -3.0, 3.0);
    for (NormKind kind : {NormKind::kNone, NormKind::kPolynomial, NormKind::kMinHinge,
                          NormKind::kMaxHinge, NormKind::kGaussian}) {
      DecodeConfig c;
      c.beam_width = 5 * 5 * 5 * 5 * 5;
      c.max_length = 5;
      c.norm = {kind, 1.0, 3.0, 1.0};
      const auto beam = beam_search(m, f, nullptr, c);
      const auto oracle = exhaustive_oracle(m, f, nullptr, 5, c.norm);
      ++comparisons;
      ++lengths[oracle.best.word_length()];
      if (beam.best.tokens != oracle.best.tokens || beam.best_score != oracle.best_score) {
        v.require(false, "seed " + std::to_string(seed) + " norm " +
                             std::string(norm_kind_name(kind)) + " disagrees");
      }
    }
  }
  if (v.pass) {
    std::string spread;
    for (const auto& [len, n] : lengths) spread += " " + std::to_string(len) + ":" + std::to_string(n);
    v.detail = std::to_string(comparisons) + " (model, norm) pairs agree; best lengths" + spread;
  }
  return v;
}

Verdict length_bias() {
  Verdict v;
  testing::TempDir dir("lengthbias");
  const Corpus corpus = testing::topic_corpus(80, 20, 120, 8, 33);
  testing::write_manifest(dir.file("m.json"), corpus);
  const std::vector<std::string> train = {
      "train", "--manifest", dir.file("m.json"), "--out", dir.file("m.glsc"), "--hidden", "16",
      "--embed", "16", "--epochs", "40", "--patience", "5", "--lr", "0.005", "--dropout", "0.1",
      "--min-count", "1", "--seed", "5"};
  if (cli_run(train) != 0) {
    v.require(false, "training failed");
    return v;
  }
  auto mean_length = [&](const std::string& norm, std::size_t* count) {
    std::string out;
    if (cli_run({"generate", "--manifest", dir.file("m.json"), "--model", dir.file("m.glsc"),
                 "--norm", norm, "--norm-power", "1"}, &out) != 0) {
      return -1.0;
    }
    std::istringstream in(out);
    std::string line;
    double sum = 0.0;
    *count = 0;
    while (std::getline(in, line)) {
      sum += nlohmann::json::parse(line)["length"].get<double>();
      ++*count;
    }
    return sum / static_cast<double>(*count);
  };
  std::size_t n_none = 0, n_poly = 0;
  const double none = mean_length("none", &n_none);
  const double poly = mean_length("polynomial", &n_poly);
  v.require(n_none >= 100 && n_poly >= 100, "fewer than 100 decodes");
  v.require(none >= 0.0 && poly >= 0.0, "generation failed");
  v.require(none <= poly, fmt("mean length none %.3f > polynomial %.3f", none, poly));
  if (v.pass) {
    v.detail = fmt("%.0f decodes: mean length none %.3f <= polynomial %.3f",
                   static_cast<double>(n_none), none, poly);
  }
  return v;
}

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

Verdict cca_properties() {
  Verdict v;
  Rng rng(2024);
  const std::size_t n = 500;
  const Matrix x = gaussian(n, 10, rng);
  const double same = fit_cca(x, x, {5}).correlations[0];
  v.require(std::abs(same - 1.0) <= 1e-6, fmt("identical views: top correlation %.9f", same));

  Matrix y = matmul(x, testing::random_matrix(10, 12, rng));
  for (double& e : y.values()) e += 0.1 * rng.normal();
  const CcaModel related = fit_cca(x, y, {5});
  v.require(related.correlations[0] >= 0.95,
            fmt("linear views: top correlation %.4f", related.correlations[0]));

  Matrix shuffled(n, 12);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < 12; ++c) shuffled(r, c) = y(perm[r], c);
  const double unrelated = fit_cca(x, shuffled, {5}).correlations[0];
  v.require(unrelated <= 0.3, fmt("shuffled views: top correlation %.4f", unrelated));

  double worst_norm = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const Vector a(std::vector<double>(x.row(r).begin(), x.row(r).end()));
    const Vector b(std::vector<double>(y.row(r).begin(), y.row(r).end()));
    worst_norm = std::max(worst_norm, std::abs(norm2(project(related, a, View::kImage)) - 1.0));
    worst_norm = std::max(worst_norm, std::abs(norm2(project(related, b, View::kText)) - 1.0));
  }
  v.require(worst_norm <= 1e-12, fmt("projection norm off by %.3g", worst_norm));
  if (v.pass) {
    v.detail = fmt("identical %.9f, related %.4f, shuffled %.4f", same, related.correlations[0],
                   unrelated) + fmt(", max |norm-1| %.1e", worst_norm);
  }
  return v;
}

Verdict overfit_sanity() {
  Verdict v;
  testing::TempDir dir("overfit");
  const Corpus corpus = testing::overfit_corpus();
  testing::write_manifest(dir.file("m.json"), corpus);
  if (cli_run({"train", "--manifest", dir.file("m.json"), "--out", dir.file("m.glsc"),
               "--hidden", "24", "--embed", "16", "--epochs", "400", "--patience", "400",
               "--lr", "0.005", "--dropout", "0", "--min-count", "1", "--seed", "3"}) != 0) {
    v.require(false, "training failed");
    return v;
  }
  const CaptionModel model = load_checkpoint(dir.file("m.glsc"));
  const double ppl = evaluate_split(model, corpus, Split::kTrain, {}).perplexity();
  v.require(ppl < 1.05, fmt("train perplexity %.4f", ppl));
  std::size_t recited = 0;
  for (const CorpusItem* item : corpus.split(Split::kTrain)) {
    const BeamHypothesis g = greedy_decode(model, item->feature, nullptr, 30);
    recited += decode(g.tokens, *model.vocab) == tokenize(item->captions[0]);
  }
  v.require(recited == 5, fmt("recited %.0f of 5 captions", static_cast<double>(recited)));
  if (v.pass) v.detail = fmt("train perplexity %.5f, 5/5 captions recited greedily", ppl);
  return v;
}

Verdict bleu_correctness() {
  Verdict v;
  auto pair_of = [](const std::string& cand, const std::vector<std::string>& refs) {
    EvalPair p{tokenize(cand), {}};
    for (const auto& r : refs) p.references.push_back(tokenize(r));
    return p;
  };
  const BleuReport perfect = bleu({pair_of("a man rides a red bike", {"a man rides a red bike"}),
                                   pair_of("two dogs play in the snow", {"two dogs play in the snow", "dogs"})});
  for (double s : perfect.scores) v.require(s == 1.0, fmt("perfect corpus scored %.17g", s));

  const BleuReport hand = bleu(
      {pair_of("the cat sat on the mat", {"the cat sat on a mat", "there is a cat on the mat"}),
       pair_of("a dog runs in the park", {"a dog runs in a big park", "the dog is running"})});
  const double expect[] = {0.84337404674354632, 0.78787896590769813, 0.7093642122351218,
                           0.57520657324343472};
  double worst = 0.0;
  for (int n = 0; n < 4; ++n) worst = std::max(worst, std::abs(hand.scores[n] - expect[n]));
  v.require(worst <= 1e-10, fmt("hand corpus off by %.3g", worst));

  // Geometric mean of independently recomputed clipped precisions.
  const double p[] = {11.0 / 12.0, 8.0 / 10.0, 5.0 / 8.0, 2.0 / 6.0};
  const double bp = std::exp(1.0 - 13.0 / 12.0);
  double geo_worst = 0.0, log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    log_sum += std::log(p[n]);
    geo_worst = std::max(geo_worst, std::abs(hand.scores[n] - bp * std::exp(log_sum / (n + 1))));
  }
  v.require(geo_worst <= 1e-12, fmt("geometric mean off by %.3g", geo_worst));
  if (v.pass) {
    v.detail = fmt("perfect = 1.0 at all orders, hand corpus max error %.1e, geometric mean error %.1e",
                   worst, geo_worst);
  }
  return v;
}

Verdict determinism() {
  Verdict v;
  testing::TempDir dir("determinism");
  testing::write_manifest(dir.file("m.json"), testing::topic_corpus(20, 5, 10, 6, 44));
  auto pipeline = [&](const std::string& tag) {
    const std::string cca = dir.file(tag + ".glsx");
    const std::string model = dir.file(tag + ".glsc");
    const std::string gen = dir.file(tag + ".jsonl");
    return cli_run({"cca-fit", "--manifest", dir.file("m.json"), "--cca-dim", "4", "--out", cca}) == 0 &&
           cli_run({"train", "--manifest", dir.file("m.json"), "--cell", "glstm", "--guidance",
                    "ret", "--cca", cca, "--top-t", "5", "--epochs", "2", "--hidden", "8",
                    "--embed", "8", "--lr", "0.01", "--min-count", "1", "--seed", "13",
                    "--out", model}) == 0 &&
           cli_run({"generate", "--manifest", dir.file("m.json"), "--model", model, "--cca", cca,
                    "--norm", "gaussian", "--out", gen}) == 0;
  };
  v.require(pipeline("a") && pipeline("b"), "pipeline failed");
  if (!v.pass) return v;
  for (const char* ext : {".glsx", ".glsx.index", ".glsc", ".glsc.log.jsonl", ".jsonl"}) {
    v.require(io::read_file(dir.file(std::string("a") + ext)) ==
                  io::read_file(dir.file(std::string("b") + ext)),
              std::string(ext) + " differs");
  }
  if (v.pass) v.detail = "CCA model, index, checkpoint, training log and generations byte-identical";
  return v;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

}  // namespace
}  // namespace glstm

int main() {
  using namespace glstm;
  const std::vector<Criterion> criteria = {
      {1, "gradient oracle", 30.0, gradient_oracle},
      {2, "reduction invariant", 0.0, reduction_invariant},
      {3, "beam oracle", 60.0, beam_oracle},
      {4, "length-bias direction", 0.0, length_bias},
      {5, "CCA properties", 0.0, cca_properties},
      {6, "overfit sanity", 120.0, overfit_sanity},
      {7, "BLEU correctness", 0.0, bleu_correctness},
      {8, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && seconds >= c.budget_seconds) {
      v.pass = false;
      v.detail += fmt(" (over the %.0f s budget)", c.budget_seconds);
    }
    std::printf("criterion %d %-22s %s  %s [%.2f s]\n", c.number, c.name, v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
