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

#include "glstm/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "glstm/error.hpp"

namespace glstm {
namespace {

// Higher score first, then the lexicographically smaller token sequence.
bool ranks_before(double score_a, const TokenSequence& a, double score_b,
                  const TokenSequence& b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool allowed(TokenId token, const Vocabulary& vocab, bool forbid_unk) {
  return !(forbid_unk && token == vocab.unk_id());
}

void pick_best(DecodeResult& result) {
  if (result.pool.empty()) return;
  const ScoredHypothesis* best = &result.pool.front();
  for (const auto& cand : result.pool) {
    if (ranks_before(cand.score, cand.hypothesis.tokens, best->score, best->hypothesis.tokens)) {
      best = &cand;
    }
  }
  result.best = best->hypothesis;
  result.best_score = best->score;
}

struct LiveBeam {
  BeamHypothesis hyp;
  InferenceState state;
};

struct Candidate {
  std::size_t parent = 0;
  TokenId token = 0;
  double log_likelihood = 0.0;
  double rank_score = 0.0;
  TokenSequence tokens;
};

void enumerate(const Inference& inf, const Vocabulary& vocab, const LengthNorm& norm,
               bool forbid_unk, std::size_t max_length, const InferenceState& state,
               BeamHypothesis& prefix, DecodeResult& out) {
  const TokenId end = vocab.end_id();
  {
    BeamHypothesis done = prefix;
    done.tokens.push_back(end);
    done.log_likelihood = prefix.log_likelihood + state.log_probs[end];
    done.finished = true;
    const double score = normalized_score(norm, done);
    out.pool.push_back({std::move(done), score});
  }
  if (prefix.tokens.size() + 2 > max_length) return;
  for (TokenId w = 0; w < vocab.size(); ++w) {
    if (w == end || !allowed(w, vocab, forbid_unk)) continue;
    const double saved = prefix.log_likelihood;
    prefix.tokens.push_back(w);
    prefix.log_likelihood = saved + state.log_probs[w];
    enumerate(inf, vocab, norm, forbid_unk, max_length, inf.advance(state, w), prefix, out);
    prefix.tokens.pop_back();
    prefix.log_likelihood = saved;
  }
}

}  // namespace

std::string_view norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::kNone: return "none";
    case NormKind::kPolynomial: return "polynomial";
    case NormKind::kMinHinge: return "min-hinge";
    case NormKind::kMaxHinge: return "max-hinge";
    case NormKind::kGaussian: return "gaussian";
  }
  return "none";
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "none") return NormKind::kNone;
  if (name == "polynomial") return NormKind::kPolynomial;
  if (name == "min-hinge") return NormKind::kMinHinge;
  if (name == "max-hinge") return NormKind::kMaxHinge;
  if (name == "gaussian") return NormKind::kGaussian;
  throw BadInputError("unknown length normalization '" + std::string(name) + "'");
}

void LengthNorm::validate() const {
  switch (kind) {
    case NormKind::kNone:
      return;
    case NormKind::kPolynomial:
      if (!std::isfinite(power)) throw BadInputError("polynomial norm: exponent must be finite");
      return;
    case NormKind::kMinHinge:
    case NormKind::kMaxHinge:
      if (!(mean > 0.0)) {
        throw BadInputError(std::string(norm_kind_name(kind)) + " norm: mean length must be > 0");
      }
      return;
    case NormKind::kGaussian:
      if (!(mean > 0.0) || !(stddev > 0.0)) {
        throw BadInputError(
            "gaussian norm: mean and standard deviation of training lengths must be > 0 "
            "(got mean " + std::to_string(mean) + ", stddev " + std::to_string(stddev) + ")");
      }
      return;
  }
}

double omega(const LengthNorm& norm, std::size_t length) {
  norm.validate();
  if (length == 0) throw BadInputError("omega: length must be >= 1");
  const double len = static_cast<double>(length);
  double value = 1.0;
  switch (norm.kind) {
    case NormKind::kNone: value = 1.0; break;
    case NormKind::kPolynomial: value = std::pow(len, norm.power); break;
    case NormKind::kMinHinge: value = std::min(len, norm.mean); break;
    case NormKind::kMaxHinge: value = std::max(len, norm.mean); break;
    case NormKind::kGaussian: {
      const double z = len - norm.mean;
      value = std::exp(-(z * z) / (2.0 * norm.stddev * norm.stddev));
      break;
    }
  }
  // Far tails of the gaussian underflow; keep Omega strictly positive.
  return std::max(value, std::numeric_limits<double>::min());
}

double normalized_score(const LengthNorm& norm, const BeamHypothesis& hyp) {
  return hyp.log_likelihood / omega(norm, std::max<std::size_t>(hyp.word_length(), 1));
}

void DecodeConfig::validate() const {
  if (beam_width == 0) throw BadInputError("beam width must be >= 1");
  if (max_length == 0) throw BadInputError("max length must be >= 1");
  norm.validate();
}

DecodeResult beam_search(const CaptionModel& model, const Vector& image_feature,
                         const Vector* guidance, const DecodeConfig& config) {
  config.validate();
  const Vocabulary& vocab = *model.vocab;
  const TokenId end = vocab.end_id();
  const Inference inf(model, guidance);

  DecodeResult result;
  std::vector<LiveBeam> alive;
  alive.push_back({BeamHypothesis{}, inf.begin(image_feature)});

  for (std::size_t step = 1; step <= config.max_length && !alive.empty(); ++step) {
    const bool last = step == config.max_length;
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < alive.size(); ++b) {
      const LiveBeam& beam = alive[b];
      for (TokenId w = 0; w < vocab.size(); ++w) {
        if (!allowed(w, vocab, config.forbid_unk) || (last && w != end)) continue;
        Candidate c;
        c.parent = b;
        c.token = w;
        c.log_likelihood = beam.hyp.log_likelihood + beam.state.log_probs[w];
        c.tokens = beam.hyp.tokens;
        c.tokens.push_back(w);
        if (config.normalize_during_pruning) {
          BeamHypothesis probe{c.tokens, c.log_likelihood, w == end};
          c.rank_score = normalized_score(config.norm, probe);
        } else {
          c.rank_score = c.log_likelihood;
        }
        candidates.push_back(std::move(c));
      }
    }
    const std::size_t keep = std::min(config.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        return ranks_before(a.rank_score, a.tokens, b.rank_score, b.tokens);
                      });
    candidates.resize(keep);

    std::vector<LiveBeam> next;
    for (auto& c : candidates) {
      BeamHypothesis hyp{std::move(c.tokens), c.log_likelihood, c.token == end};
      if (hyp.finished) {
        const double score = normalized_score(config.norm, hyp);
        result.pool.push_back({std::move(hyp), score});
      } else {
        next.push_back({std::move(hyp), inf.advance(alive[c.parent].state, c.token)});
      }
    }
    alive = std::move(next);
  }
  pick_best(result);
  return result;
}

BeamHypothesis greedy_decode(const CaptionModel& model, const Vector& image_feature,
                             const Vector* guidance, std::size_t max_length, bool forbid_unk) {
  if (max_length == 0) throw BadInputError("max length must be >= 1");
  const Vocabulary& vocab = *model.vocab;
  const TokenId end = vocab.end_id();
  const Inference inf(model, guidance);
  InferenceState state = inf.begin(image_feature);
  BeamHypothesis hyp;
  for (std::size_t step = 1; step <= max_length; ++step) {
    TokenId best = end;
    double best_ll = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (TokenId w = 0; w < vocab.size(); ++w) {
      if (!allowed(w, vocab, forbid_unk) || (step == max_length && w != end)) continue;
      const double ll = hyp.log_likelihood + state.log_probs[w];
      if (!found || ll > best_ll) {
        best = w;
        best_ll = ll;
        found = true;
      }
    }
    hyp.tokens.push_back(best);
    hyp.log_likelihood = best_ll;
    if (best == end) {
      hyp.finished = true;
      break;
    }
    state = inf.advance(state, best);
  }
  return hyp;
}

DecodeResult exhaustive_oracle(const CaptionModel& model, const Vector& image_feature,
                               const Vector* guidance, std::size_t max_length,
                               const LengthNorm& norm, bool forbid_unk) {
  if (max_length == 0) throw BadInputError("max length must be >= 1");
  norm.validate();
  const Vocabulary& vocab = *model.vocab;
  if (std::pow(static_cast<double>(vocab.size()), static_cast<double>(max_length)) > 1e6) {
    throw BadInputError("exhaustive_oracle: vocab^max_length exceeds 1e6");
  }
  const Inference inf(model, guidance);
  DecodeResult result;
  BeamHypothesis prefix;
  enumerate(inf, vocab, norm, forbid_unk, max_length, inf.begin(image_feature), prefix, result);
  pick_best(result);
  return result;
}

LengthStats length_stats(const std::vector<std::size_t>& lengths) {
  if (lengths.empty()) throw BadInputError("length_stats: no training captions");
  const double n = static_cast<double>(lengths.size());
  double sum = 0.0;
  for (auto l : lengths) sum += static_cast<double>(l);
  const double mean = sum / n;
  double sq = 0.0;
  for (auto l : lengths) {
    const double d = static_cast<double>(l) - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / n)};
}

LengthStats length_stats(const Corpus& corpus) {
  std::vector<std::size_t> lengths;
  for (const CorpusItem* item : corpus.split(Split::kTrain))
    for (const auto& c : item->captions) lengths.push_back(tokenize(c).size());
  return length_stats(lengths);
}

}  // namespace glstm
