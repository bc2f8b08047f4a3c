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

// Caption generation. The beam pool is pruned on cumulative log-likelihood;
// a length normalization Omega(l) is applied when choosing the final caption
// among finished hypotheses.

#include <string_view>
#include <vector>

#include "glstm/captioner.hpp"
#include "glstm/textcorpus.hpp"

namespace glstm {

enum class NormKind { kNone, kPolynomial, kMinHinge, kMaxHinge, kGaussian };

std::string_view norm_kind_name(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

struct LengthNorm {
  NormKind kind = NormKind::kNone;
  double power = 1.0;   // polynomial exponent m
  double mean = 0.0;    // mu, training caption length mean
  double stddev = 0.0;  // sigma, training caption length deviation

  // Throws BadInputError for non-positive mu (hinge, gaussian) or sigma
  // (gaussian).
  void validate() const;
};

// Always positive for length >= 1.
double omega(const LengthNorm& norm, std::size_t length);

struct BeamHypothesis {
  TokenSequence tokens;  // END only as the final token
  double log_likelihood = 0.0;
  bool finished = false;

  // Words, excluding a terminal END.
  std::size_t word_length() const noexcept {
    return finished && !tokens.empty() ? tokens.size() - 1 : tokens.size();
  }
};

// log-likelihood / omega(word length), with length 0 treated as 1.
double normalized_score(const LengthNorm& norm, const BeamHypothesis& hyp);

struct DecodeConfig {
  std::size_t beam_width = 10;
  // Maximum tokens including END; the last step may only emit END.
  std::size_t max_length = 30;
  LengthNorm norm;
  bool forbid_unk = true;
  // Prune the beam on normalized scores instead of raw log-likelihood.
  bool normalize_during_pruning = false;

  void validate() const;
};

struct ScoredHypothesis {
  BeamHypothesis hypothesis;
  double score = 0.0;
};

struct DecodeResult {
  BeamHypothesis best;
  double best_score = 0.0;
  std::vector<ScoredHypothesis> pool;  // every finished hypothesis
};

DecodeResult beam_search(const CaptionModel& model, const Vector& image_feature,
                         const Vector* guidance, const DecodeConfig& config);

// Highest-probability next token at every step.
BeamHypothesis greedy_decode(const CaptionModel& model, const Vector& image_feature,
                             const Vector* guidance, std::size_t max_length,
                             bool forbid_unk = true);

// Scores every END-terminated sequence of at most max_length tokens. Refuses
// to run when vocab^max_length exceeds one million.
DecodeResult exhaustive_oracle(const CaptionModel& model, const Vector& image_feature,
                               const Vector* guidance, std::size_t max_length,
                               const LengthNorm& norm, bool forbid_unk = true);

struct LengthStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Word counts of training-split captions.
LengthStats length_stats(const Corpus& corpus);
LengthStats length_stats(const std::vector<std::size_t>& lengths);

}  // namespace glstm
