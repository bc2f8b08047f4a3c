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

#include <string>
#include <vector>

namespace glstm {

struct EvalPair {
  std::vector<std::string> candidate;
  std::vector<std::vector<std::string>> references;
};

struct BleuReport {
  std::vector<double> scores;         // B@1 .. B@max_n
  std::vector<double> precisions;     // clipped n-gram precision per order
  std::vector<std::size_t> matches;   // clipped matches per order
  std::vector<std::size_t> totals;    // candidate n-grams per order
  double brevity_penalty = 1.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::size_t pairs = 0;
};

// Corpus-level BLEU without smoothing. References are clipped per n-gram by
// the maximum count in any single reference; the effective reference length
// is the closest reference length (shorter on ties). An order with no
// matches, or no candidate n-grams at all, zeroes that score and every
// higher one.
BleuReport bleu(const std::vector<EvalPair>& pairs, std::size_t max_n = 4);

// {"B1":...,"B2":...,"B3":...,"B4":...,"pairs":n}
std::string bleu_report_json(const BleuReport& report);

}  // namespace glstm
