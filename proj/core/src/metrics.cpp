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

#include "glstm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "glstm/error.hpp"
#include "json.hpp"

namespace glstm {
namespace {

using NGramCounts = std::map<std::vector<std::string>, std::size_t>;

NGramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NGramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t closest_reference_length(const EvalPair& pair) {
  const auto c = static_cast<long long>(pair.candidate.size());
  std::size_t best = pair.references.front().size();
  for (const auto& ref : pair.references) {
    const auto r = static_cast<long long>(ref.size());
    const auto b = static_cast<long long>(best);
    if (std::llabs(r - c) < std::llabs(b - c) || (std::llabs(r - c) == std::llabs(b - c) && r < b)) {
      best = ref.size();
    }
  }
  return best;
}

}  // namespace

BleuReport bleu(const std::vector<EvalPair>& pairs, std::size_t max_n) {
  if (pairs.empty()) throw BadInputError("bleu: no evaluation pairs");
  if (max_n == 0) throw BadInputError("bleu: max_n must be >= 1");
  BleuReport report;
  report.pairs = pairs.size();
  report.matches.assign(max_n, 0);
  report.totals.assign(max_n, 0);

  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw BadInputError("bleu: pair without references");
    report.candidate_length += pair.candidate.size();
    report.reference_length += closest_reference_length(pair);
    for (std::size_t n = 1; n <= max_n; ++n) {
      const NGramCounts cand = count_ngrams(pair.candidate, n);
      NGramCounts max_ref;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : count_ngrams(ref, n)) {
          auto& slot = max_ref[gram];
          slot = std::max(slot, count);
        }
      }
      for (const auto& [gram, count] : cand) {
        report.totals[n - 1] += count;
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) report.matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  const double c = static_cast<double>(report.candidate_length);
  const double r = static_cast<double>(report.reference_length);
  report.brevity_penalty = c == 0.0 ? 0.0 : (c < r ? std::exp(1.0 - r / c) : 1.0);

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < max_n; ++n) {
    const double p = report.totals[n] ? static_cast<double>(report.matches[n]) /
                                            static_cast<double>(report.totals[n])
                                      : 0.0;
    report.precisions.push_back(p);
    if (p == 0.0) zero = true;
    if (!zero) log_sum += std::log(p);
    report.scores.push_back(zero ? 0.0
                                 : report.brevity_penalty *
                                       std::exp(log_sum / static_cast<double>(n + 1)));
  }
  return report;
}

std::string bleu_report_json(const BleuReport& report) {
  nlohmann::ordered_json j;
  for (std::size_t n = 0; n < report.scores.size(); ++n) {
    j["B" + std::to_string(n + 1)] = report.scores[n];
  }
  j["pairs"] = report.pairs;
  return j.dump();
}

}  // namespace glstm
