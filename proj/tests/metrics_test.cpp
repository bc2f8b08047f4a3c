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

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "glstm/error.hpp"
#include "glstm/random.hpp"
#include "glstm/textcorpus.hpp"
#include "json.hpp"

namespace glstm {
namespace {

EvalPair pair_of(const std::string& cand, const std::vector<std::string>& refs) {
  EvalPair p{tokenize(cand), {}};
  for (const auto& r : refs) p.references.push_back(tokenize(r));
  return p;
}

std::vector<EvalPair> two_item_corpus() {
  return {pair_of("the cat sat on the mat", {"the cat sat on a mat", "there is a cat on the mat"}),
          pair_of("a dog runs in the park", {"a dog runs in a big park", "the dog is running"})};
}

TEST(Bleu, HandComputedTwoItemCorpus) {
  const BleuReport r = bleu(two_item_corpus());
  EXPECT_NEAR(r.scores[0], 0.84337404674354632, 1e-10);
  EXPECT_NEAR(r.scores[1], 0.78787896590769813, 1e-10);
  EXPECT_NEAR(r.scores[2], 0.7093642122351218, 1e-10);
  EXPECT_NEAR(r.scores[3], 0.57520657324343472, 1e-10);
  EXPECT_NEAR(r.brevity_penalty, 0.92004441462932329, 1e-12);
  EXPECT_EQ(r.matches, (std::vector<std::size_t>{11, 8, 5, 2}));
  EXPECT_EQ(r.totals, (std::vector<std::size_t>{12, 10, 8, 6}));
  EXPECT_EQ(r.candidate_length, 12u);
  EXPECT_EQ(r.reference_length, 13u);
}

TEST(Bleu, PerfectMatchScoresOne) {
  const BleuReport r = bleu({pair_of("a man rides a red bike", {"a man rides a red bike", "x"}),
                             pair_of("two dogs play in snow", {"two dogs play in snow"})});
  for (double s : r.scores) EXPECT_DOUBLE_EQ(s, 1.0);
}

TEST(Bleu, MissingHigherOrdersZeroTheScore) {
  const BleuReport r = bleu({pair_of("the cat sat", {"the cat sat down", "a cat sat"})});
  EXPECT_DOUBLE_EQ(r.scores[0], 1.0);
  EXPECT_DOUBLE_EQ(r.scores[1], 1.0);
  EXPECT_DOUBLE_EQ(r.scores[2], 1.0);
  EXPECT_DOUBLE_EQ(r.scores[3], 0.0);
  EXPECT_EQ(r.totals[3], 0u);
}

TEST(Bleu, ClipsRepeatedWordsByBestSingleReference) {
  const BleuReport r = bleu({pair_of("the the the the", {"the cat the", "a the b"})});
  EXPECT_EQ(r.matches[0], 2u);
  EXPECT_DOUBLE_EQ(r.precisions[0], 0.5);
}

TEST(Bleu, EffectiveReferencePrefersShorterOnTies) {
  const BleuReport r = bleu({pair_of("a b c d", {"a b c", "a b c d e"})});
  EXPECT_EQ(r.reference_length, 3u);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
  const BleuReport shorter = bleu({pair_of("a b", {"a b c", "a b c d e"})});
  EXPECT_NEAR(shorter.brevity_penalty, std::exp(1.0 - 3.0 / 2.0), 1e-15);
}

// Independent clipped-precision computation for the geometric-mean check.
double precision(const std::vector<EvalPair>& pairs, std::size_t n) {
  double match = 0, total = 0;
  for (const auto& p : pairs) {
    std::map<std::vector<std::string>, int> cand;
    for (std::size_t i = 0; i + n <= p.candidate.size(); ++i)
      ++cand[{p.candidate.begin() + i, p.candidate.begin() + i + n}];
    for (const auto& [gram, count] : cand) {
      int best = 0;
      for (const auto& ref : p.references) {
        int c = 0;
        for (std::size_t i = 0; i + n <= ref.size(); ++i)
          c += std::equal(gram.begin(), gram.end(), ref.begin() + i);
        best = std::max(best, c);
      }
      match += std::min(count, best);
      total += count;
    }
  }
  return match / total;
}

TEST(Bleu, ScoresAreGeometricMeansOfClippedPrecisions) {
  Rng rng(12);
  const std::vector<std::string> words = {"a", "b", "c", "d"};
  auto sentence = [&](std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += words[rng.below(words.size())] + " ";
    return s;
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EvalPair> pairs;
    for (int i = 0; i < 5; ++i)
      pairs.push_back(pair_of(sentence(6 + rng.below(5)), {sentence(8), sentence(10), sentence(5)}));
    const BleuReport r = bleu(pairs);
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      const double p = precision(pairs, n);
      EXPECT_NEAR(r.precisions[n - 1], p, 1e-15);
      log_sum += std::log(p);
      EXPECT_NEAR(r.scores[n - 1], r.brevity_penalty * std::exp(log_sum / n), 1e-12);
    }
  }
}

TEST(Bleu, EmptyInputsAreBadInput) {
  EXPECT_THROW(bleu({}), BadInputError);
  EXPECT_THROW(bleu({pair_of("a b", {})}), BadInputError);
}

TEST(Bleu, ReportJsonHasScoresInOrder) {
  const auto j = nlohmann::ordered_json::parse(bleu_report_json(bleu(two_item_corpus())));
  EXPECT_EQ(j.begin().key(), "B1");
  EXPECT_NEAR(j["B4"].get<double>(), 0.57520657324343472, 1e-12);
  EXPECT_EQ(j["pairs"].get<int>(), 2);
}

}  // namespace
}  // namespace glstm
