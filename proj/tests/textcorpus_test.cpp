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

#include "glstm/textcorpus.hpp"

#include <gtest/gtest.h>

#include "glstm/error.hpp"
#include "support/test_support.hpp"

namespace glstm {
namespace {

using Words = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsOnNonAlphanumerics) {
  EXPECT_EQ(tokenize("A Dog's 2 balls!  Run-fast"),
            (Words{"a", "dog", "s", "2", "balls", "run", "fast"}));
  EXPECT_TRUE(tokenize(" ,.; ").empty());
}

TEST(Vocabulary, OrderedByFrequencyThenAlphabet) {
  const Vocabulary v = build_vocab({"b a c", "a b", "a d", "c"}, 2);
  EXPECT_EQ(v.tokens(), (Words{"a", "b", "c", "<end>", "<unk>"}));
  EXPECT_EQ(v.id_of("d"), v.unk_id());
  EXPECT_EQ(v.end_id(), 3u);
  EXPECT_THROW(build_vocab({}, 1), BadInputError);
}

TEST(Vocabulary, EncodeAppendsEndAndDecodeStopsThere) {
  const Vocabulary v({"cat", "dog"});
  const TokenSequence ids = encode({"dog", "bird", "cat"}, v);
  EXPECT_EQ(ids, (TokenSequence{1, v.unk_id(), 0, v.end_id()}));
  EXPECT_EQ(decode({0, v.end_id(), 1}, v), (Words{"cat"}));
}

TEST(Vocabulary, ChecksumTracksContents) {
  EXPECT_EQ(Vocabulary({"a", "b"}).checksum(), Vocabulary({"a", "b"}).checksum());
  EXPECT_NE(Vocabulary({"a", "b"}).checksum(), Vocabulary({"b", "a"}).checksum());
  EXPECT_EQ(Vocabulary::from_tokens({"a", "<end>", "<unk>"}), Vocabulary({"a"}));
  EXPECT_THROW(Vocabulary::from_tokens({"a"}), MalformedInputError);
}

TEST(TfIdf, MatchesHandComputedWeights) {
  const auto tf = TfIdfVectorizer::fit({"a dog runs", "a cat runs", "a dog sleeps"}, 100);
  auto idf_of = [&](const std::string& w) {
    for (std::size_t i = 0; i < tf.dim(); ++i)
      if (tf.columns()[i] == w) return tf.idf()[i];
    return -1.0;
  };
  EXPECT_NEAR(idf_of("a"), 1.0, 1e-15);
  EXPECT_NEAR(idf_of("dog"), 1.2876820724517809, 1e-15);
  EXPECT_NEAR(idf_of("runs"), 1.2876820724517809, 1e-15);
  EXPECT_NEAR(idf_of("cat"), 1.6931471805599453, 1e-15);
  EXPECT_NEAR(idf_of("sleeps"), 1.6931471805599453, 1e-15);

  const Vector v = tf.vectorize("dog dog runs unseen");
  for (std::size_t i = 0; i < tf.dim(); ++i) {
    const std::string& w = tf.columns()[i];
    const double expect = w == "dog" ? 0.89442719099991588 : w == "runs" ? 0.44721359549995794 : 0.0;
    EXPECT_NEAR(v[i], expect, 1e-15) << w;
  }
  EXPECT_EQ(norm2(tf.vectorize("zebra")), 0.0);
}

TEST(TfIdf, VocabularyCapKeepsMostFrequentDocuments) {
  const auto tf = TfIdfVectorizer::fit({"a dog runs", "a cat runs", "a dog sleeps"}, 2);
  EXPECT_EQ(tf.columns(), (Words{"a", "dog"}));
  const Vector counts = tf.term_counts("dog a dog zebra");
  EXPECT_EQ(counts, (Vector{1.0, 2.0}));
}

TEST(Splits, ParseNames) {
  EXPECT_EQ(parse_split("train"), Split::kTrain);
  EXPECT_EQ(parse_split("validation"), Split::kVal);
  EXPECT_EQ(split_name(Split::kTest), "test");
  EXPECT_THROW(parse_split("dev"), MalformedInputError);
}

TEST(Manifest, InlineFeaturesRoundTrip) {
  testing::TempDir dir("manifest");
  const Corpus corpus = testing::overfit_corpus();
  testing::write_manifest(dir.path() / "m.json", corpus);
  const Corpus back = load_manifest(dir.path() / "m.json");
  ASSERT_EQ(back.items.size(), corpus.items.size());
  EXPECT_EQ(back.feature_dim, 8u);
  EXPECT_EQ(back.items[1].feature, corpus.items[1].feature);
  EXPECT_EQ(back.split(Split::kVal).size(), 5u);
  EXPECT_EQ(back.find("toy3")->captions, corpus.items[3].captions);
  EXPECT_EQ(back.find("nope"), nullptr);
}

TEST(Manifest, FeatureFilesBinaryAndCsv) {
  testing::TempDir dir("features");
  const Matrix f{{1.0, 2.0}, {3.5, -4.0}};
  save_features_binary(dir.path() / "f.bin", f);
  save_features_csv(dir.path() / "f.csv", f);
  EXPECT_EQ(load_features(dir.path() / "f.bin"), f);
  EXPECT_EQ(load_features(dir.path() / "f.csv"), f);

  testing::write_text(dir.path() / "m.json", R"({"feature_dim": 2, "feature_file": "f.bin",
    "items": [{"id": "x", "split": "train", "feature_row": 1, "captions": ["a b"]},
              {"id": "y", "split": "test", "feature_file": "f.csv", "feature_row": 0,
               "captions": ["c"]}]})");
  const Corpus c = load_manifest(dir.path() / "m.json");
  EXPECT_EQ(c.find("x")->feature, (Vector{3.5, -4.0}));
  EXPECT_EQ(c.find("y")->feature, (Vector{1.0, 2.0}));
}

TEST(Manifest, BadInputsAreReported) {
  testing::TempDir dir("badmanifest");
  testing::write_text(dir.path() / "ragged.csv", "1,2\n3\n");
  EXPECT_THROW(load_features(dir.path() / "ragged.csv"), DimensionMismatchError);
  testing::write_text(dir.path() / "broken.json", "{not json");
  EXPECT_THROW(load_manifest(dir.path() / "broken.json"), MalformedInputError);
  testing::write_text(dir.path() / "dim.json",
                      R"({"feature_dim": 3, "items": [{"id": "a", "split": "train",
                          "feature": [1, 2], "captions": ["x"]}]})");
  EXPECT_THROW(load_manifest(dir.path() / "dim.json"), DimensionMismatchError);
  testing::write_text(dir.path() / "missing.json",
                      R"({"feature_dim": 2, "items": [{"id": "a", "split": "train",
                          "feature_file": "nope.bin", "feature_row": 0, "captions": ["x"]}]})");
  EXPECT_THROW(load_manifest(dir.path() / "missing.json"), MissingFileError);
  EXPECT_THROW(load_manifest(dir.path() / "absent.json"), MissingFileError);
}

}  // namespace
}  // namespace glstm
