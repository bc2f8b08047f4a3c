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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "glstm/numkit.hpp"

namespace glstm {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

// Lowercases and splits on every character outside [a-z0-9].
std::vector<std::string> tokenize(std::string_view text);

// Word vocabulary with two reserved entries appended after the words:
// END (end of sequence) and UNK (out of vocabulary).
class Vocabulary {
 public:
  static constexpr std::string_view kEndToken = "<end>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
  // `words` excludes the reserved entries; they are appended here.
  explicit Vocabulary(std::vector<std::string> words);
  // Inverse of tokens(); validates that the reserved entries are in place.
  static Vocabulary from_tokens(std::vector<std::string> all_tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t word_count() const noexcept { return tokens_.size() - 2; }
  TokenId end_id() const noexcept { return static_cast<TokenId>(tokens_.size() - 2); }
  TokenId unk_id() const noexcept { return static_cast<TokenId>(tokens_.size() - 1); }

  // UNK for tokens outside the vocabulary.
  TokenId id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::uint64_t checksum() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Keeps tokens seen at least `min_count` times, ordered by descending
// frequency with lexicographic tie-breaks.
Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_count = 5);

// Appends END; OOV tokens become UNK.
TokenSequence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab);
// Stops at the first END.
std::vector<std::string> decode(const TokenSequence& ids, const Vocabulary& vocab);

// TF-IDF bag of words over the most document-frequent tokens. Weights are
// raw term count times ln((1+N)/(1+df)) + 1, and vectors are L2-normalized
// unless all-zero.
class TfIdfVectorizer {
 public:
  TfIdfVectorizer() = default;
  TfIdfVectorizer(std::vector<std::string> columns, std::vector<double> idf,
                  std::size_t document_count);

  static TfIdfVectorizer fit(const std::vector<std::string>& texts, std::size_t vocab_size);

  Vector vectorize(std::string_view text) const;
  // Raw term counts over the same columns.
  Vector term_counts(std::string_view text) const;

  std::size_t dim() const noexcept { return columns_.size(); }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  std::size_t document_count() const noexcept { return document_count_; }

 private:
  std::vector<std::string> columns_;
  std::vector<double> idf_;
  std::size_t document_count_ = 0;
  std::unordered_map<std::string, std::size_t> column_of_;
};

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct CorpusItem {
  std::string id;
  Vector feature;
  std::vector<std::string> captions;
  Split split = Split::kTrain;
};

struct Corpus {
  std::size_t feature_dim = 0;
  std::vector<CorpusItem> items;

  std::vector<const CorpusItem*> split(Split which) const;
  const CorpusItem* find(std::string_view id) const;
};

// Reads the dataset manifest:
//   {"feature_dim": F, "feature_file": "optional default",
//    "items": [{"id", "feature" | "feature_file" and/or "feature_row",
//               "captions": [...], "split"}]}
// Relative feature paths resolve against the manifest's directory.
Corpus load_manifest(const std::filesystem::path& path);

// CSV rows of decimals, or the binary "GLSF" layout when the magic matches.
Matrix load_features(const std::filesystem::path& path);

void save_features_binary(const std::filesystem::path& path, const Matrix& features);
void save_features_csv(const std::filesystem::path& path, const Matrix& features);

}  // namespace glstm
