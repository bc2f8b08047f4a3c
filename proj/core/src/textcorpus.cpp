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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "glstm/binary_io.hpp"
#include "glstm/error.hpp"
#include "json.hpp"

namespace glstm {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> words) : tokens_(std::move(words)) {
  tokens_.emplace_back(kEndToken);
  tokens_.emplace_back(kUnkToken);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw MalformedInputError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> all_tokens) {
  if (all_tokens.size() < 2 || all_tokens[all_tokens.size() - 2] != kEndToken ||
      all_tokens.back() != kUnkToken) {
    throw MalformedInputError("vocabulary: reserved END/UNK entries missing");
  }
  all_tokens.resize(all_tokens.size() - 2);
  return Vocabulary(std::move(all_tokens));
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_id() : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::uint64_t Vocabulary::checksum() const {
  std::uint64_t h = io::fnv1a("");
  for (const auto& t : tokens_) {
    h = io::fnv1a(t, h);
    h = io::fnv1a(std::string_view("\n", 1), h);
  }
  return h;
}

Vocabulary build_vocab(const std::vector<std::string>& texts, std::size_t min_count) {
  if (texts.empty()) throw BadInputError("build_vocab: empty training corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts)
    for (auto& tok : tokenize(text)) ++counts[tok];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count && tok != Vocabulary::kEndToken && tok != Vocabulary::kUnkToken) {
      kept.emplace_back(tok, n);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [tok, n] : kept) words.push_back(tok);
  return Vocabulary(std::move(words));
}

TokenSequence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  TokenSequence ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& t : tokens) ids.push_back(vocab.id_of(t));
  ids.push_back(vocab.end_id());
  return ids;
}

std::vector<std::string> decode(const TokenSequence& ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (TokenId id : ids) {
    if (id == vocab.end_id()) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

TfIdfVectorizer::TfIdfVectorizer(std::vector<std::string> columns, std::vector<double> idf,
                                 std::size_t document_count)
    : columns_(std::move(columns)), idf_(std::move(idf)), document_count_(document_count) {
  if (columns_.size() != idf_.size()) {
    throw ShapeError("tfidf: " + std::to_string(columns_.size()) + " columns but " +
                     std::to_string(idf_.size()) + " idf weights");
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) column_of_.emplace(columns_[i], i);
}

TfIdfVectorizer TfIdfVectorizer::fit(const std::vector<std::string>& texts,
                                     std::size_t vocab_size) {
  std::map<std::string, std::size_t> df;
  for (const auto& text : texts) {
    auto toks = tokenize(text);
    std::set<std::string> unique(toks.begin(), toks.end());
    for (const auto& t : unique) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);

  const double n = static_cast<double>(texts.size());
  std::vector<std::string> columns;
  std::vector<double> idf;
  for (auto& [tok, count] : ranked) {
    columns.push_back(tok);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return TfIdfVectorizer(std::move(columns), std::move(idf), texts.size());
}

Vector TfIdfVectorizer::term_counts(std::string_view text) const {
  Vector counts(columns_.size());
  for (const auto& tok : tokenize(text)) {
    auto it = column_of_.find(tok);
    if (it != column_of_.end()) counts[it->second] += 1.0;
  }
  return counts;
}

Vector TfIdfVectorizer::vectorize(std::string_view text) const {
  Vector v = term_counts(text);
  for (std::size_t i = 0; i < v.dim(); ++i) v[i] *= idf_[i];
  return l2_normalized(v);
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw MalformedInputError("unknown split '" + std::string(name) + "'");
}

std::vector<const CorpusItem*> Corpus::split(Split which) const {
  std::vector<const CorpusItem*> out;
  for (const auto& item : items)
    if (item.split == which) out.push_back(&item);
  return out;
}

const CorpusItem* Corpus::find(std::string_view id) const {
  for (const auto& item : items)
    if (item.id == id) return &item;
  return nullptr;
}

namespace {

constexpr std::string_view kFeatureMagic = "GLSF";
constexpr std::uint32_t kFeatureVersion = 1;

Matrix parse_feature_csv(const std::string& text, const std::string& source) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      std::string_view cell(line.data() + pos, comma - pos);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(v)) {
        throw MalformedInputError(source + ":" + std::to_string(line_no) +
                                  ": not a finite decimal: '" + std::string(cell) + "'");
      }
      values.push_back(v);
      ++count;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw DimensionMismatchError(source + ":" + std::to_string(line_no) + ": row has " +
                                   std::to_string(count) + " values, expected " +
                                   std::to_string(cols));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

Matrix parse_feature_binary(std::string_view bytes, const std::string& source) {
  io::ByteReader r(bytes.substr(kFeatureMagic.size()));
  const std::uint32_t version = r.u32();
  if (version != kFeatureVersion) {
    throw VersionError(source + ": unsupported feature file version " +
                       std::to_string(version));
  }
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (double& v : values) {
    v = static_cast<double>(r.f32());
    if (!std::isfinite(v)) throw MalformedInputError(source + ": non-finite feature value");
  }
  return Matrix(rows, cols, std::move(values));
}

}  // namespace

Matrix load_features(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() >= kFeatureMagic.size() &&
      std::string_view(bytes).substr(0, kFeatureMagic.size()) == kFeatureMagic) {
    return parse_feature_binary(bytes, path.string());
  }
  return parse_feature_csv(bytes, path.string());
}

void save_features_binary(const std::filesystem::path& path, const Matrix& features) {
  io::ByteWriter w;
  w.raw(kFeatureMagic);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (double v : features.values()) w.f32(static_cast<float>(v));
  io::write_file_atomic(path, w.bytes());
}

void save_features_csv(const std::filesystem::path& path, const Matrix& features) {
  std::string out;
  char buf[64];
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), features(r, c));
      if (c) out.push_back(',');
      out.append(buf, end);
    }
    out.push_back('\n');
  }
  io::write_file_atomic(path, out);
}

Corpus load_manifest(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInputError(path.string() + ": malformed JSON: " + e.what());
  }
  const auto base = path.parent_path();
  std::map<std::string, Matrix> cache;
  auto features_from = [&](const std::string& file, const std::string& item_id) -> const Matrix& {
    auto it = cache.find(file);
    if (it != cache.end()) return it->second;
    std::filesystem::path p(file);
    if (p.is_relative()) p = base / p;
    try {
      return cache.emplace(file, load_features(p)).first->second;
    } catch (const MissingFileError&) {
      throw MissingFileError("item '" + item_id + "': feature file not found: " + p.string());
    }
  };

  Corpus corpus;
  try {
    if (!doc.is_object() || !doc.contains("feature_dim") || !doc.contains("items")) {
      throw MalformedInputError(path.string() +
                                ": manifest needs \"feature_dim\" and \"items\"");
    }
    corpus.feature_dim = doc.at("feature_dim").get<std::size_t>();
    const std::string default_file = doc.value("feature_file", std::string());

    for (const auto& entry : doc.at("items")) {
      CorpusItem item;
      item.id = entry.at("id").is_string() ? entry.at("id").get<std::string>()
                                            : entry.at("id").dump();
      item.split = parse_split(entry.value("split", std::string("train")));
      for (const auto& c : entry.at("captions")) item.captions.push_back(c.get<std::string>());
      if (item.captions.empty()) {
        throw MalformedInputError("item '" + item.id + "': no captions");
      }

      if (entry.contains("feature")) {
        item.feature = Vector(entry.at("feature").get<std::vector<double>>());
      } else {
        const std::string file = entry.value("feature_file", default_file);
        if (file.empty()) {
          throw MalformedInputError("item '" + item.id + "': no feature source");
        }
        const Matrix& rows = features_from(file, item.id);
        const std::size_t row = entry.value("feature_row", std::size_t{0});
        if (row >= rows.rows()) {
          throw DimensionMismatchError("item '" + item.id + "': feature_row " +
                                       std::to_string(row) + " out of range (" +
                                       std::to_string(rows.rows()) + " rows)");
        }
        auto src = rows.row(row);
        item.feature = Vector(std::vector<double>(src.begin(), src.end()));
      }
      if (item.feature.dim() != corpus.feature_dim) {
        throw DimensionMismatchError("item '" + item.id + "': feature has " +
                                     std::to_string(item.feature.dim()) +
                                     " values, manifest declares feature_dim " +
                                     std::to_string(corpus.feature_dim));
      }
      corpus.items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    throw MalformedInputError(path.string() + ": malformed manifest: " + e.what());
  }
  return corpus;
}

}  // namespace glstm
