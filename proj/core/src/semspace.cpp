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

#include "glstm/semspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glstm/binary_io.hpp"
#include "glstm/error.hpp"
#include "json.hpp"

namespace glstm {

using nlohmann::json;

namespace {

constexpr std::string_view kCcaMagic = "GLSX";
constexpr std::uint32_t kCcaVersion = 1;

Vector column_means(const Matrix& x) {
  Vector mean(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) mean[c] += row[c];
  }
  for (std::size_t c = 0; c < x.cols(); ++c) mean[c] /= static_cast<double>(x.rows());
  return mean;
}

Matrix centered(const Matrix& x, const Vector& mean) {
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) row[c] -= mean[c];
  }
  return out;
}

// a^T b / n
Matrix cross_covariance(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto ra = a.row(r);
    const auto rb = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ai = ra[i];
      if (ai == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += ai * rb[j];
    }
  }
  const double n = static_cast<double>(a.rows());
  for (double& v : out.values()) v /= n;
  return out;
}

double add_ridge(Matrix& cov, double relative) {
  double trace = 0.0;
  for (std::size_t i = 0; i < cov.rows(); ++i) trace += cov(i, i);
  const double mean_diag = trace / static_cast<double>(cov.rows());
  if (!(mean_diag > 0.0)) {
    throw DecompositionError("fit_cca: a view has zero variance; CCA is undefined");
  }
  const double ridge = relative * mean_diag;
  for (std::size_t i = 0; i < cov.rows(); ++i) cov(i, i) += ridge;
  return ridge;
}

Matrix take_columns(const Matrix& m, std::size_t count) {
  Matrix out(m.rows(), count);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, c);
  return out;
}

json matrix_shape(const Matrix& m) { return json::array({m.rows(), m.cols()}); }

void push(std::vector<double>& out, std::span<const double> values) {
  out.insert(out.end(), values.begin(), values.end());
}

class PayloadReader {
 public:
  explicit PayloadReader(const std::vector<double>& payload) : payload_(payload) {}

  std::vector<double> take(std::size_t n, const std::string& what) {
    if (pos_ + n > payload_.size()) {
      throw TruncatedFileError("payload ends inside '" + what + "'");
    }
    std::vector<double> out(payload_.begin() + static_cast<std::ptrdiff_t>(pos_),
                            payload_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  Matrix matrix(const json& shape, const std::string& what) {
    const auto r = shape.at(0).get<std::size_t>();
    const auto c = shape.at(1).get<std::size_t>();
    return Matrix(r, c, take(r * c, what));
  }
  void finish() const {
    if (pos_ != payload_.size()) throw MalformedInputError("trailing payload values");
  }

 private:
  const std::vector<double>& payload_;
  std::size_t pos_ = 0;
};

}  // namespace

CcaModel fit_cca(const Matrix& x1, const Matrix& x2, const CcaOptions& options) {
  if (x1.rows() != x2.rows() || x1.rows() < 2) {
    throw BadInputError("fit_cca: views need the same number of rows (>= 2), got " +
                        std::to_string(x1.rows()) + " and " + std::to_string(x2.rows()));
  }
  const std::size_t min_dim = std::min(x1.cols(), x2.cols());
  if (options.dim == 0 || options.dim > min_dim) {
    throw BadInputError("fit_cca: requested dim " + std::to_string(options.dim) +
                        " exceeds min(view dims) = " + std::to_string(min_dim));
  }

  CcaModel model;
  model.power = options.power;
  model.image_mean = column_means(x1);
  model.text_mean = column_means(x2);
  const Matrix c1 = centered(x1, model.image_mean);
  const Matrix c2 = centered(x2, model.text_mean);

  Matrix s11 = cross_covariance(c1, c1);
  Matrix s22 = cross_covariance(c2, c2);
  const Matrix s12 = cross_covariance(c1, c2);
  model.image_ridge = add_ridge(s11, options.ridge);
  model.text_ridge = add_ridge(s22, options.ridge);

  // Solve on the smaller view: A u = rho^2 S_ss u with A = S_st S_tt^-1 S_ts,
  // then recover the other side as S_tt^-1 S_ts u / rho.
  const bool solve_image_side = x1.cols() <= x2.cols();
  const Matrix& s_ss = solve_image_side ? s11 : s22;
  const Matrix& s_tt = solve_image_side ? s22 : s11;
  const Matrix s_st = solve_image_side ? s12 : transpose(s12);
  const Matrix s_ts = transpose(s_st);

  const Matrix other_solve = cholesky_solve(cholesky(s_tt), s_ts);
  Matrix a = matmul(s_st, other_solve);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = avg;
      a(j, i) = avg;
    }
  }
  const EigenDecomposition eig = sym_generalized_eig(a, s_ss);

  const std::size_t d = options.dim;
  Matrix solved = take_columns(eig.vectors, d);
  model.correlations = Vector(d);
  for (std::size_t j = 0; j < d; ++j) model.correlations[j] = std::sqrt(std::max(eig.values[j], 0.0));

  Matrix other = matmul(other_solve, solved);
  for (std::size_t j = 0; j < d; ++j) {
    const double rho = model.correlations[j];
    for (std::size_t r = 0; r < other.rows(); ++r) {
      other(r, j) = rho > 1e-12 ? other(r, j) / rho : 0.0;
    }
  }
  model.image_projection = solve_image_side ? std::move(solved) : std::move(other);
  model.text_projection = solve_image_side ? std::move(other) : std::move(solved);
  return model;
}

Vector project(const CcaModel& model, const Vector& x, View view) {
  const Matrix& u = view == View::kImage ? model.image_projection : model.text_projection;
  const Vector& mean = view == View::kImage ? model.image_mean : model.text_mean;
  if (x.dim() != u.rows()) {
    throw ShapeError("project: input has dim " + std::to_string(x.dim()) + ", view " +
                     std::to_string(static_cast<int>(view)) + " expects " +
                     std::to_string(u.rows()));
  }
  Vector z = matvec_transposed(u, sub(x, mean));
  for (std::size_t j = 0; j < z.dim(); ++j) z[j] *= std::pow(model.correlations[j], model.power);
  return l2_normalized(z);
}

CcaTrainingViews cca_training_views(const std::vector<const CorpusItem*>& items,
                                    const TfIdfVectorizer& vectorizer, CcaPairing pairing) {
  if (items.empty()) throw BadInputError("cca_training_views: no training items");
  const std::size_t f = items.front()->feature.dim();
  std::vector<double> image_rows;
  std::vector<double> text_rows;
  std::size_t rows = 0;
  auto add = [&](const CorpusItem& item, const std::string& text) {
    push(image_rows, item.feature.values());
    push(text_rows, vectorizer.vectorize(text).values());
    ++rows;
  };
  for (const CorpusItem* item : items) {
    if (pairing == CcaPairing::kPerCaption) {
      for (const auto& caption : item->captions) add(*item, caption);
    } else {
      std::string joined;
      for (const auto& caption : item->captions) joined += caption + "\n";
      add(*item, joined);
    }
  }
  return {Matrix(rows, f, std::move(image_rows)),
          Matrix(rows, vectorizer.dim(), std::move(text_rows))};
}

SemanticIndex build_index(const CcaModel& model, const TfIdfVectorizer& vectorizer,
                          const std::vector<const CorpusItem*>& items) {
  SemanticIndex index;
  std::vector<double> rows;
  for (const CorpusItem* item : items) {
    for (std::size_t c = 0; c < item->captions.size(); ++c) {
      push(rows, project(model, vectorizer.vectorize(item->captions[c]), View::kText).values());
      index.refs.push_back({item->id, c, item->captions[c]});
    }
  }
  index.embeddings = Matrix(index.refs.size(), model.dim(), std::move(rows));
  return index;
}

std::vector<RetrievalHit> retrieve(const CcaModel& model, const SemanticIndex& index,
                                   const Vector& image_feature, std::size_t top_t) {
  if (index.refs.empty()) throw BadInputError("retrieve: empty index");
  const Vector query = project(model, image_feature, View::kImage);
  std::vector<RetrievalHit> hits(index.refs.size());
  for (std::size_t r = 0; r < hits.size(); ++r) {
    const auto row = index.embeddings.row(r);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * query[j];
    hits[r] = {r, s};
  }
  const std::size_t keep = std::min(top_t, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    [](const RetrievalHit& a, const RetrievalHit& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.row < b.row;
                    });
  hits.resize(keep);
  return hits;
}

std::string_view guidance_kind_name(GuidanceKind kind) {
  switch (kind) {
    case GuidanceKind::kRet: return "ret";
    case GuidanceKind::kEmb: return "emb";
    case GuidanceKind::kImg: return "img";
  }
  return "img";
}

GuidanceKind parse_guidance_kind(std::string_view name) {
  if (name == "ret") return GuidanceKind::kRet;
  if (name == "emb") return GuidanceKind::kEmb;
  if (name == "img") return GuidanceKind::kImg;
  throw BadInputError("unknown guidance kind '" + std::string(name) + "'");
}

Guidance build_guidance(GuidanceKind kind, const Vector& image_feature,
                        const GuidanceSources& sources) {
  switch (kind) {
    case GuidanceKind::kImg:
      return {kind, image_feature};
    case GuidanceKind::kEmb:
      if (!sources.cca) throw BadInputError("emb guidance needs a CCA model");
      return {kind, project(*sources.cca, image_feature, View::kImage)};
    case GuidanceKind::kRet: {
      if (!sources.cca || !sources.index) {
        throw BadInputError("ret guidance needs a CCA model and a caption index");
      }
      const bool lstm_words = sources.ret_vocabulary == RetVocabulary::kLstm;
      if (lstm_words ? !sources.lstm_vocab : !sources.vectorizer) {
        throw BadInputError(lstm_words ? "ret guidance over LSTM words needs the vocabulary"
                                       : "ret guidance needs the TF-IDF vectorizer");
      }
      Vector counts(guidance_dim(kind, image_feature.dim(), sources));
      for (const auto& hit : retrieve(*sources.cca, *sources.index, image_feature, sources.top_t)) {
        const std::string& text = sources.index->refs[hit.row].text;
        if (lstm_words) {
          for (const auto& tok : tokenize(text)) {
            if (sources.lstm_vocab->contains(tok)) counts[sources.lstm_vocab->id_of(tok)] += 1.0;
          }
        } else {
          add_inplace(counts, sources.vectorizer->term_counts(text));
        }
      }
      return {kind, l2_normalized(counts)};
    }
  }
  throw BadInputError("unknown guidance kind");
}

std::size_t guidance_dim(GuidanceKind kind, std::size_t feature_dim,
                         const GuidanceSources& sources) {
  switch (kind) {
    case GuidanceKind::kImg: return feature_dim;
    case GuidanceKind::kEmb:
      if (!sources.cca) throw BadInputError("emb guidance needs a CCA model");
      return sources.cca->dim();
    case GuidanceKind::kRet:
      if (sources.ret_vocabulary == RetVocabulary::kLstm) {
        if (!sources.lstm_vocab) throw BadInputError("ret guidance needs the LSTM vocabulary");
        return sources.lstm_vocab->size();
      }
      if (!sources.vectorizer) throw BadInputError("ret guidance needs the TF-IDF vectorizer");
      return sources.vectorizer->dim();
  }
  return 0;
}

std::string serialize_cca(const CcaModel& model, const TfIdfVectorizer& vectorizer) {
  json header;
  header["format"] = "glstm-cca";
  header["dim"] = model.dim();
  header["power"] = model.power;
  header["image_ridge"] = model.image_ridge;
  header["text_ridge"] = model.text_ridge;
  header["image_projection"] = matrix_shape(model.image_projection);
  header["text_projection"] = matrix_shape(model.text_projection);
  header["tfidf"] = {{"columns", vectorizer.columns()},
                     {"documents", vectorizer.document_count()}};
  io::Container c;
  push(c.payload, model.image_projection.values());
  push(c.payload, model.text_projection.values());
  push(c.payload, model.correlations.values());
  push(c.payload, model.image_mean.values());
  push(c.payload, model.text_mean.values());
  push(c.payload, vectorizer.idf());
  c.header_json = header.dump();
  return io::encode_container(kCcaMagic, kCcaVersion, c);
}

void save_cca(const std::filesystem::path& path, const CcaModel& model,
              const TfIdfVectorizer& vectorizer) {
  io::write_file_atomic(path, serialize_cca(model, vectorizer));
}

LoadedCca load_cca(const std::filesystem::path& path) {
  const io::Container c = io::decode_container(io::read_file(path), kCcaMagic, kCcaVersion);
  try {
    const json header = json::parse(c.header_json);
    if (header.at("format") != "glstm-cca") throw MalformedInputError("not a CCA model file");
    PayloadReader reader(c.payload);
    LoadedCca out;
    CcaModel& m = out.model;
    m.power = header.at("power").get<double>();
    m.image_ridge = header.at("image_ridge").get<double>();
    m.text_ridge = header.at("text_ridge").get<double>();
    m.image_projection = reader.matrix(header.at("image_projection"), "image_projection");
    m.text_projection = reader.matrix(header.at("text_projection"), "text_projection");
    const auto d = header.at("dim").get<std::size_t>();
    m.correlations = Vector(reader.take(d, "correlations"));
    m.image_mean = Vector(reader.take(m.image_projection.rows(), "image_mean"));
    m.text_mean = Vector(reader.take(m.text_projection.rows(), "text_mean"));
    auto columns = header.at("tfidf").at("columns").get<std::vector<std::string>>();
    auto idf = reader.take(columns.size(), "idf");
    out.vectorizer = TfIdfVectorizer(std::move(columns), std::move(idf),
                                     header.at("tfidf").at("documents").get<std::size_t>());
    reader.finish();
    if (m.image_projection.cols() != d || m.text_projection.cols() != d) {
      throw MalformedInputError("CCA projections disagree with the recorded dim");
    }
    return out;
  } catch (const json::exception& e) {
    throw MalformedInputError(path.string() + ": malformed CCA header: " + e.what());
  }
}

std::string serialize_index(const SemanticIndex& index) {
  json refs = json::array();
  for (const auto& r : index.refs) refs.push_back({r.item_id, r.caption_index, r.text});
  json header = {{"format", "glstm-index"},
                 {"shape", matrix_shape(index.embeddings)},
                 {"refs", std::move(refs)}};
  io::Container c;
  push(c.payload, index.embeddings.values());
  c.header_json = header.dump();
  return io::encode_container(kCcaMagic, kCcaVersion, c);
}

void save_index(const std::filesystem::path& path, const SemanticIndex& index) {
  io::write_file_atomic(path, serialize_index(index));
}

SemanticIndex load_index(const std::filesystem::path& path) {
  const io::Container c = io::decode_container(io::read_file(path), kCcaMagic, kCcaVersion);
  try {
    const json header = json::parse(c.header_json);
    if (header.at("format") != "glstm-index") throw MalformedInputError("not an index file");
    PayloadReader reader(c.payload);
    SemanticIndex index;
    index.embeddings = reader.matrix(header.at("shape"), "embeddings");
    reader.finish();
    for (const auto& r : header.at("refs")) {
      index.refs.push_back(
          {r.at(0).get<std::string>(), r.at(1).get<std::size_t>(), r.at(2).get<std::string>()});
    }
    if (index.refs.size() != index.embeddings.rows()) {
      throw MalformedInputError("index: reference count disagrees with embedding rows");
    }
    return index;
  } catch (const json::exception& e) {
    throw MalformedInputError(path.string() + ": malformed index header: " + e.what());
  }
}

}  // namespace glstm
