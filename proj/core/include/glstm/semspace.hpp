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

// Normalized CCA between image features (view 1) and TF-IDF caption vectors
// (view 2). Projections weight each canonical direction by its correlation
// raised to a power and are then L2-normalized, so cosine similarity in the
// shared space reduces to a dot product.

#include <filesystem>
#include <string>
#include <vector>

#include "glstm/numkit.hpp"
#include "glstm/textcorpus.hpp"

namespace glstm {

enum class View { kImage = 1, kText = 2 };

struct CcaOptions {
  std::size_t dim = 200;
  double power = 4.0;
  // Relative ridge: each covariance gets ridge * mean(diagonal) added.
  double ridge = 1e-6;
};

struct CcaModel {
  Matrix image_projection;  // feature_dim x d
  Matrix text_projection;   // text_dim x d
  Vector correlations;      // d canonical correlations, non-increasing
  double power = 4.0;
  Vector image_mean;
  Vector text_mean;
  double image_ridge = 0.0;  // absolute ridge added to each covariance
  double text_ridge = 0.0;

  std::size_t dim() const noexcept { return correlations.dim(); }
};

// Rows of x1 and x2 are paired observations. Throws BadInputError when the
// requested dim exceeds either view and DecompositionError when a covariance
// is singular even after the ridge.
CcaModel fit_cca(const Matrix& x1, const Matrix& x2, const CcaOptions& options = {});

Vector project(const CcaModel& model, const Vector& x, View view);

// The per-caption versus per-image choice for pairing the two CCA views.
enum class CcaPairing { kPerCaption, kPerImage };

struct CcaTrainingViews {
  Matrix images;
  Matrix texts;
};

// Per caption: one row per (image, caption) with the image feature repeated.
// Per image: one row per image whose text is all its captions joined.
CcaTrainingViews cca_training_views(const std::vector<const CorpusItem*>& items,
                                    const TfIdfVectorizer& vectorizer, CcaPairing pairing);

struct CaptionRef {
  std::string item_id;
  std::size_t caption_index = 0;
  std::string text;
};

struct SemanticIndex {
  Matrix embeddings;  // one projected caption per row
  std::vector<CaptionRef> refs;
};

SemanticIndex build_index(const CcaModel& model, const TfIdfVectorizer& vectorizer,
                          const std::vector<const CorpusItem*>& items);

struct RetrievalHit {
  std::size_t row = 0;  // caption id: row of the index
  double score = 0.0;   // cosine similarity
};

// Highest cosine first; equal scores keep ascending caption id.
std::vector<RetrievalHit> retrieve(const CcaModel& model, const SemanticIndex& index,
                                   const Vector& image_feature, std::size_t top_t = 15);

enum class GuidanceKind { kRet, kEmb, kImg };

std::string_view guidance_kind_name(GuidanceKind kind);
GuidanceKind parse_guidance_kind(std::string_view name);

struct Guidance {
  GuidanceKind kind = GuidanceKind::kImg;
  Vector vector;

  std::size_t dim() const noexcept { return vector.dim(); }
};

// Which word list the retrieval bag of words counts over.
enum class RetVocabulary { kCca, kLstm };

struct GuidanceSources {
  const CcaModel* cca = nullptr;
  const SemanticIndex* index = nullptr;
  const TfIdfVectorizer* vectorizer = nullptr;
  const Vocabulary* lstm_vocab = nullptr;  // only for RetVocabulary::kLstm
  RetVocabulary ret_vocabulary = RetVocabulary::kCca;
  std::size_t top_t = 15;
};

// ret: L2-normalized summed term counts of the top_t retrieved captions.
// emb: the image's projection into the shared space.
// img: the feature itself.
Guidance build_guidance(GuidanceKind kind, const Vector& image_feature,
                        const GuidanceSources& sources);

// Dimension that build_guidance produces for a kind.
std::size_t guidance_dim(GuidanceKind kind, std::size_t feature_dim,
                         const GuidanceSources& sources);

// "GLSX" containers. The model file also carries the TF-IDF vectorizer.
void save_cca(const std::filesystem::path& path, const CcaModel& model,
              const TfIdfVectorizer& vectorizer);
std::string serialize_cca(const CcaModel& model, const TfIdfVectorizer& vectorizer);

struct LoadedCca {
  CcaModel model;
  TfIdfVectorizer vectorizer;
};
LoadedCca load_cca(const std::filesystem::path& path);

void save_index(const std::filesystem::path& path, const SemanticIndex& index);
std::string serialize_index(const SemanticIndex& index);
SemanticIndex load_index(const std::filesystem::path& path);

}  // namespace glstm
