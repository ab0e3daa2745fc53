// Copyright 2026 The protoseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "protoseg/attribution.hpp"
#include "protoseg/tensorio.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

/// Continuous mask weights at feature-grid resolution.
using PoolingWeights = RowMatrixf;

/// Bilinear interpolation of a binary mask onto the feature grid. Weights are
/// kept fractional. Throws EmptyRegionError when nothing survives.
PoolingWeights resize_mask(const BinaryMask& mask, int rows, int cols);

/// Masked average of patch features: sum(v[h,w] * m[h,w]) / sum(m[h,w]).
template <typename Scalar, typename Derived>
Vector<Scalar> pool_region(const FeatureGrid<Scalar>& features, const Eigen::MatrixBase<Derived>& weights) {
  if (weights.rows() != features.rows || weights.cols() != features.cols) {
    throw ArgumentError("pool_region: weight grid " + std::to_string(weights.rows()) + "x" +
                        std::to_string(weights.cols()) + " does not match features " + std::to_string(features.rows) +
                        "x" + std::to_string(features.cols));
  }
  if (!weights.allFinite() || (weights.array() < 0).any()) {
    throw ArgumentError("pool_region: weights must be finite and non-negative");
  }
  const Scalar total = weights.sum();
  if (!(total > Scalar(0))) throw EmptyRegionError("pool_region: weights sum to zero");
  // Row-major flattening matches FeatureGrid's patch order.
  const RowMatrix<Scalar> w = weights.template cast<Scalar>();
  const Eigen::Map<const Vector<Scalar>> flat(w.data(), w.size());
  return (features.values.transpose() * flat) / total;
}

/// Mean of the per-template embeddings of one noun (rows of `templates`).
template <typename Derived>
Vector<typename Derived::Scalar> mean_template_embed(const Eigen::MatrixBase<Derived>& templates) {
  if (templates.rows() == 0 || templates.cols() == 0) throw ArgumentError("mean_template_embed: no templates");
  return templates.colwise().mean().transpose();
}

/// alpha * noun + (1 - alpha) * caption.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> build_key(const Eigen::MatrixBase<DerivedA>& mean_noun_embed,
                                            const Eigen::MatrixBase<DerivedB>& caption_embed, double alpha) {
  using Scalar = typename DerivedA::Scalar;
  if (mean_noun_embed.size() != caption_embed.size()) {
    throw ArgumentError("build_key: noun embedding has " + std::to_string(mean_noun_embed.size()) +
                        " dims, caption embedding " + std::to_string(caption_embed.size()));
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("build_key: alpha must lie in (0, 1]");
  const auto a = static_cast<Scalar>(alpha);
  return a * mean_noun_embed + (Scalar(1) - a) * caption_embed;
}

inline constexpr double kDefaultGamma = 0.45;
inline constexpr double kDefaultAlpha = 0.9;

/// Identity shared by a textual key and its visual prototype.
struct PairId {
  std::string noun;
  std::string caption_id;
  friend bool operator==(const PairId&, const PairId&) = default;
};

struct KeyedPrototype {
  PairId id;
  Vectorf key;        // d_t, unnormalized
  Vectorf prototype;  // d_v
};

struct SkippedNoun {
  PairId id;
  std::string reason;
};

struct PairOptions {
  double gamma = kDefaultGamma;
  double alpha = kDefaultAlpha;
  int threads = 1;
};

/// Localization mask of one noun of a caption at generated-image resolution.
BinaryMask localize_noun(const CaptionRecord& record, const NounSpan& noun, const AttentionStack& stack,
                         double gamma);

/// Runs attribution, binarization, pooling and key construction for every
/// (caption, noun). Degenerate nouns are skipped with a warning and reported
/// through `skipped`; I/O and format errors abort. Output order is manifest
/// order then noun order for any thread count.
std::vector<KeyedPrototype> generate_pairs(const std::vector<CaptionRecord>& records, const PairOptions& options,
                                           std::vector<SkippedNoun>* skipped = nullptr);

/// Index-aligned keys (N x d_t), prototypes (N x d_v) and identities.
struct PrototypeBundle {
  RowMatrixf keys;
  RowMatrixf protos;
  std::vector<PairId> meta;

  [[nodiscard]] Eigen::Index size() const { return keys.rows(); }
};

PrototypeBundle make_bundle(const std::vector<KeyedPrototype>& pairs);

/// Writes keys.fdt, protos.fdt and meta ("noun<TAB>caption_id" per line).
void save_bundle(const PrototypeBundle& bundle, const std::filesystem::path& dir);
PrototypeBundle load_bundle(const std::filesystem::path& dir);

}  // namespace protoseg
