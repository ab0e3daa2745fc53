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
#include <optional>
#include <vector>

#include "protoseg/hnsw.hpp"
#include "protoseg/prototype.hpp"
#include "protoseg/similarity.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

inline constexpr int kDefaultTopK = 350;
inline constexpr int kDefaultEfSearch = 128;

struct IndexParams {
  int top_k = kDefaultTopK;
  int ef_search = kDefaultEfSearch;
};

/// Top-k ids with their cosine scores, best first. `clamped` is set when
/// fewer than the requested k records exist.
struct RetrievalResult {
  std::vector<int> ids;
  std::vector<double> scores;
  bool clamped = false;
};

/// Keys, prototypes and identities of a prototype bundle plus the search
/// structures over the keys. Immutable once built; safe for concurrent
/// queries.
class PrototypeIndex {
 public:
  /// Normalizes every key to unit length; a zero key is a BuildError naming
  /// its record. The HNSW graph is built only when `hnsw` is given.
  static PrototypeIndex build(PrototypeBundle bundle, std::optional<HnswParams> hnsw = std::nullopt,
                              IndexParams params = {});

  /// Exact cosine top-k; ties go to the lower id.
  [[nodiscard]] RetrievalResult query_exact(const Vectord& query, int k) const;
  /// Approximate top-k through the HNSW graph (StateError when absent).
  [[nodiscard]] RetrievalResult query_hnsw(const Vectord& query, int k, int ef_search) const;

  template <typename Derived>
  [[nodiscard]] RetrievalResult query_exact(const Eigen::MatrixBase<Derived>& query, int k) const {
    return query_exact(Vectord(query.template cast<double>()), k);
  }
  template <typename Derived>
  [[nodiscard]] RetrievalResult query_hnsw(const Eigen::MatrixBase<Derived>& query, int k, int ef_search) const {
    return query_hnsw(Vectord(query.template cast<double>()), k, ef_search);
  }

  [[nodiscard]] Eigen::Index size() const { return protos_.rows(); }
  [[nodiscard]] Eigen::Index key_dim() const { return unit_keys_.cols(); }
  [[nodiscard]] Eigen::Index proto_dim() const { return protos_.cols(); }
  [[nodiscard]] bool has_graph() const { return graph_.has_value(); }
  [[nodiscard]] const HnswGraph& graph() const;
  [[nodiscard]] const RowMatrixf& prototypes() const { return protos_; }
  [[nodiscard]] const RowMatrixd& unit_keys() const { return unit_keys_; }
  [[nodiscard]] const std::vector<PairId>& meta() const { return meta_; }
  [[nodiscard]] const IndexParams& params() const { return params_; }

  /// Index directory: keys.fdt, protos.fdt, meta, params and, with a graph,
  /// graph.bin.
  void save(const std::filesystem::path& dir) const;
  /// Throws LoadError on version mismatch or any damaged file; nothing is
  /// returned unless the whole directory decodes.
  static PrototypeIndex load(const std::filesystem::path& dir);

  static constexpr int kFormatVersion = 1;

 private:
  Vectord unit_query(const Vectord& query) const;

  RowMatrixf keys_;       // as supplied
  RowMatrixd unit_keys_;  // L2-normalized
  RowMatrixf protos_;
  std::vector<PairId> meta_;
  IndexParams params_;
  std::optional<HnswGraph> graph_;
};

/// Mean of retrieved prototypes (one per row).
template <typename Derived>
Vector<typename Derived::Scalar> aggregate_mean_embedding(const Eigen::MatrixBase<Derived>& protos) {
  if (protos.rows() == 0) throw ArgumentError("aggregate_mean_embedding: no prototypes");
  return protos.colwise().mean().transpose();
}

enum class SimilarityMode { Mean, Max };

/// Cosine of `region_embed` against every prototype row, reduced by mean or max.
template <typename DerivedP, typename DerivedR>
double aggregate_similarity(const Eigen::MatrixBase<DerivedP>& protos, const Eigen::MatrixBase<DerivedR>& region_embed,
                            SimilarityMode mode) {
  if (protos.rows() == 0) throw ArgumentError("aggregate_similarity: no prototypes");
  if (region_embed.norm() == 0) throw ArgumentError("aggregate_similarity: zero region embedding");
  const Vectord sims = cosine_table(protos, region_embed.transpose()).col(0);
  return mode == SimilarityMode::Mean ? sims.mean() : sims.maxCoeff();
}

}  // namespace protoseg
