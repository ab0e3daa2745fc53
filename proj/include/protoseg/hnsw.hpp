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

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

struct HnswParams {
  int m = 32;                // links per node above level 0; level 0 keeps 2m
  int ef_construction = 200;
  std::uint64_t seed = 42;
};

/// Hierarchical navigable small-world graph over unit-norm vectors, ranked by
/// inner product. The graph stores ids only; callers pass the vectors it was
/// built on to every search.
class HnswGraph {
 public:
  struct Hit {
    double score;  // inner product
    int id;
  };

  static HnswGraph build(const RowMatrixd& unit_vectors, const HnswParams& params);

  /// Approximate top-k by inner product, best first, ties by lower id. The
  /// beam width is max(ef, k).
  [[nodiscard]] std::vector<Hit> search(const RowMatrixd& unit_vectors, const Vectord& unit_query, int k,
                                        int ef) const;

  [[nodiscard]] int size() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] int max_level() const { return max_level_; }
  [[nodiscard]] const HnswParams& params() const { return params_; }
  [[nodiscard]] const std::vector<int>& neighbors(int level, int node) const { return links_[node][level]; }

  /// True when every link and the entry point reference ids in [0, n).
  [[nodiscard]] bool references_valid_ids(int n) const;

  void save(std::ostream& out) const;
  static HnswGraph load(std::istream& in);

  static constexpr std::uint32_t kVersion = 1;

 private:
  using Candidate = std::pair<double, int>;  // (distance, id)

  std::vector<Candidate> search_layer(const RowMatrixd& vectors, const Vectord& query, int entry, int ef,
                                      int level) const;
  std::vector<int> select_neighbors(const RowMatrixd& vectors, std::vector<Candidate> candidates, int limit) const;
  void connect(const RowMatrixd& vectors, int node);
  [[nodiscard]] int capacity(int level) const { return level == 0 ? 2 * params_.m : params_.m; }

  HnswParams params_;
  int entry_ = -1;
  int max_level_ = -1;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<int>>> links_;  // node -> level -> neighbor ids
};

}  // namespace protoseg
