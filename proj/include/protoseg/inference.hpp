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
#include <string>
#include <vector>

#include "protoseg/index.hpp"
#include "protoseg/superpixel.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

/// Label written for regions whose best combined similarity misses the
/// unknown threshold.
inline constexpr std::int32_t kUnknownLabel = 255;
inline constexpr double kDefaultBeta = 0.8;
inline constexpr double kVocBeta = 0.7;

/// Query categories: names, mean-template text embeddings (S x d_t) and,
/// once retrieved, one representative prototype per category (S x d_v).
struct CategorySet {
  std::vector<std::string> names;
  RowMatrixf text_embeds;
  RowMatrixf representatives;

  [[nodiscard]] int size() const { return static_cast<int>(names.size()); }
};

/// Reads one category name per line plus the matching S x d_t tensor.
CategorySet load_categories(const std::filesystem::path& names, const std::filesystem::path& embeddings);
std::vector<std::string> read_category_names(const std::filesystem::path& names);

enum class SearchMode { Exact, Approximate };

struct RetrievalOptions {
  int top_k = kDefaultTopK;
  SearchMode mode = SearchMode::Exact;
  int ef_search = kDefaultEfSearch;
};

/// Fills `representatives` with the mean of the top-k prototypes retrieved
/// for each category's text embedding.
CategorySet build_representatives(const PrototypeIndex& index, CategorySet categories,
                                  const RetrievalOptions& options = {});

struct WindowConfig {
  int short_side = 448;
  int window = 448;
  int stride = 224;
  int patch = 14;
};

struct Window {
  int y = 0;
  int x = 0;
  int height = 0;
  int width = 0;
};

/// Sliding-window layout over the resized image, and the stitched patch grid.
struct WindowPlan {
  int original_height = 0;
  int original_width = 0;
  int height = 0;  // resized
  int width = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<Window> windows;
};

/// Resizes so the shorter side equals `short_side`, then tiles windows at
/// `stride`; the last window on each axis is clamped to the border.
WindowPlan make_window_plan(int height, int width, const WindowConfig& config = {});

/// Builds the full-image patch grid. Each stitched cell takes the mean of the
/// window cells covering its centre; an uncovered cell is a PlanError.
FeatureGridf stitch_features(const WindowPlan& plan, const std::vector<FeatureGridf>& window_grids);

/// Region pooling weights for every region at patch-grid resolution, using
/// the same bilinear rule as resize_mask. Entry r lists (cell, weight) pairs.
std::vector<std::vector<std::pair<int, float>>> region_pooling_weights(const RegionPartition& partition, int rows,
                                                                       int cols);

/// Pooled embedding per region (R x d_v). Regions whose weights vanish at
/// patch resolution take the feature of the patch holding their centroid.
RowMatrixf region_embeddings(const FeatureGridf& stitched, const RegionPartition& partition);

/// Cosine of every region embedding against every representative (R x S).
RowMatrixd local_similarities(const FeatureGridf& stitched, const RegionPartition& partition,
                              const CategorySet& categories);

/// Cosine of the whole-image embedding against each category text embedding.
Vectord global_similarity(const Vectorf& image_embed, const CategorySet& categories);

/// beta * local + (1 - beta) * global, row by row.
RowMatrixd combine(const RowMatrixd& local, const Vectord& global, double beta);

struct SimilarityTable {
  RowMatrixd local;
  Vectord global;
  RowMatrixd combined;
  double beta = kDefaultBeta;
};

struct Provenance {
  double beta = kDefaultBeta;
  int top_k = kDefaultTopK;
  std::string preset;
  FelzParams felz;
  std::optional<double> unknown_threshold;
};

struct SegmentationMask {
  LabelMap labels;  // category ids in [0, S) or kUnknownLabel
  Provenance provenance;
};

/// Per-region argmax (ties to the lower category). With a threshold, regions
/// whose best score is below it become kUnknownLabel.
SegmentationMask assign(const RowMatrixd& combined, const RegionPartition& partition,
                        std::optional<double> unknown_threshold = std::nullopt);

struct SegmentConfig {
  double beta = kDefaultBeta;
  int top_k = kDefaultTopK;
  std::string preset;
  FelzParams felz;
  std::optional<double> unknown_threshold;
  WindowConfig windows;

  void validate() const;
};

struct SegmentResult {
  SegmentationMask mask;           // original resolution
  LabelMap resized_labels;         // plan resolution
  RegionPartition partition;       // plan resolution
  SimilarityTable similarities;
  WindowPlan plan;
};

/// Full inference on one image. `window_grids` follow make_window_plan's
/// window order; `categories` must carry representatives. Stage failures are
/// rethrown as StageError.
SegmentResult segment(const RgbImage& image, const std::vector<FeatureGridf>& window_grids,
                      const Vectorf& image_embed, const CategorySet& categories, const SegmentConfig& config);

/// Nearest-neighbour label resize.
LabelMap resize_labels(const LabelMap& labels, int height, int width);

}  // namespace protoseg
