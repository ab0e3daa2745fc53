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

#include "protoseg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "protoseg/image_io.hpp"
#include "protoseg/interp.hpp"
#include "protoseg/tensorio.hpp"

namespace protoseg {

namespace fs = std::filesystem;

std::vector<std::string> read_category_names(const fs::path& names) {
  std::ifstream in(names);
  if (!in) throw IoError("cannot open categories file " + names.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(line);
  }
  return out;
}

CategorySet load_categories(const fs::path& names, const fs::path& embeddings) {
  CategorySet set;
  set.names = read_category_names(names);
  set.text_embeds = tensor_to_matrix(read_tensor(embeddings));
  if (set.names.empty()) throw ArgumentError("categories file lists no categories");
  if (set.text_embeds.rows() != Eigen::Index(set.names.size())) {
    throw ArgumentError("categories file lists " + std::to_string(set.names.size()) + " names, embedding tensor has " +
                        std::to_string(set.text_embeds.rows()) + " rows");
  }
  if (set.size() >= kUnknownLabel) throw ArgumentError("at most 254 categories fit the uint8 label format");
  return set;
}

CategorySet build_representatives(const PrototypeIndex& index, CategorySet categories,
                                  const RetrievalOptions& options) {
  if (index.size() == 0) throw ArgumentError("build_representatives: empty index");
  if (options.top_k < 1) throw ArgumentError("build_representatives: k must be positive");
  if (categories.size() == 0) throw ArgumentError("build_representatives: no categories");
  categories.representatives.resize(categories.size(), index.proto_dim());
  for (int c = 0; c < categories.size(); ++c) {
    const Vectord query = categories.text_embeds.row(c).transpose().cast<double>();
    if (query.norm() == 0.0) {
      throw ArgumentError("build_representatives: category '" + categories.names[std::size_t(c)] +
                          "' has a zero embedding");
    }
    const auto hits = options.mode == SearchMode::Exact ? index.query_exact(query, options.top_k)
                                                        : index.query_hnsw(query, options.top_k, options.ef_search);
    RowMatrixd retrieved(Eigen::Index(hits.ids.size()), index.proto_dim());
    for (std::size_t i = 0; i < hits.ids.size(); ++i) {
      retrieved.row(Eigen::Index(i)) = index.prototypes().row(hits.ids[i]).cast<double>();
    }
    categories.representatives.row(c) = aggregate_mean_embedding(retrieved).transpose().cast<float>();
  }
  return categories;
}

namespace {

std::vector<std::pair<int, int>> window_spans(int length, int window, int stride) {
  std::vector<std::pair<int, int>> spans;
  if (length <= window) {
    spans.emplace_back(0, length);
    return spans;
  }
  for (int p = 0;; p += stride) {
    if (p + window >= length) {
      spans.emplace_back(length - window, window);
      break;
    }
    spans.emplace_back(p, window);
  }
  return spans;
}

}  // namespace

WindowPlan make_window_plan(int height, int width, const WindowConfig& config) {
  if (height < 1 || width < 1) throw ArgumentError("make_window_plan: empty image");
  if (config.short_side < 1 || config.window < 1 || config.stride < 1 || config.patch < 1) {
    throw ArgumentError("make_window_plan: sizes must be positive");
  }
  WindowPlan plan;
  plan.original_height = height;
  plan.original_width = width;
  const double scale = static_cast<double>(config.short_side) / std::min(height, width);
  plan.height = height <= width ? config.short_side : std::max(1, static_cast<int>(std::lround(height * scale)));
  plan.width = width < height ? config.short_side : std::max(1, static_cast<int>(std::lround(width * scale)));
  plan.grid_rows = std::max(1, static_cast<int>(std::lround(static_cast<double>(plan.height) / config.patch)));
  plan.grid_cols = std::max(1, static_cast<int>(std::lround(static_cast<double>(plan.width) / config.patch)));
  for (const auto& [y, h] : window_spans(plan.height, config.window, config.stride)) {
    for (const auto& [x, w] : window_spans(plan.width, config.window, config.stride)) {
      plan.windows.push_back({y, x, h, w});
    }
  }
  return plan;
}

FeatureGridf stitch_features(const WindowPlan& plan, const std::vector<FeatureGridf>& window_grids) {
  if (window_grids.size() != plan.windows.size()) {
    throw PlanError("stitch_features: plan has " + std::to_string(plan.windows.size()) + " windows, got " +
                    std::to_string(window_grids.size()) + " feature grids");
  }
  if (window_grids.empty()) throw PlanError("stitch_features: no windows");
  const int dim = window_grids.front().dim();
  for (const auto& g : window_grids) {
    if (g.dim() != dim || g.rows < 1 || g.cols < 1) {
      throw ArgumentError("stitch_features: window grids must be non-empty with a common width");
    }
  }

  FeatureGridf out(plan.grid_rows, plan.grid_cols, dim);
  Vectorf acc(dim);
  for (int r = 0; r < plan.grid_rows; ++r) {
    const double cy = (r + 0.5) * plan.height / plan.grid_rows;
    for (int c = 0; c < plan.grid_cols; ++c) {
      const double cx = (c + 0.5) * plan.width / plan.grid_cols;
      acc.setZero();
      int covering = 0;
      for (std::size_t i = 0; i < plan.windows.size(); ++i) {
        const auto& win = plan.windows[i];
        if (cy < win.y || cy >= win.y + win.height || cx < win.x || cx >= win.x + win.width) continue;
        const auto& g = window_grids[i];
        const int wr = std::min(g.rows - 1, static_cast<int>((cy - win.y) * g.rows / win.height));
        const int wc = std::min(g.cols - 1, static_cast<int>((cx - win.x) * g.cols / win.width));
        acc += g.at(wr, wc).transpose();
        ++covering;
      }
      if (covering == 0) {
        throw PlanError("stitch_features: patch (" + std::to_string(r) + ", " + std::to_string(c) +
                        ") is not covered by any window");
      }
      out.at(r, c) = (acc / static_cast<float>(covering)).transpose();
    }
  }
  return out;
}

std::vector<std::vector<std::pair<int, float>>> region_pooling_weights(const RegionPartition& partition, int rows,
                                                                       int cols) {
  const auto ty = linear_taps(partition.height(), rows);
  const auto tx = linear_taps(partition.width(), cols);
  std::vector<std::vector<std::pair<int, float>>> weights(std::size_t(partition.region_count));
  const auto& L = partition.labels;
  for (int r = 0; r < rows; ++r) {
    const auto& a = ty[std::size_t(r)];
    const auto fy = static_cast<float>(a.frac);
    for (int c = 0; c < cols; ++c) {
      const auto& b = tx[std::size_t(c)];
      const auto fx = static_cast<float>(b.frac);
      const int corners[4] = {L(a.lo, b.lo), L(a.lo, b.hi), L(a.hi, b.lo), L(a.hi, b.hi)};
      for (int k = 0; k < 4; ++k) {
        const int region = corners[k];
        bool seen = false;
        for (int j = 0; j < k; ++j) seen = seen || corners[j] == region;
        if (seen) continue;
        // Same arithmetic as bilinear_resize on the region's binary mask.
        const float m00 = corners[0] == region ? 1.0f : 0.0f;
        const float m01 = corners[1] == region ? 1.0f : 0.0f;
        const float m10 = corners[2] == region ? 1.0f : 0.0f;
        const float m11 = corners[3] == region ? 1.0f : 0.0f;
        const float top = m00 + fx * (m01 - m00);
        const float bottom = m10 + fx * (m11 - m10);
        const float w = top + fy * (bottom - top);
        if (w > 0.0f) weights[std::size_t(region)].emplace_back(r * cols + c, w);
      }
    }
  }
  return weights;
}

RowMatrixf region_embeddings(const FeatureGridf& stitched, const RegionPartition& partition) {
  const auto weights = region_pooling_weights(partition, stitched.rows, stitched.cols);
  const int regions = partition.region_count;
  RowMatrixf out = RowMatrixf::Zero(regions, stitched.dim());

  std::vector<double> sum_y(std::size_t(regions), 0.0);
  std::vector<double> sum_x(std::size_t(regions), 0.0);
  bool need_centroids = false;
  for (const auto& w : weights) need_centroids = need_centroids || w.empty();
  if (need_centroids) {
    for (int y = 0; y < partition.height(); ++y) {
      for (int x = 0; x < partition.width(); ++x) {
        const auto id = std::size_t(partition.labels(y, x));
        sum_y[id] += y + 0.5;
        sum_x[id] += x + 0.5;
      }
    }
  }

  for (int r = 0; r < regions; ++r) {
    const auto& w = weights[std::size_t(r)];
    if (w.empty()) {
      const int size = partition.sizes[std::size_t(r)];
      const double cy = sum_y[std::size_t(r)] / size;
      const double cx = sum_x[std::size_t(r)] / size;
      const int pr = std::clamp(static_cast<int>(cy * stitched.rows / partition.height()), 0, stitched.rows - 1);
      const int pc = std::clamp(static_cast<int>(cx * stitched.cols / partition.width()), 0, stitched.cols - 1);
      spdlog::debug("region {} ({} px) vanishes at patch resolution; using patch ({}, {})", r, size, pr, pc);
      out.row(r) = stitched.at(pr, pc);
      continue;
    }
    float total = 0.0f;
    for (const auto& [cell, value] : w) {
      out.row(r) += value * stitched.values.row(cell);
      total += value;
    }
    out.row(r) /= total;
  }
  return out;
}

RowMatrixd local_similarities(const FeatureGridf& stitched, const RegionPartition& partition,
                              const CategorySet& categories) {
  if (categories.representatives.rows() != categories.size() || categories.size() == 0) {
    throw ArgumentError("local_similarities: categories lack representatives");
  }
  if (categories.representatives.cols() != stitched.dim()) {
    throw ArgumentError("local_similarities: representative width differs from feature width");
  }
  RowMatrixd regions = region_embeddings(stitched, partition).cast<double>();
  RowMatrixd reps = categories.representatives.cast<double>();
  for (Eigen::Index s = 0; s < reps.rows(); ++s) {
    const double n = reps.row(s).norm();
    if (!(n > 0.0)) {
      throw ArgumentError("local_similarities: zero representative for '" + categories.names[std::size_t(s)] + "'");
    }
    reps.row(s) /= n;
  }
  for (Eigen::Index r = 0; r < regions.rows(); ++r) {
    const double n = regions.row(r).norm();
    if (n > 0.0) {
      regions.row(r) /= n;
    } else {
      spdlog::warn("region {} has a zero embedding; its local similarities are 0", r);
    }
  }
  return (regions * reps.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
}

Vectord global_similarity(const Vectorf& image_embed, const CategorySet& categories) {
  if (image_embed.norm() == 0.0f) throw ArgumentError("global_similarity: zero image embedding");
  if (categories.text_embeds.rows() == 0) throw ArgumentError("global_similarity: no categories");
  return cosine_table(image_embed.transpose(), categories.text_embeds).row(0).transpose();
}

RowMatrixd combine(const RowMatrixd& local, const Vectord& global, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("combine: beta must lie in [0, 1]");
  if (local.cols() != global.size()) {
    throw ArgumentError("combine: local table has " + std::to_string(local.cols()) + " categories, global vector " +
                        std::to_string(global.size()));
  }
  RowMatrixd out(local.rows(), local.cols());
  for (Eigen::Index r = 0; r < local.rows(); ++r) {
    out.row(r) = beta * local.row(r) + (1.0 - beta) * global.transpose();
  }
  return out;
}

SegmentationMask assign(const RowMatrixd& combined, const RegionPartition& partition,
                        std::optional<double> unknown_threshold) {
  if (combined.rows() != partition.region_count) {
    throw ArgumentError("assign: table has " + std::to_string(combined.rows()) + " rows for " +
                        std::to_string(partition.region_count) + " regions");
  }
  if (combined.cols() < 1) throw ArgumentError("assign: no categories");
  std::vector<std::int32_t> region_label(std::size_t(combined.rows()));
  for (Eigen::Index r = 0; r < combined.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index s = 1; s < combined.cols(); ++s) {
      if (combined(r, s) > combined(r, best)) best = s;
    }
    const bool unknown = unknown_threshold && combined(r, best) < *unknown_threshold;
    region_label[std::size_t(r)] = unknown ? kUnknownLabel : static_cast<std::int32_t>(best);
  }
  SegmentationMask mask;
  mask.labels = partition.labels.unaryExpr([&](std::int32_t id) { return region_label[std::size_t(id)]; });
  mask.provenance.unknown_threshold = unknown_threshold;
  return mask;
}

void SegmentConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("beta must lie in [0, 1]");
  if (top_k < 1) throw ArgumentError("top-k must be positive");
  felz.validate();
}

LabelMap resize_labels(const LabelMap& labels, int height, int width) {
  if (labels.rows() == height && labels.cols() == width) return labels;
  LabelMap out(height, width);
  for (int y = 0; y < height; ++y) {
    const auto sy = std::min<Eigen::Index>(labels.rows() - 1, Eigen::Index((y + 0.5) * labels.rows() / height));
    for (int x = 0; x < width; ++x) {
      const auto sx = std::min<Eigen::Index>(labels.cols() - 1, Eigen::Index((x + 0.5) * labels.cols() / width));
      out(y, x) = labels(sy, sx);
    }
  }
  return out;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

SegmentResult segment(const RgbImage& image, const std::vector<FeatureGridf>& window_grids,
                      const Vectorf& image_embed, const CategorySet& categories, const SegmentConfig& config) {
  stage("config", [&] { config.validate(); });
  SegmentResult out;
  out.plan = stage("plan", [&] { return make_window_plan(image.height, image.width, config.windows); });
  const FeatureGridf stitched = stage("stitch", [&] { return stitch_features(out.plan, window_grids); });
  const RgbImage resized = stage("resize", [&] { return resize_bilinear(image, out.plan.height, out.plan.width); });
  out.partition = stage("superpixels", [&] { return felzenszwalb(resized, config.felz); });

  auto& sims = out.similarities;
  sims.beta = config.beta;
  sims.local = stage("local", [&] { return local_similarities(stitched, out.partition, categories); });
  sims.global = stage("global", [&] { return global_similarity(image_embed, categories); });
  sims.combined = stage("combine", [&] { return combine(sims.local, sims.global, config.beta); });

  const SegmentationMask resized_mask =
      stage("assign", [&] { return assign(sims.combined, out.partition, config.unknown_threshold); });
  out.resized_labels = resized_mask.labels;
  out.mask.labels = resize_labels(resized_mask.labels, image.height, image.width);
  out.mask.provenance = {config.beta, config.top_k, config.preset, config.felz, config.unknown_threshold};
  return out;
}

}  // namespace protoseg
