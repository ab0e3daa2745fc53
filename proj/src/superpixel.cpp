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

#include "protoseg/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace protoseg {

void FelzParams::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("felzenszwalb: k must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("felzenszwalb: sigma must be non-negative");
  if (min_size < 1) throw ArgumentError("felzenszwalb: min_size must be at least 1");
}

namespace {

struct Preset {
  const char* name;
  FelzParams params;
};

// {k, sigma, min_size} per benchmark.
constexpr Preset kPresets[] = {
    {"voc", {20.0, 0.7, 100}},        {"context", {20.0, 1.0, 100}}, {"stuff", {100.0, 1.0, 100}},
    {"cityscapes", {20.0, 0.5, 50}}, {"ade", {20.0, 1.0, 100}},
};

// Mirror index into [0, n) with the edge sample repeated (d c b a | a b c d).
int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

RowMatrixd convolve_rows(const RowMatrixd& src, const std::vector<double>& kernel, int radius) {
  RowMatrixd out(src.rows(), src.cols());
  const int w = static_cast<int>(src.cols());
  for (Eigen::Index y = 0; y < src.rows(); ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -radius; j <= radius; ++j) acc += kernel[std::size_t(j + radius)] * src(y, mirror(x + j, w));
      out(y, x) = acc;
    }
  }
  return out;
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(std::size_t(n)), rank_(std::size_t(n), 0), size_(std::size_t(n), 1),
                                 internal_(std::size_t(n), 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    int root = x;
    while (parent_[std::size_t(root)] != root) root = parent_[std::size_t(root)];
    while (parent_[std::size_t(x)] != root) {
      const int next = parent_[std::size_t(x)];
      parent_[std::size_t(x)] = root;
      x = next;
    }
    return root;
  }
  // Joins two roots; returns the new root.
  int join(int a, int b, double weight) {
    if (rank_[std::size_t(a)] < rank_[std::size_t(b)]) std::swap(a, b);
    parent_[std::size_t(b)] = a;
    if (rank_[std::size_t(a)] == rank_[std::size_t(b)]) ++rank_[std::size_t(a)];
    size_[std::size_t(a)] += size_[std::size_t(b)];
    internal_[std::size_t(a)] = std::max({internal_[std::size_t(a)], internal_[std::size_t(b)], weight});
    return a;
  }
  [[nodiscard]] int size(int root) const { return size_[std::size_t(root)]; }
  [[nodiscard]] double internal(int root) const { return internal_[std::size_t(root)]; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  std::vector<int> size_;
  std::vector<double> internal_;
};

struct Edge {
  double weight;
  int a;  // smaller pixel index
  int b;
};

}  // namespace

std::optional<FelzParams> felz_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p.params;
  }
  return std::nullopt;
}

std::vector<std::string> felz_preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

RgbPlanes to_planes(const RgbImage& image) {
  RgbPlanes planes;
  for (int c = 0; c < 3; ++c) {
    planes[std::size_t(c)].resize(image.height, image.width);
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) planes[std::size_t(c)](y, x) = image.at(y, x, c);
    }
  }
  return planes;
}

RgbPlanes gaussian_smooth(const RgbPlanes& planes, double sigma) {
  if (!(sigma >= 0.0)) throw ArgumentError("gaussian_smooth: sigma must be non-negative");
  if (sigma == 0.0) return planes;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(std::size_t(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) kernel[std::size_t(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (auto& v : kernel) v /= total;

  RgbPlanes out;
  for (std::size_t c = 0; c < 3; ++c) {
    const RowMatrixd horizontal = convolve_rows(planes[c], kernel, radius);
    const RowMatrixd transposed = horizontal.transpose();
    out[c] = convolve_rows(transposed, kernel, radius).transpose();
  }
  return out;
}

RgbPlanes gaussian_smooth(const RgbImage& image, double sigma) { return gaussian_smooth(to_planes(image), sigma); }

RegionPartition felzenszwalb(const RgbImage& image, const FelzParams& params) {
  params.validate();
  const int h = image.height;
  const int w = image.width;
  if (h < 1 || w < 1) throw ArgumentError("felzenszwalb: empty image");
  const RgbPlanes smooth = gaussian_smooth(image, params.sigma);

  auto weight = [&](int y0, int x0, int y1, int x1) {
    double sq = 0.0;
    for (const auto& p : smooth) {
      const double d = p(y0, x0) - p(y1, x1);
      sq += d * d;
    }
    return std::sqrt(sq);
  };

  std::vector<Edge> edges;
  edges.reserve(std::size_t(h) * w * 4);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int id = y * w + x;
      if (x + 1 < w) edges.push_back({weight(y, x, y, x + 1), id, id + 1});
      if (y + 1 < h) edges.push_back({weight(y, x, y + 1, x), id, id + w});
      if (x + 1 < w && y + 1 < h) edges.push_back({weight(y, x, y + 1, x + 1), id, id + w + 1});
      if (x + 1 < w && y > 0) edges.push_back({weight(y, x, y - 1, x + 1), id - w + 1, id});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    if (l.weight != r.weight) return l.weight < r.weight;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });

  DisjointSets sets(h * w);
  for (const auto& e : edges) {
    const int a = sets.find(e.a);
    const int b = sets.find(e.b);
    if (a == b) continue;
    const double ta = sets.internal(a) + params.k / sets.size(a);
    const double tb = sets.internal(b) + params.k / sets.size(b);
    if (e.weight <= std::min(ta, tb)) sets.join(a, b, e.weight);
  }
  for (const auto& e : edges) {
    const int a = sets.find(e.a);
    const int b = sets.find(e.b);
    if (a != b && (sets.size(a) < params.min_size || sets.size(b) < params.min_size)) sets.join(a, b, e.weight);
  }

  RegionPartition out;
  out.labels.resize(h, w);
  std::vector<int> dense(std::size_t(h) * w, -1);
  for (int i = 0; i < h * w; ++i) {
    const int root = sets.find(i);
    int& id = dense[std::size_t(root)];
    if (id < 0) {
      id = out.region_count++;
      out.sizes.push_back(0);
    }
    out.labels.data()[i] = id;
    ++out.sizes[std::size_t(id)];
  }
  return out;
}

}  // namespace protoseg
