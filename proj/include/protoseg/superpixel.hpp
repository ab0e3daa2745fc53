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

#include <array>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "protoseg/attribution.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

/// Graph-segmentation parameters: scale of observation `k`, Gaussian
/// pre-smoothing `sigma` and minimum region size `min_size` (pixels).
struct FelzParams {
  double k = 20.0;
  double sigma = 1.0;
  int min_size = 100;

  void validate() const;
  friend bool operator==(const FelzParams&, const FelzParams&) = default;
};

/// Per-dataset presets: voc, context, stuff, cityscapes, ade.
std::optional<FelzParams> felz_preset(std::string_view name);
std::vector<std::string> felz_preset_names();

using RgbPlanes = std::array<RowMatrixd, 3>;

RgbPlanes to_planes(const RgbImage& image);

/// Separable Gaussian per channel, kernel radius ceil(4 sigma), mirrored
/// borders (edge sample repeated). sigma = 0 is the identity.
RgbPlanes gaussian_smooth(const RgbPlanes& planes, double sigma);
RgbPlanes gaussian_smooth(const RgbImage& image, double sigma);

/// Dense region labelling of an image.
struct RegionPartition {
  LabelMap labels;         // H x W, ids in [0, region_count)
  int region_count = 0;
  std::vector<int> sizes;  // pixels per region

  [[nodiscard]] int height() const { return static_cast<int>(labels.rows()); }
  [[nodiscard]] int width() const { return static_cast<int>(labels.cols()); }
};

/// Felzenszwalb-Huttenlocher segmentation on the 8-connected pixel grid with
/// Euclidean RGB edge weights of the smoothed image. Regions smaller than
/// min_size are then merged along their cheapest boundary edge. Ids are
/// assigned in raster order of first appearance.
RegionPartition felzenszwalb(const RgbImage& image, const FelzParams& params);

/// Lazily materialized binary mask per region, in id order.
class RegionMasks {
 public:
  explicit RegionMasks(const RegionPartition& partition) : partition_(&partition) {}

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = BinaryMask;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const RegionPartition* p, int region) : partition_(p), region_(region) {}
    BinaryMask operator*() const { return (partition_->labels.array() == region_).cast<std::uint8_t>(); }
    iterator& operator++() {
      ++region_;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++region_;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.region_ == b.region_; }

   private:
    const RegionPartition* partition_ = nullptr;
    int region_ = 0;
  };

  [[nodiscard]] iterator begin() const { return {partition_, 0}; }
  [[nodiscard]] iterator end() const { return {partition_, partition_->region_count}; }

 private:
  const RegionPartition* partition_;
};

inline RegionMasks region_masks(const RegionPartition& partition) { return RegionMasks(partition); }

}  // namespace protoseg
