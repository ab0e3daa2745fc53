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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "protoseg/superpixel.hpp"
#include "test_util.hpp"

namespace protoseg {
namespace {

// Checkerboard of 16-pixel blocks in three gray levels plus LCG noise.
RgbImage lcg_image(std::uint32_t seed, int h, int w) {
  RgbImage img(h, w);
  std::uint32_t state = seed;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int base = ((y / 16 + x / 16) % 3) * 80;
      for (int ch = 0; ch < 3; ++ch) {
        state = state * 1664525u + 1013904223u;
        const int noise = int(state >> 24) - 128;
        const int floor_div = noise >= 0 ? noise / 4 : -((-noise + 3) / 4);
        img.at(y, x, ch) = std::uint8_t(std::clamp(base + floor_div, 0, 255));
      }
    }
  }
  return img;
}

RgbImage random_image(std::mt19937& rng, int h, int w) {
  RgbImage img(h, w);
  std::uniform_int_distribution<int> v(0, 255);
  for (auto& p : img.pixels) p = std::uint8_t(v(rng));
  return img;
}

std::vector<int> flat(const LabelMap& labels) { return {labels.data(), labels.data() + labels.size()}; }

void expect_valid(const RegionPartition& p, int min_size) {
  const auto sizes = oracle::check_partition(flat(p.labels), p.height(), p.width(), p.region_count);
  ASSERT_EQ(int(sizes.size()), p.region_count) << "not a partition into connected regions";
  EXPECT_EQ(sizes, p.sizes);
  if (p.height() * p.width() >= min_size) {
    EXPECT_GE(*std::min_element(sizes.begin(), sizes.end()), min_size);
  }
}

TEST(GaussianSmooth, ZeroSigmaIsIdentity) {
  std::mt19937 rng(1);
  const auto img = random_image(rng, 9, 11);
  const auto planes = to_planes(img);
  const auto out = gaussian_smooth(planes, 0.0);
  for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out[ch], planes[ch]);
}

TEST(GaussianSmooth, ConstantStaysConstant) {
  RgbImage img(20, 20);
  std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t(77));
  for (const auto& p : gaussian_smooth(img, 1.7)) EXPECT_LT((p.array() - 77.0).abs().maxCoeff(), 1e-9);
}

TEST(GaussianSmooth, ImpulseMatchesKernel) {
  RgbPlanes planes;
  for (auto& p : planes) p = RowMatrixd::Zero(41, 41);
  planes[0](20, 20) = 1.0;
  const double sigma = 1.5;
  const auto out = gaussian_smooth(planes, sigma);
  const int radius = int(std::ceil(4 * sigma));
  double norm = 0;
  for (int i = -radius; i <= radius; ++i) norm += std::exp(-i * i / (2 * sigma * sigma));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double g = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) / (norm * norm);
      ASSERT_NEAR(out[0](20 + dy, 20 + dx), g, 1e-4);
    }
  }
  EXPECT_NEAR(out[0].sum(), 1.0, 1e-9);
  EXPECT_EQ(out[1].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Felzenszwalb, UniformImageIsOneRegion) {
  RgbImage img(48, 40);
  std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t(120));
  const auto p = felzenszwalb(img, {});
  EXPECT_EQ(p.region_count, 1);
  EXPECT_EQ(p.sizes, std::vector<int>{48 * 40});
}

TEST(Felzenszwalb, TwoToneHalvesAreTwoRegions) {
  RgbImage img(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = x < 32 ? 20 : 230;
    }
  }
  for (const auto& name : {"voc", "context", "stuff", "ade"}) {
    const auto p = felzenszwalb(img, *felz_preset(name));
    ASSERT_EQ(p.region_count, 2) << name;
    EXPECT_EQ(p.labels(0, 0), 0);
    EXPECT_EQ(p.labels(63, 63), 1);
    EXPECT_TRUE((p.labels.leftCols(32).array() == 0).all());
  }
}

TEST(Felzenszwalb, NarrowBlurKeepsBoundaryStrips) {
  // sigma 0.5 leaves four 64-pixel columns of intermediate color at the
  // edge, each above min_size 50. scikit-image 0.25 gives the same sizes.
  RgbImage img(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = x < 32 ? 20 : 230;
    }
  }
  const auto p = felzenszwalb(img, *felz_preset("cityscapes"));
  EXPECT_EQ(p.sizes, (std::vector<int>{1920, 64, 64, 64, 64, 1920}));
}

TEST(Felzenszwalb, NoiseGivesValidPartition) {
  std::mt19937 rng(2);
  const FelzParams ade = *felz_preset("ade");
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = felzenszwalb(random_image(rng, 64, 64), ade);
    expect_valid(p, ade.min_size);
  }
}

TEST(Felzenszwalb, RegionCountsTrackReferenceImplementation) {
  // Counts from scikit-image 0.25 on the same images.
  struct Case {
    std::uint32_t seed;
    FelzParams params;
    int reference;
  };
  const Case cases[] = {{1, {20, 1.0, 100}, 17}, {1, {100, 1.0, 100}, 17}, {1, {20, 0.5, 50}, 24},
                        {2, {20, 1.0, 100}, 18}, {2, {100, 1.0, 100}, 17}, {2, {20, 0.5, 50}, 20},
                        {3, {20, 1.0, 100}, 18}, {3, {100, 1.0, 100}, 18}, {3, {20, 0.5, 50}, 21}};
  for (const auto& c : cases) {
    const auto p = felzenszwalb(lcg_image(c.seed, 64, 64), c.params);
    expect_valid(p, c.params.min_size);
    EXPECT_EQ(p.region_count, c.reference) << "seed " << c.seed << " k " << c.params.k;
  }
}

TEST(Felzenszwalb, Deterministic) {
  std::mt19937 rng(3);
  const auto img = random_image(rng, 50, 70);
  const auto a = felzenszwalb(img, {});
  const auto b = felzenszwalb(img, {});
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.sizes, b.sizes);
}

TEST(Felzenszwalb, IdsInRasterOrder) {
  std::mt19937 rng(4);
  const auto p = felzenszwalb(random_image(rng, 40, 40), {20, 0.5, 20});
  int next = 0;
  for (Eigen::Index i = 0; i < p.labels.size(); ++i) {
    const int id = p.labels.data()[i];
    ASSERT_LE(id, next);
    if (id == next) ++next;
  }
  EXPECT_EQ(next, p.region_count);
}

TEST(Felzenszwalb, LargerScaleGivesFewerRegions) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto img = random_image(rng, 48, 48);
    const int fine = felzenszwalb(img, {5, 0.8, 10}).region_count;
    const int coarse = felzenszwalb(img, {2000, 0.8, 10}).region_count;
    EXPECT_LE(coarse, fine);
  }
}

TEST(Felzenszwalb, ImageSmallerThanMinSizeIsOneRegion) {
  std::mt19937 rng(6);
  EXPECT_EQ(felzenszwalb(random_image(rng, 5, 5), {20, 1.0, 100}).region_count, 1);
}

TEST(RegionMasks, CoverImageExactlyOnce) {
  std::mt19937 rng(7);
  const auto p = felzenszwalb(random_image(rng, 32, 32), {20, 0.8, 30});
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cover =
      Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(32, 32);
  int region = 0;
  for (const BinaryMask& m : region_masks(p)) {
    EXPECT_EQ(m.cast<int>().sum(), p.sizes[std::size_t(region)]);
    cover += m.cast<int>();
    ++region;
  }
  EXPECT_EQ(region, p.region_count);
  EXPECT_TRUE((cover.array() == 1).all());
}

TEST(Presets, LoadByName) {
  EXPECT_EQ(*felz_preset("voc"), (FelzParams{20, 0.7, 100}));
  EXPECT_EQ(*felz_preset("context"), (FelzParams{20, 1.0, 100}));
  EXPECT_EQ(*felz_preset("stuff"), (FelzParams{100, 1.0, 100}));
  EXPECT_EQ(*felz_preset("cityscapes"), (FelzParams{20, 0.5, 50}));
  EXPECT_EQ(*felz_preset("ade"), (FelzParams{20, 1.0, 100}));
  EXPECT_FALSE(felz_preset("imagenet").has_value());
  EXPECT_EQ(felz_preset_names().size(), 5u);
}

TEST(Presets, ValidateRejectsBadValues) {
  EXPECT_THROW((FelzParams{0, 1.0, 100}.validate()), ArgumentError);
  EXPECT_THROW((FelzParams{20, -1.0, 100}.validate()), ArgumentError);
  EXPECT_THROW((FelzParams{20, 1.0, 0}.validate()), ArgumentError);
}

}  // namespace
}  // namespace protoseg
