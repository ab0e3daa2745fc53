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
#include <map>
#include <tuple>

#include <gtest/gtest.h>

#include "protoseg/attribution.hpp"
#include "test_util.hpp"

namespace protoseg {
namespace {

TEST(BilinearUpsample, ConstantStaysExact) {
  const RowMatrixf src = RowMatrixf::Constant(4, 4, 0.5f);
  const RowMatrixf out = bilinear_upsample(src, 64, 64);
  EXPECT_EQ(out.rows(), 64);
  EXPECT_TRUE((out.array() == 0.5f).all());
}

TEST(BilinearUpsample, SinglePixelBroadcasts) {
  const RowMatrixf src = RowMatrixf::Constant(1, 1, 0.37f);
  EXPECT_TRUE((bilinear_upsample(src, 5, 9).array() == 0.37f).all());
}

TEST(BilinearUpsample, ColumnRampMatchesHandWeights) {
  RowMatrixf src(2, 2);
  src << 0, 1, 0, 1;
  const RowMatrixf out = bilinear_upsample(src, 4, 4);
  // Output column x samples source x' = (x + 0.5) / 2 - 0.5, clamped to [0, 1].
  const float expected[4] = {0.0f, 0.25f, 0.75f, 1.0f};
  const auto ref = oracle::bilinear(testutil::to_grid(src), 4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      EXPECT_FLOAT_EQ(out(y, x), expected[x]);
      EXPECT_NEAR(out(y, x), ref[y][x], 1e-7);
    }
  }
}

TEST(BilinearUpsample, RandomMapsMatchOracle) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> in(1, 16), out(1, 64);
    const int h = in(rng), w = in(rng), oh = out(rng), ow = out(rng);
    const RowMatrixf src = testutil::random_matrix(rng, h, w, 0.0f, 1.0f);
    const RowMatrixf got = bilinear_upsample(src, oh, ow);
    const auto ref = oracle::bilinear(testutil::to_grid(src), oh, ow);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) ASSERT_NEAR(got(y, x), ref[y][x], 1e-6);
    }
  }
}

TEST(BilinearUpsample, ZeroTargetIsArgumentError) {
  EXPECT_THROW(bilinear_upsample(RowMatrixf::Ones(2, 2), 0, 4), ArgumentError);
}

AttentionStack random_stack(std::mt19937& rng, int steps, int layers, int heads, const std::vector<int>& tokens) {
  AttentionStack stack;
  std::uniform_int_distribution<int> side(1, 16);
  for (int l = 0; l < layers; ++l) {
    const int h = side(rng), w = side(rng);  // spatial size varies per layer
    for (int t = 0; t < steps; ++t) {
      for (int hd = 0; hd < heads; ++hd) {
        for (int tok : tokens) stack.entries.push_back({t, l, hd, tok, testutil::random_matrix(rng, h, w, 0.0f, 1.0f)});
      }
    }
  }
  return stack;
}

// Mean over (t, l, h) of the upsampled token-mean map.
oracle::Grid brute_aggregate(const AttentionStack& stack, const std::vector<int>& tokens, int oh, int ow) {
  std::map<std::tuple<int, int, int>, std::vector<const RowMatrixf*>> groups;
  for (const auto& e : stack.entries) {
    if (std::find(tokens.begin(), tokens.end(), e.token) != tokens.end()) {
      groups[{e.timestep, e.layer, e.head}].push_back(&e.values);
    }
  }
  oracle::Grid sum(oh, std::vector<double>(ow, 0.0));
  for (const auto& [key, maps] : groups) {
    oracle::Grid mean = testutil::to_grid(*maps[0]);
    for (std::size_t i = 1; i < maps.size(); ++i) {
      const auto g = testutil::to_grid(*maps[i]);
      for (std::size_t r = 0; r < g.size(); ++r) {
        for (std::size_t c = 0; c < g[r].size(); ++c) mean[r][c] += g[r][c];
      }
    }
    for (auto& row : mean) {
      for (auto& v : row) v /= static_cast<double>(maps.size());
    }
    const auto up = oracle::bilinear(mean, oh, ow);
    for (int r = 0; r < oh; ++r) {
      for (int c = 0; c < ow; ++c) sum[r][c] += up[r][c];
    }
  }
  for (auto& row : sum) {
    for (auto& v : row) v /= static_cast<double>(groups.size());
  }
  return sum;
}

TEST(AggregateAttention, SingleEntryAtTargetSize) {
  std::mt19937 rng(1);
  AttentionStack stack;
  stack.entries.push_back({0, 0, 0, 3, testutil::random_matrix(rng, 8, 8, 0.0f, 1.0f)});
  const std::vector<int> tokens{3};
  EXPECT_TRUE(aggregate_attention(stack, tokens, 8, 8).isApprox(stack.entries[0].values, 0.0f));
}

TEST(AggregateAttention, TwoConstantsAverage) {
  AttentionStack stack;
  stack.entries.push_back({0, 0, 0, 0, RowMatrixf::Constant(2, 2, 0.2f)});
  stack.entries.push_back({1, 0, 0, 0, RowMatrixf::Constant(4, 4, 0.6f)});
  const std::vector<int> tokens{0};
  const auto out = aggregate_attention(stack, tokens, 6, 6);
  EXPECT_NEAR(out.minCoeff(), 0.4f, 1e-7);
  EXPECT_NEAR(out.maxCoeff(), 0.4f, 1e-7);
}

TEST(AggregateAttention, RandomStackMatchesBruteForce) {
  std::mt19937 rng(5);
  const std::vector<int> tokens{4};
  const auto stack = random_stack(rng, 3, 2, 2, tokens);
  ASSERT_EQ(stack.entries.size(), 12u);
  const auto got = aggregate_attention(stack, tokens, 64, 48);
  const auto ref = brute_aggregate(stack, tokens, 64, 48);
  double worst = 0;
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 48; ++c) worst = std::max(worst, std::abs(got(r, c) - ref[r][c]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(AggregateAttention, MultiTokenNounAveragesTokens) {
  std::mt19937 rng(6);
  const std::vector<int> tokens{2, 5};
  const auto stack = random_stack(rng, 2, 2, 1, tokens);
  const auto got = aggregate_attention(stack, tokens, 20, 20);
  const auto ref = brute_aggregate(stack, tokens, 20, 20);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) ASSERT_NEAR(got(r, c), ref[r][c], 1e-6);
  }
}

TEST(AggregateAttention, OrderInvariant) {
  std::mt19937 rng(8);
  const std::vector<int> tokens{1, 2};
  auto stack = random_stack(rng, 3, 2, 2, tokens);
  const auto base = aggregate_attention(stack, tokens, 32, 32);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(stack.entries.begin(), stack.entries.end(), rng);
    EXPECT_LT((aggregate_attention(stack, tokens, 32, 32) - base).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(AggregateAttention, IdenticalMapsEqualOneUpsample) {
  std::mt19937 rng(9);
  const RowMatrixf m = testutil::random_matrix(rng, 7, 5, 0.0f, 1.0f);
  AttentionStack stack;
  for (int t = 0; t < 3; ++t) {
    for (int h = 0; h < 4; ++h) stack.entries.push_back({t, 0, h, 0, m});
  }
  const std::vector<int> tokens{0};
  EXPECT_LT((aggregate_attention(stack, tokens, 30, 31) - bilinear_upsample(m, 30, 31)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(AggregateAttention, Errors) {
  const std::vector<int> tokens{0, 1};
  EXPECT_THROW(aggregate_attention(AttentionStack{}, tokens, 4, 4), ArgumentError);
  AttentionStack partial;
  partial.entries.push_back({0, 0, 0, 0, RowMatrixf::Ones(2, 2)});
  EXPECT_THROW(aggregate_attention(partial, tokens, 4, 4), ArgumentError);  // token 1 missing
  const std::vector<int> other{7};
  EXPECT_THROW(aggregate_attention(partial, other, 4, 4), ArgumentError);
}

// Rescaled value of each pixel onto [-1, 1].
std::vector<double> rescaled(const RowMatrixf& m) {
  const double lo = m.minCoeff(), hi = m.maxCoeff();
  std::vector<double> x;
  for (Eigen::Index i = 0; i < m.size(); ++i) x.push_back(2.0 * (m.data()[i] - lo) / (hi - lo) - 1.0);
  return x;
}

TEST(Binarize, HalfThresholdSplitsAtMidpoint) {
  RowMatrixf ramp(1, 101);
  for (int i = 0; i < 101; ++i) ramp(0, i) = 3.0f + 0.02f * i;
  const auto mask = binarize(ramp, 0.5);
  const auto x = rescaled(ramp);
  for (int i = 0; i < 101; ++i) {
    if (std::abs(x[std::size_t(i)]) < 1e-9) continue;
    EXPECT_EQ(mask(0, i), x[std::size_t(i)] > 0 ? 1 : 0) << i;
  }
  EXPECT_EQ(mask(0, 0), 0);
  EXPECT_EQ(mask(0, 100), 1);
}

TEST(Binarize, PaperGammaInvertsLogistic) {
  const double gamma = 0.45;
  const double cut = std::log(gamma / (1.0 - gamma));
  EXPECT_NEAR(cut, -0.2007, 1e-4);
  std::mt19937 rng(12);
  const RowMatrixf map = testutil::random_matrix(rng, 64, 64, 0.0f, 5.0f);
  const auto mask = binarize(map, gamma);
  const auto x = rescaled(map);
  int active = 0;
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    if (std::abs(x[std::size_t(i)] - cut) < 1e-9) continue;
    ASSERT_EQ(mask.data()[i], x[std::size_t(i)] > cut ? 1 : 0);
    active += mask.data()[i];
  }
  EXPECT_GT(active, 0);
}

TEST(Binarize, SinglePeak) {
  RowMatrixf map = RowMatrixf::Constant(9, 9, 0.1f);
  map(4, 4) = 2.0f;
  map(4, 5) = 1.2f;  // rescaled just above 0
  map(5, 4) = 0.9f;  // rescaled below 0
  const auto mask = binarize(map, 0.5);
  const auto x = rescaled(map);
  for (Eigen::Index i = 0; i < map.size(); ++i) EXPECT_EQ(mask.data()[i], x[std::size_t(i)] > 0 ? 1 : 0);
  EXPECT_EQ(mask.cast<int>().sum(), 2);
}

TEST(Binarize, ConstantMapIsDegenerate) {
  EXPECT_THROW(binarize(RowMatrixf::Constant(4, 4, 0.3f), 0.45), DegenerateMapError);
  EXPECT_THROW(binarize(RowMatrixf::Ones(2, 2), 1.0), ArgumentError);
}

TEST(Binarize, MonotoneInGamma) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> g(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    const RowMatrixf map = testutil::random_matrix(rng, 16, 16, 0.0f, 1.0f);
    double g1 = g(rng), g2 = g(rng);
    if (g1 > g2) std::swap(g1, g2);
    const auto loose = binarize(map, g1);
    const auto tight = binarize(map, g2);
    EXPECT_TRUE(((tight.array() == 1) <= (loose.array() == 1)).all());
  }
}

}  // namespace
}  // namespace protoseg
