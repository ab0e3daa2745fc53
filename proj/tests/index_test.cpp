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
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "protoseg/index.hpp"
#include "test_util.hpp"

namespace protoseg {
namespace {

using testutil::TempDir;

PrototypeBundle random_bundle(std::mt19937& rng, int n, int key_dim, int proto_dim) {
  PrototypeBundle b;
  b.keys = testutil::random_matrix(rng, n, key_dim);
  b.protos = testutil::random_matrix(rng, n, proto_dim);
  for (int i = 0; i < n; ++i) b.meta.push_back({"n" + std::to_string(i % 17), "c" + std::to_string(i)});
  return b;
}

std::vector<std::vector<double>> rows_of(const RowMatrixf& m) {
  std::vector<std::vector<double>> out(std::size_t(m.rows()), std::vector<double>(std::size_t(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[std::size_t(r)][std::size_t(c)] = m(r, c);
  }
  return out;
}

double recall(const std::vector<int>& got, const std::vector<int>& truth) {
  const std::set<int> t(truth.begin(), truth.end());
  int hit = 0;
  for (int id : got) hit += t.count(id) ? 1 : 0;
  return double(hit) / double(truth.size());
}

TEST(ExactIndex, SingleRecord) {
  std::mt19937 rng(1);
  const auto index = PrototypeIndex::build(random_bundle(rng, 1, 8, 4));
  const auto res = index.query_exact(Vectorf::Random(8), 5);
  ASSERT_EQ(res.ids, std::vector<int>{0});
  EXPECT_TRUE(res.clamped);
}

TEST(ExactIndex, StoredKeyScoresOne) {
  std::mt19937 rng(2);
  const auto bundle = random_bundle(rng, 50, 16, 4);
  const auto index = PrototypeIndex::build(bundle);
  for (int i = 0; i < 50; i += 7) {
    const auto res = index.query_exact(bundle.keys.row(i).transpose(), 1);
    EXPECT_EQ(res.ids[0], i);
    EXPECT_NEAR(res.scores[0], 1.0, 1e-12);
  }
}

TEST(ExactIndex, OrthogonalScoresZero) {
  PrototypeBundle b;
  b.keys = RowMatrixf::Identity(3, 3);
  b.protos = RowMatrixf::Ones(3, 2);
  b.meta = {{"a", "0"}, {"b", "1"}, {"c", "2"}};
  const auto index = PrototypeIndex::build(b);
  const auto res = index.query_exact(Vectorf::Unit(3, 1), 3);
  EXPECT_EQ(res.ids, (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(res.scores[1], 0.0);
  EXPECT_FALSE(res.clamped);
}

TEST(ExactIndex, DuplicateKeysTieByLowerId) {
  PrototypeBundle b;
  b.keys = RowMatrixf::Ones(4, 3);
  b.protos = RowMatrixf::Ones(4, 2);
  b.meta = {{"a", "0"}, {"a", "1"}, {"a", "2"}, {"a", "3"}};
  const auto index = PrototypeIndex::build(b);
  EXPECT_EQ(index.query_exact(Vectorf::Ones(3), 4).ids, (std::vector<int>{0, 1, 2, 3}));
}

TEST(ExactIndex, ZeroKeyNamesRecord) {
  std::mt19937 rng(3);
  auto b = random_bundle(rng, 5, 4, 2);
  b.keys.row(3).setZero();
  try {
    PrototypeIndex::build(b);
    FAIL() << "expected BuildError";
  } catch (const BuildError& e) {
    EXPECT_NE(std::string(e.what()).find("c3"), std::string::npos);
  }
}

TEST(ExactIndex, ZeroQueryRejected) {
  std::mt19937 rng(4);
  const auto index = PrototypeIndex::build(random_bundle(rng, 5, 4, 2));
  EXPECT_THROW((void)index.query_exact(Vectorf::Zero(4), 2), ArgumentError);
  EXPECT_THROW((void)index.query_exact(Vectorf::Ones(5), 2), ArgumentError);
}

TEST(ExactIndex, MatchesBruteForceTopK) {
  std::mt19937 rng(5);
  const auto bundle = random_bundle(rng, 10000, 32, 4);
  const auto index = PrototypeIndex::build(bundle);
  const auto keys = rows_of(bundle.keys);
  for (int q = 0; q < 20; ++q) {
    const RowMatrixf query = testutil::random_matrix(rng, 1, 32);
    const auto truth = oracle::topk_cosine(keys, rows_of(query)[0], kDefaultTopK);
    const auto res = index.query_exact(query.row(0).transpose(), kDefaultTopK);
    ASSERT_EQ(res.ids, truth) << "query " << q;
    EXPECT_TRUE(std::is_sorted(res.scores.rbegin(), res.scores.rend()));
  }
}

TEST(ExactIndex, QueryScaleInvariant) {
  std::mt19937 rng(6);
  const auto index = PrototypeIndex::build(random_bundle(rng, 500, 16, 4));
  for (int q = 0; q < 10; ++q) {
    const Vectorf query = testutil::random_matrix(rng, 1, 16).row(0).transpose();
    EXPECT_EQ(index.query_exact(query, 40).ids, index.query_exact((query * 13.0f).eval(), 40).ids);
  }
}

TEST(HnswIndex, FullBeamRecallsEverything) {
  std::mt19937 rng(7);
  const auto bundle = random_bundle(rng, 600, 16, 4);
  const auto index = PrototypeIndex::build(bundle, HnswParams{});
  for (int q = 0; q < 10; ++q) {
    const Vectorf query = testutil::random_matrix(rng, 1, 16).row(0).transpose();
    EXPECT_EQ(index.query_hnsw(query, 50, 600).ids, index.query_exact(query, 50).ids);
  }
}

TEST(HnswIndex, StoredKeyFindsItself) {
  std::mt19937 rng(8);
  const auto bundle = random_bundle(rng, 2000, 24, 4);
  const auto index = PrototypeIndex::build(bundle, HnswParams{});
  EXPECT_TRUE(index.graph().references_valid_ids(2000));
  std::uniform_int_distribution<int> pick(0, 1999);
  for (int trial = 0; trial < 100; ++trial) {
    const int i = pick(rng);
    EXPECT_EQ(index.query_hnsw(bundle.keys.row(i).transpose(), 1, kDefaultEfSearch).ids[0], i);
  }
}

TEST(HnswIndex, RecallGrowsWithBeam) {
  std::mt19937 rng(9);
  const auto bundle = random_bundle(rng, 3000, 24, 4);
  const auto index = PrototypeIndex::build(bundle, HnswParams{16, 100, 42});
  std::vector<Vectorf> queries;
  for (int q = 0; q < 30; ++q) queries.push_back(testutil::random_matrix(rng, 1, 24).row(0).transpose());
  double previous = 0;
  for (int ef : {10, 20, 40, 80, 160, 320}) {
    double total = 0;
    for (const auto& q : queries) total += recall(index.query_hnsw(q, 10, ef).ids, index.query_exact(q, 10).ids);
    const double r = total / double(queries.size());
    EXPECT_GE(r, previous - 1e-12) << "ef " << ef;
    previous = r;
  }
  EXPECT_GE(previous, 0.99);
}

TEST(HnswIndex, MissingGraphIsStateError) {
  std::mt19937 rng(10);
  const auto index = PrototypeIndex::build(random_bundle(rng, 10, 4, 2));
  EXPECT_FALSE(index.has_graph());
  EXPECT_THROW((void)index.query_hnsw(Vectorf::Ones(4), 2, 10), StateError);
}

TEST(HnswIndex, BuildIsDeterministic) {
  std::mt19937 rng(11);
  const auto bundle = random_bundle(rng, 400, 8, 2);
  std::ostringstream a, b;
  PrototypeIndex::build(bundle, HnswParams{}).graph().save(a);
  PrototypeIndex::build(bundle, HnswParams{}).graph().save(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Aggregation, MeanEmbedding) {
  RowMatrixd p(3, 2);
  p << 1, 2, 3, 4, 5, 9;
  EXPECT_EQ(aggregate_mean_embedding(p), (Vectord(2) << 3, 5).finished());
  EXPECT_EQ(aggregate_mean_embedding(p.topRows(1)), p.row(0).transpose());
  EXPECT_THROW(aggregate_mean_embedding(RowMatrixd(0, 2)), ArgumentError);
}

TEST(Aggregation, SimilarityModes) {
  RowMatrixd p(2, 2);
  p << 1, 0, 0, 1;
  const Vectord r = (Vectord(2) << 1, 0).finished();
  EXPECT_DOUBLE_EQ(aggregate_similarity(p, r, SimilarityMode::Max), 1.0);
  EXPECT_DOUBLE_EQ(aggregate_similarity(p, r, SimilarityMode::Mean), 0.5);
}

TEST(IndexFiles, RoundTripAnswersIdentically) {
  TempDir dir;
  std::mt19937 rng(12);
  const auto index = PrototypeIndex::build(random_bundle(rng, 800, 12, 5), HnswParams{8, 50, 7}, {100, 64});
  index.save(dir.path());
  const auto back = PrototypeIndex::load(dir.path());
  EXPECT_EQ(back.size(), 800);
  EXPECT_EQ(back.params().top_k, 100);
  EXPECT_EQ(back.params().ef_search, 64);
  EXPECT_EQ(back.prototypes(), index.prototypes());
  EXPECT_EQ(back.meta(), index.meta());
  for (int q = 0; q < 10; ++q) {
    const Vectorf query = testutil::random_matrix(rng, 1, 12).row(0).transpose();
    EXPECT_EQ(back.query_exact(query, 30).ids, index.query_exact(query, 30).ids);
    EXPECT_EQ(back.query_hnsw(query, 30, 64).ids, index.query_hnsw(query, 30, 64).ids);
  }
}

TEST(IndexFiles, WithoutGraph) {
  TempDir dir;
  std::mt19937 rng(13);
  PrototypeIndex::build(random_bundle(rng, 20, 4, 2)).save(dir.path());
  EXPECT_FALSE(PrototypeIndex::load(dir.path()).has_graph());
}

TEST(IndexFiles, TruncatedGraphFailsToLoad) {
  TempDir dir;
  std::mt19937 rng(14);
  PrototypeIndex::build(random_bundle(rng, 100, 4, 2), HnswParams{}).save(dir.path());
  const auto graph = dir / "graph.bin";
  std::filesystem::resize_file(graph, std::filesystem::file_size(graph) / 2);
  EXPECT_THROW(PrototypeIndex::load(dir.path()), LoadError);
}

TEST(IndexFiles, TruncatedKeysFailToLoad) {
  TempDir dir;
  std::mt19937 rng(15);
  PrototypeIndex::build(random_bundle(rng, 100, 4, 2)).save(dir.path());
  std::filesystem::resize_file(dir / "keys.fdt", 30);
  EXPECT_THROW(PrototypeIndex::load(dir.path()), LoadError);
}

TEST(IndexFiles, GraphVersionMismatchFailsToLoad) {
  TempDir dir;
  std::mt19937 rng(16);
  PrototypeIndex::build(random_bundle(rng, 50, 4, 2), HnswParams{}).save(dir.path());
  std::fstream f(dir / "graph.bin", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(4);
  const char bumped[4] = {2, 0, 0, 0};
  f.write(bumped, 4);
  f.close();
  EXPECT_THROW(PrototypeIndex::load(dir.path()), LoadError);
}

}  // namespace
}  // namespace protoseg
