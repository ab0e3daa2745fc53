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

#include "protoseg/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <queue>
#include <random>

namespace protoseg {

namespace {

constexpr char kGraphMagic[4] = {'P', 'S', 'H', 'G'};

// Per-thread visit marks; an epoch bump clears them in O(1).
struct VisitMarks {
  std::vector<std::uint32_t> marks;
  std::uint32_t epoch = 0;

  void reset(std::size_t n) {
    if (marks.size() < n) marks.resize(n, 0);
    if (++epoch == 0) {
      std::fill(marks.begin(), marks.end(), 0);
      epoch = 1;
    }
  }
  bool visit(int id) {
    if (marks[std::size_t(id)] == epoch) return false;
    marks[std::size_t(id)] = epoch;
    return true;
  }
};

thread_local VisitMarks visit_marks;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (in.gcount() != sizeof(T)) throw LoadError("HNSW graph truncated");
  return value;
}

}  // namespace

std::vector<HnswGraph::Candidate> HnswGraph::search_layer(const RowMatrixd& vectors, const Vectord& query, int entry,
                                                          int ef, int level) const {
  auto distance = [&](int id) { return 1.0 - vectors.row(id).dot(query); };
  visit_marks.reset(levels_.size());

  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::priority_queue<Candidate> best;  // worst kept result on top
  const Candidate start{distance(entry), entry};
  visit_marks.visit(entry);
  frontier.push(start);
  best.push(start);

  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    if (current > best.top() && static_cast<int>(best.size()) >= ef) break;
    frontier.pop();
    for (int nb : links_[std::size_t(current.second)][std::size_t(level)]) {
      if (!visit_marks.visit(nb)) continue;
      const Candidate c{distance(nb), nb};
      if (static_cast<int>(best.size()) < ef || c < best.top()) {
        frontier.push(c);
        best.push(c);
        if (static_cast<int>(best.size()) > ef) best.pop();
      }
    }
  }

  std::vector<Candidate> out(best.size());
  for (auto i = static_cast<std::ptrdiff_t>(out.size()) - 1; i >= 0; --i) {
    out[std::size_t(i)] = best.top();
    best.pop();
  }
  return out;
}

std::vector<int> HnswGraph::select_neighbors(const RowMatrixd& vectors, std::vector<Candidate> candidates,
                                             int limit) const {
  std::sort(candidates.begin(), candidates.end());
  std::vector<int> chosen;
  if (static_cast<int>(candidates.size()) <= limit) {
    for (const auto& c : candidates) chosen.push_back(c.second);
    return chosen;
  }
  // Keep a candidate only if it is closer to the base than to every neighbor
  // already kept.
  for (const auto& [dist, id] : candidates) {
    if (static_cast<int>(chosen.size()) >= limit) break;
    bool diverse = true;
    for (int kept : chosen) {
      if (1.0 - vectors.row(id).dot(vectors.row(kept)) < dist) {
        diverse = false;
        break;
      }
    }
    if (diverse) chosen.push_back(id);
  }
  return chosen;
}

void HnswGraph::connect(const RowMatrixd& vectors, int node) {
  const int target_level = levels_[std::size_t(node)];
  const Vectord query = vectors.row(node).transpose();
  int ep = entry_;
  for (int l = max_level_; l > target_level; --l) ep = search_layer(vectors, query, ep, 1, l).front().second;

  for (int l = std::min(target_level, max_level_); l >= 0; --l) {
    auto found = search_layer(vectors, query, ep, params_.ef_construction, l);
    ep = found.front().second;
    std::erase_if(found, [node](const Candidate& c) { return c.second == node; });
    auto& mine = links_[std::size_t(node)][std::size_t(l)];
    mine = select_neighbors(vectors, found, params_.m);
    for (int nb : mine) {
      auto& theirs = links_[std::size_t(nb)][std::size_t(l)];
      theirs.push_back(node);
      if (static_cast<int>(theirs.size()) > capacity(l)) {
        std::vector<Candidate> pool;
        pool.reserve(theirs.size());
        for (int other : theirs) pool.emplace_back(1.0 - vectors.row(nb).dot(vectors.row(other)), other);
        theirs = select_neighbors(vectors, std::move(pool), capacity(l));
      }
    }
  }
}

HnswGraph HnswGraph::build(const RowMatrixd& unit_vectors, const HnswParams& params) {
  if (params.m < 2) throw ArgumentError("HNSW: m must be at least 2");
  if (params.ef_construction < 1) throw ArgumentError("HNSW: ef_construction must be positive");
  HnswGraph g;
  g.params_ = params;
  const auto n = static_cast<int>(unit_vectors.rows());
  if (n == 0) return g;

  std::mt19937_64 rng(params.seed);
  const double level_mult = 1.0 / std::log(static_cast<double>(params.m));
  g.levels_.resize(std::size_t(n));
  g.links_.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const int level = static_cast<int>(std::floor(-std::log(u) * level_mult));
    g.levels_[std::size_t(i)] = level;
    g.links_[std::size_t(i)].resize(std::size_t(level) + 1);
  }
  for (int i = 0; i < n; ++i) {
    const int level = g.levels_[std::size_t(i)];
    if (g.entry_ < 0) {
      g.entry_ = i;
      g.max_level_ = level;
      continue;
    }
    g.connect(unit_vectors, i);
    if (level > g.max_level_) {
      g.entry_ = i;
      g.max_level_ = level;
    }
  }
  return g;
}

std::vector<HnswGraph::Hit> HnswGraph::search(const RowMatrixd& unit_vectors, const Vectord& unit_query, int k,
                                              int ef) const {
  if (k < 1) throw ArgumentError("HNSW search: k must be positive");
  if (entry_ < 0) return {};
  int ep = entry_;
  for (int l = max_level_; l > 0; --l) ep = search_layer(unit_vectors, unit_query, ep, 1, l).front().second;
  const auto found = search_layer(unit_vectors, unit_query, ep, std::max(ef, k), 0);

  std::vector<Hit> hits;
  hits.reserve(found.size());
  for (const auto& [dist, id] : found) hits.push_back({unit_vectors.row(id).dot(unit_query), id});
  std::sort(hits.begin(), hits.end(),
            [](const Hit& a, const Hit& b) { return a.score != b.score ? a.score > b.score : a.id < b.id; });
  if (static_cast<int>(hits.size()) > k) hits.resize(std::size_t(k));
  return hits;
}

bool HnswGraph::references_valid_ids(int n) const {
  if (size() != n) return false;
  if (n > 0 && (entry_ < 0 || entry_ >= n)) return false;
  for (const auto& per_node : links_) {
    for (const auto& ids : per_node) {
      for (int id : ids) {
        if (id < 0 || id >= n) return false;
      }
    }
  }
  return true;
}

void HnswGraph::save(std::ostream& out) const {
  out.write(kGraphMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(levels_.size()));
  put<std::int32_t>(out, params_.m);
  put<std::int32_t>(out, params_.ef_construction);
  put<std::uint64_t>(out, params_.seed);
  put<std::int32_t>(out, entry_);
  put<std::int32_t>(out, max_level_);
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    put<std::int32_t>(out, levels_[i]);
    for (const auto& ids : links_[i]) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(ids.size()));
      for (int id : ids) put<std::int32_t>(out, id);
    }
  }
}

HnswGraph HnswGraph::load(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kGraphMagic, 4) != 0) throw LoadError("not an HNSW graph file");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw LoadError("HNSW graph version " + std::to_string(version) + ", expected " + std::to_string(kVersion));
  }
  HnswGraph g;
  const auto n = get<std::uint32_t>(in);
  g.params_.m = get<std::int32_t>(in);
  g.params_.ef_construction = get<std::int32_t>(in);
  g.params_.seed = get<std::uint64_t>(in);
  g.entry_ = get<std::int32_t>(in);
  g.max_level_ = get<std::int32_t>(in);
  g.levels_.resize(n);
  g.links_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto level = get<std::int32_t>(in);
    if (level < 0 || level > 64) throw LoadError("HNSW graph: corrupt node level");
    g.levels_[i] = level;
    g.links_[i].resize(std::size_t(level) + 1);
    for (auto& ids : g.links_[i]) {
      const auto count = get<std::uint32_t>(in);
      if (count > n) throw LoadError("HNSW graph: corrupt link count");
      ids.resize(count);
      for (auto& id : ids) id = get<std::int32_t>(in);
    }
  }
  if (!g.references_valid_ids(static_cast<int>(n))) throw LoadError("HNSW graph references invalid ids");
  return g;
}

}  // namespace protoseg
