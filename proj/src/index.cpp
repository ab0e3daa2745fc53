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

#include "protoseg/index.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace protoseg {

namespace fs = std::filesystem;

PrototypeIndex PrototypeIndex::build(PrototypeBundle bundle, std::optional<HnswParams> hnsw, IndexParams params) {
  const Eigen::Index n = bundle.keys.rows();
  if (n == 0) throw BuildError("build_index: empty bundle");
  if (bundle.protos.rows() != n || Eigen::Index(bundle.meta.size()) != n) {
    throw BuildError("build_index: keys, prototypes and meta are not index-aligned");
  }
  PrototypeIndex index;
  index.unit_keys_ = bundle.keys.cast<double>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = index.unit_keys_.row(i).norm();
    if (!(norm > 0.0)) {
      const auto& id = bundle.meta[std::size_t(i)];
      throw BuildError("build_index: zero-norm key for noun '" + id.noun + "' of caption '" + id.caption_id + "'");
    }
    index.unit_keys_.row(i) /= norm;
  }
  index.keys_ = std::move(bundle.keys);
  index.protos_ = std::move(bundle.protos);
  index.meta_ = std::move(bundle.meta);
  index.params_ = params;
  if (hnsw) index.graph_ = HnswGraph::build(index.unit_keys_, *hnsw);
  return index;
}

Vectord PrototypeIndex::unit_query(const Vectord& query) const {
  if (query.size() != key_dim()) {
    throw ArgumentError("query has " + std::to_string(query.size()) + " dims, index keys have " +
                        std::to_string(key_dim()));
  }
  const double norm = query.norm();
  if (!(norm > 0.0)) throw ArgumentError("query vector is zero");
  return query / norm;
}

RetrievalResult PrototypeIndex::query_exact(const Vectord& query, int k) const {
  if (k < 1) throw ArgumentError("query_exact: k must be positive");
  const Vectord q = unit_query(query);
  const Vectord scores = unit_keys_ * q;

  RetrievalResult result;
  const auto n = static_cast<int>(size());
  if (k > n) {
    k = n;
    result.clamped = true;
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  order.resize(std::size_t(k));
  result.scores.reserve(order.size());
  for (int id : order) result.scores.push_back(scores[id]);
  result.ids = std::move(order);
  return result;
}

RetrievalResult PrototypeIndex::query_hnsw(const Vectord& query, int k, int ef_search) const {
  if (!graph_) throw StateError("query_hnsw: index was built without an HNSW graph");
  if (k < 1) throw ArgumentError("query_hnsw: k must be positive");
  if (ef_search < 1) throw ArgumentError("query_hnsw: ef_search must be positive");
  const Vectord q = unit_query(query);
  RetrievalResult result;
  const auto n = static_cast<int>(size());
  if (k > n) {
    k = n;
    result.clamped = true;
  }
  for (const auto& hit : graph_->search(unit_keys_, q, k, ef_search)) {
    result.ids.push_back(hit.id);
    result.scores.push_back(hit.score);
  }
  return result;
}

const HnswGraph& PrototypeIndex::graph() const {
  if (!graph_) throw StateError("index has no HNSW graph");
  return *graph_;
}

void PrototypeIndex::save(const fs::path& dir) const {
  save_bundle(PrototypeBundle{keys_, protos_, meta_}, dir);
  nlohmann::json params = {
      {"format_version", kFormatVersion},
      {"top_k", params_.top_k},
      {"ef_search", params_.ef_search},
      {"size", size()},
      {"graph", has_graph()},
  };
  if (graph_) {
    params["m"] = graph_->params().m;
    params["ef_construction"] = graph_->params().ef_construction;
    params["seed"] = graph_->params().seed;
    std::ofstream out(dir / "graph.bin", std::ios::binary | std::ios::trunc);
    graph_->save(out);
    if (!out) throw IoError("cannot write " + (dir / "graph.bin").string());
  } else {
    fs::remove(dir / "graph.bin");
  }
  std::ofstream out(dir / "params", std::ios::trunc);
  out << params.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + (dir / "params").string());
}

PrototypeIndex PrototypeIndex::load(const fs::path& dir) {
  try {
    std::ifstream pin(dir / "params");
    if (!pin) throw LoadError("missing params file in " + dir.string());
    const auto params = nlohmann::json::parse(pin);
    const int version = params.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw LoadError("index format version " + std::to_string(version) + ", expected " +
                      std::to_string(kFormatVersion));
    }
    IndexParams ip;
    ip.top_k = params.value("top_k", kDefaultTopK);
    ip.ef_search = params.value("ef_search", kDefaultEfSearch);

    PrototypeBundle bundle = load_bundle(dir);
    if (params.contains("size") && params.at("size").get<Eigen::Index>() != bundle.size()) {
      throw LoadError("index size does not match params");
    }
    PrototypeIndex index = build(std::move(bundle), std::nullopt, ip);
    if (params.value("graph", false)) {
      std::ifstream gin(dir / "graph.bin", std::ios::binary);
      if (!gin) throw LoadError("params declare a graph but graph.bin is missing");
      auto graph = HnswGraph::load(gin);
      if (gin.peek() != std::char_traits<char>::eof()) throw LoadError("trailing bytes in graph.bin");
      if (!graph.references_valid_ids(static_cast<int>(index.size()))) {
        throw LoadError("graph.bin does not match the stored keys");
      }
      index.graph_ = std::move(graph);
    }
    return index;
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError("cannot load index from " + dir.string() + ": " + e.what());
  }
}

}  // namespace protoseg
