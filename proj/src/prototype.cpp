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

#include "protoseg/prototype.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "protoseg/interp.hpp"

namespace protoseg {

namespace fs = std::filesystem;

PoolingWeights resize_mask(const BinaryMask& mask, int rows, int cols) {
  if (mask.size() == 0) throw ArgumentError("resize_mask: empty mask");
  if (rows < 1 || cols < 1) throw ArgumentError("resize_mask: target dims must be positive");
  PoolingWeights weights = bilinear_resize(mask.cast<float>(), rows, cols);
  if (!(weights.array() > 0.0f).any()) throw EmptyRegionError("resize_mask: mask vanishes at feature resolution");
  return weights;
}

BinaryMask localize_noun(const CaptionRecord& record, const NounSpan& noun, const AttentionStack& stack,
                         double gamma) {
  const auto map = aggregate_attention(stack, noun.tokens, record.image_height, record.image_width);
  return binarize(map, gamma);
}

namespace {

void check_identity_field(const std::string& s, const char* what) {
  if (s.find_first_of("\t\n\r") != std::string::npos) {
    throw ArgumentError(std::string(what) + " '" + s + "' contains a tab or newline");
  }
}

std::vector<KeyedPrototype> pairs_for_record(const CaptionRecord& rec, const PairOptions& opt,
                                             std::vector<SkippedNoun>& skipped) {
  std::vector<KeyedPrototype> out;
  if (rec.nouns.empty()) return out;

  const FeatureGridf features = tensor_to_feature_grid(read_tensor(rec.features));
  const Vectorf caption = tensor_to_vector(read_tensor(rec.caption_embedding));

  std::vector<int> tokens;
  for (const auto& n : rec.nouns) tokens.insert(tokens.end(), n.tokens.begin(), n.tokens.end());
  const AttentionStack stack = load_attention_stack(rec.attention, tokens);

  for (const auto& noun : rec.nouns) {
    PairId id{noun.noun, rec.caption_id};
    Vectorf proto;
    try {
      const BinaryMask mask = localize_noun(rec, noun, stack, opt.gamma);
      if ((mask.array() == 0).all()) throw EmptyRegionError("localization mask is empty after thresholding");
      proto = pool_region(features, resize_mask(mask, features.rows, features.cols));
    } catch (const DegenerateMapError& e) {
      spdlog::warn("skipping noun '{}' of caption '{}': {}", id.noun, id.caption_id, e.what());
      skipped.push_back({id, e.what()});
      continue;
    } catch (const EmptyRegionError& e) {
      spdlog::warn("skipping noun '{}' of caption '{}': {}", id.noun, id.caption_id, e.what());
      skipped.push_back({id, e.what()});
      continue;
    }
    const RowMatrixf templates = tensor_to_matrix(read_tensor(noun.template_embeddings));
    Vectorf key = build_key(mean_template_embed(templates), caption, opt.alpha);
    out.push_back({std::move(id), std::move(key), std::move(proto)});
  }
  return out;
}

}  // namespace

std::vector<KeyedPrototype> generate_pairs(const std::vector<CaptionRecord>& records, const PairOptions& options,
                                           std::vector<SkippedNoun>* skipped) {
  if (!(options.gamma > 0.0 && options.gamma < 1.0)) throw ArgumentError("generate_pairs: gamma must lie in (0, 1)");
  if (!(options.alpha > 0.0 && options.alpha <= 1.0)) throw ArgumentError("generate_pairs: alpha must lie in (0, 1]");

  std::vector<std::vector<KeyedPrototype>> per_record(records.size());
  std::vector<std::vector<SkippedNoun>> per_record_skips(records.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        per_record[i] = pairs_for_record(records[i], options, per_record_skips[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = records.size();
      }
    }
  };
  const int n_threads = std::clamp<int>(options.threads, 1, std::max<int>(1, int(records.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<KeyedPrototype> pairs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (auto& p : per_record[i]) pairs.push_back(std::move(p));
    if (skipped) skipped->insert(skipped->end(), per_record_skips[i].begin(), per_record_skips[i].end());
  }
  return pairs;
}

PrototypeBundle make_bundle(const std::vector<KeyedPrototype>& pairs) {
  PrototypeBundle b;
  if (pairs.empty()) return b;
  const auto dt = pairs.front().key.size();
  const auto dv = pairs.front().prototype.size();
  b.keys.resize(Eigen::Index(pairs.size()), dt);
  b.protos.resize(Eigen::Index(pairs.size()), dv);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.key.size() != dt || p.prototype.size() != dv) {
      throw ArgumentError("make_bundle: pair '" + p.id.noun + "' of caption '" + p.id.caption_id +
                          "' has inconsistent embedding width");
    }
    b.keys.row(Eigen::Index(i)) = p.key.transpose();
    b.protos.row(Eigen::Index(i)) = p.prototype.transpose();
    b.meta.push_back(p.id);
  }
  return b;
}

void save_bundle(const PrototypeBundle& bundle, const fs::path& dir) {
  if (bundle.size() == 0) throw ArgumentError("save_bundle: empty bundle");
  if (bundle.protos.rows() != bundle.size() || Eigen::Index(bundle.meta.size()) != bundle.size()) {
    throw ArgumentError("save_bundle: keys, prototypes and meta are not index-aligned");
  }
  fs::create_directories(dir);
  write_tensor(to_tensor(bundle.keys), dir / "keys.fdt");
  write_tensor(to_tensor(bundle.protos), dir / "protos.fdt");
  std::ofstream meta(dir / "meta", std::ios::trunc);
  if (!meta) throw IoError("cannot write " + (dir / "meta").string());
  for (const auto& id : bundle.meta) {
    check_identity_field(id.noun, "noun");
    check_identity_field(id.caption_id, "caption id");
    meta << id.noun << '\t' << id.caption_id << '\n';
  }
}

PrototypeBundle load_bundle(const fs::path& dir) {
  PrototypeBundle b;
  b.keys = tensor_to_matrix(read_tensor(dir / "keys.fdt"));
  b.protos = tensor_to_matrix(read_tensor(dir / "protos.fdt"));
  std::ifstream meta(dir / "meta");
  if (!meta) throw IoError("cannot open " + (dir / "meta").string());
  std::string line;
  while (std::getline(meta, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError((dir / "meta").string() + ": expected 'noun<TAB>caption_id'");
    b.meta.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  if (b.protos.rows() != b.keys.rows() || Eigen::Index(b.meta.size()) != b.keys.rows()) {
    throw FormatError(dir.string() + ": keys, prototypes and meta differ in length");
  }
  return b;
}

}  // namespace protoseg
