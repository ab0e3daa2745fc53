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
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "protoseg/attribution.hpp"
#include "protoseg/tensorio.hpp"

namespace testutil {

struct NounFixture {
  std::string noun;
  std::vector<int> tokens;
  protoseg::RowMatrixf templates;  // T x d_t
};

struct CaptionFixture {
  std::string id;
  int image_height = 0;
  int image_width = 0;
  std::vector<protoseg::AttentionMap> attention;
  protoseg::FeatureGridf features;
  protoseg::Vectorf caption_embedding;
  std::vector<NounFixture> nouns;
};

// Writes the caption's files under root/<id>/ and returns its manifest line.
inline nlohmann::json write_caption(const std::filesystem::path& root, const CaptionFixture& c) {
  namespace fs = std::filesystem;
  const fs::path sub = root / c.id;
  fs::create_directories(sub);
  std::vector<protoseg::AttentionEntry> entries;
  for (std::size_t i = 0; i < c.attention.size(); ++i) {
    const auto& a = c.attention[i];
    const std::string name = "attn_" + std::to_string(i) + ".fdt";
    protoseg::write_tensor(protoseg::to_tensor(a.values), sub / name);
    entries.push_back({a.timestep, a.layer, a.head, a.token, name, int(a.values.rows()), int(a.values.cols())});
  }
  protoseg::write_attention_index(entries, sub / "attn.idx");
  protoseg::write_tensor(protoseg::to_tensor(c.features), sub / "feat.fdt");
  protoseg::write_tensor(protoseg::to_tensor(c.caption_embedding), sub / "cap.fdt");
  nlohmann::json nouns = nlohmann::json::array();
  for (std::size_t i = 0; i < c.nouns.size(); ++i) {
    const std::string name = "tmpl_" + std::to_string(i) + ".fdt";
    protoseg::write_tensor(protoseg::to_tensor(c.nouns[i].templates), sub / name);
    nouns.push_back({{"noun", c.nouns[i].noun}, {"tokens", c.nouns[i].tokens}, {"templates", c.id + "/" + name}});
  }
  return {{"caption_id", c.id},
          {"caption", "a photo"},
          {"image_size", {c.image_height, c.image_width}},
          {"attention", c.id + "/attn.idx"},
          {"features", c.id + "/feat.fdt"},
          {"caption_embedding", c.id + "/cap.fdt"},
          {"nouns", nouns}};
}

inline std::filesystem::path write_manifest(const std::filesystem::path& root,
                                            const std::vector<CaptionFixture>& captions) {
  std::filesystem::create_directories(root);
  const auto path = root / "manifest.jsonl";
  std::ofstream out(path);
  for (const auto& c : captions) out << write_caption(root, c).dump() << '\n';
  return path;
}

}  // namespace testutil
