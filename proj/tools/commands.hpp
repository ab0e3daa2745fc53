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
#include <optional>
#include <string>

#include "protoseg/evaluate.hpp"
#include "protoseg/inference.hpp"

namespace protoseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Invalid flag or configuration value; maps to exit code 2.
class UsageError : public Error {
  using Error::Error;
};

struct MasksOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  double gamma = kDefaultGamma;
  int threads = 1;
};

struct BuildIndexOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  double gamma = kDefaultGamma;
  double alpha = kDefaultAlpha;
  int top_k = kDefaultTopK;
  int ef_search = kDefaultEfSearch;
  std::optional<HnswParams> hnsw;
  int threads = 1;
};

struct SegmentOptions {
  std::filesystem::path index_dir;
  std::filesystem::path inputs;
  std::filesystem::path categories;
  std::filesystem::path category_embeds;
  std::filesystem::path out_dir;
  SegmentConfig config;
  RetrievalOptions retrieval;
  bool color_map = false;
  int threads = 1;
};

struct EvalOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  std::filesystem::path categories;
  int ignore_label = kDefaultIgnoreLabel;
  std::optional<std::filesystem::path> report;
};

int cmd_masks(const MasksOptions& options);
int cmd_build_index(const BuildIndexOptions& options);
int cmd_segment(const SegmentOptions& options);
/// Prints the per-class table and the mean to stdout.
int cmd_eval(const EvalOptions& options);

/// Full command line: parses, dispatches and maps errors to exit codes.
int run(int argc, char** argv);

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

}  // namespace protoseg::cli
