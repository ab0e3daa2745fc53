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

#include <span>
#include <vector>

#include "protoseg/tensorio.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

using BinaryMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using AttributionMap = RowMatrixf;

/// One cross-attention map of a caption token at (timestep, layer, head).
struct AttentionMap {
  int timestep = 0;
  int layer = 0;
  int head = 0;
  int token = 0;
  RowMatrixf values;  // h_l x w_l, non-negative
};

struct AttentionStack {
  std::vector<AttentionMap> entries;
};

/// Loads the maps listed in a sidecar index. When `tokens` is non-empty only
/// entries of those tokens are read.
AttentionStack load_attention_stack(const std::vector<AttentionEntry>& index, std::span<const int> tokens = {});

/// Bilinear upsampling onto the generated-image grid.
RowMatrixf bilinear_upsample(const RowMatrixf& map, int target_h, int target_w);

/// Averages the upsampled maps of every (timestep, layer, head) triple. The
/// maps of a multi-token noun are averaged per triple first, so the result is
///   (1 / #triples) * sum_triples upsample(mean_tokens(map)).
/// Every triple present in the stack must hold a map for each noun token.
AttributionMap aggregate_attention(const AttentionStack& stack, std::span<const int> noun_tokens, int out_h,
                                   int out_w);

/// Min-max rescale onto [-1, 1], logistic, then threshold: a pixel is active
/// iff sigmoid(x) > gamma. Throws DegenerateMapError on constant maps.
BinaryMask binarize(const AttributionMap& map, double gamma);

}  // namespace protoseg
