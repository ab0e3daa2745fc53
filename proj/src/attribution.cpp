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

#include "protoseg/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "protoseg/interp.hpp"

namespace protoseg {

AttentionStack load_attention_stack(const std::vector<AttentionEntry>& index, std::span<const int> tokens) {
  AttentionStack stack;
  for (const auto& e : index) {
    if (!tokens.empty() && std::find(tokens.begin(), tokens.end(), e.token) == tokens.end()) continue;
    RowMatrixf values = tensor_to_matrix(read_tensor(e.path));
    if (values.rows() != e.height || values.cols() != e.width) {
      throw DataError(e.path.string() + ": map is " + std::to_string(values.rows()) + "x" +
                      std::to_string(values.cols()) + ", index declares " + std::to_string(e.height) + "x" +
                      std::to_string(e.width));
    }
    if ((values.array() < 0.0f).any()) throw DataError(e.path.string() + ": negative attention value");
    stack.entries.push_back({e.timestep, e.layer, e.head, e.token, std::move(values)});
  }
  return stack;
}

RowMatrixf bilinear_upsample(const RowMatrixf& map, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1) throw ArgumentError("bilinear_upsample: target dims must be positive");
  return bilinear_resize(map, target_h, target_w);
}

AttributionMap aggregate_attention(const AttentionStack& stack, std::span<const int> noun_tokens, int out_h,
                                   int out_w) {
  if (stack.entries.empty()) throw ArgumentError("aggregate_attention: empty attention stack");
  if (noun_tokens.empty()) throw ArgumentError("aggregate_attention: noun has no tokens");
  if (out_h < 1 || out_w < 1) throw ArgumentError("aggregate_attention: output dims must be positive");

  using Triple = std::tuple<int, int, int>;
  // triple -> one map slot per noun token, in noun_tokens order
  std::map<Triple, std::vector<const RowMatrixf*>> triples;
  for (const auto& e : stack.entries) {
    auto pos = std::find(noun_tokens.begin(), noun_tokens.end(), e.token);
    if (pos == noun_tokens.end()) continue;
    auto& slots = triples[{e.timestep, e.layer, e.head}];
    slots.resize(noun_tokens.size(), nullptr);
    auto& slot = slots[std::size_t(pos - noun_tokens.begin())];
    if (slot != nullptr) {
      throw ArgumentError("aggregate_attention: duplicate map for token " + std::to_string(e.token) + " at t=" +
                          std::to_string(e.timestep) + " l=" + std::to_string(e.layer) + " h=" + std::to_string(e.head));
    }
    slot = &e.values;
  }
  if (triples.empty()) throw ArgumentError("aggregate_attention: stack holds no map for the noun tokens");

  RowMatrixd sum = RowMatrixd::Zero(out_h, out_w);
  for (const auto& [key, slots] : triples) {
    const auto& [t, l, h] = key;
    RowMatrixf token_mean;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i] == nullptr) {
        throw ArgumentError("aggregate_attention: token " + std::to_string(noun_tokens[i]) + " missing at t=" +
                            std::to_string(t) + " l=" + std::to_string(l) + " h=" + std::to_string(h));
      }
      if (i == 0) {
        token_mean = *slots[0];
      } else {
        if (slots[i]->rows() != token_mean.rows() || slots[i]->cols() != token_mean.cols()) {
          throw ArgumentError("aggregate_attention: token maps of one triple differ in size");
        }
        token_mean += *slots[i];
      }
    }
    if (slots.size() > 1) token_mean /= static_cast<float>(slots.size());
    sum += bilinear_upsample(token_mean, out_h, out_w).cast<double>();
  }
  return (sum / static_cast<double>(triples.size())).cast<float>();
}

BinaryMask binarize(const AttributionMap& map, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("binarize: gamma must lie in (0, 1)");
  if (map.size() == 0) throw ArgumentError("binarize: empty map");
  if (!map.allFinite()) throw DataError("binarize: non-finite attribution value");
  const double lo = map.minCoeff();
  const double hi = map.maxCoeff();
  if (!(hi > lo)) throw DegenerateMapError("binarize: constant attribution map cannot be normalized");
  const double span = hi - lo;
  BinaryMask mask(map.rows(), map.cols());
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    const double x = 2.0 * (map.data()[i] - lo) / span - 1.0;
    const double s = 1.0 / (1.0 + std::exp(-x));
    mask.data()[i] = s > gamma ? 1 : 0;
  }
  return mask;
}

}  // namespace protoseg
