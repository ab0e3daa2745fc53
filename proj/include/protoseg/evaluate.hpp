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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

inline constexpr int kDefaultIgnoreLabel = 255;

/// Pixel counts indexed [ground truth][prediction]. Column `num_classes()`
/// collects predictions of the unknown label; ground truth never uses it.
class ConfusionMatrix {
 public:
  using Counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit ConfusionMatrix(int num_classes);

  [[nodiscard]] int num_classes() const { return num_classes_; }
  [[nodiscard]] std::int64_t count(int gt, int pred) const { return counts_(gt, pred); }
  [[nodiscard]] std::int64_t total() const { return counts_.sum(); }
  [[nodiscard]] const Counts& counts() const { return counts_; }

  /// Adds one pixel per location whose ground truth is not `ignore_label`.
  void accumulate(const LabelMap& pred, const LabelMap& gt, int ignore_label = kDefaultIgnoreLabel);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) {
    return a.num_classes_ == b.num_classes_ && a.counts_ == b.counts_;
  }

  static ConfusionMatrix from_counts(const Counts& square);

 private:
  int num_classes_;
  Counts counts_;
};

inline ConfusionMatrix& accumulate(ConfusionMatrix& cm, const LabelMap& pred, const LabelMap& gt,
                                   int ignore_label = kDefaultIgnoreLabel) {
  cm.accumulate(pred, gt, ignore_label);
  return cm;
}

struct MiouResult {
  double mean = 0.0;
  std::vector<std::optional<double>> per_class;  // nullopt: class absent from prediction and ground truth
};

/// IoU_c = tp / (gt_c + pred_c - tp); classes with zero union are left out of
/// the mean. Throws UndefinedMetricError when every class is empty.
MiouResult miou(const ConfusionMatrix& cm);

/// Per-class IoU table followed by the mean, one "name<TAB>value" per line.
std::string format_report(const MiouResult& result, const std::vector<std::string>& names);

}  // namespace protoseg
