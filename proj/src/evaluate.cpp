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

#include "protoseg/evaluate.hpp"

#include <cstdio>
#include <sstream>

#include "protoseg/inference.hpp"

namespace protoseg {

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 1 || num_classes >= kUnknownLabel) {
    throw ArgumentError("confusion matrix needs between 1 and 254 classes");
  }
  counts_ = Counts::Zero(num_classes + 1, num_classes + 1);
}

ConfusionMatrix ConfusionMatrix::from_counts(const Counts& square) {
  if (square.rows() != square.cols()) throw ArgumentError("confusion counts must be square");
  if ((square.array() < 0).any()) throw ArgumentError("confusion counts must be non-negative");
  ConfusionMatrix cm(static_cast<int>(square.rows()));
  cm.counts_.topLeftCorner(square.rows(), square.cols()) = square;
  return cm;
}

void ConfusionMatrix::accumulate(const LabelMap& pred, const LabelMap& gt, int ignore_label) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw ArgumentError("accumulate: prediction is " + std::to_string(pred.rows()) + "x" +
                        std::to_string(pred.cols()) + ", ground truth " + std::to_string(gt.rows()) + "x" +
                        std::to_string(gt.cols()));
  }
  Counts local = Counts::Zero(counts_.rows(), counts_.cols());
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const int g = gt.data()[i];
    if (g == ignore_label) continue;
    if (g < 0 || g >= num_classes_) {
      throw ArgumentError("accumulate: ground-truth label " + std::to_string(g) + " outside [0, " +
                          std::to_string(num_classes_) + ")");
    }
    int p = pred.data()[i];
    if (p == kUnknownLabel) {
      p = num_classes_;
    } else if (p < 0 || p >= num_classes_) {
      throw ArgumentError("accumulate: predicted label " + std::to_string(p) + " outside [0, " +
                          std::to_string(num_classes_) + ")");
    }
    ++local(g, p);
  }
  counts_ += local;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) throw ArgumentError("confusion matrices differ in class count");
  counts_ += other.counts_;
  return *this;
}

MiouResult miou(const ConfusionMatrix& cm) {
  const int s = cm.num_classes();
  const auto& c = cm.counts();
  MiouResult result;
  result.per_class.resize(std::size_t(s));
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < s; ++k) {
    const std::int64_t tp = c(k, k);
    const std::int64_t gt_total = c.row(k).sum();
    const std::int64_t pred_total = c.col(k).sum();
    const std::int64_t uni = gt_total + pred_total - tp;
    if (uni == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(uni);
    result.per_class[std::size_t(k)] = iou;
    sum += iou;
    ++present;
  }
  if (present == 0) throw UndefinedMetricError("mIoU undefined: no class appears in prediction or ground truth");
  result.mean = sum / present;
  return result;
}

std::string format_report(const MiouResult& result, const std::vector<std::string>& names) {
  std::ostringstream out;
  char buf[32];
  for (std::size_t k = 0; k < result.per_class.size(); ++k) {
    out << (k < names.size() ? names[k] : "class_" + std::to_string(k)) << '\t';
    if (result.per_class[k]) {
      std::snprintf(buf, sizeof buf, "%.4f", *result.per_class[k]);
      out << buf;
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.4f", result.mean);
  out << "mIoU\t" << buf << '\n';
  return out.str();
}

}  // namespace protoseg
