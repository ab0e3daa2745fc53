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

#include <string>

#include "protoseg/types.hpp"

namespace protoseg {

/// Cosine similarity, evaluated in double precision.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw ArgumentError("cosine: size mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const auto ad = a.template cast<double>();
  const auto bd = b.template cast<double>();
  const double na = ad.norm();
  const double nb = bd.norm();
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine: zero vector");
  return ad.dot(bd) / (na * nb);
}

/// Row-wise cosine of every row of `rows` against every row of `against`
/// (R x S result). Zero rows are rejected.
template <typename DerivedA, typename DerivedB>
RowMatrixd cosine_table(const Eigen::MatrixBase<DerivedA>& rows, const Eigen::MatrixBase<DerivedB>& against) {
  if (rows.cols() != against.cols()) throw ArgumentError("cosine_table: embedding widths differ");
  RowMatrixd a = rows.template cast<double>();
  RowMatrixd b = against.template cast<double>();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double n = a.row(i).norm();
    if (n == 0.0) throw ArgumentError("cosine_table: zero vector in row " + std::to_string(i));
    a.row(i) /= n;
  }
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    const double n = b.row(i).norm();
    if (n == 0.0) throw ArgumentError("cosine_table: zero vector in reference row " + std::to_string(i));
    b.row(i) /= n;
  }
  return (a * b.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace protoseg
