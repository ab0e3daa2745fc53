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
#include <vector>

#include <Eigen/Core>

#include "protoseg/error.hpp"

namespace protoseg {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixf = RowMatrix<float>;
using RowMatrixd = RowMatrix<double>;
using Vectorf = Vector<float>;
using Vectord = Vector<double>;

/// Dense per-patch feature tensor. Patch (r, c) lives in row r * cols + c of
/// `values`, so the tensor is the row-major flattening of rows x cols x dim.
template <typename Scalar>
struct FeatureGrid {
  int rows = 0;
  int cols = 0;
  RowMatrix<Scalar> values;  // (rows * cols) x dim

  FeatureGrid() = default;
  FeatureGrid(int r, int c, int dim) : rows(r), cols(c), values(RowMatrix<Scalar>::Zero(Eigen::Index(r) * c, dim)) {}

  [[nodiscard]] int dim() const { return static_cast<int>(values.cols()); }
  [[nodiscard]] Eigen::Index index(int r, int c) const { return Eigen::Index(r) * cols + c; }
  auto at(int r, int c) { return values.row(index(r, c)); }
  auto at(int r, int c) const { return values.row(index(r, c)); }
};

using FeatureGridf = FeatureGrid<float>;

/// 8-bit interleaved RGB raster.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), pixels(std::size_t(h) * w * 3, 0) {}

  std::uint8_t& at(int y, int x, int ch) { return pixels[(std::size_t(y) * width + x) * 3 + ch]; }
  [[nodiscard]] std::uint8_t at(int y, int x, int ch) const {
    return pixels[(std::size_t(y) * width + x) * 3 + ch];
  }
};

/// Integer label raster (region ids, class ids, ...).
using LabelMap = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace protoseg
