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

#include <algorithm>
#include <cmath>
#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

/// Source sample positions for one output coordinate of a 1-D linear resize.
struct LinearTap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;  // weight of `hi`
};

/// Half-pixel-centre (align_corners = false) taps mapping `in` samples onto
/// `out` samples. Coordinates left of the first centre clamp to it.
inline std::vector<LinearTap> linear_taps(int in, int out) {
  if (in < 1 || out < 1) throw ArgumentError("linear_taps: sizes must be positive");
  std::vector<LinearTap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = std::max((i + 0.5) * scale - 0.5, 0.0);
    int lo = std::min(static_cast<int>(src), in - 1);
    int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, hi == lo ? 0.0 : src - lo};
  }
  return taps;
}

/// Bilinear resize of a 2-D grid onto out_h x out_w. Uses lerp form
/// a + t (b - a), so constant inputs map to exactly the same constant.
template <typename Derived>
RowMatrix<typename Derived::Scalar> bilinear_resize(const Eigen::MatrixBase<Derived>& src, int out_h, int out_w) {
  using Scalar = typename Derived::Scalar;
  if (out_h < 1 || out_w < 1) throw ArgumentError("bilinear_resize: target dims must be positive");
  if (src.rows() < 1 || src.cols() < 1) throw ArgumentError("bilinear_resize: source is empty");
  const auto ty = linear_taps(static_cast<int>(src.rows()), out_h);
  const auto tx = linear_taps(static_cast<int>(src.cols()), out_w);
  RowMatrix<Scalar> out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const auto& a = ty[y];
    const Scalar fy = static_cast<Scalar>(a.frac);
    for (int x = 0; x < out_w; ++x) {
      const auto& b = tx[x];
      const Scalar fx = static_cast<Scalar>(b.frac);
      const Scalar top = src(a.lo, b.lo) + fx * (src(a.lo, b.hi) - src(a.lo, b.lo));
      const Scalar bottom = src(a.hi, b.lo) + fx * (src(a.hi, b.hi) - src(a.hi, b.lo));
      out(y, x) = top + fy * (bottom - top);
    }
  }
  return out;
}

}  // namespace protoseg
