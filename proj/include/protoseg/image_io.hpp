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

#include "protoseg/types.hpp"

namespace protoseg {

/// Reads an 8-bit RGB raster from .ppm (P6), .png or an FDT1 uint8 h x w x 3
/// tensor (.fdt). Grayscale and palette PNGs are expanded to RGB.
RgbImage read_image(const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

/// Reads a label raster from an FDT1 uint8 2-D tensor, a .pgm (P5) or a
/// .png. For PNG the stored sample (palette index or gray level) is the label.
LabelMap read_label_map(const std::filesystem::path& path);

/// Bilinear resize (half-pixel centers), rounded back to 8 bits.
RgbImage resize_bilinear(const RgbImage& image, int height, int width);

}  // namespace protoseg
