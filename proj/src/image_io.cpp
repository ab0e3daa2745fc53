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

#include "protoseg/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

#include "protoseg/interp.hpp"
#include "protoseg/tensorio.hpp"

namespace protoseg {

namespace fs = std::filesystem;

namespace {

int read_pnm_int(std::istream& in) {
  int value = 0;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      in.unget();
      break;
    }
  }
  if (!(in >> value)) throw FormatError("malformed PNM header");
  return value;
}

struct PnmRaster {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

PnmRaster read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  PnmRaster r;
  if (magic[0] == 'P' && magic[1] == '6') {
    r.channels = 3;
  } else if (magic[0] == 'P' && magic[1] == '5') {
    r.channels = 1;
  } else {
    throw FormatError(path.string() + ": only binary P5/P6 PNM files are supported");
  }
  r.width = read_pnm_int(in);
  r.height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (maxval != 255) throw FormatError(path.string() + ": only 8-bit PNM files are supported");
  in.get();  // single whitespace before raster
  r.data.resize(std::size_t(r.height) * r.width * r.channels);
  in.read(reinterpret_cast<char*>(r.data.data()), static_cast<std::streamsize>(r.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(r.data.size())) throw TruncationError(path.string() + ": truncated");
  return r;
}

struct PngRaster {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

// expand_to_rgb=false keeps the raw 8-bit samples (palette indices for label
// images); true yields 8-bit RGB.
PngRaster read_png(const fs::path& path, bool expand_to_rgb) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  PngRaster r;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": invalid PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (depth < 8) png_set_packing(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (expand_to_rgb) {
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
      if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
      png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
  } else if ((color & PNG_COLOR_MASK_COLOR) && color != PNG_COLOR_TYPE_PALETTE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": label PNG must be grayscale or palette");
  }
  png_read_update_info(png, info);
  r.width = static_cast<int>(png_get_image_width(png, info));
  r.height = static_cast<int>(png_get_image_height(png, info));
  r.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  r.data.resize(stride * r.height);
  rows.resize(r.height);
  for (int y = 0; y < r.height; ++y) rows[y] = r.data.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return r;
}

bool has_ext(const fs::path& p, const char* ext) {
  auto e = p.extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

}  // namespace

RgbImage read_image(const fs::path& path) {
  if (has_ext(path, ".fdt")) return tensor_to_rgb(read_tensor(path));
  if (has_ext(path, ".png")) {
    auto r = read_png(path, true);
    if (r.channels != 3) throw FormatError(path.string() + ": could not expand PNG to RGB");
    RgbImage image(r.height, r.width);
    image.pixels = std::move(r.data);
    return image;
  }
  auto r = read_pnm(path);
  RgbImage image(r.height, r.width);
  if (r.channels == 3) {
    image.pixels = std::move(r.data);
  } else {
    for (std::size_t i = 0; i < r.data.size(); ++i) {
      for (int c = 0; c < 3; ++c) image.pixels[3 * i + c] = r.data[i];
    }
  }
  return image;
}

void write_ppm(const RgbImage& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

LabelMap read_label_map(const fs::path& path) {
  if (has_ext(path, ".png")) {
    auto r = read_png(path, false);
    LabelMap labels(r.height, r.width);
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels.data()[i] = r.data[i];
    return labels;
  }
  if (has_ext(path, ".pgm")) {
    auto r = read_pnm(path);
    if (r.channels != 1) throw FormatError(path.string() + ": label PGM must be single channel");
    LabelMap labels(r.height, r.width);
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels.data()[i] = r.data[i];
    return labels;
  }
  return tensor_to_label_map(read_tensor(path));
}

RgbImage resize_bilinear(const RgbImage& image, int height, int width) {
  if (height == image.height && width == image.width) return image;
  RgbImage out(height, width);
  for (int c = 0; c < 3; ++c) {
    RowMatrixf channel(image.height, image.width);
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) channel(y, x) = image.at(y, x, c);
    }
    const RowMatrixf resized = bilinear_resize(channel, height, width);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(resized(y, x)), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace protoseg
