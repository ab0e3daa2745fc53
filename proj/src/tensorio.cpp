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

#include "protoseg/tensorio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace protoseg {

static_assert(std::endian::native == std::endian::little, "FDT1 I/O assumes a little-endian host");

namespace fs = std::filesystem;

namespace {

std::size_t product(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void check_dims(const std::vector<std::uint32_t>& dims) {
  if (dims.empty() || dims.size() > 4) {
    throw ArgumentError("tensor must have 1 to 4 dims, got " + std::to_string(dims.size()));
  }
}

void check_finite(const std::vector<float>& values, const std::string& origin) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError(origin + ": non-finite value at element " + std::to_string(i));
    }
  }
}

}  // namespace

Tensor Tensor::float32(std::vector<std::uint32_t> dims, std::vector<float> values) {
  check_dims(dims);
  if (product(dims) != values.size()) throw ArgumentError("tensor dims do not match value count");
  return Tensor{std::move(dims), std::move(values)};
}

Tensor Tensor::uint8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values) {
  check_dims(dims);
  if (product(dims) != values.size()) throw ArgumentError("tensor dims do not match value count");
  return Tensor{std::move(dims), std::move(values)};
}

std::size_t Tensor::numel() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

const std::vector<float>& Tensor::f32() const {
  if (dtype() != DType::Float32) throw ArgumentError("tensor is not float32");
  return std::get<0>(data);
}

const std::vector<std::uint8_t>& Tensor::u8() const {
  if (dtype() != DType::UInt8) throw ArgumentError("tensor is not uint8");
  return std::get<1>(data);
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  check_dims(tensor.dims);
  if (product(tensor.dims) != tensor.numel()) throw ArgumentError("tensor dims do not match value count");
  if (tensor.dtype() == DType::Float32) check_finite(tensor.f32(), "write_tensor");

  const std::size_t elem = tensor.dtype() == DType::Float32 ? 4 : 1;
  std::vector<std::uint8_t> out;
  out.reserve(tensor_header_size(tensor.dims.size()) + elem * tensor.numel());
  out.insert(out.end(), kTensorMagic, kTensorMagic + kTensorMagicSize);
  out.push_back(static_cast<std::uint8_t>(tensor.dtype()));
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(d >> (8 * b)));
  }
  std::visit(
      [&](const auto& v) {
        const auto* raw = reinterpret_cast<const std::uint8_t*>(v.data());
        out.insert(out.end(), raw, raw + v.size() * sizeof(v[0]));
      },
      tensor.data);
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() < kTensorMagicSize + 2 || std::memcmp(bytes.data(), kTensorMagic, kTensorMagicSize) != 0) {
    throw FormatError(origin + ": missing FDT1 magic");
  }
  const std::uint8_t code = bytes[4];
  const std::size_t ndim = bytes[5];
  if (code > 1) throw FormatError(origin + ": unknown dtype code " + std::to_string(code));
  if (ndim < 1 || ndim > 4) throw FormatError(origin + ": ndim " + std::to_string(ndim) + " outside [1, 4]");
  const std::size_t header = tensor_header_size(ndim);
  if (bytes.size() < header) throw TruncationError(origin + ": header truncated");

  std::vector<std::uint32_t> dims(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    std::uint32_t d = 0;
    for (int b = 0; b < 4; ++b) d |= std::uint32_t(bytes[6 + 4 * i + b]) << (8 * b);
    dims[i] = d;
  }
  const std::size_t n = product(dims);
  const std::size_t elem = code == 0 ? 4 : 1;
  const std::size_t payload = bytes.size() - header;
  if (payload != n * elem) {
    throw TruncationError(origin + ": payload holds " + std::to_string(payload / elem) + " elements, dims require " +
                          std::to_string(n));
  }
  const auto* src = bytes.data() + header;
  if (code == 0) {
    std::vector<float> values(n);
    std::memcpy(values.data(), src, payload);
    check_finite(values, origin);
    return Tensor{std::move(dims), std::move(values)};
  }
  return Tensor{std::move(dims), std::vector<std::uint8_t>(src, src + payload)};
}

Tensor read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes, path.string());
}

void write_tensor(const Tensor& tensor, const fs::path& path) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensor to_tensor(const RowMatrixf& m) {
  return Tensor::float32({std::uint32_t(m.rows()), std::uint32_t(m.cols())},
                         std::vector<float>(m.data(), m.data() + m.size()));
}

Tensor to_tensor(const Vectorf& v) {
  return Tensor::float32({std::uint32_t(v.size())}, std::vector<float>(v.data(), v.data() + v.size()));
}

Tensor to_tensor(const FeatureGridf& grid) {
  return Tensor::float32({std::uint32_t(grid.rows), std::uint32_t(grid.cols), std::uint32_t(grid.dim())},
                         std::vector<float>(grid.values.data(), grid.values.data() + grid.values.size()));
}

Tensor to_tensor(const LabelMap& labels) {
  std::vector<std::uint8_t> values(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto v = labels.data()[i];
    if (v < 0 || v > 255) throw ArgumentError("label " + std::to_string(v) + " does not fit in uint8");
    values[i] = static_cast<std::uint8_t>(v);
  }
  return Tensor::uint8({std::uint32_t(labels.rows()), std::uint32_t(labels.cols())}, std::move(values));
}

Tensor to_tensor(const RgbImage& image) {
  return Tensor::uint8({std::uint32_t(image.height), std::uint32_t(image.width), 3}, image.pixels);
}

RowMatrixf tensor_to_matrix(const Tensor& t) {
  const auto& v = t.f32();
  if (t.dims.size() == 1) return Eigen::Map<const RowMatrixf>(v.data(), 1, t.dims[0]);
  if (t.dims.size() != 2) throw ArgumentError("expected a 2-D tensor");
  return Eigen::Map<const RowMatrixf>(v.data(), t.dims[0], t.dims[1]);
}

Vectorf tensor_to_vector(const Tensor& t) {
  const auto& v = t.f32();
  const bool row = t.dims.size() == 2 && t.dims[0] == 1;
  if (t.dims.size() != 1 && !row) throw ArgumentError("expected a 1-D tensor");
  return Eigen::Map<const Vectorf>(v.data(), Eigen::Index(v.size()));
}

FeatureGridf tensor_to_feature_grid(const Tensor& t) {
  if (t.dims.size() != 3) throw ArgumentError("feature grid must be a 3-D tensor");
  const auto& v = t.f32();
  if (t.dims[0] == 0 || t.dims[1] == 0 || t.dims[2] == 0) throw DataError("feature grid has an empty axis");
  FeatureGridf grid(int(t.dims[0]), int(t.dims[1]), int(t.dims[2]));
  grid.values = Eigen::Map<const RowMatrixf>(v.data(), Eigen::Index(t.dims[0]) * t.dims[1], t.dims[2]);
  return grid;
}

LabelMap tensor_to_label_map(const Tensor& t) {
  if (t.dims.size() != 2) throw ArgumentError("label map must be a 2-D tensor");
  const auto& v = t.u8();
  LabelMap labels(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < v.size(); ++i) labels.data()[i] = v[i];
  return labels;
}

RgbImage tensor_to_rgb(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[2] != 3) throw ArgumentError("RGB image must be a h x w x 3 tensor");
  RgbImage image(int(t.dims[0]), int(t.dims[1]));
  image.pixels = t.u8();
  return image;
}

std::vector<AttentionEntry> read_attention_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open attention index " + path.string());
  const fs::path base = path.parent_path();
  std::vector<AttentionEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    AttentionEntry e;
    std::string rel;
    if (!(fields >> e.timestep)) continue;  // blank line
    if (!(fields >> e.layer >> e.head >> e.token >> rel >> e.height >> e.width)) {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) + ": expected 't l h token path h w'");
    }
    if (e.timestep < 0 || e.layer < 0 || e.head < 0 || e.token < 0 || e.height < 1 || e.width < 1) {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) + ": negative index or empty map size");
    }
    e.path = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_attention_index(const std::vector<AttentionEntry>& entries, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# t l h token path h_l w_l\n";
  for (const auto& e : entries) {
    out << e.timestep << ' ' << e.layer << ' ' << e.head << ' ' << e.token << ' ' << e.path.generic_string() << ' '
        << e.height << ' ' << e.width << '\n';
  }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& rel, const std::string& record, const char* field) {
  if (rel.empty()) throw ManifestError("record '" + record + "': empty path for " + field);
  fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
  p = fs::absolute(p).lexically_normal();
  if (!fs::exists(p)) throw ManifestError("record '" + record + "': missing " + field + " file " + p.string());
  return p;
}

}  // namespace

std::vector<CaptionRecord> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  const fs::path base = fs::absolute(path).parent_path();

  std::vector<CaptionRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    CaptionRecord rec;
    try {
      const auto j = nlohmann::json::parse(line);
      rec.caption_id = j.at("caption_id").get<std::string>();
      rec.caption_text = j.value("caption", std::string{});
      const auto size = j.at("image_size");
      rec.image_height = size.at(0).get<int>();
      rec.image_width = size.at(1).get<int>();
      if (rec.image_height < 1 || rec.image_width < 1) throw ManifestError(where + ": image_size must be positive");
      rec.attention_index = resolve(base, j.at("attention").get<std::string>(), rec.caption_id, "attention");
      rec.features = resolve(base, j.at("features").get<std::string>(), rec.caption_id, "features");
      rec.caption_embedding =
          resolve(base, j.at("caption_embedding").get<std::string>(), rec.caption_id, "caption_embedding");
      for (const auto& n : j.value("nouns", nlohmann::json::array())) {
        NounSpan span;
        span.noun = n.at("noun").get<std::string>();
        span.tokens = n.at("tokens").get<std::vector<int>>();
        span.template_embeddings = resolve(base, n.at("templates").get<std::string>(), rec.caption_id, "templates");
        rec.nouns.push_back(std::move(span));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ManifestError(where + ": " + e.what());
    }

    rec.attention = read_attention_index(rec.attention_index);
    for (const auto& e : rec.attention) {
      if (!fs::exists(e.path)) {
        throw ManifestError("record '" + rec.caption_id + "': missing attention map " + e.path.string());
      }
      rec.token_count = std::max(rec.token_count, e.token + 1);
    }
    for (const auto& n : rec.nouns) {
      if (n.tokens.empty()) throw ManifestError("record '" + rec.caption_id + "': noun '" + n.noun + "' has no tokens");
      for (int t : n.tokens) {
        if (t < 0 || t >= rec.token_count) {
          throw ManifestError("record '" + rec.caption_id + "': noun '" + n.noun + "' token " + std::to_string(t) +
                              " outside attention stack of " + std::to_string(rec.token_count) + " tokens");
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace protoseg
