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
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "protoseg/types.hpp"

namespace protoseg {

/// Element type codes of the FDT1 container.
enum class DType : std::uint8_t { Float32 = 0, UInt8 = 1 };

/// In-memory image of an FDT1 file: row-major payload with 1 to 4 dims.
///
/// On disk: "FDT1", dtype byte, ndim byte, ndim little-endian uint32 dims,
/// then the little-endian payload.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::variant<std::vector<float>, std::vector<std::uint8_t>> data;

  static Tensor float32(std::vector<std::uint32_t> dims, std::vector<float> values);
  static Tensor uint8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values);

  [[nodiscard]] DType dtype() const { return data.index() == 0 ? DType::Float32 : DType::UInt8; }
  [[nodiscard]] std::size_t numel() const;
  [[nodiscard]] const std::vector<float>& f32() const;
  [[nodiscard]] const std::vector<std::uint8_t>& u8() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline constexpr std::size_t kTensorMagicSize = 4;
inline constexpr char kTensorMagic[] = "FDT1";

/// Size in bytes of the header for a tensor with `ndim` dims.
constexpr std::size_t tensor_header_size(std::size_t ndim) { return kTensorMagicSize + 2 + 4 * ndim; }

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");

/// Throws FormatError on a bad header, TruncationError when the payload does
/// not match the dims and DataError on non-finite float32 values.
Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& tensor, const std::filesystem::path& path);

// Conversions between tensors and the dense math types.
Tensor to_tensor(const RowMatrixf& m);
Tensor to_tensor(const Vectorf& v);
Tensor to_tensor(const FeatureGridf& grid);
Tensor to_tensor(const LabelMap& labels);  // uint8, values must fit
Tensor to_tensor(const RgbImage& image);

RowMatrixf tensor_to_matrix(const Tensor& t);        // 2-D float32; 1-D becomes 1 x n
Vectorf tensor_to_vector(const Tensor& t);           // 1-D or 1 x n float32
FeatureGridf tensor_to_feature_grid(const Tensor& t);  // 3-D float32 rows x cols x dim
LabelMap tensor_to_label_map(const Tensor& t);       // 2-D uint8
RgbImage tensor_to_rgb(const Tensor& t);             // 3-D uint8 h x w x 3

/// One line of an attention sidecar index: a single cross-attention map for
/// timestep t, layer l, head h and caption token `token`.
struct AttentionEntry {
  int timestep = 0;
  int layer = 0;
  int head = 0;
  int token = 0;
  std::filesystem::path path;
  int height = 0;
  int width = 0;
};

/// Reads "t l h token path h_l w_l" lines; '#' starts a comment. Relative
/// paths are resolved against the index file's directory.
std::vector<AttentionEntry> read_attention_index(const std::filesystem::path& path);
void write_attention_index(const std::vector<AttentionEntry>& entries, const std::filesystem::path& path);

struct NounSpan {
  std::string noun;
  std::vector<int> tokens;
  std::filesystem::path template_embeddings;  // T x d_t float32
};

struct CaptionRecord {
  std::string caption_id;
  std::string caption_text;
  int image_height = 0;
  int image_width = 0;
  std::filesystem::path attention_index;
  std::filesystem::path features;           // rows x cols x d_v
  std::filesystem::path caption_embedding;  // d_t
  std::vector<NounSpan> nouns;
  std::vector<AttentionEntry> attention;    // parsed sidecar
  int token_count = 0;
};

/// Loads a JSON-lines caption manifest. Every referenced file must exist and
/// every noun token must fall inside the attention stack's token range.
std::vector<CaptionRecord> load_manifest(const std::filesystem::path& path);

}  // namespace protoseg
