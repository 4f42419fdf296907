// Copyright 2026 The mmfeat Authors
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
#include <optional>
#include <string>
#include <vector>

#include "mmf/matrix.h"

namespace mmf {

// MMTF layout (all integers little-endian):
//   magic "MMTF" | version u16 = 1 | dtype u8 = 2 (f64) | ndim u8 = 2 |
//   rows u64 | cols u64 | rows*cols f64 payload, row-major
inline constexpr char kMmtfMagic[4] = {'M', 'M', 'T', 'F'};
inline constexpr std::uint16_t kMmtfVersion = 1;
inline constexpr std::uint8_t kMmtfDtypeF64 = 2;
inline constexpr std::size_t kMmtfHeaderBytes = 24;

std::vector<std::uint8_t> encode_tensor(const Matrix& m);
Matrix decode_tensor(const std::vector<std::uint8_t>& bytes,
                     const std::string& source = "<memory>");

Matrix read_tensor(const std::filesystem::path& path);
void write_tensor(const Matrix& m, const std::filesystem::path& path);

// Row vectors stored as 1xN tensors.
Vector read_vector(const std::filesystem::path& path);
void write_vector(const Vector& v, const std::filesystem::path& path);

struct PairedEmbeddingDataset {
  Matrix img;
  Matrix txt;
  std::optional<Matrix> eval_img;
  std::optional<Matrix> eval_txt;
  std::vector<std::int64_t> sample_ids;
  std::optional<std::vector<std::string>> texts;

  std::size_t num_samples() const { return img.rows(); }
  std::size_t dim() const { return img.cols(); }
};

// Throws AlignmentError / MetadataError / ShapeError on violated invariants.
void validate_dataset(const PairedEmbeddingDataset& ds);

// Reads img.mmtf and txt.mmtf plus the optional eval_img.mmtf,
// eval_txt.mmtf and samples.jsonl. samples.jsonl entries are matched to
// rows in ascending id order.
PairedEmbeddingDataset load_paired_dataset(const std::filesystem::path& dir);
void save_paired_dataset(const PairedEmbeddingDataset& ds,
                         const std::filesystem::path& dir);

struct DatasetManifest {
  std::size_t num_samples = 0;
  std::size_t dim = 0;
  std::optional<std::size_t> eval_dim;
  bool has_texts = false;
};
DatasetManifest summarize(const PairedEmbeddingDataset& ds);
std::string manifest_json(const DatasetManifest& m);

// Small helpers shared by the report writers.
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mmf
