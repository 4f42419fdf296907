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

#include "mmf/tensorio.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mmf {
namespace {

namespace fs = std::filesystem;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 2,
                                                  std::uint16_t, std::uint8_t>>;
  U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(p[i]) << (8 * i);
  }
  return v;
}

void check_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("zero-dimension matrix (" + std::to_string(rows) + "x" +
                     std::to_string(cols) + ") is not allowed");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Matrix& m) {
  check_dims(m.rows(), m.cols());
  std::vector<std::uint8_t> out;
  out.reserve(kMmtfHeaderBytes + 8 * m.size());
  out.insert(out.end(), std::begin(kMmtfMagic), std::end(kMmtfMagic));
  put_le(out, kMmtfVersion);
  put_le(out, kMmtfDtypeF64);
  put_le(out, std::uint8_t{2});
  put_le(out, static_cast<std::uint64_t>(m.rows()));
  put_le(out, static_cast<std::uint64_t>(m.cols()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    double v = m.flat()[i];
    if (!std::isfinite(v)) {
      throw DataError("non-finite entry at flat index " + std::to_string(i));
    }
    put_le(out, v);
  }
  return out;
}

Matrix decode_tensor(const std::vector<std::uint8_t>& bytes,
                     const std::string& source) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMmtfMagic, 4) != 0) {
    throw FormatError(source + ": bad magic");
  }
  if (bytes.size() < kMmtfHeaderBytes) {
    throw TruncationError(source + ": header is " +
                          std::to_string(bytes.size()) + " bytes");
  }
  const std::uint8_t* p = bytes.data();
  auto version = get_le<std::uint16_t>(p + 4);
  if (version != kMmtfVersion) {
    throw FormatError(source + ": unsupported version " +
                      std::to_string(version));
  }
  if (p[6] != kMmtfDtypeF64) {
    throw FormatError(source + ": unsupported dtype " + std::to_string(p[6]));
  }
  if (p[7] != 2) {
    throw FormatError(source + ": ndim must be 2, got " + std::to_string(p[7]));
  }
  auto rows = get_le<std::uint64_t>(p + 8);
  auto cols = get_le<std::uint64_t>(p + 16);
  check_dims(rows, cols);
  const std::uint64_t payload = bytes.size() - kMmtfHeaderBytes;
  if (cols > payload / 8 || rows > payload / 8 / cols ||
      rows * cols * 8 > payload) {
    throw TruncationError(source + ": payload holds " +
                          std::to_string(payload) + " bytes, need " +
                          std::to_string(rows) + "x" + std::to_string(cols) +
                          " doubles");
  }
  if (rows * cols * 8 != payload) {
    throw FormatError(source + ": trailing bytes after payload");
  }
  std::vector<double> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double v = std::bit_cast<double>(
        get_le<std::uint64_t>(p + kMmtfHeaderBytes + 8 * i));
    if (!std::isfinite(v)) {
      throw DataError(source + ": non-finite entry at index " +
                      std::to_string(i) + " (row " +
                      std::to_string(i / cols) + ", col " +
                      std::to_string(i % cols) + ")");
    }
    data[i] = v;
  }
  return Matrix(rows, cols, std::move(data));
}

Matrix read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes, path.string());
}

void write_tensor(const Matrix& m, const fs::path& path) {
  auto bytes = encode_tensor(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Vector read_vector(const fs::path& path) {
  Matrix m = read_tensor(path);
  if (m.rows() != 1) {
    throw ShapeError(path.string() + ": expected a 1xN vector, got " +
                     std::to_string(m.rows()) + " rows");
  }
  return m.data();
}

void write_vector(const Vector& v, const fs::path& path) {
  write_tensor(Matrix::row_vector(v), path);
}

void validate_dataset(const PairedEmbeddingDataset& ds) {
  if (ds.img.rows() != ds.txt.rows()) {
    throw AlignmentError("img has " + std::to_string(ds.img.rows()) +
                         " rows, txt has " + std::to_string(ds.txt.rows()));
  }
  if (ds.img.cols() != ds.txt.cols()) {
    throw ShapeError("img dim " + std::to_string(ds.img.cols()) +
                     " != txt dim " + std::to_string(ds.txt.cols()));
  }
  if (ds.img.rows() == 0 || ds.img.cols() == 0) {
    throw ShapeError("dataset is empty");
  }
  const std::size_t m = ds.img.rows();
  if (ds.eval_img.has_value() != ds.eval_txt.has_value()) {
    throw MetadataError("eval_img and eval_txt must be given together");
  }
  if (ds.eval_img) {
    if (ds.eval_img->rows() != m || ds.eval_txt->rows() != m) {
      throw AlignmentError("eval embeddings must have " + std::to_string(m) +
                           " rows");
    }
    if (ds.eval_img->cols() != ds.eval_txt->cols()) {
      throw ShapeError("eval_img and eval_txt widths differ");
    }
  }
  if (ds.sample_ids.size() != m) {
    throw MetadataError("expected " + std::to_string(m) + " sample ids, got " +
                        std::to_string(ds.sample_ids.size()));
  }
  std::set<std::int64_t> seen;
  for (auto id : ds.sample_ids) {
    if (!seen.insert(id).second) {
      throw MetadataError("duplicate sample id " + std::to_string(id));
    }
  }
  if (ds.texts && ds.texts->size() != m) {
    throw MetadataError("expected " + std::to_string(m) + " texts");
  }
}

PairedEmbeddingDataset load_paired_dataset(const fs::path& dir) {
  PairedEmbeddingDataset ds;
  ds.img = read_tensor(dir / "img.mmtf");
  ds.txt = read_tensor(dir / "txt.mmtf");
  if (ds.img.rows() != ds.txt.rows()) {
    throw AlignmentError("img has " + std::to_string(ds.img.rows()) +
                         " rows, txt has " + std::to_string(ds.txt.rows()));
  }
  if (fs::exists(dir / "eval_img.mmtf") || fs::exists(dir / "eval_txt.mmtf")) {
    ds.eval_img = read_tensor(dir / "eval_img.mmtf");
    ds.eval_txt = read_tensor(dir / "eval_txt.mmtf");
  }
  const std::size_t m = ds.img.rows();
  const fs::path samples = dir / "samples.jsonl";
  if (fs::exists(samples)) {
    std::ifstream in(samples);
    if (!in) throw IoError("cannot open " + samples.string());
    std::vector<std::pair<std::int64_t, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw MetadataError("samples.jsonl line " + std::to_string(lineno) +
                            ": " + e.what());
      }
      if (!j.is_object() || !j.contains("id") ||
          !j["id"].is_number_integer() || !j.contains("text") ||
          !j["text"].is_string()) {
        throw MetadataError("samples.jsonl line " + std::to_string(lineno) +
                            ": need integer \"id\" and string \"text\"");
      }
      entries.emplace_back(j["id"].get<std::int64_t>(),
                           j["text"].get<std::string>());
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].first == entries[i - 1].first) {
        throw MetadataError("duplicate sample id " +
                            std::to_string(entries[i].first));
      }
    }
    if (entries.size() != m) {
      throw MetadataError("samples.jsonl has " +
                          std::to_string(entries.size()) + " entries for " +
                          std::to_string(m) + " rows");
    }
    std::vector<std::string> texts;
    for (auto& [id, text] : entries) {
      ds.sample_ids.push_back(id);
      texts.push_back(std::move(text));
    }
    ds.texts = std::move(texts);
  } else {
    ds.sample_ids.resize(m);
    std::iota(ds.sample_ids.begin(), ds.sample_ids.end(), std::int64_t{0});
  }
  validate_dataset(ds);
  return ds;
}

void save_paired_dataset(const PairedEmbeddingDataset& ds,
                         const fs::path& dir) {
  validate_dataset(ds);
  fs::create_directories(dir);
  write_tensor(ds.img, dir / "img.mmtf");
  write_tensor(ds.txt, dir / "txt.mmtf");
  if (ds.eval_img) {
    write_tensor(*ds.eval_img, dir / "eval_img.mmtf");
    write_tensor(*ds.eval_txt, dir / "eval_txt.mmtf");
  }
  if (ds.texts) {
    // The reader maps entries to rows in ascending id order.
    if (!std::is_sorted(ds.sample_ids.begin(), ds.sample_ids.end())) {
      throw MetadataError("sample ids must ascend with row order to be saved");
    }
    std::ostringstream out;
    for (std::size_t r = 0; r < ds.sample_ids.size(); ++r) {
      nlohmann::json j;
      j["id"] = ds.sample_ids[r];
      j["text"] = (*ds.texts)[r];
      out << j.dump() << '\n';
    }
    write_text_file(dir / "samples.jsonl", out.str());
  }
}

DatasetManifest summarize(const PairedEmbeddingDataset& ds) {
  DatasetManifest m;
  m.num_samples = ds.num_samples();
  m.dim = ds.dim();
  if (ds.eval_img) m.eval_dim = ds.eval_img->cols();
  m.has_texts = ds.texts.has_value();
  return m;
}

std::string manifest_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["M"] = m.num_samples;
  j["d"] = m.dim;
  j["eval_d"] = m.eval_dim ? nlohmann::json(*m.eval_dim) : nlohmann::json();
  j["has_texts"] = m.has_texts;
  return j.dump();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mmf
