// Copyright 2026 The DPPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Embedding matrices, labels, their on-disk formats, and exponential
// long-tail imbalancing.
//
// Binary embedding file (little-endian):
//   "DPPLEMB1" | u32 rows | u32 cols | rows*cols float32, row-major
// Binary label file (little-endian):
//   "DPPLLBL1" | u32 rows | u32 classes | rows u32 labels
// CSV embedding file: no header, one sample per line, comma separated.

#ifndef DPPL_DATA_HPP_
#define DPPL_DATA_HPP_

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dppl/common.hpp"
#include "dppl/rng.hpp"

namespace dppl {

// n x d matrix of finite reals, row-major. d >= 1 always holds; n may be 0.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
    Require(cols >= 1, "embedding dimension must be at least 1");
  }

  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    Require(cols >= 1, "embedding dimension must be at least 1");
    Require(values_.size() == rows * cols,
            "value count " + std::to_string(values_.size()) +
                " does not match " + std::to_string(rows) + "x" +
                std::to_string(cols));
    CheckFinite();
  }

  static EmbeddingMatrix FromRows(const std::vector<std::vector<double>>& rows) {
    Require(!rows.empty(), "FromRows needs at least one row to fix the dimension");
    const std::size_t d = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * d);
    for (const auto& r : rows) {
      Require(r.size() == d, "ragged rows");
      values.insert(values.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(rows.size(), d, std::move(values));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> mutable_row(std::size_t i) {
    return {values_.data() + i * cols_, cols_};
  }
  const std::vector<double>& values() const { return values_; }

  void AppendRow(std::span<const double> r) {
    Require(r.size() == cols_, "row dimension mismatch");
    values_.insert(values_.end(), r.begin(), r.end());
    ++rows_;
  }

  EmbeddingMatrix SelectRows(std::span<const std::size_t> indices) const {
    EmbeddingMatrix out(0, cols_);
    out.values_.reserve(indices.size() * cols_);
    for (std::size_t i : indices) {
      Require(i < rows_, "row index out of range");
      out.AppendRow(row(i));
    }
    return out;
  }

  // Throws FormatError naming the first row that holds a NaN or infinity.
  void CheckFinite() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw FormatError("non-finite value at row " + std::to_string(i / cols_) +
                          ", column " + std::to_string(i % cols_));
      }
    }
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
  std::vector<double> values_;
};

// Embeddings plus a class id in [0, num_classes) per row.
struct LabeledDataset {
  EmbeddingMatrix embeddings;
  std::vector<std::uint32_t> labels;
  std::uint32_t num_classes = 0;

  void Validate() const {
    Require(labels.size() == embeddings.rows(),
            "label count " + std::to_string(labels.size()) +
                " does not match row count " +
                std::to_string(embeddings.rows()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= num_classes) {
        throw InvalidArgument("label " + std::to_string(labels[i]) + " at row " +
                              std::to_string(i) + " is outside [0, " +
                              std::to_string(num_classes) + ")");
      }
    }
  }

  std::vector<std::size_t> ClassSizes() const {
    std::vector<std::size_t> sizes(num_classes, 0);
    for (auto l : labels) ++sizes.at(l);
    return sizes;
  }
};

// Groups rows by label. Entry c holds the rows of class c in input order;
// classes without rows get a 0-row matrix.
inline std::vector<EmbeddingMatrix> SplitByClass(const LabeledDataset& ds) {
  ds.Validate();
  std::vector<std::vector<std::size_t>> members(ds.num_classes);
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    members[ds.labels[i]].push_back(i);
  }
  std::vector<EmbeddingMatrix> out;
  out.reserve(ds.num_classes);
  for (const auto& idx : members) out.push_back(ds.embeddings.SelectRows(idx));
  return out;
}

// ---------------------------------------------------------------------------
// File formats

enum class EmbeddingFormat { kBinary, kCsv };

inline constexpr std::string_view kEmbeddingMagic = "DPPLEMB1";
inline constexpr std::string_view kLabelMagic = "DPPLLBL1";

// ".csv" selects CSV, everything else the binary format.
inline EmbeddingFormat FormatFromPath(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? EmbeddingFormat::kCsv
                                    : EmbeddingFormat::kBinary;
}

namespace internal {

inline void PutU32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t GetU32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

inline std::uint32_t CheckedU32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFull) throw InvalidArgument(std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

struct EmbeddingHeader {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

inline EmbeddingHeader ParseEmbeddingHeader(const unsigned char* p, std::size_t size) {
  if (size < 16 || std::memcmp(p, kEmbeddingMagic.data(), 8) != 0) {
    throw FormatError("malformed header: expected DPPLEMB1 magic");
  }
  EmbeddingHeader h{GetU32(p + 8), GetU32(p + 12)};
  if (h.cols == 0) throw FormatError("malformed header: dimension is 0");
  return h;
}

inline double DecodeFloat(const unsigned char* p) {
  return static_cast<double>(std::bit_cast<float>(GetU32(p)));
}

}  // namespace internal

inline std::string EncodeEmbeddings(const EmbeddingMatrix& m) {
  std::string buf(kEmbeddingMagic);
  internal::PutU32(buf, internal::CheckedU32(m.rows(), "row count"));
  internal::PutU32(buf, internal::CheckedU32(m.cols(), "dimension"));
  buf.reserve(buf.size() + 4 * m.values().size());
  for (double v : m.values()) {
    internal::PutU32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return buf;
}

inline EmbeddingMatrix DecodeEmbeddings(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto h = internal::ParseEmbeddingHeader(p, bytes.size());
  const std::size_t expected = std::size_t{h.rows} * h.cols * 4;
  if (bytes.size() - 16 != expected) {
    throw FormatError("payload size mismatch: header declares " +
                      std::to_string(h.rows) + "x" + std::to_string(h.cols) +
                      " (" + std::to_string(expected) + " bytes), found " +
                      std::to_string(bytes.size() - 16));
  }
  std::vector<double> values(std::size_t{h.rows} * h.cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = internal::DecodeFloat(p + 16 + 4 * i);
    if (!std::isfinite(values[i])) {
      throw FormatError("non-finite value at row " + std::to_string(i / h.cols));
    }
  }
  return EmbeddingMatrix(h.rows, h.cols, std::move(values));
}

inline EmbeddingMatrix ParseCsvEmbeddings(std::string_view text) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);
    line_start = line_end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view tok = line.substr(pos, comma - pos);
      while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
      while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
      if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
      double v = 0.0;
      const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || end != tok.data() + tok.size() || tok.empty()) {
        throw FormatError("unparseable value '" + std::string(tok) + "' at row " +
                          std::to_string(rows));
      }
      if (!std::isfinite(v)) {
        throw FormatError("non-finite value at row " + std::to_string(rows));
      }
      values.push_back(v);
      ++count;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError("dimension mismatch at row " + std::to_string(rows) +
                        ": expected " + std::to_string(cols) + " values, found " +
                        std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("CSV file has no rows");
  return EmbeddingMatrix(rows, cols, std::move(values));
}

inline std::string FormatCsvEmbeddings(const EmbeddingMatrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), r[j]);
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

inline EmbeddingMatrix LoadEmbeddings(const std::filesystem::path& path,
                                      EmbeddingFormat format) {
  const std::string bytes = internal::ReadFile(path);
  try {
    return format == EmbeddingFormat::kBinary ? DecodeEmbeddings(bytes)
                                              : ParseCsvEmbeddings(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline EmbeddingMatrix LoadEmbeddings(const std::filesystem::path& path) {
  return LoadEmbeddings(path, FormatFromPath(path));
}

inline void WriteEmbeddings(const std::filesystem::path& path, const EmbeddingMatrix& m,
                            EmbeddingFormat format = EmbeddingFormat::kBinary) {
  internal::WriteFile(path, format == EmbeddingFormat::kBinary
                                ? EncodeEmbeddings(m)
                                : FormatCsvEmbeddings(m));
}

// Reads a binary embedding file in row blocks so that large candidate sets
// need not be resident in memory.
class EmbeddingBlockReader {
 public:
  explicit EmbeddingBlockReader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open " + path.string());
    unsigned char head[16] = {};
    in_.read(reinterpret_cast<char*>(head), 16);
    const auto h = internal::ParseEmbeddingHeader(head, static_cast<std::size_t>(in_.gcount()));
    rows_ = h.rows;
    cols_ = h.cols;
    const auto size = std::filesystem::file_size(path);
    if (size - 16 != std::uintmax_t{rows_} * cols_ * 4) {
      throw FormatError(path.string() + ": payload size mismatch");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t position() const { return next_; }
  bool done() const { return next_ >= rows_; }

  // Returns up to max_rows further rows; empty once the file is exhausted.
  EmbeddingMatrix ReadBlock(std::size_t max_rows) {
    const std::size_t n = std::min(max_rows, rows_ - next_);
    std::vector<unsigned char> raw(n * cols_ * 4);
    in_.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in_.gcount()) != raw.size()) {
      throw FormatError(path_.string() + ": truncated payload");
    }
    std::vector<double> values(n * cols_);
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = internal::DecodeFloat(raw.data() + 4 * i);
      if (!std::isfinite(values[i])) {
        throw FormatError(path_.string() + ": non-finite value at row " +
                          std::to_string(next_ + i / cols_));
      }
    }
    next_ += n;
    return EmbeddingMatrix(n, cols_, std::move(values));
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t next_ = 0;
};

inline std::string EncodeLabels(std::span<const std::uint32_t> labels,
                                std::uint32_t num_classes) {
  std::string buf(kLabelMagic);
  internal::PutU32(buf, internal::CheckedU32(labels.size(), "label count"));
  internal::PutU32(buf, num_classes);
  for (auto l : labels) internal::PutU32(buf, l);
  return buf;
}

struct LabelFile {
  std::vector<std::uint32_t> labels;
  std::uint32_t num_classes = 0;
};

inline LabelFile DecodeLabels(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 16 || std::memcmp(p, kLabelMagic.data(), 8) != 0) {
    throw FormatError("malformed header: expected DPPLLBL1 magic");
  }
  LabelFile out;
  const std::uint32_t n = internal::GetU32(p + 8);
  out.num_classes = internal::GetU32(p + 12);
  if (bytes.size() - 16 != std::size_t{n} * 4) {
    throw FormatError("payload size mismatch: header declares " + std::to_string(n) +
                      " labels");
  }
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[i] = internal::GetU32(p + 16 + 4 * i);
    if (out.labels[i] >= out.num_classes) {
      throw FormatError("label out of range at row " + std::to_string(i));
    }
  }
  return out;
}

inline void WriteLabels(const std::filesystem::path& path,
                        std::span<const std::uint32_t> labels, std::uint32_t num_classes) {
  internal::WriteFile(path, EncodeLabels(labels, num_classes));
}

inline LabelFile LoadLabels(const std::filesystem::path& path) {
  try {
    return DecodeLabels(internal::ReadFile(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline LabeledDataset LoadDataset(const std::filesystem::path& embeddings,
                                  const std::filesystem::path& labels) {
  LabeledDataset ds;
  ds.embeddings = LoadEmbeddings(embeddings);
  auto lf = LoadLabels(labels);
  ds.labels = std::move(lf.labels);
  ds.num_classes = lf.num_classes;
  ds.Validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Exponential long-tail imbalance

struct ImbalanceSpec {
  double ratio = 1.0;              // largest / smallest class size
  std::uint32_t num_classes = 1;
  std::uint64_t max_class_size = 1;  // size of class 0
  std::uint64_t seed = 0;

  void Validate() const {
    Require(std::isfinite(ratio) && ratio >= 1.0, "imbalance ratio must be >= 1");
    Require(num_classes >= 1, "class count must be >= 1");
    Require(max_class_size >= 1, "largest class size must be >= 1");
  }
};

// Decay rate of the class sizes: ln(IR) / (C - 1), 0 for a single class.
inline double ImbalanceDecay(const ImbalanceSpec& spec) {
  spec.Validate();
  if (spec.num_classes == 1) return 0.0;
  return std::log(spec.ratio) / static_cast<double>(spec.num_classes - 1);
}

// count(c) = round(N_max * exp(-lambda * c)), rounding half away from zero.
inline std::vector<std::uint64_t> ImbalanceClassSizes(const ImbalanceSpec& spec) {
  const double lambda = ImbalanceDecay(spec);
  std::vector<std::uint64_t> sizes(spec.num_classes);
  for (std::uint32_t c = 0; c < spec.num_classes; ++c) {
    const double target = static_cast<double>(spec.max_class_size) *
                          std::exp(-lambda * static_cast<double>(c));
    sizes[c] = static_cast<std::uint64_t>(std::round(target));
  }
  sizes[0] = spec.max_class_size;
  return sizes;
}

// Median of a list of counts; even-length lists average the middle pair.
inline double MedianCount(std::vector<std::uint64_t> counts) {
  Require(!counts.empty(), "median of an empty list");
  std::sort(counts.begin(), counts.end());
  const std::size_t m = counts.size() / 2;
  if (counts.size() % 2) return static_cast<double>(counts[m]);
  return 0.5 * (static_cast<double>(counts[m - 1]) + static_cast<double>(counts[m]));
}

// Median as printed in summary tables: MedianCount rounded half away from 0.
inline std::uint64_t ReportedMedianCount(std::vector<std::uint64_t> counts) {
  return static_cast<std::uint64_t>(std::round(MedianCount(std::move(counts))));
}

// Subsamples class c down to ImbalanceClassSizes(spec)[c] rows, uniformly
// without replacement. Each class draws from its own stream keyed by
// (spec.seed, c). Kept rows appear in their original order.
inline LabeledDataset ApplyImbalance(const LabeledDataset& ds, const ImbalanceSpec& spec) {
  ds.Validate();
  Require(spec.num_classes == ds.num_classes,
          "imbalance class count does not match the dataset");
  const auto targets = ImbalanceClassSizes(spec);

  std::vector<std::vector<std::size_t>> members(ds.num_classes);
  for (std::size_t i = 0; i < ds.labels.size(); ++i) members[ds.labels[i]].push_back(i);

  std::vector<std::size_t> keep;
  for (std::uint32_t c = 0; c < ds.num_classes; ++c) {
    auto& idx = members[c];
    if (idx.size() < targets[c]) {
      throw InvalidArgument("class " + std::to_string(c) + " has " +
                            std::to_string(idx.size()) + " rows, needs " +
                            std::to_string(targets[c]));
    }
    Rng rng(spec.seed, DeriveStream(0x696D62616CULL, c));
    for (std::size_t k = 0; k < targets[c]; ++k) {
      const std::size_t j = k + rng.UniformInt(idx.size() - k);
      std::swap(idx[k], idx[j]);
    }
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(targets[c]));
  }
  std::sort(keep.begin(), keep.end());

  LabeledDataset out;
  out.num_classes = ds.num_classes;
  out.embeddings = ds.embeddings.SelectRows(keep);
  out.labels.reserve(keep.size());
  for (auto i : keep) out.labels.push_back(ds.labels[i]);
  return out;
}

}  // namespace dppl

#endif  // DPPL_DATA_HPP_
