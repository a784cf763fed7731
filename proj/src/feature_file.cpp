// Copyright 2026 The wpdeeg Authors.
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

#include "wpdeeg/feature_file.hpp"

#include <charconv>
#include <fstream>

#include "wpdeeg/binary_io.hpp"
#include "wpdeeg/error.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

namespace {
constexpr std::string_view kMagic = "WPDF";
}

void FeatureTable::append(std::string id, std::uint8_t label, std::span<const double> row) {
  if (features.rows() > 0 && row.size() != features.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "row for " + id + " has " + std::to_string(row.size()) + " values, table has " +
                                               std::to_string(features.cols()));
  }
  features.append_row(row);
  labels.push_back(label);
  ids.push_back(std::move(id));
}

void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(kFeatureFileVersion);
  w.u32(static_cast<std::uint32_t>(table.features.rows()));
  w.u32(static_cast<std::uint32_t>(table.features.cols()));
  for (double v : table.features.values()) w.f64(v);
  for (auto l : table.labels) w.u8(l);
  for (const auto& id : table.ids) {
    w.u32(static_cast<std::uint32_t>(id.size()));
    w.bytes(id);
  }
  // Write-then-rename so an interrupted run never leaves a half-written file
  // that a resumed run would trust.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, ErrorCode::kCorruptFeatureFile);
  if (r.bytes(4) != kMagic) throw Error(ErrorCode::kCorruptFeatureFile, path.string() + " is not a WPDF file");
  const auto version = r.u16();
  if (version > kFeatureFileVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "WPDF version " + std::to_string(version) + " is newer than supported");
  }
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (r.remaining() / 8 < rows * cols) throw Error(ErrorCode::kCorruptFeatureFile, "feature payload truncated");
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = r.f64();
  FeatureTable t;
  t.features = DenseMatrix(rows, cols, std::move(values));
  t.labels.resize(rows);
  for (auto& l : t.labels) {
    l = r.u8();
    if (l != kLabelNormal && l != kLabelAbnormal && l != kLabelNone) {
      throw Error(ErrorCode::kCorruptFeatureFile, "invalid label byte " + std::to_string(l));
    }
  }
  t.ids.resize(rows);
  for (auto& id : t.ids) {
    const std::size_t len = r.u32();
    id = std::string(r.bytes(len));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::kCorruptFeatureFile, "trailing bytes after id table");
  return t;
}

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << "id,label";
  for (std::size_t c = 0; c < table.features.cols(); ++c) out << ",f" << c;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.ids[r] << ','
        << (table.labels[r] == kLabelAbnormal ? "abnormal" : table.labels[r] == kLabelNormal ? "normal" : "");
    for (double v : table.features.row(r)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace wpdeeg
