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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wpdeeg/matrix.hpp"

namespace wpdeeg {

inline constexpr std::uint8_t kLabelNormal = 0;
inline constexpr std::uint8_t kLabelAbnormal = 1;
inline constexpr std::uint8_t kLabelNone = 255;
inline constexpr std::uint16_t kFeatureFileVersion = 1;

/// One row per recording.
struct FeatureTable {
  DenseMatrix features;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> ids;

  std::size_t rows() const { return features.rows(); }
  void append(std::string id, std::uint8_t label, std::span<const double> row);
};

/// Layout (little-endian):
///   "WPDF" | u16 version | u32 rows | u32 cols | rows*cols f64 (row-major)
///   | rows × u8 label (0 normal, 1 abnormal, 255 unlabeled)
///   | rows × (u32 byte length, UTF-8 id)
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_table(const std::filesystem::path& path);

/// Inspection copy: header `id,label,f0,...`; labels written as words.
void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);

}  // namespace wpdeeg
