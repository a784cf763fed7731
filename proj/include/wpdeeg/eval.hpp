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

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace wpdeeg {

/// Abnormal is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return tn + fp; }
  std::uint64_t total() const { return tp + tn + fp + fn; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Percentages in [0, 100].
struct MetricsReport {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// prob >= threshold predicts abnormal. Labels are 0 (normal) / 1 (abnormal).
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const double> y_prob, double threshold = 0.5);

MetricsReport metrics(const ConfusionMatrix& cm);

/// "87.68"
std::string format_percent(double value);

/// Counts of the seven non-empty regions of a three-set Venn diagram.
struct VennCounts {
  std::uint64_t only_a = 0;
  std::uint64_t only_b = 0;
  std::uint64_t only_c = 0;
  std::uint64_t ab_only = 0;
  std::uint64_t ac_only = 0;
  std::uint64_t bc_only = 0;
  std::uint64_t abc = 0;

  std::uint64_t total() const { return only_a + only_b + only_c + ab_only + ac_only + bc_only + abc; }
  friend bool operator==(const VennCounts&, const VennCounts&) = default;
};

VennCounts overlap(const std::set<std::string>& a, const std::set<std::string>& b, const std::set<std::string>& c);

/// Text block with the confusion matrix and the three percentages.
std::string format_report(const ConfusionMatrix& cm, const MetricsReport& m);
/// Header line plus one value line.
std::string format_report_csv(const ConfusionMatrix& cm, const MetricsReport& m);
std::string format_venn(const VennCounts& v, const std::array<std::string, 3>& names);

/// One id per line; blank lines ignored.
std::set<std::string> read_id_list(const std::filesystem::path& path);
void write_id_list(const std::vector<std::string>& ids, const std::filesystem::path& path);

}  // namespace wpdeeg
