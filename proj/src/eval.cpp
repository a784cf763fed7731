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

#include "wpdeeg/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wpdeeg/error.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const double> y_prob, double threshold) {
  if (y_true.size() != y_prob.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(y_true.size()) + " labels vs " + std::to_string(y_prob.size()) +
                                                " probabilities");
  }
  if (y_true.empty()) throw Error(ErrorCode::kEmptyInput, "no rows to evaluate");
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::kInvalidParams, "threshold must lie in (0, 1)");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool predicted = y_prob[i] >= threshold;
    const bool actual = y_true[i] == 1;
    if (actual && predicted) ++cm.tp;
    if (actual && !predicted) ++cm.fn;
    if (!actual && predicted) ++cm.fp;
    if (!actual && !predicted) ++cm.tn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.positives() == 0 || cm.negatives() == 0) {
    throw Error(ErrorCode::kUndefinedMetric, "sensitivity and specificity need both classes present (P=" +
                                                 std::to_string(cm.positives()) + ", N=" + std::to_string(cm.negatives()) + ")");
  }
  MetricsReport m;
  m.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.sensitivity = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
  m.specificity = 100.0 * static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
  return m;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

VennCounts overlap(const std::set<std::string>& a, const std::set<std::string>& b, const std::set<std::string>& c) {
  std::set<std::string> all(a);
  all.insert(b.begin(), b.end());
  all.insert(c.begin(), c.end());
  VennCounts v;
  for (const auto& id : all) {
    const bool in_a = a.contains(id);
    const bool in_b = b.contains(id);
    const bool in_c = c.contains(id);
    if (in_a && in_b && in_c) {
      ++v.abc;
    } else if (in_a && in_b) {
      ++v.ab_only;
    } else if (in_a && in_c) {
      ++v.ac_only;
    } else if (in_b && in_c) {
      ++v.bc_only;
    } else if (in_a) {
      ++v.only_a;
    } else if (in_b) {
      ++v.only_b;
    } else {
      ++v.only_c;
    }
  }
  return v;
}

std::string format_report(const ConfusionMatrix& cm, const MetricsReport& m) {
  std::ostringstream out;
  out << "confusion matrix (abnormal = positive)\n"
      << "                 predicted abnormal  predicted normal\n"
      << "actual abnormal  " << cm.tp << std::string(20 - std::min<std::size_t>(19, std::to_string(cm.tp).size()), ' ')
      << cm.fn << '\n'
      << "actual normal    " << cm.fp << std::string(20 - std::min<std::size_t>(19, std::to_string(cm.fp).size()), ' ')
      << cm.tn << '\n'
      << "accuracy     " << format_percent(m.accuracy) << "%\n"
      << "sensitivity  " << format_percent(m.sensitivity) << "%\n"
      << "specificity  " << format_percent(m.specificity) << "%\n";
  return out.str();
}

std::string format_report_csv(const ConfusionMatrix& cm, const MetricsReport& m) {
  std::ostringstream out;
  out << "tp,fn,tn,fp,accuracy,sensitivity,specificity\n"
      << cm.tp << ',' << cm.fn << ',' << cm.tn << ',' << cm.fp << ',' << format_percent(m.accuracy) << ','
      << format_percent(m.sensitivity) << ',' << format_percent(m.specificity) << '\n';
  return out.str();
}

std::string format_venn(const VennCounts& v, const std::array<std::string, 3>& names) {
  const auto& [a, b, c] = names;
  std::ostringstream out;
  out << "only " << a << ": " << v.only_a << '\n'
      << "only " << b << ": " << v.only_b << '\n'
      << "only " << c << ": " << v.only_c << '\n'
      << a << " & " << b << " only: " << v.ab_only << '\n'
      << a << " & " << c << " only: " << v.ac_only << '\n'
      << b << " & " << c << " only: " << v.bc_only << '\n'
      << "all three: " << v.abc << '\n';
  return out.str();
}

std::set<std::string> read_id_list(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  LineReader lines(text);
  std::set<std::string> ids;
  std::string_view line;
  while (lines.next(line)) {
    const auto id = trim(line);
    if (!id.empty()) ids.emplace(id);
  }
  return ids;
}

void write_id_list(const std::vector<std::string>& ids, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

}  // namespace wpdeeg
