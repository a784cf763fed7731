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


#include <doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wpdeeg/error.hpp"
#include "wpdeeg/eval.hpp"
#include "wpdeeg/random.hpp"

using namespace wpdeeg;

namespace {

template <class F>
void check_code(F&& f, ErrorCode want) {
  try {
    f();
    FAIL("expected " << error_code_name(want));
  } catch (const Error& e) {
    CHECK(e.code() == want);
  }
}

ConfusionMatrix counts(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn, std::uint64_t fp) {
  ConfusionMatrix cm;
  cm.tp = tp;
  cm.fn = fn;
  cm.tn = tn;
  cm.fp = fp;
  return cm;
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<int> y{1, 1, 0, 0, 1, 0};
  SUBCASE("perfect") {
    const std::vector<double> p{0.9, 0.8, 0.1, 0.2, 0.7, 0.3};
    CHECK(confusion(y, p) == counts(3, 0, 3, 0));
  }
  SUBCASE("threshold is inclusive on the abnormal side") {
    const std::vector<double> p{0.5, 0.49, 0.5, 0.0, 1.0, 0.49};
    CHECK(confusion(y, p) == counts(2, 1, 2, 1));
  }
  SUBCASE("all predicted abnormal") {
    std::vector<int> labels(276, 0);
    std::fill(labels.begin(), labels.begin() + 126, 1);
    const std::vector<double> p(276, 0.99);
    CHECK(confusion(labels, p) == counts(126, 0, 0, 150));
  }
  SUBCASE("errors") {
    const std::vector<double> short_p{0.1};
    check_code([&] { confusion(y, short_p); }, ErrorCode::kLengthMismatch);
    check_code([] { confusion({}, {}); }, ErrorCode::kEmptyInput);
    const std::vector<double> p(6, 0.5);
    check_code([&] { confusion(y, p, 0.0); }, ErrorCode::kInvalidParams);
    check_code([&] { confusion(y, p, 1.0); }, ErrorCode::kInvalidParams);
  }
}

TEST_CASE("metric rows") {
  SUBCASE("105/21/137/13") {
    const auto m = metrics(counts(105, 21, 137, 13));
    CHECK(format_percent(m.accuracy) == "87.68");
    CHECK(format_percent(m.sensitivity) == "83.33");
    CHECK(format_percent(m.specificity) == "91.33");
  }
  SUBCASE("102/24/137/13") {
    const auto m = metrics(counts(102, 24, 137, 13));
    CHECK(format_percent(m.accuracy) == "86.59");
    CHECK(format_percent(m.sensitivity) == "80.95");
    CHECK(format_percent(m.specificity) == "91.33");
  }
  SUBCASE("all correct") {
    const auto m = metrics(counts(10, 0, 7, 0));
    CHECK(m.accuracy == 100.0);
    CHECK(m.sensitivity == 100.0);
    CHECK(m.specificity == 100.0);
  }
  SUBCASE("single class is undefined") {
    check_code([] { metrics(counts(5, 1, 0, 0)); }, ErrorCode::kUndefinedMetric);
    check_code([] { metrics(counts(0, 0, 4, 2)); }, ErrorCode::kUndefinedMetric);
  }
}

TEST_CASE("accuracy is the prevalence-weighted mean of sensitivity and specificity") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(300);
    std::vector<int> y(n);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.below(2));
      p[i] = rng.uniform(0.0, 1.0);
    }
    y[0] = 0;
    y[1] = 1;
    const auto cm = confusion(y, p, rng.uniform(0.05, 0.95));
    CHECK(cm.total() == n);
    const auto m = metrics(cm);
    const double P = static_cast<double>(cm.positives());
    const double N = static_cast<double>(cm.negatives());
    CHECK(m.accuracy == doctest::Approx((P * m.sensitivity + N * m.specificity) / (P + N)).epsilon(1e-12));
  }
}

TEST_CASE("report text and csv") {
  const auto cm = counts(105, 21, 137, 13);
  const auto m = metrics(cm);
  const auto text = format_report(cm, m);
  CHECK(text.find("accuracy     87.68%") != std::string::npos);
  CHECK(text.find("sensitivity  83.33%") != std::string::npos);
  CHECK(text.find("specificity  91.33%") != std::string::npos);
  CHECK(format_report_csv(cm, m) == "tp,fn,tn,fp,accuracy,sensitivity,specificity\n105,21,137,13,87.68,83.33,91.33\n");
}

TEST_CASE("venn overlap") {
  SUBCASE("identical sets") {
    std::set<std::string> s;
    for (int i = 0; i < 29; ++i) s.insert("rec" + std::to_string(i));
    const auto v = overlap(s, s, s);
    CHECK(v.abc == 29);
    CHECK(v.total() == 29);
  }
  SUBCASE("disjoint") {
    const auto v = overlap({"a"}, {"b", "c"}, {"d", "e", "f"});
    CHECK(v.only_a == 1);
    CHECK(v.only_b == 2);
    CHECK(v.only_c == 3);
    CHECK(v.abc + v.ab_only + v.ac_only + v.bc_only == 0);
  }
  SUBCASE("shared middle") {
    const auto v = overlap({"x", "y"}, {"y", "z"}, {"y"});
    VennCounts want;
    want.only_a = 1;
    want.only_b = 1;
    want.abc = 1;
    CHECK(v == want);
  }
  SUBCASE("regions partition the union") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      std::set<std::string> sets[3];
      std::set<std::string> all;
      for (auto& s : sets) {
        const std::size_t k = rng.below(40);
        for (std::size_t i = 0; i < k; ++i) s.insert(std::to_string(rng.below(60)));
        all.insert(s.begin(), s.end());
      }
      const auto v = overlap(sets[0], sets[1], sets[2]);
      CHECK(v.total() == all.size());
      CHECK(v.only_a + v.ab_only + v.ac_only + v.abc == sets[0].size());
      CHECK(v.only_b + v.ab_only + v.bc_only + v.abc == sets[1].size());
      CHECK(v.only_c + v.ac_only + v.bc_only + v.abc == sets[2].size());
    }
  }
  SUBCASE("formatting") {
    const auto v = overlap({"x", "y"}, {"y", "z"}, {"y"});
    CHECK(format_venn(v, {"A", "B", "C"}) ==
          "only A: 1\nonly B: 1\nonly C: 0\nA & B only: 0\nA & C only: 0\nB & C only: 0\nall three: 1\n");
  }
}

TEST_CASE("id list files") {
  const auto dir = oracle::temp_dir("eval_ids");
  write_id_list({"b", "a", "c"}, dir / "ids.txt");
  CHECK(read_id_list(dir / "ids.txt") == std::set<std::string>{"a", "b", "c"});
  {
    std::ofstream out(dir / "messy.txt");
    out << "  a \r\n\n b\n";
  }
  CHECK(read_id_list(dir / "messy.txt") == std::set<std::string>{"a", "b"});
  write_id_list({}, dir / "empty.txt");
  CHECK(read_id_list(dir / "empty.txt").empty());
  check_code([&] { read_id_list(dir / "absent.txt"); }, ErrorCode::kIoFailure);
}
