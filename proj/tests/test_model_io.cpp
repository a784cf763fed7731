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

#include <cmath>
#include <fstream>
#include <string>

#include "oracles.hpp"
#include "wpdeeg/error.hpp"
#include "wpdeeg/gbdt.hpp"
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

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix X(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) X(r, c) = rng.normal();
  }
  return X;
}

GbdtModel small_model(TrainParams p) {
  const DenseMatrix X = random_matrix(300, 8, 11);
  std::vector<int> y(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) y[r] = X(r, 0) + 0.5 * X(r, 3) > 0.1 ? 1 : 0;
  return train(X, y, p);
}

TrainParams base_params() {
  TrainParams p;
  p.n_estimators = 40;
  p.max_depth = 4;
  p.min_samples_leaf = 5;
  return p;
}

}  // namespace

TEST_CASE("model round trip preserves predictions exactly") {
  for (int variant = 0; variant < 3; ++variant) {
    TrainParams p = base_params();
    if (variant == 1) p.goss = GossParams{0.3, 0.2};
    if (variant == 2) {
      p.growth = Growth::kLeafWise;
      p.max_leaves = 7;
    }
    const GbdtModel model = small_model(p);
    const auto dir = oracle::temp_dir("model_io_rt");
    save_model(model, dir / "m.wpdm");
    const GbdtModel back = load_model(dir / "m.wpdm");
    CHECK(back == model);

    const DenseMatrix probe = random_matrix(100, 8, 99);
    const auto a = predict_proba(model, probe);
    const auto b = predict_proba(back, probe);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    CHECK(worst == 0.0);
    CHECK(serialize_model(back) == serialize_model(model));
  }
}

TEST_CASE("empty ensemble round trips") {
  TrainParams p = base_params();
  p.n_estimators = 0;
  const GbdtModel model = small_model(p);
  CHECK(model.trees.empty());
  const GbdtModel back = deserialize_model(serialize_model(model));
  CHECK(back.trees.empty());
  CHECK(back.base_margin == model.base_margin);
}

TEST_CASE("damaged model files are rejected") {
  const std::string bytes = serialize_model(small_model(base_params()));

  SUBCASE("truncated") {
    for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{8}, bytes.size() / 2, bytes.size() - 1}) {
      check_code([&] { deserialize_model(std::string_view(bytes).substr(0, keep)); }, ErrorCode::kCorruptModelFile);
    }
  }
  SUBCASE("flipped payload byte fails the checksum") {
    std::string bad = bytes;
    bad[bad.size() / 2] ^= 0x40;
    check_code([&] { deserialize_model(bad); }, ErrorCode::kCorruptModelFile);
  }
  SUBCASE("wrong magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    check_code([&] { deserialize_model(bad); }, ErrorCode::kCorruptModelFile);
  }
  SUBCASE("newer version is distinct from corruption") {
    std::string bumped = bytes;
    bumped[4] = static_cast<char>(kModelFileVersion + 1);
    check_code([&] { deserialize_model(bumped); }, ErrorCode::kUnsupportedVersion);
  }
  SUBCASE("missing file") {
    check_code([&] { load_model(oracle::temp_dir("model_io_missing") / "nope.wpdm"); }, ErrorCode::kIoFailure);
  }
}
