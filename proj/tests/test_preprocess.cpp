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
#include <numbers>

#include "oracles.hpp"
#include "wpdeeg/error.hpp"
#include "wpdeeg/preprocess.hpp"

using namespace wpdeeg;

namespace {

const std::filesystem::path kFixtures = WPDEEG_FIXTURE_DIR;

Recording standard_recording(double rate, std::size_t n, std::uint64_t seed) {
  Recording r;
  r.id = "r";
  r.sample_rate = rate;
  for (std::size_t c = 0; c < kStandardChannels.size(); ++c) {
    r.channels.push_back({std::string(kStandardChannels[c]), oracle::random_signal(n, seed + c), rate});
  }
  return r;
}

std::vector<double> sine(double freq, double rate, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  return x;
}

double max_abs_error(const std::vector<double>& got, const std::vector<double>& want, std::size_t skip = 0) {
  double worst = 0;
  for (std::size_t i = skip; i + skip < got.size(); ++i) worst = std::max(worst, std::fabs(got[i] - want[i]));
  return worst;
}

}  // namespace

TEST_CASE("channel label normalization") {
  CHECK(normalize_channel_label("EEG FP1-REF") == "FP1");
  CHECK(normalize_channel_label("eeg cz-le") == "CZ");
  CHECK(normalize_channel_label(" O2 ") == "O2");
  CHECK(normalize_channel_label("EEG T3-REF") == "T3");
}

TEST_CASE("select_standard_channels: TUH-style recording") {
  const Recording rec = read_edf(kFixtures / "tuh_style.edf");
  REQUIRE(rec.channels.size() == 22);
  const Recording sel = select_standard_channels(rec);
  REQUIRE(sel.channels.size() == 21);
  for (std::size_t c = 0; c < 21; ++c) {
    CHECK(sel.channels[c].label == kStandardChannels[c]);
    // fixture lists channels in reverse canonical order
    CHECK(sel.channels[c].samples == rec.channels[20 - c].samples);
  }
  const Recording again = select_standard_channels(sel);
  for (std::size_t c = 0; c < 21; ++c) {
    CHECK(again.channels[c].label == sel.channels[c].label);
    CHECK(again.channels[c].samples == sel.channels[c].samples);
  }
}

TEST_CASE("select_standard_channels: identity and missing channel") {
  const Recording rec = standard_recording(250, 100, 1);
  const Recording sel = select_standard_channels(rec);
  for (std::size_t c = 0; c < 21; ++c) CHECK(sel.channels[c].samples == rec.channels[c].samples);

  Recording missing = rec;
  missing.channels.erase(missing.channels.begin() + 18);  // O2
  try {
    select_standard_channels(missing);
    FAIL("expected MissingChannel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingChannel);
    CHECK(std::string(e.what()).find("O2") != std::string::npos);
  }
}

TEST_CASE("resample: lengths, passthrough and upsampling") {
  CHECK(resample_channel(oracle::random_signal(4000, 3), 500, 250).size() == 2000);
  CHECK(resample_channel(oracle::random_signal(4001, 3), 500, 250).size() == 2000);
  CHECK(resample_channel(oracle::random_signal(3000, 3), 400, 250).size() == 1875);
  CHECK(resample_channel(oracle::random_signal(1000, 3), 256, 250).size() == 976);

  const Recording rec = standard_recording(250, 3000, 5);
  const Recording same = resample(rec);
  for (std::size_t c = 0; c < 21; ++c) CHECK(same.channels[c].samples == rec.channels[c].samples);

  CHECK_THROWS_AS(resample(standard_recording(200, 100, 1)), Error);
  try {
    resample_channel(std::vector<double>(10, 0.0), 200, 250);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUpsamplingRequested);
  }
}

TEST_CASE("resample: 10 Hz sine at 500 Hz matches the analytic 250 Hz sine") {
  const double amp = 50.0;
  const auto y = resample_channel(sine(10, 500, 4000, amp), 500, 250);
  const auto want = sine(10, 250, 2000, amp);
  REQUIRE(y.size() == want.size());
  CHECK(max_abs_error(y, want) < 1e-3 * amp);
}

TEST_CASE("resample: non-integer ratio keeps in-band tones") {
  const auto y = resample_channel(sine(7, 400, 8000, 1.0), 400, 250);
  const auto want = sine(7, 250, 5000, 1.0);
  REQUIRE(y.size() == want.size());
  CHECK(max_abs_error(y, want) < 1e-3);
}

TEST_CASE("resample: out-of-band tone is attenuated") {
  // 200 Hz at 500 Hz would alias to 50 Hz under plain decimation.
  const auto y = resample_channel(sine(200, 500, 8000, 1.0), 500, 250);
  CHECK(max_abs_error(y, std::vector<double>(y.size(), 0.0), 100) < 1e-3);
}

TEST_CASE("resample: mixed-rate channels resolved independently") {
  Recording rec;
  rec.id = "mixed";
  rec.sample_rate = 0;
  rec.channels.push_back({"A", sine(5, 500, 5000), 500});
  rec.channels.push_back({"B", sine(5, 250, 2500), 250});
  const Recording out = resample(rec);
  CHECK(out.sample_rate == 250.0);
  REQUIRE(out.channels.size() == 2);
  CHECK(out.channels[0].samples.size() == 2500);
  CHECK(out.channels[1].samples == rec.channels[1].samples);
  CHECK(max_abs_error(out.channels[0].samples, rec.channels[1].samples) < 1e-3);
}

TEST_CASE("segment: counts and boundaries") {
  const SegmentArray full = segment(standard_recording(250, 225000, 2));
  CHECK(full.channels() == 21);
  CHECK(full.segments() == 100);
  CHECK(full.samples_per_segment() == 2000);

  const Recording r16 = standard_recording(250, 4000, 3);
  const SegmentArray two = segment(r16);
  CHECK(two.segments() == 2);
  // concatenated segments reproduce the channel prefix exactly
  for (std::size_t c = 0; c < 21; ++c) {
    std::vector<double> cat;
    for (std::size_t s = 0; s < two.segments(); ++s) {
      const auto seg = two.segment(c, s);
      cat.insert(cat.end(), seg.begin(), seg.end());
    }
    CHECK(cat == r16.channels[c].samples);
  }

  const SegmentArray mid = segment(standard_recording(250, 2000 * 37 + 1999, 4));
  CHECK(mid.segments() == 37);

  try {
    segment(standard_recording(250, 3975, 1));
    FAIL("expected RecordingTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRecordingTooShort);
  }
}

TEST_CASE("preprocess_recording: TUH-style EDF end to end") {
  const SegmentArray segs = preprocess_recording(read_edf(kFixtures / "tuh_style.edf"));
  CHECK(segs.channels() == 21);
  CHECK(segs.segments() == 2);
  CHECK(segs.sample_rate() == 250.0);
  CHECK(segs.recording_id() == "tuh_style");
}
