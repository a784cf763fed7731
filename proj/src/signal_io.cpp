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

#include "wpdeeg/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "wpdeeg/error.hpp"
#include "wpdeeg/random.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

std::string_view class_label_name(ClassLabel label) {
  return label == ClassLabel::kAbnormal ? "abnormal" : "normal";
}

std::optional<ClassLabel> parse_class_label(std::string_view text) {
  const std::string lower = to_lower(trim(text));
  if (lower == "normal") return ClassLabel::kNormal;
  if (lower == "abnormal") return ClassLabel::kAbnormal;
  return std::nullopt;
}

const ChannelSignal* Recording::find(std::string_view channel_label) const {
  for (const auto& ch : channels) {
    if (ch.label == channel_label) return &ch;
  }
  return nullptr;
}

void Recording::validate() const {
  std::set<std::string> seen;
  for (const auto& ch : channels) {
    if (!seen.insert(ch.label).second) {
      throw Error(ErrorCode::kMalformedHeader, "duplicate channel label '" + ch.label + "' in " + id);
    }
    if (!(ch.sample_rate > 0.0)) {
      throw Error(ErrorCode::kMalformedHeader, "channel '" + ch.label + "' has no positive sample rate");
    }
    if (has_uniform_rate() && (ch.samples.size() != length() || ch.sample_rate != sample_rate)) {
      throw Error(ErrorCode::kMalformedHeader, "channel '" + ch.label + "' disagrees with recording rate/length");
    }
    for (double v : ch.samples) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteSample, "non-finite sample in channel '" + ch.label + "' of " + id);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// EDF
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kEdfFixedHeader = 256;
constexpr std::size_t kEdfSignalHeader = 256;
constexpr std::string_view kEdfAnnotations = "EDF Annotations";

struct EdfSignalHeader {
  std::string label;
  double physical_min = 0.0;
  double physical_max = 0.0;
  double digital_min = 0.0;
  double digital_max = 0.0;
  std::size_t samples_per_record = 0;
};

std::string field(const std::string& header, std::size_t offset, std::size_t width) {
  return std::string(trim(std::string_view(header).substr(offset, width)));
}

double field_number(const std::string& header, std::size_t offset, std::size_t width, const char* name) {
  const std::string text = field(header, offset, width);
  const auto value = parse_double(text);
  if (!value) {
    throw Error(ErrorCode::kMalformedHeader, std::string("unparsable ") + name + " field '" + text + "'");
  }
  return *value;
}

long long field_integer(const std::string& header, std::size_t offset, std::size_t width, const char* name) {
  const std::string text = field(header, offset, width);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kMalformedHeader, std::string("unparsable ") + name + " field '" + text + "'");
  }
  return value;
}

}  // namespace

Recording read_edf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kEdfFixedHeader) {
    throw Error(ErrorCode::kMalformedHeader, "file shorter than the 256-byte EDF header");
  }
  const std::string fixed = bytes.substr(0, kEdfFixedHeader);
  for (unsigned char c : fixed) {
    if (c < 0x20 || c > 0x7e) throw Error(ErrorCode::kMalformedHeader, "non-ASCII byte in EDF header");
  }
  if (field(fixed, 0, 8) != "0") throw Error(ErrorCode::kMalformedHeader, "bad EDF version field");

  const long long header_bytes = field_integer(fixed, 184, 8, "header size");
  long long num_records = field_integer(fixed, 236, 8, "record count");
  const double record_seconds = field_number(fixed, 244, 8, "record duration");
  const long long ns = field_integer(fixed, 252, 4, "signal count");
  if (ns < 0 || header_bytes != static_cast<long long>(kEdfFixedHeader + kEdfSignalHeader * ns)) {
    throw Error(ErrorCode::kMalformedHeader, "header size does not match signal count");
  }
  if (!(record_seconds > 0.0)) throw Error(ErrorCode::kMalformedHeader, "record duration must be positive");
  if (bytes.size() < static_cast<std::size_t>(header_bytes)) {
    throw Error(ErrorCode::kMalformedHeader, "signal headers truncated");
  }

  const std::string sig = bytes.substr(kEdfFixedHeader, kEdfSignalHeader * ns);
  // Signal header fields are stored field-major: all labels, then all
  // transducer types, and so on.
  std::vector<EdfSignalHeader> signals(ns);
  const std::size_t n = static_cast<std::size_t>(ns);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = signals[i];
    s.label = field(sig, i * 16, 16);
    s.physical_min = field_number(sig, n * 104 + i * 8, 8, "physical minimum");
    s.physical_max = field_number(sig, n * 112 + i * 8, 8, "physical maximum");
    s.digital_min = field_number(sig, n * 120 + i * 8, 8, "digital minimum");
    s.digital_max = field_number(sig, n * 128 + i * 8, 8, "digital maximum");
    const long long spr = field_integer(sig, n * 216 + i * 8, 8, "samples per record");
    if (spr <= 0) throw Error(ErrorCode::kMalformedHeader, "samples per record must be positive");
    s.samples_per_record = static_cast<std::size_t>(spr);
    if (s.digital_max == s.digital_min) {
      throw Error(ErrorCode::kMalformedHeader, "digital range of '" + s.label + "' is empty");
    }
  }

  std::size_t record_samples = 0;
  for (const auto& s : signals) record_samples += s.samples_per_record;
  const std::size_t record_bytes = record_samples * 2;
  const std::size_t payload = bytes.size() - static_cast<std::size_t>(header_bytes);
  if (num_records < 0) {
    // -1 marks an unknown count (recording still in progress); infer it.
    num_records = record_bytes == 0 ? 0 : static_cast<long long>(payload / record_bytes);
  }
  if (record_bytes * static_cast<std::size_t>(num_records) > payload) {
    throw Error(ErrorCode::kTruncatedData, "header declares " + std::to_string(num_records) +
                                               " records but the payload holds " +
                                               std::to_string(record_bytes ? payload / record_bytes : 0));
  }

  Recording rec;
  rec.id = path.stem().string();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (signals[i].label.find(kEdfAnnotations) != std::string::npos) continue;
    kept.push_back(i);
    ChannelSignal ch;
    ch.label = signals[i].label;
    ch.sample_rate = static_cast<double>(signals[i].samples_per_record) / record_seconds;
    ch.samples.reserve(signals[i].samples_per_record * num_records);
    rec.channels.push_back(std::move(ch));
  }

  std::vector<std::size_t> signal_offset(n, 0);
  for (std::size_t i = 1; i < n; ++i) signal_offset[i] = signal_offset[i - 1] + signals[i - 1].samples_per_record;

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + header_bytes;
  for (long long r = 0; r < num_records; ++r) {
    const unsigned char* record = data + static_cast<std::size_t>(r) * record_bytes;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto& s = signals[kept[k]];
      const double scale = (s.physical_max - s.physical_min) / (s.digital_max - s.digital_min);
      const unsigned char* p = record + 2 * signal_offset[kept[k]];
      auto& out = rec.channels[k].samples;
      for (std::size_t j = 0; j < s.samples_per_record; ++j) {
        const auto digital = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[2 * j]) |
                                                       (static_cast<std::uint16_t>(p[2 * j + 1]) << 8));
        const double value = (static_cast<double>(digital) - s.digital_min) * scale + s.physical_min;
        if (!std::isfinite(value)) {
          throw Error(ErrorCode::kNonFiniteSample, "non-finite sample after scaling in '" + s.label + "'");
        }
        out.push_back(value);
      }
    }
  }

  bool uniform = !rec.channels.empty();
  for (const auto& ch : rec.channels) uniform = uniform && ch.sample_rate == rec.channels.front().sample_rate;
  rec.sample_rate = uniform ? rec.channels.front().sample_rate : 0.0;
  rec.validate();
  return rec;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

Recording read_csv(const std::filesystem::path& path, double sample_rate) {
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::kMalformedHeader, "sample rate must be positive");
  const std::string text = read_file(path);
  LineReader lines(text);

  Recording rec;
  rec.id = path.stem().string();
  rec.sample_rate = sample_rate;

  std::string_view line;
  while (lines.next(line) && trim(line).empty()) {
  }
  if (trim(line).empty()) throw Error(ErrorCode::kMalformedHeader, "CSV file has no header row");
  for (auto cell : split(line, ',')) {
    ChannelSignal ch;
    ch.label = std::string(trim(cell));
    ch.sample_rate = sample_rate;
    rec.channels.push_back(std::move(ch));
  }

  std::size_t row = 1;
  while (lines.next(line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (col >= rec.channels.size()) {
        throw Error(ErrorCode::kRaggedRows, "row " + std::to_string(row) + " has more cells than the header");
      }
      const auto value = parse_double(cell);
      if (!value) {
        throw Error(ErrorCode::kNonNumericCell,
                    "row " + std::to_string(row) + " column " + std::to_string(col + 1) + ": '" + std::string(cell) + "'");
      }
      rec.channels[col].samples.push_back(*value);
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != rec.channels.size()) {
      throw Error(ErrorCode::kRaggedRows, "row " + std::to_string(row) + " has " + std::to_string(col) + " cells, header has " +
                                              std::to_string(rec.channels.size()));
    }
  }
  rec.validate();
  return rec;
}

void write_csv(const Recording& rec, const std::filesystem::path& path, int decimals) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    if (c) out << ',';
    out << rec.channels[c].label;
  }
  out << '\n';
  const std::size_t n = rec.length();
  std::string row;
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      if (c) row.push_back(',');
      const double v = rec.channels[c].samples[i];
      const auto res = decimals < 0 ? std::to_chars(buf, buf + sizeof buf, v)
                                    : std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
      row.append(buf, res.ptr);
    }
    row.push_back('\n');
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic recordings
// ---------------------------------------------------------------------------

namespace {

/// Three-pole approximation of a 1/f spectrum driven by white noise.
class PinkNoise {
 public:
  double next(double white) {
    b0_ = 0.99765 * b0_ + white * 0.0990460;
    b1_ = 0.96300 * b1_ + white * 0.2965164;
    b2_ = 0.57000 * b2_ + white * 1.0526913;
    return b0_ + b1_ + b2_ + white * 0.1848;
  }

 private:
  double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
};

struct Burst {
  std::size_t start;
  std::size_t length;
  double amplitude;
};

// k / 100 is the double nearest the decimal k/100, which is also what a CSV
// parser returns for the two-decimal text.
double quantize(double v) {
  const double steps = 1.0 / kSynthResolution;
  return std::round(v * steps) / steps + 0.0;
}

}  // namespace

Recording synth_recording(ClassLabel cls, double duration_s, std::uint64_t seed) {
  if (!(duration_s >= 16.0)) {
    throw Error(ErrorCode::kDurationTooShort, "synthetic recordings need at least 16 s, got " + std::to_string(duration_s));
  }
  const double fs = kSynthSampleRate;
  const auto n = static_cast<std::size_t>(std::floor(duration_s * fs + 1e-9));
  const bool abnormal = cls == ClassLabel::kAbnormal;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  Rng rng(mix_seed(seed, abnormal ? 1 : 0));

  // Recording-level burst schedule and affected channels.
  std::vector<Burst> bursts;
  std::vector<bool> burst_channel(kStandardChannels.size(), false);
  if (abnormal) {
    const std::size_t affected = 5 + rng.below(8);
    std::vector<std::size_t> order(kStandardChannels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < affected; ++i) {
      const std::size_t j = i + rng.below(order.size() - i);
      std::swap(order[i], order[j]);
      burst_channel[order[i]] = true;
    }
    std::size_t t = static_cast<std::size_t>(rng.uniform(0.5, 4.0) * fs);
    while (t < n) {
      const auto len = static_cast<std::size_t>(rng.uniform(1.0, 3.0) * fs);
      bursts.push_back({t, len, rng.uniform(40.0, 80.0)});
      t += len + static_cast<std::size_t>(rng.uniform(2.0, 8.0) * fs);
    }
  }

  Recording rec;
  rec.id = std::string(abnormal ? "synth_abnormal_" : "synth_normal_") + std::to_string(seed);
  rec.label = cls;
  rec.sample_rate = fs;
  rec.channels.reserve(kStandardChannels.size());

  for (std::size_t c = 0; c < kStandardChannels.size(); ++c) {
    ChannelSignal ch;
    ch.label = std::string(kStandardChannels[c]);
    ch.sample_rate = fs;
    ch.samples.resize(n);

    const double background = rng.uniform(6.0, 10.0);
    const double alpha_amp = rng.uniform(8.0, 15.0) * (abnormal ? 0.6 : 1.0);
    const double alpha_phase = rng.uniform(0.0, kTwoPi);
    const double slow_amp = abnormal ? rng.uniform(6.0, 10.0) : 0.0;
    const double slow_freq = rng.uniform(2.5, 3.5);
    const double slow_phase = rng.uniform(0.0, kTwoPi);
    const double burst_phase = rng.uniform(0.0, kTwoPi);

    PinkNoise pink;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      double v = background * pink.next(rng.normal()) / 3.0;
      v += alpha_amp * std::sin(kTwoPi * 10.0 * t + alpha_phase);
      if (abnormal) v += slow_amp * std::sin(kTwoPi * slow_freq * t + slow_phase);
      ch.samples[i] = v;
    }
    if (burst_channel[c]) {
      for (const auto& b : bursts) {
        for (std::size_t k = 0; k < b.length && b.start + k < n; ++k) {
          const double t = static_cast<double>(b.start + k) / fs;
          const double envelope = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(b.length));
          ch.samples[b.start + k] += b.amplitude * envelope * std::sin(kTwoPi * 3.0 * t + burst_phase);
        }
      }
    }
    for (auto& v : ch.samples) v = quantize(v);
    rec.channels.push_back(std::move(ch));
  }
  return rec;
}

}  // namespace wpdeeg
