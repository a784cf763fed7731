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

#include "wpdeeg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wpdeeg/error.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

SegmentArray::SegmentArray(std::string recording_id, std::optional<ClassLabel> label, double sample_rate,
                           std::size_t channels, std::size_t segments, std::size_t samples_per_segment)
    : recording_id_(std::move(recording_id)),
      label_(label),
      sample_rate_(sample_rate),
      channels_(channels),
      segments_(segments),
      samples_(samples_per_segment),
      data_(channels * segments * samples_per_segment, 0.0) {}

std::string normalize_channel_label(std::string_view label) {
  std::string s = to_upper(trim(label));
  if (s.rfind("EEG ", 0) == 0) s.erase(0, 4);
  for (std::string_view suffix : {"-REF", "-LE"}) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.erase(s.size() - suffix.size());
      break;
    }
  }
  return std::string(trim(s));
}

Recording select_standard_channels(const Recording& rec) {
  Recording out;
  out.id = rec.id;
  out.label = rec.label;
  out.channels.reserve(kStandardChannels.size());
  for (std::string_view target : kStandardChannels) {
    const ChannelSignal* match = nullptr;
    for (const auto& ch : rec.channels) {
      if (normalize_channel_label(ch.label) == target) {
        match = &ch;
        break;
      }
    }
    if (match == nullptr) throw Error(ErrorCode::kMissingChannel, std::string(target));
    ChannelSignal ch = *match;
    ch.label = std::string(target);
    out.channels.push_back(std::move(ch));
  }
  const double rate = out.channels.front().sample_rate;
  const bool uniform = std::all_of(out.channels.begin(), out.channels.end(), [&](const ChannelSignal& c) {
    return c.sample_rate == rate && c.samples.size() == out.channels.front().samples.size();
  });
  out.sample_rate = uniform ? rate : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

namespace {

constexpr double kZeroCrossings = 32.0;  // per side, in units of the output period
constexpr double kKaiserBeta = 8.6;

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

struct LowPass {
  double cutoff;      // cycles per source sample
  double half_width;  // source samples
  double kaiser_norm;

  double operator()(double tau) const {
    if (std::abs(tau) >= half_width) return 0.0;
    const double u = tau / half_width;
    const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / kaiser_norm;
    const double arg = 2.0 * cutoff * tau;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    return 2.0 * cutoff * sinc * window;
  }
};

/// Point reflection about the end samples keeps the local level and slope.
double sample_extended(std::span<const double> x, long long i) {
  const auto n = static_cast<long long>(x.size());
  if (i < 0) {
    const long long m = std::min(-i, n - 1);
    return 2.0 * x[0] - x[m];
  }
  if (i >= n) {
    const long long m = std::max(2 * (n - 1) - i, 0LL);
    return 2.0 * x[n - 1] - x[m];
  }
  return x[i];
}

/// Filters around fractional source position t with taps normalized to unit
/// DC gain.
double interpolate(std::span<const double> x, const LowPass& h, long long base, double phase,
                   std::vector<double>& weights) {
  const auto reach = static_cast<long long>(std::ceil(h.half_width));
  weights.clear();
  double wsum = 0.0;
  for (long long k = -reach; k <= reach + 1; ++k) {
    const double w = h(static_cast<double>(k) - phase);
    weights.push_back(w);
    wsum += w;
  }
  double acc = 0.0;
  for (long long k = -reach; k <= reach + 1; ++k) {
    acc += weights[static_cast<std::size_t>(k + reach)] * sample_extended(x, base + k);
  }
  return acc / wsum;
}

bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-9 && v >= 1.0; }

}  // namespace

std::vector<double> resample_channel(std::span<const double> x, double source_rate, double target_rate) {
  if (!(target_rate > 0.0) || !(source_rate > 0.0)) {
    throw Error(ErrorCode::kUpsamplingRequested, "sample rates must be positive");
  }
  if (source_rate < target_rate) {
    throw Error(ErrorCode::kUpsamplingRequested,
                "source rate " + std::to_string(source_rate) + " Hz is below target " + std::to_string(target_rate) + " Hz");
  }
  if (source_rate == target_rate) return {x.begin(), x.end()};

  const double ratio = target_rate / source_rate;
  const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) * ratio + 1e-9));
  std::vector<double> y(out_len);
  if (x.empty()) return y;

  LowPass h{0.5 * ratio, kZeroCrossings / ratio, bessel_i0(kKaiserBeta)};
  std::vector<double> weights;

  if (is_integral(source_rate) && is_integral(target_rate)) {
    // Exact rational stepping: output n sits at source position n*q/p.
    auto q = static_cast<long long>(std::llround(source_rate));
    auto p = static_cast<long long>(std::llround(target_rate));
    const long long g = std::gcd(p, q);
    p /= g;
    q /= g;
    const auto reach = static_cast<long long>(std::ceil(h.half_width));
    const std::size_t taps = static_cast<std::size_t>(2 * reach + 2);
    // One normalized tap set per phase.
    std::vector<double> table(static_cast<std::size_t>(p) * taps);
    for (long long ph = 0; ph < p; ++ph) {
      const double phase = static_cast<double>(ph) / static_cast<double>(p);
      double wsum = 0.0;
      for (std::size_t k = 0; k < taps; ++k) {
        const double w = h(static_cast<double>(static_cast<long long>(k) - reach) - phase);
        table[static_cast<std::size_t>(ph) * taps + k] = w;
        wsum += w;
      }
      for (std::size_t k = 0; k < taps; ++k) table[static_cast<std::size_t>(ph) * taps + k] /= wsum;
    }
    const auto n = static_cast<long long>(x.size());
    for (std::size_t i = 0; i < out_len; ++i) {
      const long long num = static_cast<long long>(i) * q;
      const long long base = num / p;
      const long long ph = num % p;
      const double* w = &table[static_cast<std::size_t>(ph) * taps];
      double acc = 0.0;
      if (base - reach >= 0 && base + reach + 1 < n) {
        const double* src = x.data() + (base - reach);
        for (std::size_t k = 0; k < taps; ++k) acc += w[k] * src[k];
      } else {
        for (std::size_t k = 0; k < taps; ++k) acc += w[k] * sample_extended(x, base - reach + static_cast<long long>(k));
      }
      y[i] = acc;
    }
    return y;
  }

  const double step = source_rate / target_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) * step;
    const double base = std::floor(t);
    y[i] = interpolate(x, h, static_cast<long long>(base), t - base, weights);
  }
  return y;
}

Recording resample(const Recording& rec, double target_rate) {
  if (rec.has_uniform_rate() && rec.sample_rate == target_rate) return rec;
  Recording out;
  out.id = rec.id;
  out.label = rec.label;
  out.sample_rate = target_rate;
  out.channels.reserve(rec.channels.size());
  std::size_t min_len = SIZE_MAX;
  for (const auto& ch : rec.channels) {
    ChannelSignal r;
    r.label = ch.label;
    r.sample_rate = target_rate;
    r.samples = resample_channel(ch.samples, ch.sample_rate, target_rate);
    min_len = std::min(min_len, r.samples.size());
    out.channels.push_back(std::move(r));
  }
  // Mixed source rates can disagree by a sample after flooring.
  for (auto& ch : out.channels) ch.samples.resize(min_len);
  return out;
}

SegmentArray segment(const Recording& rec, double seg_seconds, std::size_t max_segments) {
  if (!rec.has_uniform_rate()) {
    throw Error(ErrorCode::kShapeMismatch, "segmentation needs a single sample rate; resample first");
  }
  const auto seg_len = static_cast<std::size_t>(std::llround(seg_seconds * rec.sample_rate));
  if (seg_len == 0) throw Error(ErrorCode::kShapeMismatch, "segment length rounds to zero samples");
  const std::size_t available = rec.length() / seg_len;
  if (available < kMinSegments) {
    throw Error(ErrorCode::kRecordingTooShort, rec.id + " holds " + std::to_string(available) + " full " +
                                                   std::to_string(seg_seconds) + " s segment(s), need " +
                                                   std::to_string(kMinSegments));
  }
  const std::size_t count = std::min(available, max_segments);
  SegmentArray out(rec.id, rec.label, rec.sample_rate, rec.channels.size(), count, seg_len);
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    const auto& samples = rec.channels[c].samples;
    for (std::size_t s = 0; s < count; ++s) {
      auto dst = out.segment(c, s);
      std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(s * seg_len), seg_len, dst.begin());
    }
  }
  return out;
}

SegmentArray preprocess_recording(const Recording& rec) {
  return segment(resample(select_standard_channels(rec), kTargetSampleRate), kSegmentSeconds, kMaxSegments);
}

}  // namespace wpdeeg
