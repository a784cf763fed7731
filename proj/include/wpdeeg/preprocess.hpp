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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wpdeeg/signal_io.hpp"

namespace wpdeeg {

inline constexpr double kTargetSampleRate = 250.0;
inline constexpr double kSegmentSeconds = 8.0;
inline constexpr std::size_t kSegmentSamples = 2000;
inline constexpr std::size_t kMaxSegments = 100;
inline constexpr std::size_t kMinSegments = 2;

/// Channel × segment × sample block of one recording.
class SegmentArray {
 public:
  SegmentArray() = default;
  SegmentArray(std::string recording_id, std::optional<ClassLabel> label, double sample_rate, std::size_t channels,
               std::size_t segments, std::size_t samples_per_segment);

  std::size_t channels() const { return channels_; }
  std::size_t segments() const { return segments_; }
  std::size_t samples_per_segment() const { return samples_; }
  double sample_rate() const { return sample_rate_; }
  const std::string& recording_id() const { return recording_id_; }
  const std::optional<ClassLabel>& label() const { return label_; }

  std::span<const double> segment(std::size_t channel, std::size_t seg) const {
    return {data_.data() + offset(channel, seg), samples_};
  }
  std::span<double> segment(std::size_t channel, std::size_t seg) { return {data_.data() + offset(channel, seg), samples_}; }

 private:
  std::size_t offset(std::size_t channel, std::size_t seg) const { return (channel * segments_ + seg) * samples_; }

  std::string recording_id_;
  std::optional<ClassLabel> label_;
  double sample_rate_ = 0.0;
  std::size_t channels_ = 0;
  std::size_t segments_ = 0;
  std::size_t samples_ = 0;
  std::vector<double> data_;
};

/// "EEG FP1-REF" -> "FP1": drops an "EEG " prefix and a "-REF"/"-LE" suffix,
/// then upper-cases.
std::string normalize_channel_label(std::string_view label);

/// Keeps the 21 standard electrodes in canonical order, relabelled to their
/// canonical names. Throws MissingChannel naming the first absent electrode.
Recording select_standard_channels(const Recording& rec);

/// Windowed-sinc anti-aliasing low-pass followed by rational decimation.
/// A recording already at target_rate is returned unchanged. Channels with
/// mixed rates are each converted from their own rate.
Recording resample(const Recording& rec, double target_rate = kTargetSampleRate);

/// Resamples one channel; exposed for testing.
std::vector<double> resample_channel(std::span<const double> x, double source_rate, double target_rate);

/// Cuts each channel into non-overlapping windows from the start of the
/// recording, keeping at most max_segments; the trailing partial window is
/// dropped.
SegmentArray segment(const Recording& rec, double seg_seconds = kSegmentSeconds, std::size_t max_segments = kMaxSegments);

/// select_standard_channels -> resample -> segment.
SegmentArray preprocess_recording(const Recording& rec);

}  // namespace wpdeeg
