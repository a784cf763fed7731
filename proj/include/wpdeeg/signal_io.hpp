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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wpdeeg {

enum class ClassLabel : std::uint8_t { kNormal = 0, kAbnormal = 1 };

std::string_view class_label_name(ClassLabel label);
/// Accepts "normal" / "abnormal" (case-insensitive).
std::optional<ClassLabel> parse_class_label(std::string_view text);

struct ChannelSignal {
  std::string label;
  std::vector<double> samples;  // microvolts
  double sample_rate = 0.0;     // Hz
};

/// Multi-channel recording. When every channel shares one rate (the usual
/// case) sample_rate holds it and all channels have equal length; EDF files
/// with mixed per-signal rates carry sample_rate == 0 and the per-channel
/// rates are resolved by preprocessing.
struct Recording {
  std::string id;
  std::optional<ClassLabel> label;
  double sample_rate = 0.0;
  std::vector<ChannelSignal> channels;

  bool has_uniform_rate() const { return sample_rate > 0.0; }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().samples.size(); }
  const ChannelSignal* find(std::string_view channel_label) const;

  /// Throws Error on any violated invariant (unique labels, positive rates,
  /// equal lengths at a uniform rate, finite samples).
  void validate() const;
};

/// Reads an EDF (or continuous EDF+) file. Annotation signals are dropped;
/// digital samples are scaled to physical units with the header calibration.
Recording read_edf(const std::filesystem::path& path);

Recording read_csv(const std::filesystem::path& path, double sample_rate);

/// Writes the header row of channel labels followed by one row per sample.
/// decimals < 0 writes shortest round-trip representations; otherwise values
/// are written in fixed notation with that many decimals.
void write_csv(const Recording& rec, const std::filesystem::path& path, int decimals = -1);

/// Canonical 21-electrode 10/20 montage used throughout the pipeline.
inline constexpr std::array<std::string_view, 21> kStandardChannels = {
    "FP1", "FP2", "F7", "F3", "FZ", "F4", "F8", "T3", "C3", "CZ", "C4",
    "T4",  "T5",  "P3", "PZ", "P4", "T6", "O1", "O2", "A1", "A2"};

inline constexpr double kSynthSampleRate = 250.0;
/// Synthetic samples are quantized to this step (microvolts), so a CSV written
/// with two decimals reproduces them exactly.
inline constexpr double kSynthResolution = 0.01;

/// Seeded synthetic EEG: 21 channels at 250 Hz of 1/f background plus an
/// alpha rhythm; the abnormal class adds 2.5-3.5 Hz slowing and intermittent 3 Hz
/// high-amplitude bursts on a random subset of channels.
Recording synth_recording(ClassLabel cls, double duration_s, std::uint64_t seed);

}  // namespace wpdeeg
