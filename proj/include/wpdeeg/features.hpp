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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wpdeeg/preprocess.hpp"
#include "wpdeeg/signal_io.hpp"
#include "wpdeeg/wavelet.hpp"

namespace wpdeeg {

inline constexpr std::size_t kStatsPerNode = 6;  // MAV, AVP, SD, RMAV, SKEW, KURT
inline constexpr std::size_t kSegmentFeatures = kSelectedNodes * kStatsPerNode;                            // 96
inline constexpr std::size_t kAggregatedFeatures = kStandardChannels.size() * 2 * kSegmentFeatures;       // 4032
inline constexpr double kRmavEpsilon = 1e-12;
inline constexpr double kDegenerateSd = 1e-12;

enum class Statistic : std::size_t { kMav = 0, kAvp, kSd, kRmav, kSkew, kKurt };

constexpr std::size_t feature_index(std::size_t node, Statistic stat) {
  return node * kStatsPerNode + static_cast<std::size_t>(stat);
}

using SegmentFeatureVector = std::array<double, kSegmentFeatures>;

struct SubbandStats {
  double mav = 0.0;
  double avp = 0.0;
  double sd = 0.0;
  double skew = 0.0;
  double kurt = 0.0;  // excess
};

/// Population moments of one sub-band. A (numerically) constant input gets
/// sd = skew = kurt = 0.
SubbandStats subband_stats(std::span<const double> coeffs);

/// out[i] = mavs[i] / max(mavs[(i + 1) mod 16], eps).
std::array<double, kSelectedNodes> rmav_chain(std::span<const double> mavs);

SegmentFeatureVector segment_features(const SelectedCoefficients& sel);

/// z-scores the entries of v with the population sd; all zeros when the sd
/// is below 1e-12.
std::vector<double> normalize_vector(std::span<const double> v);

/// Per-recording [channel × segment × 96] features.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(std::string recording_id, std::optional<ClassLabel> label, std::size_t channels, std::size_t segments)
      : recording_id_(std::move(recording_id)),
        label_(label),
        channels_(channels),
        segments_(segments),
        data_(channels * segments * kSegmentFeatures, 0.0) {}

  std::size_t channels() const { return channels_; }
  std::size_t segments() const { return segments_; }
  const std::string& recording_id() const { return recording_id_; }
  const std::optional<ClassLabel>& label() const { return label_; }

  std::span<const double> features(std::size_t channel, std::size_t seg) const {
    return {data_.data() + (channel * segments_ + seg) * kSegmentFeatures, kSegmentFeatures};
  }
  std::span<double> features(std::size_t channel, std::size_t seg) {
    return {data_.data() + (channel * segments_ + seg) * kSegmentFeatures, kSegmentFeatures};
  }
  const std::vector<double>& data() const { return data_; }

 private:
  std::string recording_id_;
  std::optional<ClassLabel> label_;
  std::size_t channels_ = 0;
  std::size_t segments_ = 0;
  std::vector<double> data_;
};

/// Splits segments at floor(S/2) and takes per-(channel, feature) medians
/// of both halves. Layout: channel-major, then half, then feature.
std::vector<double> aggregate(const FeatureTensor& t);

enum class NormalizationScope { kPerVector, kPerFeature };

/// Per-feature standard scaler over the 96 segment features, fitted on raw
/// (unnormalized) training tensors.
class FeatureScaler {
 public:
  void accumulate(const FeatureTensor& raw);
  /// Finalizes the running sums; features with sd < 1e-12 map to zero.
  void finish();
  void transform(FeatureTensor& t) const;

  const std::array<double, kSegmentFeatures>& mean() const { return mean_; }
  const std::array<double, kSegmentFeatures>& scale() const { return sd_; }
  bool fitted() const { return fitted_; }

  void save(const std::filesystem::path& path) const;
  static FeatureScaler load(const std::filesystem::path& path);

 private:
  std::array<long double, kSegmentFeatures> sum_{};
  std::array<long double, kSegmentFeatures> sum_sq_{};
  std::size_t count_ = 0;
  std::array<double, kSegmentFeatures> mean_{};
  std::array<double, kSegmentFeatures> sd_{};
  bool fitted_ = false;
};

struct FeatureOptions {
  Extension extension = Extension::kPeriodic;
  NormalizationScope normalization = NormalizationScope::kPerVector;
  /// Required when normalization is kPerFeature.
  const FeatureScaler* scaler = nullptr;
};

/// Raw features of every (channel, segment); OpenMP over the flattened
/// (channel, segment) index.
FeatureTensor featurize_segments(const SegmentArray& segs, Extension ext = Extension::kPeriodic);

/// Single-threaded reference for featurize_segments.
FeatureTensor featurize_segments_serial(const SegmentArray& segs, Extension ext = Extension::kPeriodic);

/// Applies the configured normalization to every segment vector in place.
void normalize_tensor(FeatureTensor& t, const FeatureOptions& opts);

/// Full per-recording chain: preprocess, decompose, stats, normalize,
/// aggregate. Returns the 4032-value vector.
std::vector<double> featurize_recording(const Recording& rec, const FeatureOptions& opts = {});

}  // namespace wpdeeg
