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

#include "wpdeeg/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wpdeeg/error.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

SubbandStats subband_stats(std::span<const double> coeffs) {
  if (coeffs.empty()) throw Error(ErrorCode::kEmptyInput, "sub-band has no coefficients");
  const auto n = static_cast<double>(coeffs.size());

  double sum = 0.0;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (double c : coeffs) {
    sum += c;
    abs_sum += std::abs(c);
    sq_sum += c * c;
  }
  const double mean = sum / n;

  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double c : coeffs) {
    const double d = c - mean;
    const double d2 = d * d;
    m1 += d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // m1 is the rounding error left in `mean`. Re-centre the moments on the
  // corrected mean; it matters when |mean| >> sd.
  const double e = m1, e2 = e * e;
  m4 = m4 - 4.0 * e * m3 + 6.0 * e2 * m2 - 3.0 * e2 * e2;
  m3 = m3 - 3.0 * e * m2 + 2.0 * e2 * e;
  m2 = m2 - e2;

  SubbandStats s;
  s.mav = abs_sum / n;
  s.avp = sq_sum / n;
  s.sd = std::sqrt(m2);
  if (m2 == 0.0 || s.sd <= 1e-12 * std::abs(mean)) {
    // Constant input: only rounding noise is left in the central moments.
    s.sd = 0.0;
    return s;
  }
  s.skew = m3 / (m2 * s.sd);
  s.kurt = m4 / (m2 * m2) - 3.0;
  return s;
}

std::array<double, kSelectedNodes> rmav_chain(std::span<const double> mavs) {
  if (mavs.size() != kSelectedNodes) {
    throw Error(ErrorCode::kWrongLength, "RMAV needs " + std::to_string(kSelectedNodes) + " MAVs, got " +
                                             std::to_string(mavs.size()));
  }
  std::array<double, kSelectedNodes> out{};
  for (std::size_t i = 0; i < kSelectedNodes; ++i) {
    out[i] = mavs[i] / std::max(mavs[(i + 1) % kSelectedNodes], kRmavEpsilon);
  }
  return out;
}

SegmentFeatureVector segment_features(const SelectedCoefficients& sel) {
  if (sel.nodes.size() != kSelectedNodes) {
    throw Error(ErrorCode::kWrongLength, "expected 16 selected nodes, got " + std::to_string(sel.nodes.size()));
  }
  SegmentFeatureVector out{};
  std::array<double, kSelectedNodes> mavs{};
  for (std::size_t i = 0; i < kSelectedNodes; ++i) {
    const SubbandStats s = subband_stats(sel.nodes[i].coeffs);
    mavs[i] = s.mav;
    out[feature_index(i, Statistic::kMav)] = s.mav;
    out[feature_index(i, Statistic::kAvp)] = s.avp;
    out[feature_index(i, Statistic::kSd)] = s.sd;
    out[feature_index(i, Statistic::kSkew)] = s.skew;
    out[feature_index(i, Statistic::kKurt)] = s.kurt;
  }
  const auto rmav = rmav_chain(mavs);
  for (std::size_t i = 0; i < kSelectedNodes; ++i) out[feature_index(i, Statistic::kRmav)] = rmav[i];
  return out;
}

std::vector<double> normalize_vector(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyInput, "cannot normalize an empty vector");
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(v.size(), 0.0);
  if (sd < kDegenerateSd) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / sd;
  return out;
}

namespace {

/// Mean of the two central order statistics for even counts.
double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

}  // namespace

std::vector<double> aggregate(const FeatureTensor& t) {
  const std::size_t S = t.segments();
  if (S < kMinSegments) {
    throw Error(ErrorCode::kTooFewSegments, t.recording_id() + " has " + std::to_string(S) + " segment(s), need 2");
  }
  const std::size_t h = S / 2;
  std::vector<double> out(t.channels() * 2 * kSegmentFeatures);
  std::vector<double> buf;
  buf.reserve(S);
  for (std::size_t c = 0; c < t.channels(); ++c) {
    for (std::size_t half = 0; half < 2; ++half) {
      const std::size_t begin = half == 0 ? 0 : h;
      const std::size_t end = half == 0 ? h : S;
      for (std::size_t f = 0; f < kSegmentFeatures; ++f) {
        buf.clear();
        for (std::size_t s = begin; s < end; ++s) buf.push_back(t.features(c, s)[f]);
        out[(c * 2 + half) * kSegmentFeatures + f] = median_of(buf);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-feature scaler
// ---------------------------------------------------------------------------

void FeatureScaler::accumulate(const FeatureTensor& raw) {
  for (std::size_t c = 0; c < raw.channels(); ++c) {
    for (std::size_t s = 0; s < raw.segments(); ++s) {
      const auto v = raw.features(c, s);
      for (std::size_t f = 0; f < kSegmentFeatures; ++f) {
        sum_[f] += v[f];
        sum_sq_[f] += static_cast<long double>(v[f]) * v[f];
      }
      ++count_;
    }
  }
}

void FeatureScaler::finish() {
  if (count_ == 0) throw Error(ErrorCode::kEmptyInput, "feature scaler saw no segments");
  const auto n = static_cast<long double>(count_);
  for (std::size_t f = 0; f < kSegmentFeatures; ++f) {
    const long double mean = sum_[f] / n;
    const long double var = std::max(0.0L, sum_sq_[f] / n - mean * mean);
    mean_[f] = static_cast<double>(mean);
    sd_[f] = static_cast<double>(std::sqrt(var));
  }
  fitted_ = true;
}

void FeatureScaler::transform(FeatureTensor& t) const {
  if (!fitted_) throw Error(ErrorCode::kInvalidConfig, "per-feature normalization requested without a fitted scaler");
  for (std::size_t c = 0; c < t.channels(); ++c) {
    for (std::size_t s = 0; s < t.segments(); ++s) {
      auto v = t.features(c, s);
      for (std::size_t f = 0; f < kSegmentFeatures; ++f) {
        v[f] = sd_[f] < kDegenerateSd ? 0.0 : (v[f] - mean_[f]) / sd_[f];
      }
    }
  }
}

void FeatureScaler::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["mean"] = mean_;
  j["scale"] = sd_;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << j.dump(1) << '\n';
}

FeatureScaler FeatureScaler::load(const std::filesystem::path& path) {
  FeatureScaler s;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    s.mean_ = j.at("mean").get<std::array<double, kSegmentFeatures>>();
    s.sd_ = j.at("scale").get<std::array<double, kSegmentFeatures>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFeatureFile, "bad scaler file " + path.string() + ": " + e.what());
  }
  s.fitted_ = true;
  return s;
}

// ---------------------------------------------------------------------------
// Featurization kernels
// ---------------------------------------------------------------------------

FeatureTensor featurize_segments_serial(const SegmentArray& segs, Extension ext) {
  FeatureTensor t(segs.recording_id(), segs.label(), segs.channels(), segs.segments());
  for (std::size_t c = 0; c < segs.channels(); ++c) {
    for (std::size_t s = 0; s < segs.segments(); ++s) {
      const auto fv = segment_features(decompose_paths(segs.segment(c, s), kMaxDepth, ext));
      std::copy(fv.begin(), fv.end(), t.features(c, s).begin());
    }
  }
  return t;
}

FeatureTensor featurize_segments(const SegmentArray& segs, Extension ext) {
  FeatureTensor t(segs.recording_id(), segs.label(), segs.channels(), segs.segments());
  const auto total = static_cast<long long>(segs.channels() * segs.segments());
  const std::size_t S = segs.segments();
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (long long idx = 0; idx < total; ++idx) {
    const std::size_t c = static_cast<std::size_t>(idx) / S;
    const std::size_t s = static_cast<std::size_t>(idx) % S;
    try {
      const auto fv = segment_features(decompose_paths(segs.segment(c, s), kMaxDepth, ext));
      std::copy(fv.begin(), fv.end(), t.features(c, s).begin());
    } catch (...) {
#pragma omp critical(wpdeeg_featurize_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return t;
}

void normalize_tensor(FeatureTensor& t, const FeatureOptions& opts) {
  if (opts.normalization == NormalizationScope::kPerFeature) {
    if (opts.scaler == nullptr) {
      throw Error(ErrorCode::kInvalidConfig, "per-feature normalization requested without a fitted scaler");
    }
    opts.scaler->transform(t);
    return;
  }
  for (std::size_t c = 0; c < t.channels(); ++c) {
    for (std::size_t s = 0; s < t.segments(); ++s) {
      auto v = t.features(c, s);
      const auto z = normalize_vector(v);
      std::copy(z.begin(), z.end(), v.begin());
    }
  }
}

std::vector<double> featurize_recording(const Recording& rec, const FeatureOptions& opts) {
  FeatureTensor t = featurize_segments(preprocess_recording(rec), opts.extension);
  normalize_tensor(t, opts);
  return aggregate(t);
}

}  // namespace wpdeeg
