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


// Slow, obviously-correct reference implementations used as test oracles.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wpdeeg/gbdt.hpp"
#include "wpdeeg/random.hpp"

namespace oracle {

struct Moments {
  long double mav = 0, avp = 0, sd = 0, skew = 0, kurt = 0;
};

// Two-pass population moments in long double.
inline Moments naive_moments(std::span<const double> x) {
  const auto n = static_cast<long double>(x.size());
  long double sum = 0, abs_sum = 0, sq_sum = 0;
  for (double v : x) {
    sum += v;
    abs_sum += std::fabs(static_cast<long double>(v));
    sq_sum += static_cast<long double>(v) * v;
  }
  const long double mean = sum / n;
  long double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const long double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Moments m;
  m.mav = abs_sum / n;
  m.avp = sq_sum / n;
  m.sd = std::sqrt(m2);
  if (m2 > 0) {
    m.skew = m3 / std::pow(m2, 1.5L);
    m.kurt = m4 / (m2 * m2) - 3;
  }
  return m;
}

inline bool close_rel(double got, long double want, double rel, double abs_floor = 0.0) {
  const long double diff = std::fabs(static_cast<long double>(got) - want);
  return diff <= rel * std::fabs(want) || diff <= abs_floor;
}

struct BruteSplit {
  std::size_t feature = 0;
  std::size_t bin = 0;
  double gain = 0;
};

// Every (feature, boundary) candidate, recomputing the child sums from
// scratch each time.
inline std::optional<BruteSplit> brute_force_split(std::span<const std::size_t> rows, std::span<const double> g,
                                                   std::span<const double> h, const wpdeeg::BinnedMatrix& X,
                                                   double lambda, std::size_t min_leaf) {
  double G = 0, H = 0;
  for (auto r : rows) {
    G += g[r];
    H += h[r];
  }
  const double parent = G * G / (H + lambda);
  std::optional<BruteSplit> best;
  for (std::size_t f = 0; f < X.cols(); ++f) {
    for (std::size_t b = 0; b + 1 < X.bin_count(f); ++b) {
      double gl = 0, hl = 0, gr = 0, hr = 0;
      std::size_t nl = 0, nr = 0;
      for (auto r : rows) {
        if (X(r, f) <= b) {
          gl += g[r];
          hl += h[r];
          ++nl;
        } else {
          gr += g[r];
          hr += h[r];
          ++nr;
        }
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
      if (gain > 0 && (!best || gain > best->gain)) best = BruteSplit{f, b, gain};
    }
  }
  return best;
}

// Linear-interpolated sample quantile of a sorted copy.
inline double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Direct periodic filtering and downsampling with modular indexing.
inline std::vector<double> naive_filter_down(std::span<const double> x, std::span<const double> f) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t L = static_cast<std::ptrdiff_t>(f.size());
  std::vector<double> out(x.size() / 2);
  for (std::ptrdiff_t i = 0; i < n / 2; ++i) {
    long double acc = 0;
    for (std::ptrdiff_t k = 0; k < L; ++k) {
      const std::ptrdiff_t idx = ((2 * i + L / 2 - k) % n + n) % n;
      acc += static_cast<long double>(f[static_cast<std::size_t>(k)]) * x[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(i)] = static_cast<double>(acc);
  }
  return out;
}

inline double energy(std::span<const double> x) {
  long double e = 0;
  for (double v : x) e += static_cast<long double>(v) * v;
  return static_cast<double>(e);
}

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  wpdeeg::Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = scale * rng.normal();
  return x;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("wpdeeg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
