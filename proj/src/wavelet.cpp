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

#include "wpdeeg/wavelet.hpp"

#include <cmath>
#include <numbers>

#include "wpdeeg/error.hpp"

namespace wpdeeg {

namespace {

// Minimum-phase Daubechies scaling filter with four vanishing moments,
// obtained by spectral factorization at 50 significant digits and rounded
// to double.
constexpr std::array<double, 8> kDb4Lo = {
    -0.010597401785069032, 0.0328830116668852,  0.030841381835560764, -0.18703481171909309,
    -0.027983769416859854, 0.6308807679298589,  0.7148465705529157,   0.2303778133088965,
};

FilterBank make_db4() {
  FilterBank fb;
  const std::size_t L = kDb4Lo.size();
  fb.lo_analysis.assign(kDb4Lo.begin(), kDb4Lo.end());
  fb.hi_analysis.resize(L);
  for (std::size_t k = 0; k < L; ++k) {
    fb.hi_analysis[k] = (k % 2 == 0 ? 1.0 : -1.0) * fb.lo_analysis[L - 1 - k];
  }
  fb.lo_synthesis.assign(fb.lo_analysis.rbegin(), fb.lo_analysis.rend());
  fb.hi_synthesis.assign(fb.hi_analysis.rbegin(), fb.hi_analysis.rend());
  return fb;
}

/// Maps index j into [0, m) under the given boundary rule.
inline std::size_t wrap(long long j, long long m, Extension ext) {
  if (ext == Extension::kPeriodic) {
    j %= m;
    return static_cast<std::size_t>(j < 0 ? j + m : j);
  }
  // Half-sample symmetric: ... x1 x0 | x0 x1 ... x_{m-1} | x_{m-1} x_{m-2} ...
  while (j < 0 || j >= m) {
    if (j < 0) j = -j - 1;
    if (j >= m) j = 2 * m - j - 1;
  }
  return static_cast<std::size_t>(j);
}

/// out[i] = sum_k f[k] * xe[2i + L/2 - k], where xe is x with its length made
/// even by repeating the last sample.
void filter_downsample(std::span<const double> x, std::span<const double> f, Extension ext, std::span<double> out) {
  const auto n = static_cast<long long>(x.size());
  const long long m = n + (n % 2);
  const auto L = static_cast<long long>(f.size());
  const long long shift = L / 2;
  const auto at = [&](std::size_t j) { return j < x.size() ? x[j] : x[x.size() - 1]; };
  const auto half = static_cast<long long>(out.size());
  for (long long i = 0; i < half; ++i) {
    const long long hi = 2 * i + shift;
    const long long lo = hi - (L - 1);
    double acc = 0.0;
    if (lo >= 0 && hi < n) {
      const double* p = x.data() + hi;
      for (long long k = 0; k < L; ++k) acc += f[k] * p[-k];
    } else {
      for (long long k = 0; k < L; ++k) acc += f[k] * at(wrap(hi - k, m, ext));
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
}

}  // namespace

const FilterBank& db4_filter_bank() {
  static const FilterBank fb = [] {
    FilterBank bank = make_db4();
    validate_filter_bank(bank);
    return bank;
  }();
  return fb;
}

void validate_filter_bank(const FilterBank& fb, double tol) {
  const std::size_t L = fb.lo_analysis.size();
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidParams, "filter bank: " + what); };
  if (L == 0 || L % 2 != 0 || fb.hi_analysis.size() != L || fb.lo_synthesis.size() != L || fb.hi_synthesis.size() != L) {
    fail("filters must share one even length");
  }
  double sum = 0.0;
  for (double c : fb.lo_analysis) sum += c;
  if (std::abs(sum - std::numbers::sqrt2) > tol) fail("low-pass taps do not sum to sqrt(2)");
  for (std::size_t m = 0; 2 * m < L; ++m) {
    double dot = 0.0;
    for (std::size_t k = 0; k + 2 * m < L; ++k) dot += fb.lo_analysis[k] * fb.lo_analysis[k + 2 * m];
    if (std::abs(dot - (m == 0 ? 1.0 : 0.0)) > tol) fail("low-pass filter is not orthonormal under even shifts");
  }
  for (std::size_t k = 0; k < L; ++k) {
    const double qmf = (k % 2 == 0 ? 1.0 : -1.0) * fb.lo_analysis[L - 1 - k];
    if (std::abs(fb.hi_analysis[k] - qmf) > tol) fail("high-pass filter breaks the quadrature-mirror relation");
    if (fb.lo_synthesis[k] != fb.lo_analysis[L - 1 - k] || fb.hi_synthesis[k] != fb.hi_analysis[L - 1 - k]) {
      fail("synthesis filters are not time-reversed analysis filters");
    }
  }
}

void analysis_step_into(std::span<const double> signal, const FilterBank& fb, Extension ext, std::span<double> approx,
                        std::span<double> detail) {
  if (signal.size() < 2) throw Error(ErrorCode::kSignalTooShort, "analysis needs at least 2 samples");
  const std::size_t half = (signal.size() + 1) / 2;
  if (approx.size() != half || detail.size() != half) {
    throw Error(ErrorCode::kLengthMismatch, "output spans must hold ceil(n/2) coefficients");
  }
  filter_downsample(signal, fb.lo_analysis, ext, approx);
  filter_downsample(signal, fb.hi_analysis, ext, detail);
}

Subbands analysis_step(std::span<const double> signal, const FilterBank& fb, Extension ext) {
  if (signal.size() < 2) throw Error(ErrorCode::kSignalTooShort, "analysis needs at least 2 samples");
  const std::size_t half = (signal.size() + 1) / 2;
  Subbands out{std::vector<double>(half), std::vector<double>(half)};
  analysis_step_into(signal, fb, ext, out.approx, out.detail);
  return out;
}

std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail, const FilterBank& fb) {
  if (approx.size() != detail.size()) {
    throw Error(ErrorCode::kLengthMismatch, "approx has " + std::to_string(approx.size()) + " coefficients, detail has " +
                                                std::to_string(detail.size()));
  }
  const std::size_t n = 2 * approx.size();
  std::vector<double> x(n, 0.0);
  if (n == 0) return x;
  const auto L = static_cast<long long>(fb.lo_synthesis.size());
  const long long shift = L / 2 - 1;
  const auto m = static_cast<long long>(n);
  // x[t] = sum_k g[k] * u[t + L/2 - 1 - k] with u the zero-stuffed subbands.
  for (long long t = 0; t < m; ++t) {
    double acc = 0.0;
    for (long long k = 0; k < L; ++k) {
      const std::size_t j = wrap(t + shift - k, m, Extension::kPeriodic);
      if (j % 2 != 0) continue;
      acc += fb.lo_synthesis[k] * approx[j / 2] + fb.hi_synthesis[k] * detail[j / 2];
    }
    x[static_cast<std::size_t>(t)] = acc;
  }
  return x;
}

std::vector<std::size_t> chain_lengths(std::size_t n, int depth) {
  std::vector<std::size_t> out;
  for (int level = 0; level < depth; ++level) {
    n = (n + 1) / 2;
    out.push_back(n);
  }
  return out;
}

namespace {

void check_depth(std::size_t n, int depth) {
  if (depth < 1 || depth > kMaxDepth) {
    throw Error(ErrorCode::kInvalidParams, "decomposition depth must be in [1, 8], got " + std::to_string(depth));
  }
  if (n < (std::size_t{1} << depth)) {
    throw Error(ErrorCode::kSignalTooShort, std::to_string(n) + " samples cannot support " + std::to_string(depth) + " levels");
  }
}

}  // namespace

SelectedCoefficients decompose_paths(std::span<const double> segment, int depth, Extension ext) {
  check_depth(segment.size(), depth);
  const FilterBank& fb = db4_filter_bank();
  const auto lengths = chain_lengths(segment.size(), depth);

  SelectedCoefficients sel;
  sel.nodes.resize(2 * static_cast<std::size_t>(depth));
  for (int chain = 0; chain < 2; ++chain) {
    const bool detail_chain = chain == 0;
    const auto& filter = detail_chain ? fb.hi_analysis : fb.lo_analysis;
    std::span<const double> parent = segment;
    for (int level = 0; level < depth; ++level) {
      WpdNode& node = sel.nodes[static_cast<std::size_t>(chain * depth + level)];
      node.path.assign(static_cast<std::size_t>(level + 1), detail_chain ? 'D' : 'A');
      node.coeffs.resize(lengths[static_cast<std::size_t>(level)]);
      filter_downsample(parent, filter, ext, node.coeffs);
      parent = node.coeffs;
    }
  }
  return sel;
}

std::vector<WpdNode> decompose_full(std::span<const double> signal, int depth, Extension ext) {
  check_depth(signal.size(), depth);
  const FilterBank& fb = db4_filter_bank();
  std::vector<WpdNode> level{WpdNode{"", std::vector<double>(signal.begin(), signal.end())}};
  for (int d = 0; d < depth; ++d) {
    std::vector<WpdNode> next;
    next.reserve(level.size() * 2);
    for (const auto& node : level) {
      Subbands sb = analysis_step(node.coeffs, fb, ext);
      next.push_back(WpdNode{node.path + 'A', std::move(sb.approx)});
      next.push_back(WpdNode{node.path + 'D', std::move(sb.detail)});
    }
    level = std::move(next);
  }
  return level;
}

}  // namespace wpdeeg
