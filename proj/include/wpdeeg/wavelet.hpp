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
#include <span>
#include <string>
#include <vector>

namespace wpdeeg {

enum class Extension { kPeriodic, kSymmetric };

/// Two-channel orthonormal filter bank.
struct FilterBank {
  std::vector<double> lo_analysis;
  std::vector<double> hi_analysis;
  std::vector<double> lo_synthesis;
  std::vector<double> hi_synthesis;
};

/// Daubechies-4 (8 taps). The constants are checked against the orthonormal
/// filter-bank conditions the first time this is called.
const FilterBank& db4_filter_bank();

/// Throws Error(kInvalidParams) if the bank violates unit DC gain (sum sqrt 2),
/// unit energy, double-shift orthogonality, the quadrature-mirror relation, or
/// the time-reversal relation of the synthesis filters.
void validate_filter_bank(const FilterBank& fb, double tol = 1e-12);

struct Subbands {
  std::vector<double> approx;
  std::vector<double> detail;
};

/// One level of filtering and dyadic downsampling. Output lengths are
/// ceil(n/2); an odd-length input is first extended by repeating its last
/// sample.
///   approx[i] = sum_k lo[k] * x[2i + L/2 - k]   (indices extended per ext)
Subbands analysis_step(std::span<const double> signal, const FilterBank& fb, Extension ext = Extension::kPeriodic);

/// Allocation-free form used by the decomposition kernels. approx/detail
/// must hold ceil(n/2) values each.
void analysis_step_into(std::span<const double> signal, const FilterBank& fb, Extension ext, std::span<double> approx,
                        std::span<double> detail);

/// Inverse of analysis_step under periodic extension for even-length signals.
std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail, const FilterBank& fb);

inline constexpr int kMaxDepth = 8;
inline constexpr std::size_t kSelectedNodes = 2 * kMaxDepth;

struct WpdNode {
  std::string path;  // over {A, D}; A = low-pass child
  std::vector<double> coeffs;

  int level() const { return static_cast<int>(path.size()); }
};

/// The pure-detail chain D, DD, ..., then the pure-approximation chain
/// A, AA, ..., each `depth` long.
struct SelectedCoefficients {
  std::vector<WpdNode> nodes;
};

/// Node lengths along either chain of a decomposition of n samples.
std::vector<std::size_t> chain_lengths(std::size_t n, int depth);

SelectedCoefficients decompose_paths(std::span<const double> segment, int depth = kMaxDepth,
                                     Extension ext = Extension::kPeriodic);

/// Every node at `depth` in natural binary-path order (A before D at each
/// level, first level most significant).
std::vector<WpdNode> decompose_full(std::span<const double> signal, int depth, Extension ext = Extension::kPeriodic);

}  // namespace wpdeeg
