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

// Histogram-based gradient-boosted decision trees for binary classification.
//
// Each boosting round takes a second-order (Newton) step on the logistic
// loss: with g = p - y and h = p(1 - p) summed over a node,
//
//   gain(split) = 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)]
//   leaf weight = -G / (H + l)
//
// Features are bucketed once into at most max_bins quantile bins; a split
// "bin <= b goes left" is equivalent to "x <= thresholds[b]" on raw values.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wpdeeg/matrix.hpp"

namespace wpdeeg {

enum class Growth { kDepthWise, kLeafWise };

struct GossParams {
  double top_rate = 0.2;    // a: fraction kept by largest |g|
  double other_rate = 0.1;  // b: fraction sampled from the rest

  friend bool operator==(const GossParams&, const GossParams&) = default;
};

struct TrainParams {
  double learning_rate = 0.1;
  int max_depth = 6;
  int n_estimators = 100;
  double lambda_l2 = 1.0;
  int max_bins = 255;
  int min_samples_leaf = 20;
  std::optional<GossParams> goss;
  std::uint64_t seed = 0;
  Growth growth = Growth::kDepthWise;
  int max_leaves = 31;  // leaf_wise only

  /// Throws Error(kInvalidParams / kInvalidFractions).
  void validate() const;

  friend bool operator==(const TrainParams&, const TrainParams&) = default;
};

/// "catboost-like", "xgboost-like" or "lightgbm-like".
TrainParams preset_params(std::string_view name);
const std::vector<std::string>& preset_names();

std::string_view growth_name(Growth g);

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

struct BinMap {
  std::vector<std::vector<double>> thresholds;  // per feature, strictly increasing

  std::size_t features() const { return thresholds.size(); }
  std::size_t bin_count(std::size_t feature) const { return thresholds[feature].size() + 1; }
  /// Number of thresholds strictly below x; NaN maps to bin 0 (left).
  std::uint8_t bin(std::size_t feature, double x) const;

  friend bool operator==(const BinMap&, const BinMap&) = default;
};

/// Quantile cut points from training data. A feature with at most max_bins
/// distinct values gets a cut midway between each pair of adjacent values.
BinMap build_bin_map(const DenseMatrix& X, int max_bins);

/// Feature-major bin codes: bins[f * rows + r].
class BinnedMatrix {
 public:
  BinnedMatrix(const DenseMatrix& X, const BinMap& map);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t operator()(std::size_t r, std::size_t f) const { return bins_[f * rows_ + r]; }
  std::span<const std::uint8_t> column(std::size_t f) const { return {bins_.data() + f * rows_, rows_}; }
  std::size_t bin_count(std::size_t f) const { return bin_counts_[f]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bins_;
  std::vector<std::size_t> bin_counts_;
};

// ---------------------------------------------------------------------------
// Gradients, sampling, split search
// ---------------------------------------------------------------------------

struct GradHess {
  double g;
  double h;
};

GradHess logistic_grad_hess(int label, double margin);
double sigmoid(double margin);
/// Numerically stable -[y log p + (1-y) log(1-p)] with p = sigmoid(margin).
double logistic_loss(int label, double margin);

struct GossSample {
  std::vector<std::size_t> rows;  // ascending
  std::vector<double> weights;    // aligned with rows
};

/// Keeps the ceil(a·n) rows with the largest |g| at weight 1 and a uniform
/// sample of ceil(b·n) of the remainder at weight (1 - a)/b.
GossSample goss_sample(std::span<const double> g, double a, double b, std::uint64_t seed);

struct SplitDecision {
  std::size_t feature = 0;
  std::size_t bin = 0;  // rows with bin <= this go left
  double gain = 0.0;
  double left_g = 0.0, left_h = 0.0;
  double right_g = 0.0, right_h = 0.0;
  std::size_t left_count = 0, right_count = 0;
};

struct SplitConfig {
  double lambda_l2 = 1.0;
  std::size_t min_samples_leaf = 1;
};

/// Best gain over all features and bin boundaries with both children holding
/// at least min_samples_leaf rows. Ties go to the lowest feature, then the
/// lowest bin. nullopt when the best gain is <= 0. g and h are indexed by row.
/// Parallel over features with an ordered reduction.
std::optional<SplitDecision> find_best_split(std::span<const std::size_t> node_rows, std::span<const double> g,
                                             std::span<const double> h, const BinnedMatrix& X, const SplitConfig& cfg);

/// Single-threaded reference for find_best_split.
std::optional<SplitDecision> find_best_split_serial(std::span<const std::size_t> node_rows, std::span<const double> g,
                                                    std::span<const double> h, const BinnedMatrix& X,
                                                    const SplitConfig& cfg);

// ---------------------------------------------------------------------------
// Trees and models
// ---------------------------------------------------------------------------

struct TreeNode {
  std::int64_t feature = -1;  // -1 marks a leaf
  std::int64_t bin = 0;
  double threshold = 0.0;
  std::int64_t left = -1;
  std::int64_t right = -1;
  double value = 0.0;  // leaf weight (unscaled by the learning rate)
  bool default_left = true;
  std::int64_t depth = 0;
  std::int64_t row_count = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  double predict_binned(const BinnedMatrix& X, std::size_t row) const;
  std::size_t leaf_count() const;
  std::size_t max_depth() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

double leaf_weight(double G, double H, double lambda_l2);

/// Grows one tree over `rows` (indices into X, g, h).
Tree grow_tree(std::span<const std::size_t> rows, std::span<const double> g, std::span<const double> h,
               const BinnedMatrix& X, const BinMap& map, const TrainParams& params);

struct GbdtModel {
  double base_margin = 0.0;
  std::vector<Tree> trees;
  TrainParams params;
  BinMap bin_map;
  std::size_t feature_count = 0;

  double predict_margin(std::span<const double> x) const;
  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

double predict_proba(const GbdtModel& model, std::span<const double> x);

/// Row-parallel batch prediction.
std::vector<double> predict_proba(const GbdtModel& model, const DenseMatrix& X);
std::vector<double> predict_proba_serial(const GbdtModel& model, const DenseMatrix& X);

struct TrainLog {
  /// loss[0] is the log-loss at the base margin; loss[t] after tree t.
  std::vector<double> loss;
};

/// labels are 0 (normal) / 1 (abnormal).
GbdtModel train(const DenseMatrix& X, std::span<const int> labels, const TrainParams& params, TrainLog* log = nullptr);

inline constexpr std::uint16_t kModelFileVersion = 1;

/// Layout (little-endian):
///   "WPDM" | u16 version | u32 n | n bytes UTF-8 JSON header (params, feature
///   count, bin map) | f64 base margin | u64 tree count | per tree: u64 node
///   count, then per node i64 feature, i64 bin, f64 threshold, i64 left,
///   i64 right, f64 value, i64 default_left, i64 depth, i64 rows | u32 CRC32
///   of everything before it.
void save_model(const GbdtModel& model, const std::filesystem::path& path);
std::string serialize_model(const GbdtModel& model);
GbdtModel load_model(const std::filesystem::path& path);
GbdtModel deserialize_model(std::string_view bytes);

}  // namespace wpdeeg
