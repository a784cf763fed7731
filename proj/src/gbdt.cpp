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

#include "wpdeeg/gbdt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "wpdeeg/error.hpp"
#include "wpdeeg/random.hpp"

namespace wpdeeg {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

void TrainParams::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidParams, what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
  if (max_depth < 1) bad("max_depth must be positive");
  if (n_estimators < 0) bad("n_estimators must be non-negative");
  if (!(lambda_l2 >= 0.0)) bad("lambda_l2 must be non-negative");
  if (max_bins < 2 || max_bins > 255) bad("max_bins must be in [2, 255]");
  if (min_samples_leaf < 1) bad("min_samples_leaf must be positive");
  if (max_leaves < 1) bad("max_leaves must be positive");
  if (goss) {
    const double a = goss->top_rate;
    const double b = goss->other_rate;
    if (!(a > 0.0 && a <= 1.0) || !(b >= 0.0 && b < 1.0) || a + b > 1.0 + 1e-12) {
      throw Error(ErrorCode::kInvalidFractions, "GOSS needs 0 < a <= 1, 0 <= b < 1, a + b <= 1");
    }
  }
}

TrainParams preset_params(std::string_view name) {
  TrainParams p;
  p.lambda_l2 = 1.0;
  p.min_samples_leaf = 20;
  p.max_bins = 255;
  if (name == "catboost-like") {
    p.growth = Growth::kDepthWise;
    p.max_depth = 5;
    p.learning_rate = 0.02;
    p.n_estimators = 1500;
  } else if (name == "xgboost-like") {
    p.growth = Growth::kDepthWise;
    p.max_depth = 8;
    p.learning_rate = 0.0156;
    p.n_estimators = 300;
  } else if (name == "lightgbm-like") {
    p.growth = Growth::kLeafWise;
    p.max_depth = 10;
    p.max_leaves = 1 << 10;
    p.learning_rate = 0.0182;
    p.n_estimators = 250;
    p.goss = GossParams{0.2, 0.1};
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown preset '" + std::string(name) + "'");
  }
  return p;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"catboost-like", "xgboost-like", "lightgbm-like"};
  return names;
}

std::string_view growth_name(Growth g) { return g == Growth::kLeafWise ? "leaf_wise" : "depth_wise"; }

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

std::uint8_t BinMap::bin(std::size_t feature, double x) const {
  if (std::isnan(x)) return 0;
  const auto& th = thresholds[feature];
  return static_cast<std::uint8_t>(std::lower_bound(th.begin(), th.end(), x) - th.begin());
}

namespace {

/// A cut strictly between a < b; falls back to a when no double lies between.
double cut_between(double a, double b) {
  double m = a + (b - a) / 2.0;
  if (!std::isfinite(m)) m = a / 2.0 + b / 2.0;
  if (!(m < b) || !(m >= a)) m = a;
  return m;
}

}  // namespace

BinMap build_bin_map(const DenseMatrix& X, int max_bins) {
  if (X.rows() == 0 || X.cols() == 0) throw Error(ErrorCode::kEmptyMatrix, "cannot bin an empty matrix");
  if (max_bins < 2 || max_bins > 255) throw Error(ErrorCode::kInvalidParams, "max_bins must be in [2, 255]");
  BinMap map;
  map.thresholds.resize(X.cols());
  std::vector<double> sorted;
  std::vector<double> distinct;
  for (std::size_t f = 0; f < X.cols(); ++f) {
    sorted.clear();
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const double v = X(r, f);
      if (!std::isnan(v)) sorted.push_back(v);
    }
    std::sort(sorted.begin(), sorted.end());
    distinct.assign(sorted.begin(), sorted.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto& th = map.thresholds[f];
    if (distinct.size() <= 1) continue;

    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) th.push_back(cut_between(distinct[i], distinct[i + 1]));
      continue;
    }
    const std::size_t n = sorted.size();
    for (int j = 1; j < max_bins; ++j) {
      const std::size_t idx = std::max<std::size_t>(1, (static_cast<std::size_t>(j) * n) / static_cast<std::size_t>(max_bins));
      const double lo = sorted[idx - 1];
      const auto next = std::upper_bound(distinct.begin(), distinct.end(), lo);
      if (next == distinct.end()) break;
      const double cut = cut_between(lo, *next);
      if (th.empty() || cut > th.back()) th.push_back(cut);
    }
  }
  return map;
}

BinnedMatrix::BinnedMatrix(const DenseMatrix& X, const BinMap& map)
    : rows_(X.rows()), cols_(X.cols()), bins_(X.rows() * X.cols()), bin_counts_(X.cols()) {
  if (map.features() != X.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "bin map has " + std::to_string(map.features()) + " features, matrix has " +
                                               std::to_string(X.cols()));
  }
  for (std::size_t f = 0; f < cols_; ++f) {
    bin_counts_[f] = map.bin_count(f);
    for (std::size_t r = 0; r < rows_; ++r) bins_[f * rows_ + r] = map.bin(f, X(r, f));
  }
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

double sigmoid(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

GradHess logistic_grad_hess(int label, double margin) {
  const double p = sigmoid(margin);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

double logistic_loss(int label, double margin) {
  // log(1 + e^m) - y m, written to avoid overflow.
  return std::max(margin, 0.0) + std::log1p(std::exp(-std::abs(margin))) - static_cast<double>(label) * margin;
}

// ---------------------------------------------------------------------------
// GOSS
// ---------------------------------------------------------------------------

GossSample goss_sample(std::span<const double> g, double a, double b, std::uint64_t seed) {
  if (!(a > 0.0 && a <= 1.0) || !(b >= 0.0) || a + b > 1.0 + 1e-12) {
    throw Error(ErrorCode::kInvalidFractions, "GOSS needs 0 < a <= 1, 0 <= b, a + b <= 1");
  }
  const std::size_t n = g.size();
  const auto count_for = [n](double frac) {
    return std::min(n, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9)));
  };
  const std::size_t top = count_for(a);
  const std::size_t other = b > 0.0 ? std::min(n - top, count_for(b)) : 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(g[x]) > std::abs(g[y]); });

  std::vector<double> weight(n, 0.0);
  for (std::size_t i = 0; i < top; ++i) weight[order[i]] = 1.0;

  // Partial Fisher-Yates over the small-gradient remainder.
  Rng rng(seed);
  const double amplify = other > 0 ? (1.0 - a) / b : 0.0;
  for (std::size_t i = 0; i < other; ++i) {
    const std::size_t j = top + i + static_cast<std::size_t>(rng.below(n - top - i));
    std::swap(order[top + i], order[j]);
    weight[order[top + i]] = amplify;
  }

  GossSample out;
  out.rows.reserve(top + other);
  out.weights.reserve(top + other);
  for (std::size_t r = 0; r < n; ++r) {
    if (weight[r] > 0.0) {
      out.rows.push_back(r);
      out.weights.push_back(weight[r]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

namespace {

struct NodeTotals {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

NodeTotals node_totals(std::span<const std::size_t> rows, std::span<const double> g, std::span<const double> h) {
  NodeTotals t;
  for (std::size_t r : rows) {
    t.g += g[r];
    t.h += h[r];
  }
  t.count = rows.size();
  return t;
}

inline double score(double G, double H, double lambda) { return G * G / (H + lambda); }

/// Best boundary for one feature. Histogram accumulation follows row order,
/// so the result is independent of how features are scheduled.
std::optional<SplitDecision> best_for_feature(std::size_t f, std::span<const std::size_t> rows, std::span<const double> g,
                                              std::span<const double> h, const BinnedMatrix& X, const SplitConfig& cfg,
                                              const NodeTotals& total) {
  const std::size_t nb = X.bin_count(f);
  if (nb < 2) return std::nullopt;
  // Zeroed once per thread; only the touched range is reset afterwards.
  thread_local std::array<double, 256> hg{};
  thread_local std::array<double, 256> hh{};
  thread_local std::array<std::uint32_t, 256> hc{};
  const auto col = X.column(f);
  std::size_t lo_bin = 255;
  std::size_t hi_bin = 0;
  for (std::size_t r : rows) {
    const std::size_t b = col[r];
    hg[b] += g[r];
    hh[b] += h[r];
    ++hc[b];
    lo_bin = std::min(lo_bin, b);
    hi_bin = std::max(hi_bin, b);
  }
  const double parent = score(total.g, total.h, cfg.lambda_l2);
  std::optional<SplitDecision> best;
  double gl = 0.0, hl = 0.0;
  std::size_t cl = 0;
  // Boundaries below lo_bin leave the left child empty; those at or above
  // hi_bin leave the right child empty.
  for (std::size_t b = lo_bin; b < hi_bin; ++b) {
    gl += hg[b];
    hl += hh[b];
    cl += hc[b];
    const std::size_t cr = total.count - cl;
    if (cl < cfg.min_samples_leaf || cr < cfg.min_samples_leaf) continue;
    const double gr = total.g - gl;
    const double hr = total.h - hl;
    if (hl + cfg.lambda_l2 <= 0.0 || hr + cfg.lambda_l2 <= 0.0) continue;
    const double gain = 0.5 * (score(gl, hl, cfg.lambda_l2) + score(gr, hr, cfg.lambda_l2) - parent);
    if (!best || gain > best->gain) best = SplitDecision{f, b, gain, gl, hl, gr, hr, cl, cr};
  }
  for (std::size_t b = lo_bin; b <= hi_bin; ++b) {
    hg[b] = 0.0;
    hh[b] = 0.0;
    hc[b] = 0;
  }
  return best;
}

std::optional<SplitDecision> reduce_in_order(const std::vector<std::optional<SplitDecision>>& per_feature) {
  std::optional<SplitDecision> best;
  for (const auto& cand : per_feature) {
    if (cand && (!best || cand->gain > best->gain)) best = cand;
  }
  if (best && !(best->gain > 0.0)) return std::nullopt;
  return best;
}

}  // namespace

std::optional<SplitDecision> find_best_split_serial(std::span<const std::size_t> node_rows, std::span<const double> g,
                                                    std::span<const double> h, const BinnedMatrix& X,
                                                    const SplitConfig& cfg) {
  if (node_rows.empty()) return std::nullopt;
  const NodeTotals total = node_totals(node_rows, g, h);
  std::vector<std::optional<SplitDecision>> per_feature(X.cols());
  for (std::size_t f = 0; f < X.cols(); ++f) per_feature[f] = best_for_feature(f, node_rows, g, h, X, cfg, total);
  return reduce_in_order(per_feature);
}

std::optional<SplitDecision> find_best_split(std::span<const std::size_t> node_rows, std::span<const double> g,
                                             std::span<const double> h, const BinnedMatrix& X, const SplitConfig& cfg) {
  if (node_rows.empty()) return std::nullopt;
  const NodeTotals total = node_totals(node_rows, g, h);
  const auto cols = static_cast<long long>(X.cols());
  std::vector<std::optional<SplitDecision>> per_feature(X.cols());
#pragma omp parallel for schedule(dynamic, 32)
  for (long long f = 0; f < cols; ++f) {
    per_feature[static_cast<std::size_t>(f)] = best_for_feature(static_cast<std::size_t>(f), node_rows, g, h, X, cfg, total);
  }
  return reduce_in_order(per_feature);
}

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

double leaf_weight(double G, double H, double lambda_l2) {
  const double denom = H + lambda_l2;
  return denom > 0.0 ? -G / denom : 0.0;
}

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    const double v = x[static_cast<std::size_t>(n.feature)];
    const bool left = std::isnan(v) ? n.default_left : v <= n.threshold;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[i].value;
}

double Tree::predict_binned(const BinnedMatrix& X, std::size_t row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    const bool left = X(row, static_cast<std::size_t>(n.feature)) <= n.bin;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t Tree::max_depth() const {
  std::int64_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return static_cast<std::size_t>(d);
}

namespace {

struct OpenNode {
  std::size_t index;
  std::vector<std::size_t> rows;
  int depth;
  std::optional<SplitDecision> split;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const double> g, std::span<const double> h, const BinnedMatrix& X, const BinMap& map,
              const TrainParams& params)
      : g_(g), h_(h), X_(X), map_(map), params_(params) {
    cfg_.lambda_l2 = params.lambda_l2;
    cfg_.min_samples_leaf = static_cast<std::size_t>(params.min_samples_leaf);
  }

  Tree grow(std::span<const std::size_t> rows) {
    tree_.nodes.clear();
    tree_.nodes.push_back(TreeNode{});
    OpenNode root{0, std::vector<std::size_t>(rows.begin(), rows.end()), 0, std::nullopt};
    if (params_.growth == Growth::kDepthWise) {
      grow_depth_wise(std::move(root));
    } else {
      grow_leaf_wise(std::move(root));
    }
    return std::move(tree_);
  }

 private:
  std::optional<SplitDecision> search(const OpenNode& node) const {
    if (node.depth >= params_.max_depth) return std::nullopt;
    return find_best_split(node.rows, g_, h_, X_, cfg_);
  }

  void make_leaf(const OpenNode& node) {
    const NodeTotals t = node_totals(node.rows, g_, h_);
    TreeNode& n = tree_.nodes[node.index];
    n.feature = -1;
    n.value = leaf_weight(t.g, t.h, params_.lambda_l2);
    n.depth = node.depth;
    n.row_count = static_cast<std::int64_t>(node.rows.size());
  }

  std::pair<OpenNode, OpenNode> split(OpenNode& node) {
    const SplitDecision& s = *node.split;
    const std::size_t left_index = tree_.nodes.size();
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes.push_back(TreeNode{});
    TreeNode& n = tree_.nodes[node.index];
    n.feature = static_cast<std::int64_t>(s.feature);
    n.bin = static_cast<std::int64_t>(s.bin);
    n.threshold = map_.thresholds[s.feature][s.bin];
    n.left = static_cast<std::int64_t>(left_index);
    n.right = static_cast<std::int64_t>(left_index + 1);
    n.default_left = true;
    n.depth = node.depth;
    n.row_count = static_cast<std::int64_t>(node.rows.size());

    OpenNode left{left_index, {}, node.depth + 1, std::nullopt};
    OpenNode right{left_index + 1, {}, node.depth + 1, std::nullopt};
    left.rows.reserve(s.left_count);
    right.rows.reserve(s.right_count);
    const auto col = X_.column(s.feature);
    for (std::size_t r : node.rows) (col[r] <= s.bin ? left.rows : right.rows).push_back(r);
    node.rows.clear();
    node.rows.shrink_to_fit();
    return {std::move(left), std::move(right)};
  }

  void grow_depth_wise(OpenNode root) {
    std::vector<OpenNode> level;
    level.push_back(std::move(root));
    while (!level.empty()) {
      std::vector<OpenNode> next;
      for (auto& node : level) {
        node.split = search(node);
        if (!node.split) {
          make_leaf(node);
          continue;
        }
        auto [l, r] = split(node);
        next.push_back(std::move(l));
        next.push_back(std::move(r));
      }
      level = std::move(next);
    }
  }

  void grow_leaf_wise(OpenNode root) {
    std::vector<OpenNode> open;
    root.split = search(root);
    open.push_back(std::move(root));
    std::size_t leaves = 1;
    while (leaves < static_cast<std::size_t>(params_.max_leaves)) {
      std::size_t pick = open.size();
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (!open[i].split) continue;
        if (pick == open.size() || open[i].split->gain > open[pick].split->gain ||
            (open[i].split->gain == open[pick].split->gain && open[i].index < open[pick].index)) {
          pick = i;
        }
      }
      if (pick == open.size()) break;
      OpenNode node = std::move(open[pick]);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      auto [l, r] = split(node);
      l.split = search(l);
      r.split = search(r);
      open.push_back(std::move(l));
      open.push_back(std::move(r));
      ++leaves;
    }
    for (auto& node : open) make_leaf(node);
  }

  std::span<const double> g_;
  std::span<const double> h_;
  const BinnedMatrix& X_;
  const BinMap& map_;
  const TrainParams& params_;
  SplitConfig cfg_;
  Tree tree_;
};

}  // namespace

Tree grow_tree(std::span<const std::size_t> rows, std::span<const double> g, std::span<const double> h,
               const BinnedMatrix& X, const BinMap& map, const TrainParams& params) {
  if (g.size() != X.rows() || h.size() != X.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient arrays do not match the matrix row count");
  }
  return TreeBuilder(g, h, X, map, params).grow(rows);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

double GbdtModel::predict_margin(std::span<const double> x) const {
  if (x.size() != feature_count) {
    throw Error(ErrorCode::kShapeMismatch, "row has " + std::to_string(x.size()) + " features, model expects " +
                                               std::to_string(feature_count));
  }
  double m = base_margin;
  for (const auto& t : trees) m += params.learning_rate * t.predict(x);
  return m;
}

double predict_proba(const GbdtModel& model, std::span<const double> x) { return sigmoid(model.predict_margin(x)); }

std::vector<double> predict_proba_serial(const GbdtModel& model, const DenseMatrix& X) {
  if (X.cols() != model.feature_count) {
    throw Error(ErrorCode::kShapeMismatch, "matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                                               std::to_string(model.feature_count));
  }
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = predict_proba(model, X.row(r));
  return out;
}

std::vector<double> predict_proba(const GbdtModel& model, const DenseMatrix& X) {
  if (X.cols() != model.feature_count) {
    throw Error(ErrorCode::kShapeMismatch, "matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                                               std::to_string(model.feature_count));
  }
  std::vector<double> out(X.rows());
  const auto rows = static_cast<long long>(X.rows());
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < rows; ++r) {
    out[static_cast<std::size_t>(r)] = predict_proba(model, X.row(static_cast<std::size_t>(r)));
  }
  return out;
}

GbdtModel train(const DenseMatrix& X, std::span<const int> labels, const TrainParams& params, TrainLog* log) {
  params.validate();
  if (X.rows() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, std::to_string(X.rows()) + " rows but " + std::to_string(labels.size()) + " labels");
  }
  if (X.rows() == 0 || X.cols() == 0) throw Error(ErrorCode::kEmptyMatrix, "training matrix is empty");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kInvalidParams, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorCode::kSingleClassData, "training data holds a single class");
  }

  const std::size_t n = X.rows();
  GbdtModel model;
  model.params = params;
  model.feature_count = X.cols();
  model.bin_map = build_bin_map(X, params.max_bins);
  const BinnedMatrix binned(X, model.bin_map);

  const double prior = static_cast<double>(positives) / static_cast<double>(n);
  model.base_margin = std::log(prior / (1.0 - prior));

  std::vector<double> margin(n, model.base_margin);
  std::vector<double> g(n), h(n);
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  const auto mean_loss = [&] {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += logistic_loss(labels[r], margin[r]);
    return s / static_cast<double>(n);
  };
  if (log) log->loss.assign(1, mean_loss());

  model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int t = 0; t < params.n_estimators; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      const GradHess gh = logistic_grad_hess(labels[r], margin[r]);
      g[r] = gh.g;
      h[r] = gh.h;
    }
    Tree tree;
    if (params.goss) {
      const GossSample s = goss_sample(g, params.goss->top_rate, params.goss->other_rate,
                                       mix_seed(params.seed, static_cast<std::uint64_t>(t)));
      for (std::size_t i = 0; i < s.rows.size(); ++i) {
        g[s.rows[i]] *= s.weights[i];
        h[s.rows[i]] *= s.weights[i];
      }
      tree = grow_tree(s.rows, g, h, binned, model.bin_map, params);
    } else {
      tree = grow_tree(all_rows, g, h, binned, model.bin_map, params);
    }

    const auto rows = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < rows; ++r) {
      margin[static_cast<std::size_t>(r)] += params.learning_rate * tree.predict_binned(binned, static_cast<std::size_t>(r));
    }
    model.trees.push_back(std::move(tree));
    if (log) log->loss.push_back(mean_loss());
  }
  return model;
}

}  // namespace wpdeeg
