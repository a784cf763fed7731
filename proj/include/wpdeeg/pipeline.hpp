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


// Command implementations behind the wpdeeg executable. Every command reads
// and writes files under one output directory:
//
//   <out>/features/{train,eval}.wpdf      aggregated feature tables
//   <out>/features/run_report.json        featurize counts and skips
//   <out>/features/cache/<tag>/<id>.wpdf  per-recording rows (resume)
//   <out>/models/<preset>/...             model, training log, reports
//   <out>/venn.txt

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wpdeeg/eval.hpp"
#include "wpdeeg/features.hpp"
#include "wpdeeg/gbdt.hpp"
#include "wpdeeg/signal_io.hpp"

namespace wpdeeg {

enum class Split { kTrain, kEval };
std::string_view split_name(Split s);

struct ManifestEntry {
  std::filesystem::path path;  // resolved against the manifest's directory
  ClassLabel label = ClassLabel::kNormal;
  Split split = Split::kTrain;
  std::string id;  // file stem
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(Split s) const;
};

/// CSV with header `path,label,split`. Throws InvalidManifest on a bad
/// header or cell, a duplicate id, or an id present in both splits.
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Picks the reader by file extension (.edf or .csv).
Recording load_recording(const ManifestEntry& entry, double csv_sample_rate);

/// Unset fields keep the preset's value.
struct TrainOverrides {
  std::optional<double> learning_rate;
  std::optional<int> max_depth;
  std::optional<int> n_estimators;
  std::optional<double> lambda_l2;
  std::optional<int> max_bins;
  std::optional<int> min_samples_leaf;
  std::optional<int> max_leaves;
  std::optional<double> goss_top_rate;
  std::optional<double> goss_other_rate;
};

struct PipelineConfig {
  std::filesystem::path manifest;
  std::filesystem::path out_dir = "wpdeeg_out";
  Extension extension = Extension::kPeriodic;
  NormalizationScope normalization = NormalizationScope::kPerVector;
  std::string preset = "catboost-like";
  TrainOverrides overrides;
  int workers = 1;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  double csv_sample_rate = 250.0;

  /// Preset with overrides and seed applied; validated.
  TrainParams train_params() const;
  std::filesystem::path features_dir() const { return out_dir / "features"; }
  std::filesystem::path model_dir(const std::string& preset_name) const { return out_dir / "models" / preset_name; }
};

struct SkippedRecording {
  std::string id;
  std::string path;
  std::string reason;
};

struct SplitSummary {
  std::size_t total = 0;
  std::size_t computed = 0;
  std::size_t reused = 0;
  std::vector<SkippedRecording> skipped;
};

struct FeaturizeSummary {
  SplitSummary train;
  SplitSummary eval;
};

/// Writes features/{train,eval}.wpdf and run_report.json. Recordings that
/// fail to load or featurize are skipped and reported; throws when more than
/// half of a split fails. Rows already present in the cache are reused.
FeaturizeSummary cmd_featurize(const PipelineConfig& cfg);

/// Trains on features/train.wpdf (or `features`) and writes model.wpdm and
/// train_log.csv under models/<preset>/.
TrainLog cmd_train(const PipelineConfig& cfg, const std::optional<std::filesystem::path>& features = std::nullopt);

struct EvaluationResult {
  ConfusionMatrix confusion;
  MetricsReport metrics;
  std::vector<std::string> misclassified;
};

/// Scores features/eval.wpdf with models/<preset>/model.wpdm and writes
/// report.txt, metrics.csv, predictions.csv, misclassified.txt,
/// false_negatives.txt and false_positives.txt next to the model.
EvaluationResult cmd_evaluate(const PipelineConfig& cfg, const std::optional<std::filesystem::path>& model = std::nullopt,
                              const std::optional<std::filesystem::path>& features = std::nullopt);

/// Overlap of three misclassified-id lists; writes <out>/venn.txt.
VennCounts cmd_venn(const PipelineConfig& cfg, const std::array<std::filesystem::path, 3>& lists,
                    const std::array<std::string, 3>& names);

struct SynthSummary {
  std::size_t train = 0;
  std::size_t eval = 0;
};

/// n_per_class recordings of each class as 2-decimal CSV under
/// <out_dir>/recordings plus <out_dir>/manifest.csv. 80% of each class goes
/// to train, and both splits get at least one recording per class.
SynthSummary cmd_synth(std::size_t n_per_class, double duration_s, std::uint64_t seed,
                       const std::filesystem::path& out_dir, int workers = 1);

struct PipelineResult {
  FeaturizeSummary featurize;
  std::vector<std::pair<std::string, EvaluationResult>> evaluations;
  std::optional<VennCounts> venn;
};

/// featurize, then train and evaluate each preset in `presets`; with all
/// three presets the Venn overlap of their misclassifications follows.
PipelineResult cmd_pipeline(const PipelineConfig& cfg, const std::vector<std::string>& presets);

}  // namespace wpdeeg
