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


#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "wpdeeg/error.hpp"
#include "wpdeeg/gbdt.hpp"
#include "wpdeeg/pipeline.hpp"

namespace {

using namespace wpdeeg;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidParams:
    case ErrorCode::kInvalidFractions:
      return kUsage;
    default:
      return kData;
  }
}

void print_split(const char* name, const SplitSummary& s) {
  std::cout << name << ": " << s.total << " listed, " << s.computed << " computed, " << s.reused << " reused, "
            << s.skipped.size() << " skipped\n";
  for (const auto& k : s.skipped) std::cout << "  skipped " << k.id << ": " << k.reason << '\n';
}

void print_evaluation(const std::string& preset, const EvaluationResult& r) {
  std::cout << "[" << preset << "]\n" << format_report(r.confusion, r.metrics);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG normal/abnormal classification with wavelet-packet features and boosted trees"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI-style key = value file; command-line flags take precedence");
  app.allow_config_extras(false);

  PipelineConfig cfg;
  std::string manifest, out = cfg.out_dir.string();
  std::string extension = "periodic", normalization = "per_vector";
  TrainOverrides& o = cfg.overrides;
  app.add_option("--manifest", manifest, "dataset manifest (CSV: path,label,split)");
  app.add_option("--out", out, "output directory")->capture_default_str();
  auto* preset_opt = app.add_option("--preset", cfg.preset, "catboost-like, xgboost-like or lightgbm-like")
                         ->check(CLI::IsMember(preset_names()))
                         ->capture_default_str();
  app.add_option("--workers", cfg.workers, "parallel recordings during featurization")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--threshold", cfg.threshold, "decision threshold on P(abnormal)")
      ->capture_default_str();
  app.add_option("--extension", extension, "signal extension for the wavelet filters")
      ->check(CLI::IsMember({"periodic", "symmetric"}))
      ->capture_default_str();
  app.add_option("--normalization", normalization, "segment feature normalization")
      ->check(CLI::IsMember({"per_vector", "per_feature"}))
      ->capture_default_str();
  app.add_option("--csv-sample-rate,--csv_sample_rate", cfg.csv_sample_rate, "sample rate assumed for CSV recordings (Hz)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--learning-rate,--learning_rate", o.learning_rate, "override the preset learning rate");
  app.add_option("--max-depth,--max_depth", o.max_depth, "override the preset depth limit");
  app.add_option("--n-estimators,--n_estimators", o.n_estimators, "override the preset tree count");
  app.add_option("--lambda-l2,--lambda_l2", o.lambda_l2, "override the L2 leaf penalty");
  app.add_option("--max-bins,--max_bins", o.max_bins, "override the histogram bin count");
  app.add_option("--min-samples-leaf,--min_samples_leaf", o.min_samples_leaf, "override the minimum rows per leaf");
  app.add_option("--max-leaves,--max_leaves", o.max_leaves, "override the leaf limit (leaf-wise growth)");
  app.add_option("--goss-top-rate,--goss_top_rate", o.goss_top_rate, "enable GOSS / override the large-gradient fraction");
  app.add_option("--goss-other-rate,--goss_other_rate", o.goss_other_rate, "enable GOSS / override the sampled fraction");

  auto* featurize = app.add_subcommand("featurize", "manifest recordings -> features/{train,eval}.wpdf");
  featurize->fallthrough();

  std::string train_features;
  auto* train_cmd = app.add_subcommand("train", "features/train.wpdf -> models/<preset>/model.wpdm");
  train_cmd->add_option("--features", train_features, "training feature file (default: <out>/features/train.wpdf)");
  train_cmd->fallthrough();

  std::string eval_model, eval_features;
  auto* evaluate = app.add_subcommand("evaluate", "score features/eval.wpdf with a trained model");
  evaluate->add_option("--model", eval_model, "model file (default: <out>/models/<preset>/model.wpdm)");
  evaluate->add_option("--features", eval_features, "evaluation feature file (default: <out>/features/eval.wpdf)");
  evaluate->fallthrough();

  std::vector<std::string> venn_lists;
  auto* venn = app.add_subcommand("venn", "overlap of three misclassified-id lists");
  venn->add_option("lists", venn_lists, "three id lists (default: the presets' misclassified.txt under <out>)")
      ->expected(3);
  venn->fallthrough();

  std::size_t n_per_class = 100;
  double duration = 800.0;
  auto* synth = app.add_subcommand("synth", "write a synthetic labelled dataset and manifest to <out>");
  synth->add_option("--n-per-class,--n_per_class", n_per_class, "recordings per class")->capture_default_str();
  synth->add_option("--duration", duration, "recording length in seconds")->capture_default_str();
  synth->fallthrough();

  auto* pipeline = app.add_subcommand("pipeline", "featurize, train, evaluate (all presets plus venn unless --preset)");
  pipeline->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  cfg.manifest = manifest;
  cfg.out_dir = out;
  cfg.extension = extension == "periodic" ? Extension::kPeriodic : Extension::kSymmetric;
  cfg.normalization = normalization == "per_vector" ? NormalizationScope::kPerVector : NormalizationScope::kPerFeature;

  const bool needs_manifest = featurize->parsed() || pipeline->parsed();
  if (needs_manifest && manifest.empty()) {
    std::cerr << "--manifest is required for this command\n";
    return kUsage;
  }

  try {
    if (featurize->parsed()) {
      const auto s = cmd_featurize(cfg);
      print_split("train", s.train);
      print_split("eval", s.eval);
    } else if (train_cmd->parsed()) {
      cfg.train_params();  // validate before reading data
      const auto log = cmd_train(cfg, train_features.empty() ? std::nullopt : std::optional<fs::path>(train_features));
      std::cout << cfg.preset << ": " << (log.loss.empty() ? 0 : log.loss.size() - 1) << " iterations, final loss "
                << (log.loss.empty() ? 0.0 : log.loss.back()) << '\n';
    } else if (evaluate->parsed()) {
      const auto r = cmd_evaluate(cfg, eval_model.empty() ? std::nullopt : std::optional<fs::path>(eval_model),
                                  eval_features.empty() ? std::nullopt : std::optional<fs::path>(eval_features));
      print_evaluation(cfg.preset, r);
    } else if (venn->parsed()) {
      std::array<fs::path, 3> lists;
      std::array<std::string, 3> names;
      for (std::size_t i = 0; i < 3; ++i) {
        if (venn_lists.empty()) {
          names[i] = preset_names()[i];
          lists[i] = cfg.model_dir(names[i]) / "misclassified.txt";
        } else {
          lists[i] = venn_lists[i];
          names[i] = lists[i].parent_path().filename().string();
          if (names[i].empty()) names[i] = lists[i].stem().string();
        }
      }
      std::cout << format_venn(cmd_venn(cfg, lists, names), names);
    } else if (synth->parsed()) {
      const auto s = cmd_synth(n_per_class, duration, cfg.seed, cfg.out_dir, cfg.workers);
      std::cout << "wrote " << s.train + s.eval << " recordings (" << s.train << " train, " << s.eval
                << " eval) and " << (cfg.out_dir / "manifest.csv").string() << '\n';
    } else if (pipeline->parsed()) {
      const std::vector<std::string> presets =
          preset_opt->count() > 0 ? std::vector<std::string>{cfg.preset} : preset_names();
      for (const auto& p : presets) {
        PipelineConfig c = cfg;
        c.preset = p;
        c.train_params();
      }
      const auto r = cmd_pipeline(cfg, presets);
      print_split("train", r.featurize.train);
      print_split("eval", r.featurize.eval);
      for (const auto& [p, e] : r.evaluations) print_evaluation(p, e);
      if (r.venn) std::cout << format_venn(*r.venn, {presets[0], presets[1], presets[2]});
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
