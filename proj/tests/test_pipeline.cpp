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


#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "wpdeeg/error.hpp"
#include "wpdeeg/feature_file.hpp"
#include "wpdeeg/pipeline.hpp"
#include "wpdeeg/random.hpp"
#include "wpdeeg/text.hpp"

using namespace wpdeeg;
namespace fs = std::filesystem;

namespace {

template <class F>
void check_code(F&& f, ErrorCode want) {
  try {
    f();
    FAIL("expected " << error_code_name(want));
  } catch (const Error& e) {
    CHECK(e.code() == want);
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WPDEEG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Every regular file under root, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return files;
}

std::size_t line_count(const fs::path& p) {
  const std::string text = read_file(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// 20 recordings per class, 32 s each; generated once per process.
const fs::path& small_dataset() {
  static const fs::path dir = [] {
    const fs::path d = oracle::temp_dir("pipeline_data");
    cmd_synth(20, 32.0, 5, d);
    return d;
  }();
  return dir;
}

PipelineConfig config_for(const fs::path& manifest, const std::string& out_name) {
  PipelineConfig cfg;
  cfg.manifest = manifest;
  cfg.out_dir = oracle::temp_dir(out_name);
  return cfg;
}

}  // namespace

TEST_CASE("manifest parsing") {
  const auto dir = oracle::temp_dir("pipeline_manifest");
  write(dir / "ok.csv", "path,label,split\nrec/a.csv,normal,train\n/abs/b.edf,abnormal,eval\n\n");
  const auto m = read_manifest(dir / "ok.csv");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].path == dir / "rec/a.csv");
  CHECK(m.entries[0].id == "a");
  CHECK(m.entries[0].label == ClassLabel::kNormal);
  CHECK(m.entries[1].path == fs::path("/abs/b.edf"));
  CHECK(m.entries[1].split == Split::kEval);
  CHECK(m.split(Split::kTrain).size() == 1);

  const std::map<std::string, std::string> bad = {
      {"header", "file,label,split\na.csv,normal,train\n"},
      {"label", "path,label,split\na.csv,sick,train\n"},
      {"split", "path,label,split\na.csv,normal,test\n"},
      {"columns", "path,label,split\na.csv,normal\n"},
      {"empty path", "path,label,split\n,normal,train\n"},
      {"duplicate", "path,label,split\nx/a.csv,normal,train\ny/a.csv,abnormal,train\n"},
      {"both splits", "path,label,split\nx/a.csv,normal,train\ny/a.edf,normal,eval\n"},
      {"no rows", "path,label,split\n"},
      {"empty file", ""},
  };
  for (const auto& [name, text] : bad) {
    CAPTURE(name);
    write(dir / "bad.csv", text);
    check_code([&] { read_manifest(dir / "bad.csv"); }, ErrorCode::kInvalidManifest);
  }
  check_code([&] { read_manifest(dir / "absent.csv"); }, ErrorCode::kInvalidManifest);
}

TEST_CASE("synth datasets") {
  SUBCASE("split arithmetic") {
    const auto dir = oracle::temp_dir("pipeline_synth_split");
    const auto s = cmd_synth(100, 16.0, 42, dir);
    CHECK(s.train == 160);
    CHECK(s.eval == 40);
    const auto m = read_manifest(dir / "manifest.csv");
    CHECK(m.entries.size() == 200);
    std::map<std::pair<Split, ClassLabel>, int> counts;
    for (const auto& e : m.entries) ++counts[{e.split, e.label}];
    CHECK(counts[{Split::kTrain, ClassLabel::kNormal}] == 80);
    CHECK(counts[{Split::kTrain, ClassLabel::kAbnormal}] == 80);
    CHECK(counts[{Split::kEval, ClassLabel::kNormal}] == 20);
    CHECK(counts[{Split::kEval, ClassLabel::kAbnormal}] == 20);
  }
  SUBCASE("minimum case") {
    const auto dir = oracle::temp_dir("pipeline_synth_min");
    const auto s = cmd_synth(2, 800.0, 1, dir);
    CHECK(s.train + s.eval == 4);
    CHECK(s.train > 0);
    CHECK(s.eval > 0);
    const auto rec = read_csv(dir / "recordings" / "normal_000.csv", 250.0);
    CHECK(rec.channels.size() == 21);
    CHECK(rec.channels[0].samples.size() == 200000);
  }
  SUBCASE("deterministic directory trees") {
    const auto a = oracle::temp_dir("pipeline_synth_a");
    const auto b = oracle::temp_dir("pipeline_synth_b");
    cmd_synth(3, 20.0, 9, a, 1);
    cmd_synth(3, 20.0, 9, b, 2);
    CHECK(snapshot(a) == snapshot(b));
    const auto c = oracle::temp_dir("pipeline_synth_c");
    cmd_synth(3, 20.0, 10, c, 1);
    CHECK(snapshot(a) != snapshot(c));
  }
  SUBCASE("errors") {
    const auto dir = oracle::temp_dir("pipeline_synth_err");
    check_code([&] { cmd_synth(1, 800.0, 1, dir); }, ErrorCode::kInvalidParams);
    check_code([&] { cmd_synth(2, 10.0, 1, dir); }, ErrorCode::kDurationTooShort);
  }
}

TEST_CASE("featurize shape, resume and report") {
  const auto data = small_dataset();
  auto cfg = config_for(data / "manifest.csv", "pipeline_feat");
  const auto first = cmd_featurize(cfg);
  CHECK(first.train.total == 32);
  CHECK(first.train.computed == 32);
  CHECK(first.eval.computed == 8);
  const auto train = read_feature_table(cfg.features_dir() / "train.wpdf");
  CHECK(train.rows() == 32);
  CHECK(train.features.cols() == 4032);
  const auto report = nlohmann::json::parse(read_file(cfg.features_dir() / "run_report.json"));
  CHECK(report["columns"] == 4032);
  CHECK(report["train"]["rows"] == 32);
  CHECK(report["eval"]["skipped"].empty());

  const auto before = snapshot(cfg.features_dir());
  const auto second = cmd_featurize(cfg);
  CHECK(second.train.computed == 0);
  CHECK(second.eval.computed == 0);
  CHECK(second.train.reused == 32);
  CHECK(second.eval.reused == 8);
  const auto after = snapshot(cfg.features_dir());
  CHECK(after.at("train.wpdf") == before.at("train.wpdf"));
  CHECK(after.at("eval.wpdf") == before.at("eval.wpdf"));
}

TEST_CASE("featurize is independent of the worker count") {
  const auto data = small_dataset();
  auto one = config_for(data / "manifest.csv", "pipeline_w1");
  auto two = config_for(data / "manifest.csv", "pipeline_w2");
  two.workers = 2;
  cmd_featurize(one);
  cmd_featurize(two);
  CHECK(read_file(one.features_dir() / "train.wpdf") == read_file(two.features_dir() / "train.wpdf"));
  CHECK(read_file(one.features_dir() / "eval.wpdf") == read_file(two.features_dir() / "eval.wpdf"));
}

TEST_CASE("per-feature normalization") {
  const auto data = small_dataset();
  auto cfg = config_for(data / "manifest.csv", "pipeline_perfeature");
  cfg.normalization = NormalizationScope::kPerFeature;
  cmd_featurize(cfg);
  CHECK(fs::exists(cfg.features_dir() / "scaler.json"));
  const auto train = read_feature_table(cfg.features_dir() / "train.wpdf");
  CHECK(train.features.cols() == 4032);
  std::size_t tags = 0;
  for (const auto& e : fs::directory_iterator(cfg.features_dir() / "cache")) {
    ++tags;
    CHECK(e.path().filename().string().starts_with("periodic-per_feature-"));
  }
  CHECK(tags == 1);
}

TEST_CASE("unreadable recordings are skipped") {
  const auto data = small_dataset();
  // Extra manifests live beside the synthetic one so relative paths resolve.
  const auto dir = data;
  write(dir / "skip_manifest.csv", read_file(data / "manifest.csv") + "missing/ghost.csv,abnormal,train\n");
  write(dir / "broken.csv", "FP1,FP2\n1,2\n3\n");

  auto cfg = config_for(dir / "skip_manifest.csv", "pipeline_skip_out");
  const auto s = cmd_featurize(cfg);
  REQUIRE(s.train.skipped.size() == 1);
  CHECK(s.train.skipped[0].id == "ghost");
  CHECK(read_feature_table(cfg.features_dir() / "train.wpdf").rows() == 32);
  const auto report = nlohmann::json::parse(read_file(cfg.features_dir() / "run_report.json"));
  CHECK(report["train"]["skipped"].size() == 1);
  CHECK(run_cli("featurize --manifest " + (dir / "skip_manifest.csv").string() + " --out " +
                oracle::temp_dir("pipeline_skip_cli").string()) == 0);

  write(dir / "mostly_bad.csv",
        "path,label,split\nrecordings/normal_000.csv,normal,train\nbroken.csv,normal,eval\n"
        "missing/x.csv,abnormal,eval\nrecordings/abnormal_000.csv,abnormal,eval\n");
  auto bad = config_for(dir / "mostly_bad.csv", "pipeline_bad_out");
  check_code([&] { cmd_featurize(bad); }, ErrorCode::kTooManyFailures);
  CHECK(fs::exists(bad.features_dir() / "run_report.json"));
  CHECK(run_cli("featurize --manifest " + (dir / "mostly_bad.csv").string() + " --out " +
                oracle::temp_dir("pipeline_bad_cli").string()) == 2);
}

TEST_CASE("train and evaluate") {
  const auto data = small_dataset();
  auto cfg = config_for(data / "manifest.csv", "pipeline_train");
  cmd_featurize(cfg);

  SUBCASE("catboost-like runs 1500 iterations") {
    const auto log = cmd_train(cfg);
    CHECK(log.loss.size() == 1501);
    CHECK(line_count(cfg.model_dir("catboost-like") / "train_log.csv") == 1502);
    const auto model = load_model(cfg.model_dir("catboost-like") / "model.wpdm");
    CHECK(model.trees.size() == 1500);
    CHECK(model.feature_count == 4032);
  }
  SUBCASE("separable eval set") {
    // Full-width tables whose classes differ by a wide margin in a block of
    // columns; the remaining columns are noise.
    Rng rng(21);
    const auto make = [&](std::size_t per_class, const std::string& prefix) {
      FeatureTable t;
      for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const std::uint8_t label = i < per_class ? 0 : 1;
        std::vector<double> row(4032);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = rng.normal();
        for (std::size_t c = 500; c < 600; ++c) row[c] += label ? 4.0 : -4.0;
        t.append(prefix + std::to_string(i), label, row);
      }
      return t;
    };
    write_feature_table(make(80, "t"), cfg.out_dir / "sep_train.wpdf");
    write_feature_table(make(100, "e"), cfg.out_dir / "sep_eval.wpdf");
    cmd_train(cfg, cfg.out_dir / "sep_train.wpdf");
    const auto r = cmd_evaluate(cfg, std::nullopt, cfg.out_dir / "sep_eval.wpdf");
    CHECK(r.metrics.accuracy >= 99.0);
    CHECK(r.confusion.total() == 200);
    CHECK(line_count(cfg.model_dir("catboost-like") / "predictions.csv") == 201);
    CHECK(fs::exists(cfg.model_dir("catboost-like") / "report.txt"));
    CHECK(fs::exists(cfg.model_dir("catboost-like") / "misclassified.txt"));
  }
  SUBCASE("xgboost-like runs 300 iterations at depth 8") {
    cfg.preset = "xgboost-like";
    CHECK(cmd_train(cfg).loss.size() == 301);
    const auto model = load_model(cfg.model_dir("xgboost-like") / "model.wpdm");
    CHECK(model.trees.size() == 300);
    CHECK(model.params.max_depth == 8);
    for (const auto& t : model.trees) CHECK(t.max_depth() <= 8);
  }
  SUBCASE("n_estimators 0 gives an empty ensemble") {
    cfg.overrides.n_estimators = 0;
    cmd_train(cfg);
    CHECK(load_model(cfg.model_dir("catboost-like") / "model.wpdm").trees.empty());
  }
  SUBCASE("single class training data") {
    auto table = read_feature_table(cfg.features_dir() / "train.wpdf");
    for (auto& l : table.labels) l = 0;
    write_feature_table(table, cfg.out_dir / "one_class.wpdf");
    check_code([&] { cmd_train(cfg, cfg.out_dir / "one_class.wpdf"); }, ErrorCode::kSingleClassData);
  }
  SUBCASE("column mismatch") {
    FeatureTable narrow;
    narrow.ids = {"a", "b", "c", "d"};
    narrow.labels = {0, 1, 0, 1};
    narrow.features = DenseMatrix(4, 3, 0.0);
    for (std::size_t r = 0; r < 4; ++r) narrow.features(r, 0) = static_cast<double>(narrow.labels[r]);
    write_feature_table(narrow, cfg.out_dir / "narrow.wpdf");
    cfg.overrides.n_estimators = 3;
    cfg.overrides.min_samples_leaf = 1;
    cmd_train(cfg, cfg.out_dir / "narrow.wpdf");
    check_code([&] { cmd_evaluate(cfg); }, ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("cli exit codes and venn wiring") {
  const auto data = small_dataset();
  const auto out = oracle::temp_dir("pipeline_cli");
  const std::string manifest = (data / "manifest.csv").string();

  CHECK(run_cli("") == 1);
  CHECK(run_cli("train --no-such-flag") == 1);
  CHECK(run_cli("featurize") == 1);
  CHECK(run_cli("train --preset unknown-like --out " + out.string()) == 1);
  CHECK(run_cli("featurize --manifest " + (out / "absent.csv").string() + " --out " + out.string()) == 2);
  CHECK(run_cli("evaluate --out " + (out / "nothing").string()) == 2);

  CHECK(run_cli("pipeline --manifest " + manifest + " --out " + out.string() + " --n-estimators 20") == 0);
  for (const auto& preset : preset_names()) {
    CHECK(fs::exists(out / "models" / preset / "misclassified.txt"));
    CHECK(fs::exists(out / "models" / preset / "metrics.csv"));
  }
  const std::string venn = read_file(out / "venn.txt");
  CHECK(venn.find("all three: ") != std::string::npos);
  CHECK(std::count(venn.begin(), venn.end(), '\n') == 7);

  const auto m = out / "models";
  CHECK(run_cli("venn --out " + (out / "v2").string() + " " + (m / "catboost-like/misclassified.txt").string() + " " +
                (m / "xgboost-like/misclassified.txt").string() + " " +
                (m / "lightgbm-like/misclassified.txt").string()) == 0);
  CHECK(run_cli("venn --out " + out.string() + " a.txt b.txt") == 1);

  write(out / "cfg.ini", "n_estimators = 5\nbogus = 1\n");
  CHECK(run_cli("train --config " + (out / "cfg.ini").string() + " --out " + out.string()) == 1);
  write(out / "cfg.ini", "n_estimators = 5\nmax_depth = 2\n");
  CHECK(run_cli("train --config " + (out / "cfg.ini").string() + " --out " + out.string()) == 0);
  CHECK(load_model(m / "catboost-like" / "model.wpdm").trees.size() == 5);
  CHECK(run_cli("train --config " + (out / "cfg.ini").string() + " --n-estimators 4 --out " + out.string()) == 0);
  CHECK(load_model(m / "catboost-like" / "model.wpdm").trees.size() == 4);
  CHECK(run_cli("evaluate --threshold 1.5 --out " + out.string()) == 1);
}
