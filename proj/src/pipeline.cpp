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


#include "wpdeeg/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "wpdeeg/error.hpp"
#include "wpdeeg/feature_file.hpp"
#include "wpdeeg/preprocess.hpp"
#include "wpdeeg/random.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

namespace fs = std::filesystem;

std::string_view split_name(Split s) { return s == Split::kTrain ? "train" : "eval"; }

std::vector<const ManifestEntry*> DatasetManifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(&e);
  }
  return out;
}

DatasetManifest read_manifest(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidManifest, "cannot read manifest " + path.string());
  }
  const fs::path base = path.parent_path();
  LineReader lines(text);
  std::string_view line;
  if (!lines.next(line)) throw Error(ErrorCode::kInvalidManifest, path.string() + " is empty");
  {
    const auto cols = split(line, ',');
    if (cols.size() != 3 || to_lower(trim(cols[0])) != "path" || to_lower(trim(cols[1])) != "label" ||
        to_lower(trim(cols[2])) != "split") {
      throw Error(ErrorCode::kInvalidManifest, "header must be 'path,label,split'");
    }
  }
  DatasetManifest m;
  std::map<std::string, Split> seen;
  std::size_t line_no = 1;
  while (lines.next(line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto cols = split(line, ',');
    if (cols.size() != 3) throw Error(ErrorCode::kInvalidManifest, where + "expected 3 columns");
    ManifestEntry e;
    const auto p = trim(cols[0]);
    if (p.empty()) throw Error(ErrorCode::kInvalidManifest, where + "empty path");
    e.path = fs::path(std::string(p));
    if (e.path.is_relative()) e.path = base / e.path;
    const auto label = parse_class_label(trim(cols[1]));
    if (!label) throw Error(ErrorCode::kInvalidManifest, where + "label must be normal or abnormal");
    e.label = *label;
    const auto s = to_lower(trim(cols[2]));
    if (s == "train") {
      e.split = Split::kTrain;
    } else if (s == "eval") {
      e.split = Split::kEval;
    } else {
      throw Error(ErrorCode::kInvalidManifest, where + "split must be train or eval");
    }
    e.id = e.path.stem().string();
    const auto [it, fresh] = seen.emplace(e.id, e.split);
    if (!fresh) {
      if (it->second != e.split) {
        throw Error(ErrorCode::kInvalidManifest, where + "recording id '" + e.id + "' appears in both splits");
      }
      throw Error(ErrorCode::kInvalidManifest, where + "duplicate recording id '" + e.id + "'");
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw Error(ErrorCode::kInvalidManifest, path.string() + " lists no recordings");
  return m;
}

Recording load_recording(const ManifestEntry& entry, double csv_sample_rate) {
  const auto ext = to_lower(entry.path.extension().string());
  Recording rec;
  if (ext == ".edf") {
    rec = read_edf(entry.path);
  } else if (ext == ".csv") {
    rec = read_csv(entry.path, csv_sample_rate);
  } else {
    throw Error(ErrorCode::kIoFailure, "unsupported recording type '" + ext + "' for " + entry.path.string());
  }
  rec.id = entry.id;
  rec.label = entry.label;
  return rec;
}

TrainParams PipelineConfig::train_params() const {
  TrainParams p = preset_params(preset);
  const auto& o = overrides;
  if (o.learning_rate) p.learning_rate = *o.learning_rate;
  if (o.max_depth) p.max_depth = *o.max_depth;
  if (o.n_estimators) p.n_estimators = *o.n_estimators;
  if (o.lambda_l2) p.lambda_l2 = *o.lambda_l2;
  if (o.max_bins) p.max_bins = *o.max_bins;
  if (o.min_samples_leaf) p.min_samples_leaf = *o.min_samples_leaf;
  if (o.max_leaves) p.max_leaves = *o.max_leaves;
  if (o.goss_top_rate || o.goss_other_rate) {
    GossParams g = p.goss.value_or(GossParams{});
    if (o.goss_top_rate) g.top_rate = *o.goss_top_rate;
    if (o.goss_other_rate) g.other_rate = *o.goss_other_rate;
    p.goss = g;
  }
  p.seed = seed;
  p.validate();
  return p;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

int worker_count(int workers) { return std::max(1, workers); }

std::uint32_t crc_of(const void* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, static_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

// Cached rows are only valid for the options that produced them.
std::string cache_tag(const PipelineConfig& cfg, const FeatureScaler* scaler) {
  std::string tag = cfg.extension == Extension::kPeriodic ? "periodic" : "symmetric";
  if (scaler == nullptr) return tag + "-per_vector";
  std::vector<double> params(scaler->mean().begin(), scaler->mean().end());
  params.insert(params.end(), scaler->scale().begin(), scaler->scale().end());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc_of(params.data(), params.size() * sizeof(double)));
  return tag + "-per_feature-" + buf;
}

// Runs fn(i) for each i on `workers` threads. Data errors are captured per
// item as skip reasons; anything else aborts after the loop.
template <typename Fn>
std::vector<std::string> for_each_recording(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::string> reasons(n);
  std::exception_ptr fatal;
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count(workers))
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (const Error& e) {
      reasons[static_cast<std::size_t>(i)] = e.what();
    } catch (...) {
#pragma omp critical(wpdeeg_fatal)
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);
  return reasons;
}

FeatureScaler fit_scaler(const std::vector<const ManifestEntry*>& train, const PipelineConfig& cfg) {
  FeatureScaler scaler;
  // Bounded batches keep at most `workers` raw tensors alive; accumulating in
  // manifest order keeps the fit independent of the worker count.
  const std::size_t batch = static_cast<std::size_t>(worker_count(cfg.workers));
  for (std::size_t start = 0; start < train.size(); start += batch) {
    const std::size_t n = std::min(batch, train.size() - start);
    std::vector<std::optional<FeatureTensor>> tensors(n);
    for_each_recording(n, cfg.workers, [&](std::size_t i) {
      const Recording rec = load_recording(*train[start + i], cfg.csv_sample_rate);
      tensors[i] = featurize_segments(preprocess_recording(rec), cfg.extension);
    });
    for (const auto& t : tensors) {
      if (t) scaler.accumulate(*t);
    }
  }
  scaler.finish();
  return scaler;
}

std::optional<std::vector<double>> read_cached_row(const fs::path& path, const std::string& id) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    const FeatureTable t = read_feature_table(path);
    if (t.rows() != 1 || t.features.cols() != kAggregatedFeatures || t.ids.front() != id) return std::nullopt;
    const auto row = t.features.row(0);
    return std::vector<double>(row.begin(), row.end());
  } catch (const Error&) {
    return std::nullopt;  // recompute
  }
}

SplitSummary featurize_split(const std::vector<const ManifestEntry*>& entries, const PipelineConfig& cfg,
                             const FeatureOptions& opts, const fs::path& cache_dir, FeatureTable& table) {
  SplitSummary summary;
  summary.total = entries.size();
  std::vector<std::optional<std::vector<double>>> rows(entries.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    rows[i] = read_cached_row(cache_dir / (entries[i]->id + ".wpdf"), entries[i]->id);
    if (rows[i]) {
      ++summary.reused;
    } else {
      pending.push_back(i);
    }
  }
  const auto reasons = for_each_recording(pending.size(), cfg.workers, [&](std::size_t k) {
    const auto& e = *entries[pending[k]];
    auto row = featurize_recording(load_recording(e, cfg.csv_sample_rate), opts);
    FeatureTable one;
    one.append(e.id, static_cast<std::uint8_t>(e.label), row);
    write_feature_table(one, cache_dir / (e.id + ".wpdf"));
    rows[pending[k]] = std::move(row);
  });
  for (std::size_t k = 0; k < pending.size(); ++k) {
    if (reasons[k].empty()) {
      ++summary.computed;
    } else {
      const auto& e = *entries[pending[k]];
      summary.skipped.push_back({e.id, e.path.string(), reasons[k]});
    }
  }
  table = FeatureTable{};
  table.features = DenseMatrix(0, kAggregatedFeatures);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (rows[i]) table.append(entries[i]->id, static_cast<std::uint8_t>(entries[i]->label), *rows[i]);
  }
  return summary;
}

nlohmann::json summary_json(const SplitSummary& s, std::size_t rows) {
  nlohmann::json j;
  j["total"] = s.total;
  j["rows"] = rows;
  j["computed"] = s.computed;
  j["reused"] = s.reused;
  j["skipped"] = nlohmann::json::array();
  for (const auto& k : s.skipped) j["skipped"].push_back({{"id", k.id}, {"path", k.path}, {"reason", k.reason}});
  return j;
}

std::vector<int> int_labels(const FeatureTable& t) {
  std::vector<int> y(t.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (t.labels[i] == kLabelNone) throw Error(ErrorCode::kEmptyInput, "row '" + t.ids[i] + "' has no label");
    y[i] = t.labels[i];
  }
  return y;
}

}  // namespace

FeaturizeSummary cmd_featurize(const PipelineConfig& cfg) {
  const DatasetManifest manifest = read_manifest(cfg.manifest);
  const auto train = manifest.split(Split::kTrain);
  const auto eval = manifest.split(Split::kEval);
  const fs::path dir = cfg.features_dir();
  fs::create_directories(dir);

  FeatureOptions opts{cfg.extension, cfg.normalization, nullptr};
  FeatureScaler scaler;
  if (cfg.normalization == NormalizationScope::kPerFeature) {
    scaler = fit_scaler(train, cfg);
    scaler.save(dir / "scaler.json");
    opts.scaler = &scaler;
  }
  const fs::path cache_dir = dir / "cache" / cache_tag(cfg, opts.scaler);
  fs::create_directories(cache_dir);

  FeaturizeSummary summary;
  FeatureTable train_table, eval_table;
  summary.train = featurize_split(train, cfg, opts, cache_dir, train_table);
  summary.eval = featurize_split(eval, cfg, opts, cache_dir, eval_table);
  write_feature_table(train_table, dir / "train.wpdf");
  write_feature_table(eval_table, dir / "eval.wpdf");

  nlohmann::json report;
  report["extension"] = cfg.extension == Extension::kPeriodic ? "periodic" : "symmetric";
  report["normalization"] = cfg.normalization == NormalizationScope::kPerVector ? "per_vector" : "per_feature";
  report["columns"] = kAggregatedFeatures;
  report["train"] = summary_json(summary.train, train_table.rows());
  report["eval"] = summary_json(summary.eval, eval_table.rows());
  write_text(dir / "run_report.json", report.dump(2) + "\n");

  for (const auto& [name, s] : {std::pair{"train", &summary.train}, std::pair{"eval", &summary.eval}}) {
    if (s->skipped.size() * 2 > s->total) {
      throw Error(ErrorCode::kTooManyFailures, std::to_string(s->skipped.size()) + " of " + std::to_string(s->total) +
                                                   " " + name + " recordings failed; see run_report.json");
    }
  }
  return summary;
}

TrainLog cmd_train(const PipelineConfig& cfg, const std::optional<fs::path>& features) {
  const TrainParams params = cfg.train_params();
  const FeatureTable table = read_feature_table(features.value_or(cfg.features_dir() / "train.wpdf"));
  const std::vector<int> y = int_labels(table);
  TrainLog log;
  const GbdtModel model = train(table.features, y, params, &log);
  const fs::path dir = cfg.model_dir(cfg.preset);
  fs::create_directories(dir);
  save_model(model, dir / "model.wpdm");
  std::string csv = "iteration,loss\n";
  for (std::size_t t = 0; t < log.loss.size(); ++t) csv += std::to_string(t) + "," + format_double(log.loss[t]) + "\n";
  write_text(dir / "train_log.csv", csv);
  return log;
}

EvaluationResult cmd_evaluate(const PipelineConfig& cfg, const std::optional<fs::path>& model_path,
                              const std::optional<fs::path>& features) {
  const fs::path dir = cfg.model_dir(cfg.preset);
  const GbdtModel model = load_model(model_path.value_or(dir / "model.wpdm"));
  const FeatureTable table = read_feature_table(features.value_or(cfg.features_dir() / "eval.wpdf"));
  if (table.features.cols() != model.feature_count) {
    throw Error(ErrorCode::kShapeMismatch, "eval matrix has " + std::to_string(table.features.cols()) +
                                               " columns, model expects " + std::to_string(model.feature_count));
  }
  const std::vector<int> y = int_labels(table);
  const std::vector<double> prob = predict_proba(model, table.features);

  EvaluationResult r;
  r.confusion = confusion(y, prob, cfg.threshold);
  r.metrics = metrics(r.confusion);
  std::vector<std::string> fn_ids, fp_ids;
  std::string predictions = "id,label,probability,predicted\n";
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int predicted = prob[i] >= cfg.threshold ? 1 : 0;
    predictions += table.ids[i] + "," + std::string(class_label_name(static_cast<ClassLabel>(y[i]))) + "," +
                   format_double(prob[i]) + "," + std::string(class_label_name(static_cast<ClassLabel>(predicted))) +
                   "\n";
    if (predicted == y[i]) continue;
    r.misclassified.push_back(table.ids[i]);
    (y[i] == 1 ? fn_ids : fp_ids).push_back(table.ids[i]);
  }
  fs::create_directories(dir);
  write_text(dir / "report.txt", format_report(r.confusion, r.metrics));
  write_text(dir / "metrics.csv", format_report_csv(r.confusion, r.metrics));
  write_text(dir / "predictions.csv", predictions);
  write_id_list(r.misclassified, dir / "misclassified.txt");
  write_id_list(fn_ids, dir / "false_negatives.txt");
  write_id_list(fp_ids, dir / "false_positives.txt");
  return r;
}

VennCounts cmd_venn(const PipelineConfig& cfg, const std::array<fs::path, 3>& lists,
                    const std::array<std::string, 3>& names) {
  const VennCounts v = overlap(read_id_list(lists[0]), read_id_list(lists[1]), read_id_list(lists[2]));
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "venn.txt", format_venn(v, names));
  return v;
}

SynthSummary cmd_synth(std::size_t n_per_class, double duration_s, std::uint64_t seed, const fs::path& out_dir,
                       int workers) {
  if (n_per_class < 2) throw Error(ErrorCode::kInvalidParams, "synth needs at least 2 recordings per class");
  if (duration_s < 16.0) throw Error(ErrorCode::kDurationTooShort, "synth recordings must last at least 16 s");
  // 80/20 per class, keeping one recording of each class in both splits.
  const auto n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n_per_class))),
                                               1, n_per_class - 1);
  const fs::path rec_dir = out_dir / "recordings";
  fs::create_directories(rec_dir);

  struct Item {
    ClassLabel cls;
    std::size_t index;
    std::string name;
  };
  std::vector<Item> items;
  for (const ClassLabel cls : {ClassLabel::kNormal, ClassLabel::kAbnormal}) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%03zu", std::string(class_label_name(cls)).c_str(), i);
      items.push_back({cls, i, name});
    }
  }
  std::exception_ptr fatal;
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count(workers))
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(items.size()); ++k) {
    try {
      const auto& it = items[static_cast<std::size_t>(k)];
      Recording rec = synth_recording(it.cls, duration_s, mix_seed(seed, static_cast<std::uint64_t>(k)));
      rec.id = it.name;
      write_csv(rec, rec_dir / (it.name + ".csv"), 2);
    } catch (...) {
#pragma omp critical(wpdeeg_fatal)
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  SynthSummary s;
  std::string manifest = "path,label,split\n";
  for (const auto& it : items) {
    const bool is_train = it.index < n_train;
    manifest += "recordings/" + it.name + ".csv," + std::string(class_label_name(it.cls)) + "," +
                (is_train ? "train" : "eval") + "\n";
    ++(is_train ? s.train : s.eval);
  }
  write_text(out_dir / "manifest.csv", manifest);
  return s;
}

PipelineResult cmd_pipeline(const PipelineConfig& cfg, const std::vector<std::string>& presets) {
  PipelineResult result;
  for (const auto& p : presets) preset_params(p);  // fail on a bad name before any work
  result.featurize = cmd_featurize(cfg);
  for (const auto& p : presets) {
    PipelineConfig c = cfg;
    c.preset = p;
    cmd_train(c);
    result.evaluations.emplace_back(p, cmd_evaluate(c));
  }
  if (presets.size() == 3) {
    std::array<fs::path, 3> lists;
    std::array<std::string, 3> names;
    for (std::size_t i = 0; i < 3; ++i) {
      lists[i] = cfg.model_dir(presets[i]) / "misclassified.txt";
      names[i] = presets[i];
    }
    result.venn = cmd_venn(cfg, lists, names);
  }
  return result;
}

}  // namespace wpdeeg
