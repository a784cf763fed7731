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

#include <fstream>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "wpdeeg/binary_io.hpp"
#include "wpdeeg/error.hpp"
#include "wpdeeg/gbdt.hpp"
#include "wpdeeg/text.hpp"

namespace wpdeeg {

namespace {

constexpr std::string_view kMagic = "WPDM";

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

nlohmann::json params_to_json(const TrainParams& p) {
  nlohmann::json j;
  j["learning_rate"] = p.learning_rate;
  j["max_depth"] = p.max_depth;
  j["n_estimators"] = p.n_estimators;
  j["lambda_l2"] = p.lambda_l2;
  j["max_bins"] = p.max_bins;
  j["min_samples_leaf"] = p.min_samples_leaf;
  if (p.goss) {
    j["goss"] = {{"top_rate", p.goss->top_rate}, {"other_rate", p.goss->other_rate}};
  } else {
    j["goss"] = nullptr;
  }
  j["seed"] = p.seed;
  j["growth"] = std::string(growth_name(p.growth));
  j["max_leaves"] = p.max_leaves;
  return j;
}

TrainParams params_from_json(const nlohmann::json& j) {
  TrainParams p;
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.n_estimators = j.at("n_estimators").get<int>();
  p.lambda_l2 = j.at("lambda_l2").get<double>();
  p.max_bins = j.at("max_bins").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  if (!j.at("goss").is_null()) {
    p.goss = GossParams{j.at("goss").at("top_rate").get<double>(), j.at("goss").at("other_rate").get<double>()};
  }
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto growth = j.at("growth").get<std::string>();
  if (growth == "leaf_wise") {
    p.growth = Growth::kLeafWise;
  } else if (growth == "depth_wise") {
    p.growth = Growth::kDepthWise;
  } else {
    throw Error(ErrorCode::kCorruptModelFile, "unknown growth '" + growth + "'");
  }
  p.max_leaves = j.at("max_leaves").get<int>();
  return p;
}

}  // namespace

std::string serialize_model(const GbdtModel& model) {
  nlohmann::json header;
  header["params"] = params_to_json(model.params);
  header["feature_count"] = model.feature_count;
  header["bin_map"] = model.bin_map.thresholds;
  const std::string text = header.dump();

  ByteWriter w;
  w.bytes(kMagic);
  w.u16(kModelFileVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text);
  w.f64(model.base_margin);
  w.u64(model.trees.size());
  for (const auto& tree : model.trees) {
    w.u64(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      w.i64(n.feature);
      w.i64(n.bin);
      w.f64(n.threshold);
      w.i64(n.left);
      w.i64(n.right);
      w.f64(n.value);
      w.i64(n.default_left ? 1 : 0);
      w.i64(n.depth);
      w.i64(n.row_count);
    }
  }
  std::string out = w.data();
  ByteWriter tail;
  tail.u32(crc32_of(out));
  out += tail.data();
  return out;
}

GbdtModel deserialize_model(std::string_view bytes) {
  ByteReader r(bytes, ErrorCode::kCorruptModelFile);
  if (r.bytes(4) != kMagic) throw Error(ErrorCode::kCorruptModelFile, "not a WPDM model file");
  const auto version = r.u16();
  if (version > kModelFileVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "model version " + std::to_string(version) + " is newer than supported " +
                                                    std::to_string(kModelFileVersion));
  }
  if (bytes.size() < 10) throw Error(ErrorCode::kCorruptModelFile, "model file truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  ByteReader crc_reader(bytes.substr(bytes.size() - 4), ErrorCode::kCorruptModelFile);
  if (crc_reader.u32() != crc32_of(body)) throw Error(ErrorCode::kCorruptModelFile, "checksum mismatch");

  GbdtModel model;
  ByteReader br(body, ErrorCode::kCorruptModelFile);
  br.bytes(6);
  const std::size_t header_len = br.u32();
  try {
    const auto header = nlohmann::json::parse(br.bytes(header_len));
    model.params = params_from_json(header.at("params"));
    model.feature_count = header.at("feature_count").get<std::size_t>();
    model.bin_map.thresholds = header.at("bin_map").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptModelFile, std::string("bad model header: ") + e.what());
  }
  model.base_margin = br.f64();
  const std::uint64_t tree_count = br.u64();
  // Each node occupies 72 bytes; reject counts the payload cannot hold.
  if (tree_count > br.remaining() / 8) throw Error(ErrorCode::kCorruptModelFile, "tree count exceeds payload");
  model.trees.resize(tree_count);
  for (auto& tree : model.trees) {
    const std::uint64_t node_count = br.u64();
    if (node_count == 0 || node_count > br.remaining() / 72) {
      throw Error(ErrorCode::kCorruptModelFile, "bad node count");
    }
    tree.nodes.resize(node_count);
    for (auto& n : tree.nodes) {
      n.feature = br.i64();
      n.bin = br.i64();
      n.threshold = br.f64();
      n.left = br.i64();
      n.right = br.i64();
      n.value = br.f64();
      n.default_left = br.i64() != 0;
      n.depth = br.i64();
      n.row_count = br.i64();
    }
    const auto count = static_cast<std::int64_t>(node_count);
    // Children always follow their parent, which also rules out cycles.
    for (std::int64_t i = 0; i < count; ++i) {
      const auto& n = tree.nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) continue;
      if (n.feature >= static_cast<std::int64_t>(model.feature_count) || n.left <= i || n.left >= count || n.right <= i ||
          n.right >= count) {
        throw Error(ErrorCode::kCorruptModelFile, "tree node references out of range");
      }
    }
  }
  if (br.remaining() != 0) throw Error(ErrorCode::kCorruptModelFile, "trailing bytes after trees");
  return model;
}

void save_model(const GbdtModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

GbdtModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace wpdeeg
