#include "rose/dataset.h"

#include <set>

#include "json.hpp"

#include "rose/error.h"
#include "rose/features.h"
#include "rose/image.h"
#include "rose/matrix_io.h"

namespace rose {

namespace {

EntryKind entry_kind_from_string(const std::string& s) {
  if (s == "gray-image") return EntryKind::kGrayImage;
  if (s == "color-image") return EntryKind::kColorImage;
  if (s == "matrix") return EntryKind::kMatrix;
  throw Error(ErrorCode::kConfigError, "unknown entry kind '" + s + "'");
}

FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "intensity5") return FeatureMode::kIntensity5;
  if (s == "color11") return FeatureMode::kColor11;
  if (s == "gabor43") return FeatureMode::kGabor43;
  if (s == "precomputed") return FeatureMode::kPrecomputed;
  throw Error(ErrorCode::kConfigError, "unknown feature_mode '" + s + "'");
}

EntryKind required_kind(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kIntensity5:
    case FeatureMode::kGabor43:
      return EntryKind::kGrayImage;
    case FeatureMode::kColor11:
      return EntryKind::kColorImage;
    case FeatureMode::kPrecomputed:
      break;
  }
  return EntryKind::kMatrix;
}

ManifestEntry parse_entry(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "manifest entry must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "path" && key != "label" && key != "kind") {
      throw Error(ErrorCode::kConfigError, "unknown manifest entry field '" + key + "'");
    }
  }
  ManifestEntry e;
  if (!j.contains("path") || !j.at("path").is_string()) {
    throw Error(ErrorCode::kConfigError, "manifest entry needs a string path");
  }
  if (!j.contains("label") || !j.at("label").is_number_integer()) {
    throw Error(ErrorCode::kConfigError, "manifest entry needs an integer label");
  }
  e.path = j.at("path").get<std::string>();
  e.label = j.at("label").get<int>();
  e.kind = entry_kind_from_string(j.value("kind", std::string("matrix")));
  return e;
}

std::vector<SpdMatrix> descriptors_for(const DatasetManifest& m,
                                       const std::filesystem::path& path) {
  const int rows = m.grid ? m.grid->first : 1;
  const int cols = m.grid ? m.grid->second : 1;
  switch (m.feature_mode) {
    case FeatureMode::kPrecomputed: {
      std::vector<SpdMatrix> out;
      for (const auto& raw : read_matrix_file(path)) out.push_back(validate_spd(raw));
      if (out.empty()) throw Error(ErrorCode::kParseError, "no matrices in file");
      return out;
    }
    case FeatureMode::kIntensity5:
      return grid_covariances(intensity_feature_map(downsample(read_pgm(path), m.downsample)),
                              rows, cols);
    case FeatureMode::kGabor43:
      return grid_covariances(gabor_feature_map(downsample(read_pgm(path), m.downsample)),
                              rows, cols);
    case FeatureMode::kColor11:
      return grid_covariances(color_feature_map(downsample(read_ppm(path), m.downsample)),
                              rows, cols);
  }
  return {};
}

}  // namespace

std::string to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::kGrayImage:
      return "gray-image";
    case EntryKind::kColorImage:
      return "color-image";
    case EntryKind::kMatrix:
      break;
  }
  return "matrix";
}

std::string to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kIntensity5:
      return "intensity5";
    case FeatureMode::kColor11:
      return "color11";
    case FeatureMode::kGabor43:
      return "gabor43";
    case FeatureMode::kPrecomputed:
      break;
  }
  return "precomputed";
}

int DatasetManifest::n_classes() const {
  int top = -1;
  for (const auto& e : entries) top = std::max(top, e.label);
  return top + 1;
}

void DatasetManifest::check() const {
  if (entries.empty()) throw Error(ErrorCode::kConfigError, "manifest has no entries");
  std::set<int> labels;
  for (const auto& e : entries) {
    if (e.label < 0) throw Error(ErrorCode::kConfigError, "manifest labels must be >= 0");
    labels.insert(e.label);
    if (e.kind != required_kind(feature_mode)) {
      throw Error(ErrorCode::kConfigError, "entry '" + e.path.string() + "' has kind " +
                                               to_string(e.kind) + ", feature_mode " +
                                               to_string(feature_mode) + " needs " +
                                               to_string(required_kind(feature_mode)));
    }
  }
  if (static_cast<int>(labels.size()) != n_classes()) {
    throw Error(ErrorCode::kConfigError, "manifest labels must form a dense set 0..n-1");
  }
  if (grid && (grid->first < 1 || grid->second < 1)) {
    throw Error(ErrorCode::kConfigError, "grid rows and cols must be >= 1");
  }
  if (grid && feature_mode == FeatureMode::kPrecomputed) {
    throw Error(ErrorCode::kConfigError, "grid does not apply to precomputed matrices");
  }
  if (downsample < 1) throw Error(ErrorCode::kConfigError, "downsample must be >= 1");
}

DatasetManifest parse_manifest(const std::string& json_text,
                               const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    const nlohmann::json* entries = &j;
    if (j.is_object()) {
      for (const auto& [key, _] : j.items()) {
        if (key != "entries" && key != "feature_mode" && key != "grid" && key != "downsample") {
          throw Error(ErrorCode::kConfigError, "unknown manifest field '" + key + "'");
        }
      }
      if (!j.contains("entries")) throw Error(ErrorCode::kConfigError, "manifest needs entries");
      entries = &j.at("entries");
      m.feature_mode = feature_mode_from_string(j.value("feature_mode", std::string("precomputed")));
      if (j.contains("grid") && !j.at("grid").is_null()) {
        const auto& g = j.at("grid");
        if (!g.is_array() || g.size() != 2) {
          throw Error(ErrorCode::kConfigError, "grid must be [rows, cols]");
        }
        m.grid = std::make_pair(g.at(0).get<int>(), g.at(1).get<int>());
      }
      m.downsample = j.value("downsample", 1);
    }
    if (!entries->is_array()) throw Error(ErrorCode::kConfigError, "manifest entries must be a list");
    for (const auto& e : *entries) m.entries.push_back(parse_entry(e));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed manifest: ") + e.what());
  }
  m.check();
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  nlohmann::json j;
  j["feature_mode"] = to_string(manifest.feature_mode);
  if (manifest.grid) j["grid"] = {manifest.grid->first, manifest.grid->second};
  j["downsample"] = manifest.downsample;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    j["entries"].push_back({{"path", e.path.generic_string()}, {"label", e.label},
                            {"kind", to_string(e.kind)}});
  }
  return j.dump(2) + "\n";
}

Dataset load_dataset(const DatasetManifest& manifest) {
  manifest.check();
  Dataset out;
  out.n_classes = manifest.n_classes();
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& entry = manifest.entries[i];
    const std::filesystem::path path =
        entry.path.is_absolute() ? entry.path : manifest.base_dir / entry.path;
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kFileNotFound, "no such file: " + path.string());
    }
    std::vector<SpdMatrix> descs;
    try {
      descs = descriptors_for(manifest, path);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kFileNotFound) throw;
      throw Error(e.code(), path.string() + ": " + e.what());
    }
    for (auto& d : descs) {
      if (!out.items.empty() && d.dim() != out.dim()) {
        throw Error(ErrorCode::kDimensionInconsistency,
                    path.string() + ": descriptor dimension " + std::to_string(d.dim()) +
                        " differs from " + std::to_string(out.dim()));
      }
      out.items.push_back({std::move(d), entry.label});
      out.entry_index.push_back(static_cast<int>(i));
    }
  }
  return out;
}

}  // namespace rose
