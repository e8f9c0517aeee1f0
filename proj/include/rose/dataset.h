#pragma once

// Dataset manifests and descriptor loading.
//
// Manifest JSON:
//   {
//     "feature_mode": "intensity5" | "color11" | "gabor43" | "precomputed",
//     "grid": [rows, cols],        // optional; whole image when absent
//     "downsample": 1,             // optional box-filter factor
//     "entries": [{"path": "...", "label": 0, "kind": "gray-image"}, ...]
//   }
// A bare list of entries is read as a precomputed manifest. Relative paths
// resolve against the manifest's directory. A matrix file may hold several
// matrices; each becomes one descriptor with the entry's label.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rose/classifier.h"

namespace rose {

enum class EntryKind { kGrayImage, kColorImage, kMatrix };
enum class FeatureMode { kIntensity5, kColor11, kGabor43, kPrecomputed };

std::string to_string(EntryKind kind);
std::string to_string(FeatureMode mode);

struct ManifestEntry {
  std::filesystem::path path;
  int label = 0;
  EntryKind kind = EntryKind::kMatrix;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  FeatureMode feature_mode = FeatureMode::kPrecomputed;
  std::optional<std::pair<int, int>> grid;
  int downsample = 1;
  std::filesystem::path base_dir;

  int n_classes() const;
  // Nonempty, dense labels 0..n-1, kinds consistent with the feature mode.
  // Violations raise ConfigError.
  void check() const;
};

DatasetManifest parse_manifest(const std::string& json_text,
                               const std::filesystem::path& base_dir = {});
DatasetManifest read_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const DatasetManifest& manifest);

struct Dataset {
  // Manifest order, then grid row-major within an entry.
  std::vector<LabeledSpd> items;
  std::vector<int> entry_index;
  int n_classes = 0;

  int dim() const { return items.empty() ? 0 : items.front().point.dim(); }
};

// Errors: FileNotFound, ParseError naming the file, DimensionInconsistency.
Dataset load_dataset(const DatasetManifest& manifest);

}  // namespace rose
