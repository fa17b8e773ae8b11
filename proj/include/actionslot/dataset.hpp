#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "actionslot/clip.hpp"
#include "actionslot/scenario.hpp"

namespace actionslot {

// One generated split: either run until every class hits per_class
// instances (counts land exactly on target), or emit a fixed number of
// clips with classes drawn to keep counts level.
struct SplitSpec {
  std::optional<int> per_class;
  std::optional<int> clips;
};

struct DatasetConfig {
  GeneratorConfig generator;
  std::map<std::string, SplitSpec> splits;
};

DatasetConfig load_dataset_config(const std::string& path);

struct ClipRecord {
  std::string id;
  uint64_t seed = 0;
  std::vector<std::string> activities;  // canonical, sorted
  std::string ego;
  int length = 0;
  std::vector<int> eval_frame_indices;  // the fixed test-time subsample
};

struct DatasetManifest {
  uint64_t config_hash = 0;
  uint64_t catalog_hash = 0;
  uint64_t master_seed = 0;
  int image_height = 0, image_width = 0;
  int scenario_length = 0, clip_length = 0;
  std::vector<std::string> classes;
  std::map<std::string, std::vector<ClipRecord>> splits;
  std::map<std::string, std::map<std::string, int>> class_counts;
  double mean_labels_per_clip = 0;
};

// Generates every split to `<out_dir>/<split>/<clip_id>/`, writing
// frame_%03d.png, bgmask_%03d.png (0/255) and label.json per clip plus
// <out_dir>/manifest.json. Clip directories are written to a temp name and
// renamed. Deterministic for fixed (config, seed).
DatasetManifest generate_dataset(const DatasetConfig& config,
                                 const std::string& out_dir, uint64_t seed);

DatasetManifest load_manifest(const std::string& root);
void save_manifest(const DatasetManifest& manifest, const std::string& root);

// Full-length decoded clip cached in memory for training/evaluation.
struct LoadedClip {
  ClipRecord record;
  int length = 0, height = 0, width = 0;
  std::vector<uint8_t> frames;  // length*H*W*3
  std::vector<uint8_t> masks;   // length*H*W, 0/1
  MultiHotLabel label;
  int ego_action = 3;
};

LoadedClip load_clip(const std::string& root, const std::string& split,
                     const ClipRecord& record, const ClassCatalog& catalog);

// Rebuilds the scenario backing a stored clip from its record; used for
// regeneration checks and footprint lookups.
Scenario regenerate_scenario(const DatasetManifest& manifest,
                             const GeneratorConfig& base,
                             const ClipRecord& record);

}  // namespace actionslot
