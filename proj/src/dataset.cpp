#include "actionslot/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "actionslot/png_io.hpp"
#include "actionslot/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace actionslot {

namespace {

uint64_t fnv1a(const std::string& s, uint64_t h = 1469598103934665603ull) {
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

json generator_to_json(const GeneratorConfig& g) {
  json j;
  j["image_height"] = g.image_height;
  j["image_width"] = g.image_width;
  j["scenario_length"] = g.scenario_length;
  j["clip_length"] = g.clip_length;
  j["classes"] = g.classes;
  j["activities_per_scenario"] = {g.min_activities, g.max_activities};
  j["idle_agents"] = {g.min_idle, g.max_idle};
  j["group_size"] = {g.min_group, g.max_group};
  j["ego"] = g.ego;
  return j;
}

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig g;
  g.image_height = j.value("image_height", g.image_height);
  g.image_width = j.value("image_width", g.image_width);
  g.scenario_length = j.value("scenario_length", g.scenario_length);
  g.clip_length = j.value("clip_length", g.clip_length);
  if (j.contains("classes")) g.classes = j["classes"].get<std::vector<std::string>>();
  if (j.contains("activities_per_scenario")) {
    g.min_activities = j["activities_per_scenario"][0];
    g.max_activities = j["activities_per_scenario"][1];
  }
  if (j.contains("idle_agents")) {
    g.min_idle = j["idle_agents"][0];
    g.max_idle = j["idle_agents"][1];
  }
  if (j.contains("group_size")) {
    g.min_group = j["group_size"][0];
    g.max_group = j["group_size"][1];
  }
  g.ego = j.value("ego", g.ego);
  return g;
}

std::string clip_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%05d", index);
  return buf;
}

std::string frame_name(const char* stem, int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03d.png", stem, t);
  return buf;
}

void write_clip_dir(const fs::path& dir, const Scenario& scenario,
                    const ClipRecord& record) {
  const WorldGeometry& geo = *scenario.geometry;
  fs::path tmp = dir.parent_path() / (".tmp_" + dir.filename().string());
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  for (int t = 0; t < scenario.length; ++t) {
    RenderedFrame rf = render_frame(scenario, t);
    Image rgb{geo.height(), geo.width(), 3, std::move(rf.rgb)};
    write_png((tmp / frame_name("frame", t)).string(), rgb);
    std::vector<uint8_t> mask = derive_background_mask(rf.semantic);
    for (auto& v : mask) v = v ? 255 : 0;
    Image gray{geo.height(), geo.width(), 1, std::move(mask)};
    write_png((tmp / frame_name("bgmask", t)).string(), gray);
  }

  json label;
  label["activities"] = record.activities;
  label["ego"] = record.ego;
  label["seed"] = record.seed;
  label["length"] = record.length;
  label["frame_indices"] = record.eval_frame_indices;
  std::ofstream out(tmp / "label.json");
  out << label.dump(2) << "\n";
  out.close();

  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

// Chooses the classes one scenario will realize: k draws from the classes
// with the lowest counts (deficit-first), never two sharing a movement key.
std::vector<std::string> schedule_classes(const ClassCatalog& catalog,
                                          const std::vector<int>& counts,
                                          std::optional<int> target, int k,
                                          Rng& rng) {
  auto movement_key = [](const AtomicActivity& a) {
    return a.source.index * 100 + a.destination.index * 10 +
           static_cast<int>(a.agent);
  };
  std::vector<int> chosen;
  std::vector<int> chosen_keys;
  for (int pick = 0; pick < k; ++pick) {
    int best = -1;
    std::vector<int> pool;
    for (int c = 0; c < catalog.size(); ++c) {
      if (target && counts[c] >= *target) continue;
      if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      int key = movement_key(catalog.at(c));
      if (std::find(chosen_keys.begin(), chosen_keys.end(), key) != chosen_keys.end()) {
        continue;
      }
      if (best < 0 || counts[c] < best) {
        best = counts[c];
        pool.clear();
      }
      if (counts[c] == best) pool.push_back(c);
    }
    if (pool.empty()) break;
    int c = pool[rng.uniform_index(pool.size())];
    chosen.push_back(c);
    chosen_keys.push_back(movement_key(catalog.at(c)));
  }
  std::vector<std::string> names;
  for (int c : chosen) names.push_back(catalog.at(c).to_string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

DatasetConfig load_dataset_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j = json::parse(in);
  DatasetConfig cfg;
  cfg.generator = generator_from_json(j);
  if (!j.contains("splits")) {
    throw std::runtime_error("config missing \"splits\"");
  }
  for (auto& [name, spec] : j["splits"].items()) {
    SplitSpec s;
    if (spec.contains("per_class")) s.per_class = spec["per_class"].get<int>();
    if (spec.contains("clips")) s.clips = spec["clips"].get<int>();
    if (!s.per_class && !s.clips) {
      throw std::runtime_error("split \"" + name +
                               "\" needs per_class or clips");
    }
    cfg.splits[name] = s;
  }
  return cfg;
}

DatasetManifest generate_dataset(const DatasetConfig& config,
                                 const std::string& out_dir, uint64_t seed) {
  ClassCatalog catalog = config.generator.catalog();
  fs::create_directories(out_dir);

  json cfg_json;
  cfg_json["generator"] = generator_to_json(config.generator);
  for (auto& [name, spec] : config.splits) {
    json s;
    if (spec.per_class) s["per_class"] = *spec.per_class;
    if (spec.clips) s["clips"] = *spec.clips;
    cfg_json["splits"][name] = s;
  }

  DatasetManifest manifest;
  manifest.config_hash = fnv1a(cfg_json.dump());
  manifest.catalog_hash = catalog.hash();
  manifest.master_seed = seed;
  manifest.image_height = config.generator.image_height;
  manifest.image_width = config.generator.image_width;
  manifest.scenario_length = config.generator.scenario_length;
  manifest.clip_length = config.generator.clip_length;
  manifest.classes = catalog.names();

  size_t total_labels = 0, total_clips = 0;
  for (const auto& [split_name, spec] : config.splits) {
    Rng rng(seed ^ fnv1a(split_name));
    std::vector<int> counts(catalog.size(), 0);
    std::vector<ClipRecord> records;

    auto done = [&]() {
      if (spec.clips) return static_cast<int>(records.size()) >= *spec.clips;
      for (int c = 0; c < catalog.size(); ++c) {
        if (counts[c] < *spec.per_class) return false;
      }
      return true;
    };

    int index = 0;
    while (!done()) {
      int k = rng.uniform_int(config.generator.min_activities,
                              config.generator.max_activities);
      std::vector<std::string> classes = schedule_classes(
          catalog, counts, spec.per_class, k, rng);
      if (classes.empty()) {
        // per_class targets all met mid-draw; the done() check exits next
        // loop, but clips-mode must always find candidates
        if (spec.clips) {
          throw std::runtime_error("dataset generation could not pick classes");
        }
        break;
      }
      GeneratorConfig gen = config.generator;
      gen.forced_classes = classes;
      gen.forced_ego = ego_class_names()[rng.uniform_int(0, 3)];
      uint64_t clip_seed = rng.next_u64();

      Scenario scenario = sample_scenario(gen, clip_seed);

      ClipRecord record;
      record.id = clip_dir_name(index++);
      record.seed = clip_seed;
      for (const auto& a : scenario.labels) record.activities.push_back(a.to_string());
      record.ego = ego_class_names()[scenario.ego_action];
      record.length = scenario.length;
      record.eval_frame_indices = subsample_indices(
          scenario.length, config.generator.clip_length, SubsampleMode::kFixed, 0);

      write_clip_dir(fs::path(out_dir) / split_name / record.id, scenario, record);

      for (const auto& name : record.activities) {
        auto idx = catalog.index_of(name);
        counts[*idx] += 1;
        manifest.class_counts[split_name][name] += 1;
      }
      total_labels += record.activities.size();
      total_clips += 1;
      records.push_back(std::move(record));
    }
    manifest.splits[split_name] = std::move(records);
    // classes that never occurred still get a zero entry
    for (const auto& name : manifest.classes) {
      manifest.class_counts[split_name].emplace(name, 0);
    }
  }
  manifest.mean_labels_per_clip =
      total_clips ? static_cast<double>(total_labels) / total_clips : 0.0;

  save_manifest(manifest, out_dir);
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& root) {
  json j;
  j["config_hash"] = manifest.config_hash;
  j["catalog_hash"] = manifest.catalog_hash;
  j["master_seed"] = manifest.master_seed;
  j["image_height"] = manifest.image_height;
  j["image_width"] = manifest.image_width;
  j["scenario_length"] = manifest.scenario_length;
  j["clip_length"] = manifest.clip_length;
  j["classes"] = manifest.classes;
  j["mean_labels_per_clip"] = manifest.mean_labels_per_clip;
  j["class_counts"] = manifest.class_counts;
  for (const auto& [split, records] : manifest.splits) {
    json arr = json::array();
    for (const auto& r : records) {
      json e;
      e["id"] = r.id;
      e["seed"] = r.seed;
      e["activities"] = r.activities;
      e["ego"] = r.ego;
      e["length"] = r.length;
      e["frame_indices"] = r.eval_frame_indices;
      arr.push_back(e);
    }
    j["splits"][split] = arr;
  }
  std::ofstream out(fs::path(root) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest under " + root);
  out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& root) {
  std::ifstream in(fs::path(root) / "manifest.json");
  if (!in) throw std::runtime_error("cannot open manifest under " + root);
  json j = json::parse(in);
  DatasetManifest m;
  m.config_hash = j["config_hash"];
  m.catalog_hash = j["catalog_hash"];
  m.master_seed = j["master_seed"];
  m.image_height = j["image_height"];
  m.image_width = j["image_width"];
  m.scenario_length = j["scenario_length"];
  m.clip_length = j["clip_length"];
  m.classes = j["classes"].get<std::vector<std::string>>();
  m.mean_labels_per_clip = j["mean_labels_per_clip"];
  if (j.contains("class_counts")) {
    m.class_counts =
        j["class_counts"].get<std::map<std::string, std::map<std::string, int>>>();
  }
  for (auto& [split, arr] : j["splits"].items()) {
    std::vector<ClipRecord> records;
    for (auto& e : arr) {
      ClipRecord r;
      r.id = e["id"];
      r.seed = e["seed"];
      r.activities = e["activities"].get<std::vector<std::string>>();
      r.ego = e["ego"];
      r.length = e["length"];
      r.eval_frame_indices = e["frame_indices"].get<std::vector<int>>();
      records.push_back(std::move(r));
    }
    m.splits[split] = std::move(records);
  }
  return m;
}

LoadedClip load_clip(const std::string& root, const std::string& split,
                     const ClipRecord& record, const ClassCatalog& catalog) {
  fs::path dir = fs::path(root) / split / record.id;
  LoadedClip clip;
  clip.record = record;
  clip.length = record.length;
  clip.ego_action = ego_index_of(record.ego);

  std::vector<AtomicActivity> acts;
  for (const auto& name : record.activities) acts.push_back(parse_activity(name));
  clip.label = encode_multihot(acts, catalog);

  for (int t = 0; t < record.length; ++t) {
    Image rgb = read_png((dir / frame_name("frame", t)).string());
    Image mask = read_png((dir / frame_name("bgmask", t)).string());
    if (rgb.channels != 3 || mask.channels != 1) {
      throw std::runtime_error("unexpected channel layout in " + dir.string());
    }
    if (t == 0) {
      clip.height = rgb.height;
      clip.width = rgb.width;
      clip.frames.reserve(static_cast<size_t>(record.length) * rgb.height * rgb.width * 3);
      clip.masks.reserve(static_cast<size_t>(record.length) * rgb.height * rgb.width);
    }
    clip.frames.insert(clip.frames.end(), rgb.data.begin(), rgb.data.end());
    for (uint8_t v : mask.data) clip.masks.push_back(v >= 128 ? 1 : 0);
  }
  return clip;
}

Scenario regenerate_scenario(const DatasetManifest& manifest,
                             const GeneratorConfig& base,
                             const ClipRecord& record) {
  GeneratorConfig gen = base;
  gen.image_height = manifest.image_height;
  gen.image_width = manifest.image_width;
  gen.scenario_length = manifest.scenario_length;
  gen.clip_length = manifest.clip_length;
  gen.classes = manifest.classes;
  gen.forced_classes = record.activities;
  gen.forced_ego = record.ego;
  return sample_scenario(gen, record.seed);
}

}  // namespace actionslot
