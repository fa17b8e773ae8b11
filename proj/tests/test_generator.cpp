#include <doctest.h>

#include <filesystem>
#include <set>

#include "actionslot/clip.hpp"
#include "actionslot/dataset.hpp"
#include "actionslot/png_io.hpp"
#include "actionslot/scenario.hpp"

using namespace actionslot;
namespace fs = std::filesystem;

namespace {

bool same_scenario(const Scenario& a, const Scenario& b) {
  if (a.length != b.length || a.ego_action != b.ego_action) return false;
  if (a.agents.size() != b.agents.size()) return false;
  for (size_t i = 0; i < a.agents.size(); ++i) {
    const Agent& x = a.agents[i];
    const Agent& y = b.agents[i];
    if (x.kind != y.kind || x.start_frame != y.start_frame ||
        x.trajectory.size() != y.trajectory.size() || x.color != y.color) {
      return false;
    }
    for (size_t t = 0; t < x.trajectory.size(); ++t) {
      if (x.trajectory[t].x != y.trajectory[t].x ||
          x.trajectory[t].y != y.trajectory[t].y) {
        return false;
      }
    }
  }
  return a.labels == b.labels;
}

}  // namespace

TEST_CASE("sample_scenario is deterministic") {
  GeneratorConfig cfg;
  Scenario a = sample_scenario(cfg, 0);
  Scenario b = sample_scenario(cfg, 0);
  CHECK(same_scenario(a, b));
  Scenario c = sample_scenario(cfg, 1);
  CHECK_FALSE(same_scenario(a, c));
}

TEST_CASE("forcing one vehicle movement yields exactly that label") {
  GeneratorConfig cfg;
  cfg.forced_classes = {"Z1-Z4:C"};
  cfg.min_idle = cfg.max_idle = 0;
  cfg.ego = false;
  Scenario sc = sample_scenario(cfg, 42);
  REQUIRE(sc.labels.size() == 1);
  CHECK(sc.labels[0].to_string() == "Z1-Z4:C");
}

TEST_CASE("group pattern produces the group label, not singles") {
  GeneratorConfig cfg;
  cfg.forced_classes = {"Z1-Z4:C+"};
  cfg.min_group = cfg.max_group = 3;
  cfg.min_idle = cfg.max_idle = 0;
  cfg.ego = false;
  Scenario sc = sample_scenario(cfg, 7);
  REQUIRE(sc.labels.size() == 1);
  CHECK(sc.labels[0].to_string() == "Z1-Z4:C+");
  int movers = 0;
  for (const auto& a : sc.agents) movers += a.pattern.has_value() ? 1 : 0;
  CHECK(movers == 3);
}

TEST_CASE("pedestrian pattern walks between the right corners") {
  GeneratorConfig cfg;
  cfg.forced_classes = {"C2-C1:P"};
  cfg.min_idle = cfg.max_idle = 0;
  cfg.ego = false;
  Scenario sc = sample_scenario(cfg, 3);
  REQUIRE(sc.labels.size() == 1);
  CHECK(sc.labels[0].to_string() == "C2-C1:P");
  const Agent& ped = sc.agents.front();
  const WorldGeometry& geo = *sc.geometry;
  CHECK(geo.corner_of(ped.trajectory.front().x, ped.trajectory.front().y) == 2);
  CHECK(geo.corner_of(ped.trajectory.back().x, ped.trajectory.back().y) == 1);
  for (const auto& p : ped.trajectory) {
    CHECK(geo.is_walkable(p.x, p.y));
  }
}

TEST_CASE("vehicle trajectories stay on the drivable surface") {
  GeneratorConfig cfg;
  cfg.forced_classes = {"Z2-Z1:C", "Z4-Z3:K"};
  cfg.min_idle = cfg.max_idle = 0;
  cfg.ego = false;
  Scenario sc = sample_scenario(cfg, 11);
  const WorldGeometry& geo = *sc.geometry;
  for (const auto& agent : sc.agents) {
    for (const auto& p : agent.trajectory) {
      if (!geo.inside_image(p.x, p.y)) continue;
      CHECK(geo.is_drivable(p.x, p.y));
    }
  }
}

TEST_CASE("replay oracle reproduces label sets") {
  GeneratorConfig cfg;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Scenario sc = sample_scenario(cfg, seed);
    auto replayed = replay_labels(sc);
    CHECK(replayed == sc.labels);
  }
}

TEST_CASE("visibility rule holds for every labeled activity") {
  GeneratorConfig cfg;
  int min_visible = (cfg.scenario_length + cfg.clip_length - 1) / cfg.clip_length;
  for (uint64_t seed = 100; seed < 110; ++seed) {
    Scenario sc = sample_scenario(cfg, seed);
    for (const auto& agent : sc.agents) {
      if (agent.is_ego || !agent.pattern) continue;
      auto vw = visible_window(*sc.geometry, agent);
      REQUIRE(vw.has_value());
      CHECK(vw->second - vw->first + 1 >= min_visible);
    }
  }
}

TEST_CASE("derive_background_mask exclusion list") {
  std::vector<uint8_t> all_void(16, kVoid);
  auto m1 = derive_background_mask(all_void);
  for (uint8_t v : m1) CHECK(v == 1);

  std::vector<uint8_t> all_drivable(16, kDrivable);
  auto m2 = derive_background_mask(all_drivable);
  for (uint8_t v : m2) CHECK(v == 0);

  // 2x2 raster [void, vehicle; sidewalk, crosswalk] -> [1,0;0,0]
  std::vector<uint8_t> mixed = {kVoid, kVehicleClass, kSidewalk, kCrosswalk};
  auto m3 = derive_background_mask(mixed);
  CHECK(m3 == std::vector<uint8_t>{1, 0, 0, 0});

  std::vector<uint8_t> two_wheeler = {kTwoWheelerClass, kPedestrianClass};
  auto m4 = derive_background_mask(two_wheeler);
  CHECK(m4 == std::vector<uint8_t>{0, 0});

  CHECK_THROWS_AS(derive_background_mask({99}), std::invalid_argument);
}

TEST_CASE("background masks are disjoint from agent footprints") {
  GeneratorConfig cfg;
  for (uint64_t seed = 50; seed < 55; ++seed) {
    Scenario sc = sample_scenario(cfg, seed);
    const WorldGeometry& geo = *sc.geometry;
    for (int f = 0; f < sc.length; f += 7) {
      RenderedFrame rf = render_frame(sc, f);
      auto mask = derive_background_mask(rf.semantic);
      for (const auto& agent : sc.agents) {
        if (!agent.present_at(f)) continue;
        rasterize_footprint(agent.at(f), footprint_of(agent.kind), geo.height(),
                            geo.width(), [&](int x, int y) {
                              CHECK(mask[static_cast<size_t>(y) * geo.width() + x] == 0);
                            });
      }
    }
  }
}

TEST_CASE("subsample_indices fixed and random modes") {
  auto fixed = subsample_indices(64, 16, SubsampleMode::kFixed, 0);
  REQUIRE(fixed.size() == 16);
  for (int i = 0; i < 16; ++i) CHECK(fixed[i] == i * 4);

  auto again = subsample_indices(64, 16, SubsampleMode::kFixed, 99);
  CHECK(fixed == again);

  // random draws must come from the enumerated valid window set
  std::set<int> valid_starts = {0, 1, 2, 3};
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto r = subsample_indices(64, 16, SubsampleMode::kRandom, seed);
    REQUIRE(r.size() == 16);
    CHECK(valid_starts.count(r[0]) == 1);
    for (int i = 1; i < 16; ++i) CHECK(r[i] - r[i - 1] == 4);
  }
  CHECK_THROWS_AS(subsample_indices(8, 16, SubsampleMode::kFixed, 0),
                  std::invalid_argument);
}

TEST_CASE("render_clip carries labels and is deterministic") {
  GeneratorConfig cfg;
  cfg.forced_classes = {"Z3-Z1:C", "C1-C2:P"};
  Scenario sc = sample_scenario(cfg, 5);
  ClassCatalog catalog = ClassCatalog::full();

  Clip a = render_clip(sc, catalog, 16, SubsampleMode::kFixed, 0);
  Clip b = render_clip(sc, catalog, 16, SubsampleMode::kFixed, 0);
  CHECK(a.pixels == b.pixels);
  CHECK(a.background_masks == b.background_masks);
  CHECK(a.label == b.label);
  int bits = 0;
  for (uint8_t v : a.label) bits += v;
  CHECK(bits == 2);

  Clip r1 = render_clip(sc, catalog, 16, SubsampleMode::kRandom, 1);
  Clip r2 = render_clip(sc, catalog, 16, SubsampleMode::kRandom, 2);
  CHECK(r1.label == r2.label);

  CHECK_THROWS_AS(render_clip(sc, catalog, 65, SubsampleMode::kFixed, 0),
                  std::invalid_argument);
}

TEST_CASE("zero-activity configs are rejected") {
  GeneratorConfig cfg;
  cfg.min_activities = 0;
  cfg.max_activities = 0;
  CHECK_THROWS_AS(sample_scenario(cfg, 0), std::invalid_argument);
}

TEST_CASE("generate_dataset balanced mode hits targets exactly") {
  fs::path dir = fs::temp_directory_path() / "actionslot_test_ds";
  fs::remove_all(dir);

  DatasetConfig cfg;
  cfg.generator.classes = {"Z1-Z3:C", "Z3-Z1:C", "C1-C2:P", "C2-C1:P"};
  cfg.generator.min_activities = 1;
  cfg.generator.max_activities = 2;
  cfg.generator.min_idle = 0;
  cfg.generator.max_idle = 2;
  cfg.splits["train"] = SplitSpec{4, std::nullopt};

  DatasetManifest manifest = generate_dataset(cfg, dir.string(), 123);
  REQUIRE(manifest.splits.count("train") == 1);
  for (const auto& [name, count] : manifest.class_counts["train"]) {
    CHECK(count == 4);
  }
  CHECK(manifest.mean_labels_per_clip > 0);

  // regeneration from the manifest's seeds gives identical frames
  const ClipRecord& record = manifest.splits["train"][0];
  Scenario sc = regenerate_scenario(manifest, cfg.generator, record);
  RenderedFrame rf = render_frame(sc, 0);
  Image stored = read_png((dir / "train" / record.id / "frame_000.png").string());
  CHECK(stored.data == rf.rgb);

  ClassCatalog catalog = ClassCatalog::subset(manifest.classes);
  LoadedClip clip = load_clip(dir.string(), "train", record, catalog);
  CHECK(clip.length == 64);
  CHECK(clip.frames.size() == static_cast<size_t>(64) * 64 * 192 * 3);
  int bits = 0;
  for (uint8_t v : clip.label) bits += v;
  CHECK(bits == static_cast<int>(record.activities.size()));

  DatasetManifest loaded = load_manifest(dir.string());
  CHECK(loaded.config_hash == manifest.config_hash);
  CHECK(loaded.splits["train"].size() == manifest.splits["train"].size());
  fs::remove_all(dir);
}

TEST_CASE("clips mode emits the requested number of clips") {
  fs::path dir = fs::temp_directory_path() / "actionslot_test_ds_clips";
  fs::remove_all(dir);
  DatasetConfig cfg;
  cfg.generator.classes = {"Z1-Z3:C", "Z3-Z1:C"};
  cfg.generator.min_activities = 1;
  cfg.generator.max_activities = 1;
  cfg.generator.min_idle = 0;
  cfg.generator.max_idle = 0;
  cfg.splits["test"] = SplitSpec{std::nullopt, 6};
  DatasetManifest manifest = generate_dataset(cfg, dir.string(), 9);
  CHECK(manifest.splits["test"].size() == 6);
  fs::remove_all(dir);
}
