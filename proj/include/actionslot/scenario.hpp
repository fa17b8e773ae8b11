#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actionslot/geometry.hpp"
#include "actionslot/labels.hpp"

namespace actionslot {

struct GeneratorConfig {
  int image_height = 64;
  int image_width = 192;
  int scenario_length = 64;  // frames per scenario on disk
  int clip_length = 16;      // T fed to the model; fixes the visibility rule

  // Label space restriction; empty means the full 64-class catalog.
  std::vector<std::string> classes;

  int min_activities = 1, max_activities = 3;  // patterns per scenario
  int min_idle = 0, max_idle = 6;              // idle distractor agents
  int min_group = 2, max_group = 3;            // executors per group pattern
  bool ego = true;

  // When set, the scenario realizes exactly these classes (used by the
  // balanced dataset scheduler and by tests).
  std::vector<std::string> forced_classes;
  std::optional<std::string> forced_ego;

  ClassCatalog catalog() const {
    return classes.empty() ? ClassCatalog::full() : ClassCatalog::subset(classes);
  }
};

struct TrajectoryPoint {
  double x = 0, y = 0;
  double heading = 0;  // radians, screen coords (y down)
};

struct Agent {
  AgentKind kind = AgentKind::kVehicle;
  bool is_ego = false;
  // Movement pattern; nullopt for idle (static) agents and carried for the
  // ego as its ego-action movement, not an activity label.
  std::optional<AtomicActivity> pattern;
  int start_frame = 0;  // first frame the agent exists
  // One point per frame from start_frame; the agent despawns after the
  // trajectory ends. Idle agents carry a full-length constant trajectory.
  std::vector<TrajectoryPoint> trajectory;
  std::array<uint8_t, 3> color = {0, 0, 0};

  int end_frame() const {  // exclusive
    return start_frame + static_cast<int>(trajectory.size());
  }
  bool present_at(int frame) const {
    return frame >= start_frame && frame < end_frame();
  }
  const TrajectoryPoint& at(int frame) const {
    return trajectory.at(frame - start_frame);
  }
};

// Footprint half extents (length/2 along heading, width/2 across).
struct Footprint {
  double half_len = 0, half_wid = 0;
};
Footprint footprint_of(AgentKind kind);

struct Scenario {
  std::shared_ptr<const WorldGeometry> geometry;
  std::vector<Agent> agents;
  int length = 0;
  std::vector<AtomicActivity> labels;  // sorted by canonical string
  int ego_action = 3;                  // index into ego_class_names()
  uint64_t seed = 0;
  int clip_length = 16;  // visibility rule denominator carried for checks
};

// Deterministic for a fixed (config, seed). Labels are exactly the
// activities realized by the agents under the group rule: a pattern becomes
// a group ("+") iff at least two executors share >= 1 frame of temporal
// overlap while inside the image; otherwise lone executors yield the
// single-agent label. Throws std::invalid_argument on infeasible configs.
Scenario sample_scenario(const GeneratorConfig& config, uint64_t seed);

// Recomputes the label set from agent trajectories alone: entry/exit
// regions are classified geometrically and the group rule is re-applied.
// Independent of the pattern bookkeeping used during sampling.
std::vector<AtomicActivity> replay_labels(const Scenario& scenario);

// Frames (inclusive window) during which the agent's footprint intersects
// the image; nullopt if it never does.
std::optional<std::pair<int, int>> visible_window(const WorldGeometry& geo,
                                                  const Agent& agent);

// Invokes fn(x, y) for every in-image pixel covered by the oriented
// rectangular footprint centered at p.
template <typename Fn>
void rasterize_footprint(const TrajectoryPoint& p, Footprint fp, int height,
                         int width, Fn&& fn) {
  double r = std::max(fp.half_len, fp.half_wid) + 1.0;
  int x0 = std::max(0, static_cast<int>(p.x - r));
  int x1 = std::min(width - 1, static_cast<int>(p.x + r));
  int y0 = std::max(0, static_cast<int>(p.y - r));
  int y1 = std::min(height - 1, static_cast<int>(p.y + r));
  double ux = std::cos(p.heading), uy = std::sin(p.heading);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = x + 0.5 - p.x, dy = y + 0.5 - p.y;
      double along = dx * ux + dy * uy;
      double across = -dx * uy + dy * ux;
      if (std::abs(along) <= fp.half_len && std::abs(across) <= fp.half_wid) {
        fn(x, y);
      }
    }
  }
}

// The group rule applied to executor windows: returns labels for one
// pattern key given the visible windows of its executors.
bool any_pair_overlaps(const std::vector<std::pair<int, int>>& windows);

}  // namespace actionslot
