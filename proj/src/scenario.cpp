#include "actionslot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "actionslot/rng.hpp"

namespace actionslot {

namespace {

constexpr std::array<uint8_t, 3> kEgoColor = {232, 28, 28};

struct PatternKey {
  int src, dst;
  AgentKind kind;
  bool operator<(const PatternKey& o) const {
    return std::tie(src, dst, kind) < std::tie(o.src, o.dst, o.kind);
  }
  bool operator==(const PatternKey& o) const {
    return src == o.src && dst == o.dst && kind == o.kind;
  }
};

PatternKey key_of(const AtomicActivity& a) {
  return {a.source.index, a.destination.index, a.agent};
}

double polyline_length(const std::vector<PointD>& pts) {
  double len = 0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    len += std::hypot(pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y);
  }
  return len;
}

TrajectoryPoint point_at(const std::vector<PointD>& pts, double s) {
  double acc = 0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double dx = pts[i + 1].x - pts[i].x, dy = pts[i + 1].y - pts[i].y;
    double seg = std::hypot(dx, dy);
    if (s <= acc + seg || i + 2 == pts.size()) {
      double t = seg > 0 ? std::clamp((s - acc) / seg, 0.0, 1.0) : 0.0;
      return {pts[i].x + t * dx, pts[i].y + t * dy, std::atan2(dy, dx)};
    }
    acc += seg;
  }
  return {pts.back().x, pts.back().y, 0.0};
}

std::array<uint8_t, 3> jitter_color(std::array<uint8_t, 3> base, Rng& rng) {
  for (auto& ch : base) {
    int v = ch + rng.uniform_int(-24, 24);
    ch = static_cast<uint8_t>(std::clamp(v, 0, 255));
  }
  return base;
}

SemanticClass agent_class(AgentKind kind) {
  switch (kind) {
    case AgentKind::kVehicle: return kVehicleClass;
    case AgentKind::kTwoWheeler: return kTwoWheelerClass;
    case AgentKind::kPedestrian: return kPedestrianClass;
  }
  return kVehicleClass;
}

// Builds the trajectory of one executor of `pattern`, entering at
// start_frame and moving at `speed` px/frame along its route.
Agent make_mover(const WorldGeometry& geo, const AtomicActivity& pattern,
                 int start_frame, int duration, double lateral, Rng& rng) {
  Agent agent;
  agent.kind = pattern.agent;
  agent.pattern = pattern;
  agent.start_frame = start_frame;
  agent.color = jitter_color(semantic_color(agent_class(pattern.agent)), rng);

  std::vector<PointD> route =
      pattern.agent == AgentKind::kPedestrian
          ? geo.corner_route(pattern.source.index, pattern.destination.index, lateral)
          : geo.roadway_route(pattern.source.index, pattern.destination.index, lateral);
  double len = polyline_length(route);
  agent.trajectory.reserve(duration + 1);
  for (int i = 0; i <= duration; ++i) {
    agent.trajectory.push_back(point_at(route, len * i / duration));
  }
  return agent;
}

int route_duration(const WorldGeometry& geo, const AtomicActivity& pattern,
                   double lateral, double speed, int max_duration) {
  std::vector<PointD> route =
      pattern.agent == AgentKind::kPedestrian
          ? geo.corner_route(pattern.source.index, pattern.destination.index, lateral)
          : geo.roadway_route(pattern.source.index, pattern.destination.index, lateral);
  int dur = static_cast<int>(std::ceil(polyline_length(route) / speed));
  return std::min(std::max(dur, 2), std::max(2, max_duration));
}

double draw_speed(AgentKind kind, Rng& rng) {
  switch (kind) {
    case AgentKind::kVehicle: return rng.uniform_real(2.6, 4.0);
    case AgentKind::kTwoWheeler: return rng.uniform_real(1.9, 3.0);
    case AgentKind::kPedestrian: return rng.uniform_real(0.8, 1.2);
  }
  return 3.0;
}

double draw_lateral(AgentKind kind, Rng& rng) {
  double base = kind == AgentKind::kTwoWheeler ? 2.0 : 0.0;
  return base + rng.uniform_real(-1.0, 1.0);
}

Agent make_idle(const WorldGeometry& geo, int length, Rng& rng) {
  Agent agent;
  int pick = rng.uniform_int(0, 2);
  agent.kind = pick == 0   ? AgentKind::kVehicle
               : pick == 1 ? AgentKind::kTwoWheeler
                           : AgentKind::kPedestrian;
  agent.color = jitter_color(semantic_color(agent_class(agent.kind)), rng);
  agent.start_frame = 0;

  TrajectoryPoint spot;
  if (agent.kind == AgentKind::kPedestrian) {
    int corner = rng.uniform_int(1, 4);
    PointD p = geo.corner_spot(corner, rng.uniform_real(), rng.uniform_real());
    spot = {p.x, p.y, 0.0};
  } else {
    int arm = rng.uniform_int(1, 4);
    PointD p = geo.parked_spot(arm, rng.uniform_real());
    // parked at the lane edge, nose along the travel direction of the arm
    double heading;
    switch (arm) {
      case 1: heading = -M_PI / 2; p.x += 2.0; break;
      case 2: heading = M_PI; p.y -= 2.0; break;
      case 3: heading = M_PI / 2; p.x -= 2.0; break;
      default: heading = 0.0; p.y += 2.0; break;
    }
    spot = {p.x, p.y, heading};
  }
  agent.trajectory.assign(length, spot);
  return agent;
}

Agent make_ego(const WorldGeometry& geo, int ego_action, int length, Rng& rng) {
  Agent agent;
  agent.kind = AgentKind::kVehicle;
  agent.is_ego = true;
  agent.color = kEgoColor;
  if (ego_action == 3) {  // Z1-Z1:E, held at the approach
    PointD p = geo.parked_spot(1, 0.15);
    agent.start_frame = 0;
    agent.trajectory.assign(length, {p.x, p.y, -M_PI / 2});
    return agent;
  }
  AtomicActivity move;
  move.source = {RegionKind::kRoadway, 1};
  move.destination = {RegionKind::kRoadway, 2 + ego_action};  // 0->Z2, 1->Z3, 2->Z4
  move.agent = AgentKind::kVehicle;
  agent.pattern = move;
  double speed = rng.uniform_real(2.6, 3.6);
  int dur = route_duration(geo, move, 0.0, speed, length - 1);
  int start = rng.uniform_int(0, std::max(0, length - 1 - dur));
  Agent mover = make_mover(geo, move, start, dur, 0.0, rng);
  mover.is_ego = true;
  mover.color = kEgoColor;
  return mover;
}

}  // namespace

Footprint footprint_of(AgentKind kind) {
  switch (kind) {
    case AgentKind::kVehicle: return {4.5, 2.5};
    case AgentKind::kTwoWheeler: return {2.5, 1.0};
    case AgentKind::kPedestrian: return {1.2, 1.2};
  }
  return {1.0, 1.0};
}

std::optional<std::pair<int, int>> visible_window(const WorldGeometry& geo,
                                                  const Agent& agent) {
  Footprint fp = footprint_of(agent.kind);
  int first = -1, last = -1;
  for (int f = agent.start_frame; f < agent.end_frame(); ++f) {
    bool any = false;
    rasterize_footprint(agent.at(f), fp, geo.height(), geo.width(),
                        [&](int, int) { any = true; });
    if (any) {
      if (first < 0) first = f;
      last = f;
    }
  }
  if (first < 0) return std::nullopt;
  return std::make_pair(first, last);
}

bool any_pair_overlaps(const std::vector<std::pair<int, int>>& windows) {
  for (size_t i = 0; i < windows.size(); ++i) {
    for (size_t j = i + 1; j < windows.size(); ++j) {
      int lo = std::max(windows[i].first, windows[j].first);
      int hi = std::min(windows[i].second, windows[j].second);
      if (lo <= hi) return true;
    }
  }
  return false;
}

Scenario sample_scenario(const GeneratorConfig& config, uint64_t seed) {
  const int length = config.scenario_length;
  const int clip_len = config.clip_length;
  if (length < 2 || clip_len < 1 || clip_len > length) {
    throw std::invalid_argument("infeasible config: bad scenario/clip length");
  }
  const int min_visible = (length + clip_len - 1) / clip_len;

  Scenario sc;
  sc.geometry = std::make_shared<WorldGeometry>(config.image_height, config.image_width);
  const WorldGeometry& geo = *sc.geometry;
  sc.length = length;
  sc.seed = seed;
  sc.clip_length = clip_len;
  Rng rng(seed);

  ClassCatalog catalog = config.catalog();

  // Pick the movement patterns this scenario realizes, one per
  // (source, destination, agent-kind) key so singles and groups of the
  // same movement cannot collide.
  std::vector<AtomicActivity> patterns;
  std::vector<PatternKey> used;
  if (!config.forced_classes.empty()) {
    for (const auto& name : config.forced_classes) {
      AtomicActivity a = parse_activity(name);
      if (!catalog.index_of(a)) {
        throw std::invalid_argument("infeasible config: forced class \"" + name +
                                    "\" not in the catalog");
      }
      PatternKey k = key_of(a);
      if (std::find(used.begin(), used.end(), k) != used.end()) {
        throw std::invalid_argument(
            "infeasible config: forced classes share a movement key");
      }
      used.push_back(k);
      patterns.push_back(a);
    }
  } else {
    if (config.min_activities < 1 || config.max_activities < config.min_activities) {
      throw std::invalid_argument("infeasible config: bad activity count range");
    }
    int want = rng.uniform_int(config.min_activities, config.max_activities);
    int guard = 0;
    while (static_cast<int>(patterns.size()) < want && guard++ < 1000) {
      const AtomicActivity& a = catalog.at(static_cast<int>(rng.uniform_index(catalog.size())));
      PatternKey k = key_of(a);
      if (std::find(used.begin(), used.end(), k) != used.end()) continue;
      used.push_back(k);
      patterns.push_back(a);
    }
    if (patterns.empty()) {
      throw std::invalid_argument("infeasible config: empty class catalog");
    }
  }

  // Executors. Group members share a time window with staggered entries so
  // every pair overlaps while visible.
  for (const auto& pattern : patterns) {
    int members = pattern.group ? rng.uniform_int(config.min_group, config.max_group) : 1;
    if (pattern.group && members < 2) {
      throw std::invalid_argument("infeasible config: group size below 2");
    }
    struct Plan {
      double speed, lateral;
      int offset, duration;
    };
    std::vector<Plan> plans;
    int max_extent = 0;
    for (int m = 0; m < members; ++m) {
      Plan p;
      p.speed = draw_speed(pattern.agent, rng);
      p.lateral = draw_lateral(pattern.agent, rng);
      p.offset = m == 0 ? 0 : plans[m - 1].offset + rng.uniform_int(2, 4);
      // members whose stagger would overrun the scenario traverse faster
      p.duration = route_duration(geo, pattern, p.lateral, p.speed,
                                  length - 1 - p.offset);
      max_extent = std::max(max_extent, p.offset + p.duration);
      plans.push_back(p);
    }
    int slack = length - 1 - max_extent;
    if (slack < 0) {
      throw std::invalid_argument(
          "infeasible config: group schedule exceeds scenario length");
    }
    int t0 = slack > 0 ? rng.uniform_int(0, slack) : 0;
    for (const Plan& p : plans) {
      sc.agents.push_back(
          make_mover(geo, pattern, t0 + p.offset, p.duration, p.lateral, rng));
    }
  }

  // Idle distractors.
  int idles = config.max_idle >= config.min_idle
                  ? rng.uniform_int(config.min_idle, config.max_idle)
                  : 0;
  for (int i = 0; i < idles; ++i) sc.agents.push_back(make_idle(geo, length, rng));

  // Ego vehicle, rendered in a reserved color and excluded from labels.
  if (config.ego) {
    sc.ego_action = config.forced_ego ? ego_index_of(*config.forced_ego)
                                      : rng.uniform_int(0, 3);
    sc.agents.push_back(make_ego(geo, sc.ego_action, length, rng));
  } else {
    sc.ego_action = 3;
  }

  // Visibility rule: every executor of a labeled activity must be on screen
  // for at least ceil(length / clip_length) frames.
  for (const Agent& agent : sc.agents) {
    if (agent.is_ego || !agent.pattern) continue;
    auto vw = visible_window(geo, agent);
    int frames = vw ? vw->second - vw->first + 1 : 0;
    if (frames < min_visible) {
      throw std::invalid_argument("infeasible config: activity " +
                                  agent.pattern->to_string() +
                                  " visible for fewer than the required frames");
    }
  }

  // Labels via the group rule over realized executors.
  std::map<PatternKey, std::vector<std::pair<int, int>>> windows;
  for (const Agent& agent : sc.agents) {
    if (agent.is_ego || !agent.pattern) continue;
    auto vw = visible_window(geo, agent);
    if (vw) windows[key_of(*agent.pattern)].push_back(*vw);
  }
  for (const auto& [key, ws] : windows) {
    AtomicActivity label;
    RegionKind kind = key.kind == AgentKind::kPedestrian ? RegionKind::kCorner
                                                         : RegionKind::kRoadway;
    label.source = {kind, key.src};
    label.destination = {kind, key.dst};
    label.agent = key.kind;
    label.group = ws.size() >= 2 && any_pair_overlaps(ws);
    sc.labels.push_back(label);
  }
  std::sort(sc.labels.begin(), sc.labels.end(),
            [](const AtomicActivity& a, const AtomicActivity& b) {
              return a.to_string() < b.to_string();
            });
  if (sc.labels.empty()) {
    throw std::invalid_argument("infeasible config: zero-activity scenario");
  }
  return sc;
}

std::vector<AtomicActivity> replay_labels(const Scenario& scenario) {
  const WorldGeometry& geo = *scenario.geometry;
  std::map<PatternKey, std::vector<std::pair<int, int>>> windows;

  for (const Agent& agent : scenario.agents) {
    if (agent.is_ego || agent.trajectory.empty()) continue;
    // Idle agents never leave their spawn vicinity.
    double travelled = 0;
    for (size_t i = 0; i + 1 < agent.trajectory.size(); ++i) {
      travelled += std::hypot(agent.trajectory[i + 1].x - agent.trajectory[i].x,
                              agent.trajectory[i + 1].y - agent.trajectory[i].y);
    }
    if (travelled < 3.0) continue;

    const TrajectoryPoint& first = agent.trajectory.front();
    const TrajectoryPoint& last = agent.trajectory.back();
    int src, dst;
    if (agent.kind == AgentKind::kPedestrian) {
      src = geo.corner_of(first.x, first.y);
      dst = geo.corner_of(last.x, last.y);
    } else {
      src = geo.roadway_arm_of(first.x, first.y);
      dst = geo.roadway_arm_of(last.x, last.y);
    }
    if (src == 0 || dst == 0 || src == dst) continue;
    auto vw = visible_window(geo, agent);
    if (!vw) continue;
    windows[{src, dst, agent.kind}].push_back(*vw);
  }

  std::vector<AtomicActivity> labels;
  for (const auto& [key, ws] : windows) {
    AtomicActivity label;
    RegionKind kind = key.kind == AgentKind::kPedestrian ? RegionKind::kCorner
                                                         : RegionKind::kRoadway;
    label.source = {kind, key.src};
    label.destination = {kind, key.dst};
    label.agent = key.kind;
    label.group = ws.size() >= 2 && any_pair_overlaps(ws);
    labels.push_back(label);
  }
  std::sort(labels.begin(), labels.end(),
            [](const AtomicActivity& a, const AtomicActivity& b) {
              return a.to_string() < b.to_string();
            });
  return labels;
}

}  // namespace actionslot
