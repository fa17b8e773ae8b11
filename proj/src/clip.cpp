#include "actionslot/clip.hpp"

#include <algorithm>
#include <stdexcept>

#include "actionslot/rng.hpp"

namespace actionslot {

namespace {

SemanticClass agent_class(AgentKind kind) {
  switch (kind) {
    case AgentKind::kVehicle: return kVehicleClass;
    case AgentKind::kTwoWheeler: return kTwoWheelerClass;
    case AgentKind::kPedestrian: return kPedestrianClass;
  }
  return kVehicleClass;
}

}  // namespace

RenderedFrame render_frame(const Scenario& scenario, int frame) {
  const WorldGeometry& geo = *scenario.geometry;
  const int h = geo.height(), w = geo.width();
  RenderedFrame out;
  out.semantic = geo.base_raster();
  out.rgb.resize(static_cast<size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto c = semantic_color(static_cast<SemanticClass>(out.semantic[static_cast<size_t>(y) * w + x]));
      size_t o = (static_cast<size_t>(y) * w + x) * 3;
      out.rgb[o] = c[0];
      out.rgb[o + 1] = c[1];
      out.rgb[o + 2] = c[2];
    }
  }
  for (const Agent& agent : scenario.agents) {
    if (!agent.present_at(frame)) continue;
    Footprint fp = footprint_of(agent.kind);
    uint8_t cls = agent_class(agent.kind);
    rasterize_footprint(agent.at(frame), fp, h, w, [&](int x, int y) {
      size_t i = static_cast<size_t>(y) * w + x;
      out.semantic[i] = cls;
      out.rgb[i * 3] = agent.color[0];
      out.rgb[i * 3 + 1] = agent.color[1];
      out.rgb[i * 3 + 2] = agent.color[2];
    });
  }
  return out;
}

std::vector<uint8_t> derive_background_mask(const std::vector<uint8_t>& semantic) {
  std::vector<uint8_t> mask(semantic.size());
  for (size_t i = 0; i < semantic.size(); ++i) {
    if (semantic[i] >= kNumSemanticClasses) {
      throw std::invalid_argument("unknown semantic class id " +
                                  std::to_string(semantic[i]));
    }
    mask[i] = semantic[i] == kVoid ? 1 : 0;
  }
  return mask;
}

std::vector<int> subsample_indices(int scenario_length, int T,
                                   SubsampleMode mode, uint64_t seed) {
  if (T < 1 || T > scenario_length) {
    throw std::invalid_argument("clip length T exceeds scenario length");
  }
  int stride = scenario_length / T;
  int span = stride * (T - 1) + 1;
  int max_start = scenario_length - span;
  int start = 0;
  if (mode == SubsampleMode::kRandom && max_start > 0) {
    Rng rng(seed);
    start = rng.uniform_int(0, max_start);
  }
  std::vector<int> indices(T);
  for (int i = 0; i < T; ++i) indices[i] = start + stride * i;
  return indices;
}

Clip render_clip(const Scenario& scenario, const ClassCatalog& catalog, int T,
                 SubsampleMode mode, uint64_t seed) {
  const WorldGeometry& geo = *scenario.geometry;
  Clip clip;
  clip.frames = T;
  clip.height = geo.height();
  clip.width = geo.width();
  clip.frame_indices = subsample_indices(scenario.length, T, mode, seed);
  clip.scenario_seed = scenario.seed;
  clip.ego_action = scenario.ego_action;
  clip.label = encode_multihot(scenario.labels, catalog);

  clip.pixels.resize(static_cast<size_t>(T) * clip.height * clip.width * 3);
  clip.background_masks.resize(static_cast<size_t>(T) * clip.height * clip.width);
  for (int t = 0; t < T; ++t) {
    RenderedFrame rf = render_frame(scenario, clip.frame_indices[t]);
    std::vector<uint8_t> mask = derive_background_mask(rf.semantic);
    std::copy(rf.rgb.begin(), rf.rgb.end(),
              clip.pixels.begin() + static_cast<size_t>(t) * clip.height * clip.width * 3);
    std::copy(mask.begin(), mask.end(),
              clip.background_masks.begin() +
                  static_cast<size_t>(t) * clip.height * clip.width);
  }
  return clip;
}

std::vector<std::vector<uint8_t>> class_footprint_grids(
    const Scenario& scenario, const ClassCatalog& catalog,
    const std::vector<int>& frame_indices, int grid_h, int grid_w) {
  const WorldGeometry& geo = *scenario.geometry;
  const int h = geo.height(), w = geo.width();
  const int block_h = h / grid_h, block_w = w / grid_w;
  const int T = static_cast<int>(frame_indices.size());

  std::vector<std::vector<uint8_t>> grids(catalog.size());
  for (const AtomicActivity& label : scenario.labels) {
    auto idx = catalog.index_of(label);
    if (!idx) continue;
    auto& grid = grids[*idx];
    grid.assign(static_cast<size_t>(T) * grid_h * grid_w, 0);
    for (const Agent& agent : scenario.agents) {
      if (agent.is_ego || !agent.pattern) continue;
      // Executors of this label share its movement key; the group flag on
      // the agent's planned pattern is ignored.
      if (agent.pattern->source != label.source ||
          agent.pattern->destination != label.destination ||
          agent.pattern->agent != label.agent) {
        continue;
      }
      Footprint fp = footprint_of(agent.kind);
      for (int t = 0; t < T; ++t) {
        int frame = frame_indices[t];
        if (!agent.present_at(frame)) continue;
        rasterize_footprint(agent.at(frame), fp, h, w, [&](int x, int y) {
          int gy = std::min(y / block_h, grid_h - 1);
          int gx = std::min(x / block_w, grid_w - 1);
          grid[(static_cast<size_t>(t) * grid_h + gy) * grid_w + gx] = 1;
        });
      }
    }
  }
  return grids;
}

}  // namespace actionslot
