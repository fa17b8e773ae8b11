#pragma once

#include <cstdint>
#include <vector>

#include "actionslot/labels.hpp"
#include "actionslot/scenario.hpp"

namespace actionslot {

enum class SubsampleMode { kRandom, kFixed };

// A fixed-length model input: T frames of RGB pixels, per-frame background
// masks (1 = background), the multi-hot label over the active catalog, the
// ego-action class, and provenance for regeneration.
struct Clip {
  int frames = 0, height = 0, width = 0;
  std::vector<uint8_t> pixels;  // frames*height*width*3, RGB
  std::vector<uint8_t> background_masks;  // frames*height*width, 0/1
  MultiHotLabel label;
  int ego_action = 3;
  uint64_t scenario_seed = 0;
  std::vector<int> frame_indices;

  size_t pixel_index(int t, int y, int x) const {
    return ((static_cast<size_t>(t) * height + y) * width + x) * 3;
  }
  size_t mask_index(int t, int y, int x) const {
    return (static_cast<size_t>(t) * height + y) * width + x;
  }
};

// One rendered frame: flat-shaded RGB plus the per-pixel semantic raster.
struct RenderedFrame {
  std::vector<uint8_t> rgb;       // height*width*3
  std::vector<uint8_t> semantic;  // height*width class ids
};

RenderedFrame render_frame(const Scenario& scenario, int frame);

// 1 exactly where the class is void; vehicles, two-wheelers, pedestrians,
// drivable areas, crosswalks and sidewalks are all excluded. Throws on an
// unknown class id.
std::vector<uint8_t> derive_background_mask(const std::vector<uint8_t>& semantic);

// Frame indices for a T-frame subsample at uniform intervals. Fixed mode
// starts at 0; random mode draws the start from the valid range.
std::vector<int> subsample_indices(int scenario_length, int T,
                                   SubsampleMode mode, uint64_t seed);

// Renders the chosen frames into a Clip. Throws if T > scenario.length.
Clip render_clip(const Scenario& scenario, const ClassCatalog& catalog, int T,
                 SubsampleMode mode, uint64_t seed);

// Per-class binary footprint grids on the model's token grid: for each
// catalog class with executors in the scenario, cell (t, gy, gx) is 1 when
// any executor footprint pixel of that class lands in the corresponding
// image block of subsampled frame t. Classes without executors yield empty
// grids. Used for attention localization checks.
std::vector<std::vector<uint8_t>> class_footprint_grids(
    const Scenario& scenario, const ClassCatalog& catalog,
    const std::vector<int>& frame_indices, int grid_h, int grid_w);

}  // namespace actionslot
