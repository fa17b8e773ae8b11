#pragma once

#include <array>
#include <string>
#include <vector>

#include "actionslot/model.hpp"
#include "actionslot/png_io.hpp"

namespace actionslot {

struct OverlaySpec {
  std::vector<int> class_indices;  // catalog indices to draw
  double tau = 0.2;                // strict threshold on attention scores
  std::vector<std::array<uint8_t, 3>> colors;  // one per selected class
  double alpha = 0.5;
};

// Distinct palette entry for the i-th selected class.
std::array<uint8_t, 3> overlay_color(int i);

// 1 where value > tau (strictly), else 0. Throws if tau is outside (0,1).
std::vector<uint8_t> threshold_attention(const std::vector<float>& values,
                                         double tau);

// Nearest-neighbor upsampling of a [grid_h, grid_w] binary mask to
// [image_h, image_w].
std::vector<uint8_t> upsample_mask(const std::vector<uint8_t>& mask, int grid_h,
                                   int grid_w, int image_h, int image_w);

// Composites semi-transparent class colors over the clip frames wherever
// the class's thresholded, upsampled attention is set. Writes
// overlay_%03d.png and legend.txt under out_dir. Returns the file paths.
std::vector<std::string> render_overlay(const std::vector<uint8_t>& pixels,
                                        int frames, int height, int width,
                                        const ModelOutput<float>& output,
                                        const std::vector<std::string>& class_names,
                                        const OverlaySpec& spec,
                                        const std::string& out_dir);

}  // namespace actionslot
