#include "actionslot/viz.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace actionslot {

std::array<uint8_t, 3> overlay_color(int i) {
  static const std::array<std::array<uint8_t, 3>, 10> palette = {{
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
      {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
      {210, 245, 60},  {250, 190, 190},
  }};
  return palette[static_cast<size_t>(i) % palette.size()];
}

std::vector<uint8_t> threshold_attention(const std::vector<float>& values,
                                         double tau) {
  if (tau <= 0.0 || tau >= 1.0) {
    throw std::invalid_argument("threshold tau must lie in (0, 1)");
  }
  std::vector<uint8_t> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] > tau ? 1 : 0;
  }
  return out;
}

std::vector<uint8_t> upsample_mask(const std::vector<uint8_t>& mask, int grid_h,
                                   int grid_w, int image_h, int image_w) {
  std::vector<uint8_t> out(static_cast<size_t>(image_h) * image_w);
  for (int y = 0; y < image_h; ++y) {
    int gy = y * grid_h / image_h;
    for (int x = 0; x < image_w; ++x) {
      int gx = x * grid_w / image_w;
      out[static_cast<size_t>(y) * image_w + x] =
          mask[static_cast<size_t>(gy) * grid_w + gx];
    }
  }
  return out;
}

std::vector<std::string> render_overlay(const std::vector<uint8_t>& pixels,
                                        int frames, int height, int width,
                                        const ModelOutput<float>& output,
                                        const std::vector<std::string>& class_names,
                                        const OverlaySpec& spec,
                                        const std::string& out_dir) {
  if (spec.tau <= 0.0 || spec.tau >= 1.0) {
    throw std::invalid_argument("threshold tau must lie in (0, 1)");
  }
  for (int c : spec.class_indices) {
    if (c < 0 || c >= static_cast<int>(class_names.size())) {
      throw std::invalid_argument("overlay class index out of range");
    }
  }
  fs::create_directories(out_dir);
  std::vector<std::string> paths;

  for (int t = 0; t < frames; ++t) {
    Image img;
    img.height = height;
    img.width = width;
    img.channels = 3;
    size_t frame_off = static_cast<size_t>(t) * height * width * 3;
    img.data.assign(pixels.begin() + frame_off,
                    pixels.begin() + frame_off + static_cast<size_t>(height) * width * 3);

    for (size_t sel = 0; sel < spec.class_indices.size(); ++sel) {
      int cls = spec.class_indices[sel];
      std::array<uint8_t, 3> color = sel < spec.colors.size()
                                         ? spec.colors[sel]
                                         : overlay_color(static_cast<int>(sel));
      std::vector<float> slice = output.attention_slice(cls, t);
      std::vector<uint8_t> mask = threshold_attention(slice, spec.tau);
      std::vector<uint8_t> up =
          upsample_mask(mask, output.grid_h, output.grid_w, height, width);
      for (size_t p = 0; p < up.size(); ++p) {
        if (!up[p]) continue;
        for (int ch = 0; ch < 3; ++ch) {
          double blended = (1.0 - spec.alpha) * img.data[p * 3 + ch] +
                           spec.alpha * color[ch];
          img.data[p * 3 + ch] = static_cast<uint8_t>(blended + 0.5);
        }
      }
    }

    char name[32];
    std::snprintf(name, sizeof(name), "overlay_%03d.png", t);
    std::string path = (fs::path(out_dir) / name).string();
    write_png(path, img);
    paths.push_back(path);
  }

  std::string legend_path = (fs::path(out_dir) / "legend.txt").string();
  std::ofstream legend(legend_path);
  for (size_t sel = 0; sel < spec.class_indices.size(); ++sel) {
    std::array<uint8_t, 3> color = sel < spec.colors.size()
                                       ? spec.colors[sel]
                                       : overlay_color(static_cast<int>(sel));
    legend << class_names[spec.class_indices[sel]] << "\t"
           << static_cast<int>(color[0]) << "," << static_cast<int>(color[1])
           << "," << static_cast<int>(color[2]) << "\n";
  }
  paths.push_back(legend_path);
  return paths;
}

}  // namespace actionslot
