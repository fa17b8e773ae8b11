#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace actionslot {

struct Image {
  int height = 0, width = 0, channels = 0;  // channels: 1 (gray) or 3 (RGB)
  std::vector<uint8_t> data;                // height*width*channels
};

// 8-bit PNG with fixed encoder settings so identical pixels give identical
// files. Throws std::runtime_error on I/O or codec failure.
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

}  // namespace actionslot
