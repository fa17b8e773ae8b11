#include "actionslot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actionslot {

namespace {

void fill_rect(std::vector<uint8_t>& raster, int width, const RectI& r,
               uint8_t value) {
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) {
      raster[static_cast<size_t>(y) * width + x] = value;
    }
  }
}

}  // namespace

WorldGeometry::WorldGeometry(int height, int width)
    : height_(height), width_(width) {
  if (height < 32 || width < height) {
    throw std::invalid_argument("world geometry requires height >= 32 and width >= height");
  }
  cx_ = width_ / 2.0;
  cy_ = height_ / 2.0;
  road_half_ = std::max(6, height_ * 10 / 64);
  crosswalk_w_ = std::max(2, height_ / 16);
  corner_size_ = std::max(8, height_ / 4);
  spawn_margin_ = 8.0;

  int icx = width_ / 2, icy = height_ / 2;
  vertical_road_ = {icx - road_half_, 0, icx + road_half_, height_};
  horizontal_road_ = {0, icy - road_half_, width_, icy + road_half_};
  intersection_ = {icx - road_half_, icy - road_half_, icx + road_half_,
                   icy + road_half_};

  // Crosswalks sit on the road surface just outside the intersection box.
  crosswalks_[0] = {intersection_.x0, intersection_.y1, intersection_.x1,
                    intersection_.y1 + crosswalk_w_};  // south, C4-C1
  crosswalks_[1] = {intersection_.x1, intersection_.y0,
                    intersection_.x1 + crosswalk_w_, intersection_.y1};  // east, C1-C2
  crosswalks_[2] = {intersection_.x0, intersection_.y0 - crosswalk_w_,
                    intersection_.x1, intersection_.y0};  // north, C2-C3
  crosswalks_[3] = {intersection_.x0 - crosswalk_w_, intersection_.y0,
                    intersection_.x0, intersection_.y1};  // west, C3-C4

  // Corner squares sit directly diagonal to the intersection box so the
  // crosswalk bands end inside them and walking routes stay covered.
  int cs = corner_size_;
  corners_[0] = {intersection_.x1, intersection_.y1, intersection_.x1 + cs,
                 intersection_.y1 + cs};  // C1 bottom-right
  corners_[1] = {intersection_.x1, intersection_.y0 - cs, intersection_.x1 + cs,
                 intersection_.y0};  // C2 top-right
  corners_[2] = {intersection_.x0 - cs, intersection_.y0 - cs, intersection_.x0,
                 intersection_.y0};  // C3 top-left
  corners_[3] = {intersection_.x0 - cs, intersection_.y1, intersection_.x0,
                 intersection_.y1 + cs};  // C4 bottom-left

  // Right-hand traffic lane centers.
  northbound_x_ = cx_ + road_half_ / 2.0;
  southbound_x_ = cx_ - road_half_ / 2.0;
  eastbound_y_ = cy_ + road_half_ / 2.0;
  westbound_y_ = cy_ - road_half_ / 2.0;

  paint();
}

void WorldGeometry::paint() {
  base_raster_.assign(static_cast<size_t>(height_) * width_, kVoid);
  fill_rect(base_raster_, width_, vertical_road_, kDrivable);
  fill_rect(base_raster_, width_, horizontal_road_, kDrivable);
  for (const auto& cw : crosswalks_) fill_rect(base_raster_, width_, cw, kCrosswalk);

  // Sidewalk: the corner squares plus strips that extend from each corner
  // along the adjacent road edges toward the image border.
  for (const auto& c : corners_) fill_rect(base_raster_, width_, c, kSidewalk);
  int cw = crosswalk_w_;
  // strips flanking the vertical road
  fill_rect(base_raster_, width_,
            {vertical_road_.x1, 0, vertical_road_.x1 + cw, corners_[1].y0}, kSidewalk);
  fill_rect(base_raster_, width_,
            {vertical_road_.x1, corners_[0].y1, vertical_road_.x1 + cw, height_}, kSidewalk);
  fill_rect(base_raster_, width_,
            {vertical_road_.x0 - cw, 0, vertical_road_.x0, corners_[2].y0}, kSidewalk);
  fill_rect(base_raster_, width_,
            {vertical_road_.x0 - cw, corners_[3].y1, vertical_road_.x0, height_}, kSidewalk);
  // strips flanking the horizontal road
  fill_rect(base_raster_, width_,
            {0, horizontal_road_.y0 - cw, corners_[2].x0, horizontal_road_.y0}, kSidewalk);
  fill_rect(base_raster_, width_,
            {corners_[1].x1, horizontal_road_.y0 - cw, width_, horizontal_road_.y0}, kSidewalk);
  fill_rect(base_raster_, width_,
            {0, horizontal_road_.y1, corners_[3].x0, horizontal_road_.y1 + cw}, kSidewalk);
  fill_rect(base_raster_, width_,
            {corners_[0].x1, horizontal_road_.y1, width_, horizontal_road_.y1 + cw}, kSidewalk);
}

bool WorldGeometry::is_drivable(double x, double y) const {
  if (!inside_image(x, y)) return false;
  uint8_t c = base_raster_[static_cast<size_t>(y) * width_ + static_cast<size_t>(x)];
  return c == kDrivable || c == kCrosswalk;
}

bool WorldGeometry::is_walkable(double x, double y) const {
  if (!inside_image(x, y)) return false;
  uint8_t c = base_raster_[static_cast<size_t>(y) * width_ + static_cast<size_t>(x)];
  return c == kSidewalk || c == kCrosswalk;
}

std::vector<PointD> WorldGeometry::roadway_route(int src, int dst,
                                                 double lateral) const {
  if (src < 1 || src > 4 || dst < 1 || dst > 4 || src == dst) {
    throw std::invalid_argument("invalid roadway pair");
  }
  double m = spawn_margin_;
  double top = -m, bottom = height_ + m, left = -m, right = width_ + m;

  // Entry lane heading and exit lane per arm.
  PointD entry, exit;
  switch (src) {
    case 1: entry = {northbound_x_, bottom}; break;
    case 2: entry = {right, westbound_y_}; break;
    case 3: entry = {southbound_x_, top}; break;
    case 4: entry = {left, eastbound_y_}; break;
  }
  switch (dst) {
    case 1: exit = {southbound_x_, bottom}; break;
    case 2: exit = {right, eastbound_y_}; break;
    case 3: exit = {northbound_x_, top}; break;
    case 4: exit = {left, westbound_y_}; break;
  }

  std::vector<PointD> route;
  route.push_back(entry);
  bool entry_vertical = (src == 1 || src == 3);
  bool exit_vertical = (dst == 1 || dst == 3);
  if (entry_vertical != exit_vertical) {
    // single turn waypoint at the lane crossing inside the intersection
    double tx = entry_vertical ? entry.x : exit.x;
    double ty = entry_vertical ? exit.y : entry.y;
    route.push_back({tx, ty});
  }
  // U-turn-free by construction: straight movements share the lane line.
  route.push_back(exit);

  if (lateral != 0.0) {
    // Shift each segment to the right of travel; rebuild the corner point
    // as the intersection of the shifted segments. With y down, the right
    // of travel direction (dx,dy) is (-dy,dx).
    std::vector<PointD> shifted;
    for (size_t i = 0; i + 1 < route.size(); ++i) {
      PointD a = route[i], b = route[i + 1];
      double dx = b.x - a.x, dy = b.y - a.y;
      double len = std::hypot(dx, dy);
      double nx = -dy / len, ny = dx / len;
      shifted.push_back({a.x + nx * lateral, a.y + ny * lateral});
      shifted.push_back({b.x + nx * lateral, b.y + ny * lateral});
    }
    std::vector<PointD> out;
    out.push_back(shifted.front());
    if (shifted.size() == 4) {
      // axis-aligned segments: corner at (vertical seg x, horizontal seg y)
      bool first_vertical = std::abs(shifted[0].x - shifted[1].x) < 1e-9;
      double tx = first_vertical ? shifted[0].x : shifted[2].x;
      double ty = first_vertical ? shifted[2].y : shifted[0].y;
      out.push_back({tx, ty});
    }
    out.push_back(shifted.back());
    return out;
  }
  return route;
}

std::vector<PointD> WorldGeometry::corner_route(int src, int dst,
                                                double lateral) const {
  if (!corners_adjacent(src, dst)) {
    throw std::invalid_argument("corner route requires adjacent corners");
  }
  auto center = [&](int i) {
    const RectI& r = corner_rect(i);
    return PointD{(r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0};
  };
  // Shared crosswalk: crosswalks_[i] connects corners i+1 and (i mod 4)+1
  // (south: C4-C1, east: C1-C2, north: C2-C3, west: C3-C4).
  int lo = std::min(src, dst), hi = std::max(src, dst);
  int cw_idx;
  if (lo == 1 && hi == 4) cw_idx = 0;
  else if (lo == 1 && hi == 2) cw_idx = 1;
  else if (lo == 2 && hi == 3) cw_idx = 2;
  else cw_idx = 3;  // 3,4
  const RectI& cw = crosswalks_[cw_idx];
  double mx = (cw.x0 + cw.x1) / 2.0, my = (cw.y0 + cw.y1) / 2.0;

  auto portal = [&](int i) {
    const RectI& r = corner_rect(i);
    bool vertical_walk = (cw_idx == 1 || cw_idx == 3);  // east/west crosswalks
    if (vertical_walk) {
      // walk along x = mx (+lateral), enter the corner at its near edge
      double py = (r.y0 + r.y1) / 2.0 > my ? r.y0 + 2.0 : r.y1 - 2.0;
      return PointD{mx + lateral, py};
    }
    double px = (r.x0 + r.x1) / 2.0 > mx ? r.x0 + 2.0 : r.x1 - 2.0;
    return PointD{px, my + lateral};
  };

  return {center(src), portal(src), portal(dst), center(dst)};
}

PointD WorldGeometry::parked_spot(int arm, double along) const {
  // A point on the approach lane of `arm`, between the image edge and the
  // crosswalk, pulled toward the edge as `along` grows.
  double margin = 10.0;
  switch (arm) {
    case 1: {
      double y0 = crosswalks_[0].y1 + 6.0, y1 = height_ - margin;
      return {northbound_x_, y0 + (y1 - y0) * along};
    }
    case 2: {
      double x0 = crosswalks_[1].x1 + 6.0, x1 = width_ - margin;
      return {x0 + (x1 - x0) * along, westbound_y_};
    }
    case 3: {
      double y0 = margin, y1 = crosswalks_[2].y0 - 6.0;
      return {southbound_x_, y0 + (y1 - y0) * along};
    }
    default: {
      double x0 = margin, x1 = crosswalks_[3].x0 - 6.0;
      return {x0 + (x1 - x0) * along, eastbound_y_};
    }
  }
}

PointD WorldGeometry::corner_spot(int index, double u, double v) const {
  const RectI& r = corner_rect(index);
  return {r.x0 + 2 + u * (r.x1 - r.x0 - 4), r.y0 + 2 + v * (r.y1 - r.y0 - 4)};
}

int WorldGeometry::roadway_arm_of(double x, double y) const {
  bool on_vertical = x >= vertical_road_.x0 && x < vertical_road_.x1;
  bool on_horizontal = y >= horizontal_road_.y0 && y < horizontal_road_.y1;
  if (on_vertical && !on_horizontal) return y > cy_ ? 1 : 3;
  if (on_horizontal && !on_vertical) return x > cx_ ? 2 : 4;
  if (on_vertical && on_horizontal) return 0;  // inside the intersection box
  // Off-road (e.g. spawn point just outside the image): nearest arm.
  if (on_vertical) return y > cy_ ? 1 : 3;
  if (on_horizontal) return x > cx_ ? 2 : 4;
  return 0;
}

int WorldGeometry::corner_of(double x, double y) const {
  for (int i = 0; i < 4; ++i) {
    if (corners_[i].contains(x, y)) return i + 1;
  }
  return 0;
}

std::array<uint8_t, 3> semantic_color(SemanticClass cls) {
  switch (cls) {
    case kVoid: return {34, 108, 58};
    case kDrivable: return {72, 72, 78};
    case kCrosswalk: return {198, 198, 204};
    case kSidewalk: return {152, 140, 124};
    case kVehicleClass: return {60, 90, 205};
    case kTwoWheelerClass: return {232, 142, 38};
    case kPedestrianClass: return {222, 58, 160};
  }
  return {0, 0, 0};
}

}  // namespace actionslot
