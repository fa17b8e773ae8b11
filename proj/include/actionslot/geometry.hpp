#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "actionslot/labels.hpp"

namespace actionslot {

// Semantic class ids used in per-pixel rasters.
enum SemanticClass : uint8_t {
  kVoid = 0,
  kDrivable = 1,
  kCrosswalk = 2,
  kSidewalk = 3,
  kVehicleClass = 4,
  kTwoWheelerClass = 5,
  kPedestrianClass = 6,
};
inline constexpr int kNumSemanticClasses = 7;

struct PointD {
  double x = 0, y = 0;
};

struct RectI {  // half-open [x0,x1) x [y0,y1)
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

// Top-down 4-way intersection. Z1 is the bottom (ego) approach, Z2 right,
// Z3 top, Z4 left; corner C_i sits between Z_i and Z_{i+1 mod 4}, so C1 is
// bottom-right, C2 top-right, C3 top-left, C4 bottom-left. With this
// handedness Z1->Z4 is a left turn, Z1->Z3 straight, Z1->Z2 a right turn.
class WorldGeometry {
 public:
  WorldGeometry(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }

  // Static semantic raster (roads, crosswalks, sidewalks; no agents), H*W.
  const std::vector<uint8_t>& base_raster() const { return base_raster_; }

  const RectI& corner_rect(int index) const { return corners_.at(index - 1); }
  const RectI& intersection_box() const { return intersection_; }

  bool is_drivable(double x, double y) const;
  bool is_walkable(double x, double y) const;  // sidewalk or crosswalk
  bool inside_image(double x, double y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  // Center-line route for a vehicle-kind movement between roadways; one or
  // two segments. `lateral` shifts the route sideways (signed, to the right
  // of travel).
  std::vector<PointD> roadway_route(int src, int dst, double lateral) const;

  // Walking route between adjacent corners, through the shared crosswalk.
  std::vector<PointD> corner_route(int src, int dst, double lateral) const;

  // Parking spot on the approach lane of roadway `arm`, `along` in [0,1]
  // away from the intersection. Used for idle vehicles.
  PointD parked_spot(int arm, double along) const;

  // Point inside corner `index`, offsets in [0,1].
  PointD corner_spot(int index, double u, double v) const;

  // Classifies an off-intersection point to the roadway arm it lies on, or
  // 0 if it is not on a road approach. Used by the label replay oracle.
  int roadway_arm_of(double x, double y) const;

  // Corner containing the point, or 0.
  int corner_of(double x, double y) const;

 private:
  void paint();

  int height_, width_;
  double cx_, cy_;
  int road_half_;       // half width of each road band
  int crosswalk_w_;
  int corner_size_;
  RectI vertical_road_, horizontal_road_, intersection_;
  std::array<RectI, 4> corners_;
  std::array<RectI, 4> crosswalks_;  // [0]=south (C4-C1), [1]=east (C1-C2),
                                     // [2]=north (C2-C3), [3]=west (C3-C4)
  std::vector<uint8_t> base_raster_;

  double northbound_x_, southbound_x_, eastbound_y_, westbound_y_;
  double spawn_margin_;
};

// RGB color table for semantic classes (flat-shaded schematic rendering).
std::array<uint8_t, 3> semantic_color(SemanticClass cls);

}  // namespace actionslot
