#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace actionslot {

// Region kind of a topology token: roadways Z1..Z4, sidewalk corners C1..C4.
enum class RegionKind : uint8_t { kRoadway, kCorner };

struct TopologyToken {
  RegionKind kind = RegionKind::kRoadway;
  int index = 1;  // 1..4

  std::string to_string() const;
  bool operator==(const TopologyToken&) const = default;
};

// C = four-or-more-wheeled vehicle, K = two-wheeler, P = pedestrian.
enum class AgentKind : uint8_t { kVehicle, kTwoWheeler, kPedestrian };

char agent_symbol(AgentKind kind);

// Corner C_i sits between roadways Z_i and Z_{i+1 mod 4}; two corners are
// adjacent when their indices differ by 1 mod 4. Diagonal pairs (C1-C3,
// C2-C4) are outside the label space.
bool corners_adjacent(int i, int j);

// One parsed label of the form "SRC-DST:AGENT[+]", e.g. "Z1-Z4:C+".
struct AtomicActivity {
  TopologyToken source;
  TopologyToken destination;
  AgentKind agent = AgentKind::kVehicle;
  bool group = false;  // trailing "+"

  std::string to_string() const;
  bool operator==(const AtomicActivity&) const = default;
};

// Parses "SRC-DST:AGENT[+]". Whitespace around tokens is tolerated; the
// canonical form produced by to_string() has none. Throws
// std::invalid_argument on malformed syntax or any invariant violation
// (source==destination, kind mismatch, pedestrian on roadways, diagonal
// corner pair, index out of range).
AtomicActivity parse_activity(std::string_view text);

// The six per-agent-kind mAP slices used in reports.
enum class AgentSlice : uint8_t { kC, kK, kP, kCPlus, kKPlus, kPPlus };

std::string slice_name(AgentSlice slice);
AgentSlice slice_of(const AtomicActivity& activity);

// The ordered label space. The canonical catalog holds 64 classes: vehicle
// singles (12, lexicographic by source/destination index), vehicle groups
// (12), two-wheeler singles (12), two-wheeler groups (12), pedestrian
// singles (8), pedestrian groups (8).
class ClassCatalog {
 public:
  // Full canonical 64-class catalog. Deterministic across runs/platforms.
  static ClassCatalog full();

  // Catalog restricted to the named classes, in the given order. Every name
  // must parse and be a member of the full catalog.
  static ClassCatalog subset(const std::vector<std::string>& names);

  int size() const { return static_cast<int>(classes_.size()); }
  const AtomicActivity& at(int idx) const { return classes_.at(idx); }
  const std::vector<AtomicActivity>& classes() const { return classes_; }

  std::optional<int> index_of(const AtomicActivity& activity) const;
  std::optional<int> index_of(const std::string& canonical) const;

  // Indices of the classes belonging to one agent-kind slice.
  std::vector<int> slice_indices(AgentSlice slice) const;

  // FNV-1a over the joined canonical strings; used to match checkpoints
  // against datasets.
  uint64_t hash() const;

  std::vector<std::string> names() const;

 private:
  explicit ClassCatalog(std::vector<AtomicActivity> classes);

  std::vector<AtomicActivity> classes_;
  std::unordered_map<std::string, int> index_;
};

// Binary multi-label vector y over a catalog; entries are 0/1.
using MultiHotLabel = std::vector<uint8_t>;

// Sets bit index_of(a) for each activity; duplicates collapse. Throws
// std::invalid_argument if an activity is not in the catalog.
MultiHotLabel encode_multihot(const std::vector<AtomicActivity>& activities,
                              const ClassCatalog& catalog);

// Ego-action label space. Z1-Z1:E is the "undetermined" class; the ego
// always enters from Z1.
inline constexpr int kNumEgoClasses = 4;
const std::array<std::string, kNumEgoClasses>& ego_class_names();
int ego_index_of(const std::string& name);  // throws on unknown name

}  // namespace actionslot
