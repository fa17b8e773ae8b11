#include "actionslot/labels.hpp"

#include <algorithm>
#include <stdexcept>

namespace actionslot {

namespace {

std::string_view strip(std::string_view s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_label(std::string_view text, const std::string& why) {
  throw std::invalid_argument("invalid activity label \"" + std::string(text) +
                              "\": " + why);
}

TopologyToken parse_token(std::string_view raw, std::string_view whole) {
  std::string_view s = strip(raw);
  if (s.size() != 2) bad_label(whole, "expected a two-character topology token");
  RegionKind kind;
  if (s[0] == 'Z') {
    kind = RegionKind::kRoadway;
  } else if (s[0] == 'C') {
    kind = RegionKind::kCorner;
  } else {
    bad_label(whole, "topology token must start with 'Z' or 'C'");
  }
  if (s[1] < '1' || s[1] > '4') bad_label(whole, "topology index out of 1..4");
  return {kind, s[1] - '0'};
}

}  // namespace

std::string TopologyToken::to_string() const {
  std::string s(1, kind == RegionKind::kRoadway ? 'Z' : 'C');
  s += static_cast<char>('0' + index);
  return s;
}

char agent_symbol(AgentKind kind) {
  switch (kind) {
    case AgentKind::kVehicle: return 'C';
    case AgentKind::kTwoWheeler: return 'K';
    case AgentKind::kPedestrian: return 'P';
  }
  return '?';
}

bool corners_adjacent(int i, int j) {
  return (i % 4) + 1 == j || (j % 4) + 1 == i;
}

std::string AtomicActivity::to_string() const {
  std::string s = source.to_string();
  s += '-';
  s += destination.to_string();
  s += ':';
  s += agent_symbol(agent);
  if (group) s += '+';
  return s;
}

AtomicActivity parse_activity(std::string_view text) {
  if (strip(text).empty()) bad_label(text, "empty label");
  size_t dash = text.find('-');
  size_t colon = text.find(':');
  if (dash == std::string_view::npos || colon == std::string_view::npos ||
      colon < dash) {
    bad_label(text, "expected form SRC-DST:AGENT[+]");
  }

  AtomicActivity a;
  a.source = parse_token(text.substr(0, dash), text);
  a.destination = parse_token(text.substr(dash + 1, colon - dash - 1), text);

  std::string_view tail = strip(text.substr(colon + 1));
  if (tail.empty()) bad_label(text, "missing agent kind");
  switch (tail[0]) {
    case 'C': a.agent = AgentKind::kVehicle; break;
    case 'K': a.agent = AgentKind::kTwoWheeler; break;
    case 'P': a.agent = AgentKind::kPedestrian; break;
    default: bad_label(text, "agent kind must be one of C, K, P");
  }
  if (tail.size() == 2 && tail[1] == '+') {
    a.group = true;
  } else if (tail.size() > 1) {
    bad_label(text, "unexpected trailing characters after agent kind");
  }

  if (a.source == a.destination) bad_label(text, "source equals destination");
  if (a.source.kind != a.destination.kind) {
    bad_label(text, "source and destination kinds differ");
  }
  if (a.agent == AgentKind::kPedestrian) {
    if (a.source.kind != RegionKind::kCorner) {
      bad_label(text, "pedestrians move between corners");
    }
    if (!corners_adjacent(a.source.index, a.destination.index)) {
      bad_label(text, "diagonal corner pair is not a valid pedestrian move");
    }
  } else {
    if (a.source.kind != RegionKind::kRoadway) {
      bad_label(text, "vehicles and two-wheelers move between roadways");
    }
  }
  return a;
}

std::string slice_name(AgentSlice slice) {
  switch (slice) {
    case AgentSlice::kC: return "C";
    case AgentSlice::kK: return "K";
    case AgentSlice::kP: return "P";
    case AgentSlice::kCPlus: return "C+";
    case AgentSlice::kKPlus: return "K+";
    case AgentSlice::kPPlus: return "P+";
  }
  return "?";
}

AgentSlice slice_of(const AtomicActivity& activity) {
  switch (activity.agent) {
    case AgentKind::kVehicle:
      return activity.group ? AgentSlice::kCPlus : AgentSlice::kC;
    case AgentKind::kTwoWheeler:
      return activity.group ? AgentSlice::kKPlus : AgentSlice::kK;
    case AgentKind::kPedestrian:
      return activity.group ? AgentSlice::kPPlus : AgentSlice::kP;
  }
  return AgentSlice::kC;
}

ClassCatalog::ClassCatalog(std::vector<AtomicActivity> classes)
    : classes_(std::move(classes)) {
  for (int i = 0; i < static_cast<int>(classes_.size()); ++i) {
    index_.emplace(classes_[i].to_string(), i);
  }
}

ClassCatalog ClassCatalog::full() {
  std::vector<AtomicActivity> classes;
  classes.reserve(64);
  auto road = [](int i) { return TopologyToken{RegionKind::kRoadway, i}; };
  auto corner = [](int i) { return TopologyToken{RegionKind::kCorner, i}; };

  for (AgentKind kind : {AgentKind::kVehicle, AgentKind::kTwoWheeler}) {
    for (bool group : {false, true}) {
      for (int s = 1; s <= 4; ++s) {
        for (int d = 1; d <= 4; ++d) {
          if (s == d) continue;
          classes.push_back({road(s), road(d), kind, group});
        }
      }
    }
  }
  for (bool group : {false, true}) {
    for (int s = 1; s <= 4; ++s) {
      for (int d = 1; d <= 4; ++d) {
        if (s == d || !corners_adjacent(s, d)) continue;
        classes.push_back({corner(s), corner(d), AgentKind::kPedestrian, group});
      }
    }
  }
  return ClassCatalog(std::move(classes));
}

ClassCatalog ClassCatalog::subset(const std::vector<std::string>& names) {
  ClassCatalog all = full();
  std::vector<AtomicActivity> classes;
  classes.reserve(names.size());
  for (const auto& name : names) {
    AtomicActivity a = parse_activity(name);
    if (!all.index_of(a)) {
      throw std::invalid_argument("class \"" + name +
                                  "\" is not in the canonical catalog");
    }
    if (std::find(classes.begin(), classes.end(), a) != classes.end()) {
      throw std::invalid_argument("duplicate class \"" + name + "\" in subset");
    }
    classes.push_back(a);
  }
  return ClassCatalog(std::move(classes));
}

std::optional<int> ClassCatalog::index_of(const AtomicActivity& activity) const {
  return index_of(activity.to_string());
}

std::optional<int> ClassCatalog::index_of(const std::string& canonical) const {
  auto it = index_.find(canonical);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> ClassCatalog::slice_indices(AgentSlice slice) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (slice_of(classes_[i]) == slice) out.push_back(i);
  }
  return out;
}

uint64_t ClassCatalog::hash() const {
  uint64_t h = 1469598103934665603ull;
  for (const auto& c : classes_) {
    for (char ch : c.to_string()) {
      h ^= static_cast<uint8_t>(ch);
      h *= 1099511628211ull;
    }
    h ^= static_cast<uint8_t>('\n');
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> ClassCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(c.to_string());
  return out;
}

MultiHotLabel encode_multihot(const std::vector<AtomicActivity>& activities,
                              const ClassCatalog& catalog) {
  MultiHotLabel bits(catalog.size(), 0);
  for (const auto& a : activities) {
    auto idx = catalog.index_of(a);
    if (!idx) {
      throw std::invalid_argument("activity \"" + a.to_string() +
                                  "\" is not in the catalog");
    }
    bits[*idx] = 1;
  }
  return bits;
}

const std::array<std::string, kNumEgoClasses>& ego_class_names() {
  static const std::array<std::string, kNumEgoClasses> names = {
      "Z1-Z2:E", "Z1-Z3:E", "Z1-Z4:E", "Z1-Z1:E"};
  return names;
}

int ego_index_of(const std::string& name) {
  const auto& names = ego_class_names();
  for (int i = 0; i < kNumEgoClasses; ++i) {
    if (names[i] == name) return i;
  }
  throw std::invalid_argument("unknown ego-action class \"" + name + "\"");
}

}  // namespace actionslot
