#include <doctest.h>

#include <set>
#include <stdexcept>

#include "actionslot/labels.hpp"
#include "actionslot/rng.hpp"

using namespace actionslot;

TEST_CASE("parse canonical labels") {
  AtomicActivity a = parse_activity("Z1-Z4:C+");
  CHECK(a.source.kind == RegionKind::kRoadway);
  CHECK(a.source.index == 1);
  CHECK(a.destination.index == 4);
  CHECK(a.agent == AgentKind::kVehicle);
  CHECK(a.group);
  CHECK(a.to_string() == "Z1-Z4:C+");

  AtomicActivity p = parse_activity("C2-C1:P");
  CHECK(p.source.kind == RegionKind::kCorner);
  CHECK(p.source.index == 2);
  CHECK(p.destination.index == 1);
  CHECK(p.agent == AgentKind::kPedestrian);
  CHECK_FALSE(p.group);
}

TEST_CASE("parse tolerates whitespace and yields canonical form") {
  AtomicActivity a = parse_activity("  Z2 - Z3 : K+  ");
  CHECK(a.to_string() == "Z2-Z3:K+");
}

TEST_CASE("parse rejects malformed labels") {
  CHECK_THROWS_AS(parse_activity(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_activity("Z1Z4:C"), std::invalid_argument);
  CHECK_THROWS_AS(parse_activity("Z1-Z1:C"), std::invalid_argument);     // self loop
  CHECK_THROWS_AS(parse_activity("Z1-C2:C"), std::invalid_argument);     // kind mismatch
  CHECK_THROWS_AS(parse_activity("C1-C2:C"), std::invalid_argument);     // vehicle on corners
  CHECK_THROWS_AS(parse_activity("Z1-Z2:P"), std::invalid_argument);     // pedestrian on roadways
  CHECK_THROWS_AS(parse_activity("C1-C3:P"), std::invalid_argument);     // diagonal corners
  CHECK_THROWS_AS(parse_activity("C2-C4:P"), std::invalid_argument);
  CHECK_THROWS_AS(parse_activity("Z0-Z2:C"), std::invalid_argument);     // index range
  CHECK_THROWS_AS(parse_activity("Z5-Z2:C"), std::invalid_argument);
  CHECK_THROWS_AS(parse_activity("Z1-Z2:X"), std::invalid_argument);
  CHECK_THROWS_AS(parse_activity("Z1-Z2:C++"), std::invalid_argument);
}

TEST_CASE("catalog has 64 classes with the documented partition") {
  ClassCatalog catalog = ClassCatalog::full();
  REQUIRE(catalog.size() == 64);
  CHECK(catalog.slice_indices(AgentSlice::kC).size() == 12);
  CHECK(catalog.slice_indices(AgentSlice::kCPlus).size() == 12);
  CHECK(catalog.slice_indices(AgentSlice::kK).size() == 12);
  CHECK(catalog.slice_indices(AgentSlice::kKPlus).size() == 12);
  CHECK(catalog.slice_indices(AgentSlice::kP).size() == 8);
  CHECK(catalog.slice_indices(AgentSlice::kPPlus).size() == 8);

  // no self loops, kinds consistent
  for (int i = 0; i < catalog.size(); ++i) {
    const auto& a = catalog.at(i);
    CHECK(a.source.index != a.destination.index);
    CHECK(a.source.kind == a.destination.kind);
  }
}

TEST_CASE("catalog pedestrian singles match the adjacency table") {
  ClassCatalog catalog = ClassCatalog::full();
  std::set<std::string> ped;
  for (int i = 0; i < catalog.size(); ++i) {
    const auto& a = catalog.at(i);
    if (a.agent == AgentKind::kPedestrian && !a.group) ped.insert(a.to_string());
  }
  std::set<std::string> expected = {"C1-C2:P", "C1-C4:P", "C2-C1:P", "C2-C3:P",
                                    "C3-C2:P", "C3-C4:P", "C4-C1:P", "C4-C3:P"};
  CHECK(ped == expected);
}

TEST_CASE("catalog ordering is deterministic and round-trips") {
  ClassCatalog a = ClassCatalog::full();
  ClassCatalog b = ClassCatalog::full();
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.at(i) == b.at(i));
    CHECK(parse_activity(a.at(i).to_string()) == a.at(i));
    CHECK(a.index_of(a.at(i)) == i);
  }
  CHECK(a.hash() == b.hash());
}

TEST_CASE("catalog subset validates membership and duplicates") {
  auto sub = ClassCatalog::subset({"Z1-Z3:C", "C1-C2:P"});
  CHECK(sub.size() == 2);
  CHECK(sub.index_of(std::string("Z1-Z3:C")) == 0);
  CHECK_THROWS_AS(ClassCatalog::subset({"C1-C3:P"}), std::invalid_argument);
  CHECK_THROWS_AS(ClassCatalog::subset({"Z1-Z3:C", "Z1-Z3:C"}),
                  std::invalid_argument);
  CHECK(sub.hash() != ClassCatalog::full().hash());
}

TEST_CASE("encode_multihot basics") {
  ClassCatalog catalog = ClassCatalog::full();
  MultiHotLabel empty = encode_multihot({}, catalog);
  REQUIRE(empty.size() == 64);
  for (uint8_t b : empty) CHECK(b == 0);

  AtomicActivity a = parse_activity("Z1-Z4:C+");
  MultiHotLabel one = encode_multihot({a}, catalog);
  int bits = 0;
  for (uint8_t b : one) bits += b;
  CHECK(bits == 1);
  CHECK(one[*catalog.index_of(a)] == 1);

  MultiHotLabel dup = encode_multihot({a, a}, catalog);
  bits = 0;
  for (uint8_t b : dup) bits += b;
  CHECK(bits == 1);

  ClassCatalog sub = ClassCatalog::subset({"Z1-Z3:C"});
  CHECK_THROWS_AS(encode_multihot({a}, sub), std::invalid_argument);
}

TEST_CASE("encode_multihot is monotone") {
  ClassCatalog catalog = ClassCatalog::full();
  Rng rng(7);
  std::vector<AtomicActivity> acts;
  MultiHotLabel prev(catalog.size(), 0);
  for (int step = 0; step < 40; ++step) {
    acts.push_back(catalog.at(static_cast<int>(rng.uniform_index(catalog.size()))));
    MultiHotLabel now = encode_multihot(acts, catalog);
    for (size_t i = 0; i < now.size(); ++i) CHECK(now[i] >= prev[i]);
    prev = now;
  }
}

TEST_CASE("random round trips over the full catalog") {
  ClassCatalog catalog = ClassCatalog::full();
  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const auto& a = catalog.at(static_cast<int>(rng.uniform_index(catalog.size())));
    CHECK(parse_activity(a.to_string()) == a);
  }
}

TEST_CASE("ego class space") {
  const auto& names = ego_class_names();
  REQUIRE(names.size() == 4);
  CHECK(names[3] == "Z1-Z1:E");  // the undetermined class
  CHECK(ego_index_of("Z1-Z3:E") == 1);
  CHECK_THROWS_AS(ego_index_of("Z2-Z1:E"), std::invalid_argument);
}
