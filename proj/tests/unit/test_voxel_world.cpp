#include <gtest/gtest.h>

#include <random>

#include "invariants.hpp"

using namespace voxelsmith;

namespace {

std::string one_block_doc(const std::string& blocks) {
  return R"({"palette_version":1,"blocks":[)" + blocks + "]}";
}

}  // namespace

TEST(LoadHouse, SingleCellRoundTrip) {
  const auto g = load_house(one_block_doc(R"({"x":1,"y":0,"z":1,"t":1,"label":"foundation"})"));
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.find({1, 0, 1})->type, BlockType::stone);
  EXPECT_EQ(g.find({1, 0, 1})->label, SegmentLabel::foundation);
  EXPECT_EQ(load_house(save_house(g)), g);
}

TEST(LoadHouse, DuplicateCoordinateRejected) {
  EXPECT_THROW(load_house(one_block_doc(R"({"x":1,"y":0,"z":1,"t":1,"label":null},{"x":1,"y":0,"z":1,"t":2,"label":null})")),
               SchematicError);
}

TEST(LoadHouse, MalformedDocumentsRejected) {
  EXPECT_THROW(load_house("not json"), SchematicError);
  EXPECT_THROW(load_house(R"({"palette_version":2,"blocks":[]})"), SchematicError);
  EXPECT_THROW(load_house(R"({"palette_version":1})"), SchematicError);
  EXPECT_THROW(load_house(one_block_doc(R"({"x":256,"y":0,"z":0,"t":1,"label":null})")), SchematicError);
  EXPECT_THROW(load_house(one_block_doc(R"({"x":-1,"y":0,"z":0,"t":1,"label":null})")), SchematicError);
  EXPECT_THROW(load_house(one_block_doc(R"({"x":0,"y":0,"z":0,"t":11,"label":null})")), SchematicError);
  EXPECT_THROW(load_house(one_block_doc(R"({"x":0,"y":0,"z":0,"t":0,"label":null})")), SchematicError);
  EXPECT_THROW(load_house(one_block_doc(R"({"x":0,"y":0,"z":0,"t":1,"label":"chimney"})")), SchematicError);
  EXPECT_THROW(load_house(one_block_doc(R"({"x":0.5,"y":0,"z":0,"t":1,"label":null})")), SchematicError);
}

TEST(LoadHouse, LabelsParseCaseInsensitively) {
  const auto g = load_house(one_block_doc(R"({"x":0,"y":0,"z":0,"t":5,"label":"WINDOW"})"));
  EXPECT_EQ(g.find({0, 0, 0})->label, SegmentLabel::window);
}

TEST(LoadHouse, BoxHouseHas74Cells) {
  const auto g = load_house(save_house(box_house()));
  EXPECT_EQ(g.size(), 74u);
  int foundation = 0, wall = 0, roof = 0;
  for (const auto& [c, cell] : g) {
    foundation += cell.label == SegmentLabel::foundation;
    wall += cell.label == SegmentLabel::wall;
    roof += cell.label == SegmentLabel::roof;
  }
  EXPECT_EQ(foundation, 25);
  EXPECT_EQ(wall, 24);
  EXPECT_EQ(roof, 25);
}

TEST(SaveHouse, OrdersBlocksByYThenXThenZ) {
  VoxelGrid g;
  g.set({2, 0, 0}, {BlockType::stone, std::nullopt});
  g.set({0, 1, 0}, {BlockType::stone, std::nullopt});
  g.set({0, 0, 5}, {BlockType::stone, std::nullopt});
  g.set({0, 0, 1}, {BlockType::stone, std::nullopt});
  const auto j = nlohmann::json::parse(save_house(g));
  std::vector<std::array<int, 3>> order;
  for (const auto& b : j["blocks"]) order.push_back({b["x"], b["y"], b["z"]});
  const std::vector<std::array<int, 3>> want{{0, 0, 1}, {0, 0, 5}, {2, 0, 0}, {0, 1, 0}};
  EXPECT_EQ(order, want);
}

TEST(SaveHouse, RandomRoundTrips) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    VoxelGrid g;
    std::uniform_int_distribution<int> pos(0, 255), type(1, 10), label(-1, kLabelCount - 1);
    for (int i = 0; i < 40; ++i) {
      const int l = label(rng);
      g.set({pos(rng), pos(rng), pos(rng)},
            {static_cast<BlockType>(type(rng)), l < 0 ? std::nullopt : std::optional(all_labels()[l])});
    }
    EXPECT_EQ(load_house(save_house(g)), g);
  }
}

TEST(PlaceBlock, AddsExactlyOneCell) {
  const VoxelGrid g;
  const auto h = place_block(g, {0, 0, 0}, BlockType::stone, SegmentLabel::wall);
  EXPECT_EQ(h.size(), 1u);
  EXPECT_TRUE(g.empty());
}

TEST(PlaceBlock, Errors) {
  const auto g = place_block(VoxelGrid{}, {0, 0, 0}, BlockType::stone, SegmentLabel::wall);
  EXPECT_THROW(place_block(g, {0, 0, 0}, BlockType::plank, SegmentLabel::wall), GridError);
  EXPECT_THROW(place_block(g, {0, 256, 0}, BlockType::plank, SegmentLabel::wall), GridError);
  EXPECT_THROW(place_block(g, {1, 0, 0}, BlockType::air, SegmentLabel::wall), GridError);
}

TEST(PlaceBlock, PlaceThenRemoveIsIdentity) {
  const auto house = box_house();
  const auto g = place_block(house, {2, 1, 2}, BlockType::bed, SegmentLabel::bed);
  EXPECT_EQ(remove_blocks(g, {Coord{2, 1, 2}}), house);
}

TEST(RemoveBlocks, RoofInstanceLeaves49) {
  const auto house = box_house();
  for (const auto& inst : segment(house)) {
    if (inst.label != SegmentLabel::roof) continue;
    EXPECT_EQ(remove_blocks(house, inst.voxels).size(), 49u);
  }
}

TEST(RemoveBlocks, EmptyAndAbsentAreIdentity) {
  const auto house = box_house();
  EXPECT_EQ(remove_blocks(house, std::set<Coord>{}), house);
  EXPECT_EQ(remove_blocks(house, {Coord{100, 100, 100}, Coord{2, 1, 2}}), house);
}

TEST(BoundingBox, Examples) {
  VoxelGrid g;
  g.set({2, 3, 4}, {BlockType::stone, std::nullopt});
  EXPECT_EQ(bounding_box(g), (Box{{2, 3, 4}, {2, 3, 4}}));
  EXPECT_EQ(bounding_box(box_house()), (Box{{0, 0, 0}, {4, 2, 4}}));
  EXPECT_THROW(bounding_box(VoxelGrid{}), GridError);
}

TEST(Raycast, MarchesToBlockAlongX) {
  VoxelGrid g;
  g.set({3, 0, 0}, {BlockType::stone, std::nullopt});
  auto hit = raycast(g, Ray({0, 0.5, 0.5}, {1, 0, 0}));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->cell, (Coord{3, 0, 0}));
  EXPECT_EQ(hit->face, (Offset{-1, 0, 0}));
}

TEST(Raycast, EmptyGridMisses) { EXPECT_FALSE(raycast(VoxelGrid{}, Ray({1, 1, 1}, {0, 1, 0}))); }

TEST(Raycast, OriginInsideOccupiedCell) {
  VoxelGrid g;
  g.set({2, 2, 2}, {BlockType::stone, std::nullopt});
  g.set({3, 2, 2}, {BlockType::stone, std::nullopt});
  auto hit = raycast(g, Ray({2.5, 2.5, 2.5}, {1, 0, 0}));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->cell, (Coord{2, 2, 2}));
  EXPECT_EQ(hit->face, (Offset{0, 0, 0}));
}

TEST(Raycast, OriginOutsideWorldEntersIt) {
  VoxelGrid g;
  g.set({0, 5, 7}, {BlockType::stone, std::nullopt});
  auto hit = raycast(g, Ray({-10.0, 5.5, 7.5}, {1, 0, 0}));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->cell, (Coord{0, 5, 7}));
}

TEST(Raycast, PointingAwayMisses) {
  VoxelGrid g;
  g.set({3, 0, 0}, {BlockType::stone, std::nullopt});
  EXPECT_FALSE(raycast(g, Ray({5.5, 0.5, 0.5}, {1, 0, 0})));
}

TEST(Raycast, RejectsNonUnitDirection) {
  EXPECT_THROW(Ray({0, 0, 0}, {1, 1, 0}), GridError);
  EXPECT_NO_THROW(Ray::toward({0, 0, 0}, {1, 1, 0}));
  EXPECT_THROW(Ray::toward({0, 0, 0}, {0, 0, 0}), GridError);
}

// Brute force: no occupied cell is entered strictly before the reported one.
TEST(Raycast, MatchesBruteForceOnSmallGrids) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coord(-2.0, 18.0), dir(-1.0, 1.0);
  std::uniform_int_distribution<int> cell(0, 15);
  int hits = 0;
  for (int trial = 0; trial < 400; ++trial) {
    VoxelGrid g;
    const int n = 1 + trial % 40;
    for (int i = 0; i < n; ++i) g.set({cell(rng), cell(rng), cell(rng)}, {BlockType::stone, std::nullopt});
    const Vec3 o{coord(rng), coord(rng), coord(rng)};
    Vec3 d{dir(rng), dir(rng), dir(rng)};
    if (trial % 2 == 0) {  // aim through a random occupied cell
      auto it = g.begin();
      std::advance(it, static_cast<long>(rng() % g.size()));
      std::uniform_real_distribution<double> in(0.05, 0.95);
      d = {it->first.x + in(rng) - o[0], it->first.y + in(rng) - o[1], it->first.z + in(rng) - o[2]};
    }
    if (std::abs(d[0]) + std::abs(d[1]) + std::abs(d[2]) < 1e-3) continue;
    const Ray ray = Ray::toward(o, d);
    const auto hit = raycast(g, ray);
    std::optional<double> best;
    for (const auto& [c, _] : g)
      if (auto t = vs_test::slab_entry(ray, c); t && (!best || *t < *best)) best = t;
    if (!hit) {
      EXPECT_FALSE(best) << "ray missed an occupied cell it passes through";
      continue;
    }
    ++hits;
    ASSERT_TRUE(g.contains(hit->cell));
    const auto t_hit = vs_test::slab_entry(ray, hit->cell);
    ASSERT_TRUE(t_hit) << "reported cell is not on the ray";
    ASSERT_TRUE(best);
    EXPECT_LE(*t_hit, *best + 1e-9);
  }
  EXPECT_GT(hits, 50);
}

TEST(Segment, BoxHouseHasThreeInstances) {
  const auto s = segment(box_house());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].label, SegmentLabel::foundation);
  EXPECT_EQ(s[1].label, SegmentLabel::roof);
  EXPECT_EQ(s[2].label, SegmentLabel::wall);
  EXPECT_EQ(s[0].voxels.size(), 25u);
  EXPECT_EQ(s[1].voxels.size(), 25u);
  EXPECT_EQ(s[2].voxels.size(), 24u);
}

TEST(Segment, DisjointPanelsAreSeparateInstances) {
  VoxelGrid g;
  for (int y = 0; y < 2; ++y) {
    g.set({0, y, 0}, {BlockType::glass, SegmentLabel::window});
    g.set({5, y, 0}, {BlockType::glass, SegmentLabel::window});
  }
  const auto s = segment(g);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].voxels.begin()->x, 0);
  EXPECT_EQ(s[1].voxels.begin()->x, 5);
}

TEST(Segment, EmptyGrid) { EXPECT_TRUE(segment(VoxelGrid{}).empty()); }

TEST(Segment, DiagonalCellsGroup) {
  VoxelGrid g;
  g.set({0, 3, 0}, {BlockType::brick, SegmentLabel::roof});
  g.set({1, 4, 1}, {BlockType::brick, SegmentLabel::roof});
  EXPECT_EQ(segment(g).size(), 1u);
}

TEST(Segment, FallbackLabelsForUnlabeledCells) {
  VoxelGrid g;
  for (int y = 0; y < 3; ++y) g.set({0, y, 0}, {BlockType::stone, std::nullopt});
  g.set({5, 1, 5}, {BlockType::glass, std::nullopt});
  g.set({9, 0, 9}, {BlockType::fence_post, std::nullopt});
  const auto labels = effective_labels(g);
  EXPECT_EQ(labels.at({0, 0, 0}), SegmentLabel::foundation);
  EXPECT_EQ(labels.at({0, 1, 0}), SegmentLabel::wall);
  EXPECT_EQ(labels.at({0, 2, 0}), SegmentLabel::roof);
  EXPECT_EQ(labels.at({5, 1, 5}), SegmentLabel::window);
  EXPECT_EQ(labels.at({9, 0, 9}), SegmentLabel::fence);
}

TEST(Segment, PartitionAndConnectivityOnRandomHouses) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = random_house(seed);
    std::set<Coord> seen;
    for (const auto& inst : segment(g)) {
      EXPECT_FALSE(inst.voxels.empty());
      EXPECT_TRUE(vs_test::is_connected26(inst.voxels));
      for (const Coord& c : inst.voxels) {
        EXPECT_TRUE(seen.insert(c).second) << "voxel in two instances";
        EXPECT_EQ(g.find(c)->label, inst.label);
      }
    }
    EXPECT_EQ(seen.size(), g.size());
  }
}

TEST(Labels, ClosedSetOf26ParsesCaseInsensitively) {
  EXPECT_EQ(all_labels().size(), 26u);
  for (auto l : all_labels()) {
    EXPECT_EQ(parse_label(label_name(l)), l);
    std::string upper(label_name(l));
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    EXPECT_EQ(parse_label(upper), l);
  }
  EXPECT_FALSE(parse_label("awning"));
}
