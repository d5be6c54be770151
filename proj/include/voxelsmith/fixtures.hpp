#pragma once

// Procedural house fixtures: parameterized boxes with foundations, walls,
// windows, a door and a flat roof.

#include <cstdint>
#include <random>

#include "voxelsmith/voxel_world.hpp"

namespace voxelsmith {

struct HouseSpec {
  Coord origin{20, 0, 20};
  int width = 7;        // x extent
  int depth = 7;        // z extent
  int wall_height = 3;  // wall layers between foundation and roof
  BlockType wall_block = BlockType::plank;
  int window_count = 2;
  bool door = true;
  bool garden = false;
};

// Foundation at origin.y, wall ring above it, roof slab on top. The door sits
// in the front (min z) wall, windows alternate front and back at the second
// wall layer. A garden, when present, is a grass strip two cells in front.
inline VoxelGrid build_house(const HouseSpec& spec) {
  if (spec.width < 3 || spec.depth < 3 || spec.wall_height < 1)
    throw GridError("house must be at least 3x3 with one wall layer");
  VoxelGrid g;
  const int x0 = spec.origin.x, y0 = spec.origin.y, z0 = spec.origin.z;
  const int x1 = x0 + spec.width - 1, z1 = z0 + spec.depth - 1;
  const int roof_y = y0 + spec.wall_height + 1;

  for (int x = x0; x <= x1; ++x)
    for (int z = z0; z <= z1; ++z) {
      g.set({x, y0, z}, Cell{BlockType::stone, SegmentLabel::foundation});
      g.set({x, roof_y, z}, Cell{BlockType::brick, SegmentLabel::roof});
    }
  for (int y = y0 + 1; y < roof_y; ++y)
    for (int x = x0; x <= x1; ++x)
      for (int z = z0; z <= z1; ++z)
        if (x == x0 || x == x1 || z == z0 || z == z1) g.set({x, y, z}, Cell{spec.wall_block, SegmentLabel::wall});

  const int door_x = x0 + spec.width / 2;
  if (spec.door)
    for (int y = y0 + 1; y <= std::min(y0 + 2, roof_y - 1); ++y)
      g.set({door_x, y, z0}, Cell{BlockType::plank, SegmentLabel::door});

  const int window_y = std::min(y0 + 2, roof_y - 1);
  int placed = 0;
  for (int i = 0; placed < spec.window_count && x0 + 1 + i <= x1 - 1; ++i) {
    const int x = x0 + 1 + i;
    const bool front = (placed % 2) == 0;
    if (front && spec.door && x == door_x) continue;
    g.set({x, window_y, front ? z0 : z1}, Cell{BlockType::glass, SegmentLabel::window});
    ++placed;
  }

  if (spec.garden && z0 >= 3)
    for (int x = x0; x <= x1; ++x)
      for (int z = z0 - 3; z <= z0 - 2; ++z) g.set({x, y0, z}, Cell{BlockType::grass, SegmentLabel::garden});
  return g;
}

// 5x3x5 shell at the world corner: a full foundation slab (25), a wall layer
// that is solid except for the single interior cell (2,1,2) (24), and a full
// roof slab (25). 74 cells spanning (0,0,0)-(4,2,4).
inline VoxelGrid box_house() {
  VoxelGrid g;
  for (int x = 0; x < 5; ++x)
    for (int z = 0; z < 5; ++z) {
      g.set({x, 0, z}, Cell{BlockType::stone, SegmentLabel::foundation});
      if (!(x == 2 && z == 2)) g.set({x, 1, z}, Cell{BlockType::plank, SegmentLabel::wall});
      g.set({x, 2, z}, Cell{BlockType::brick, SegmentLabel::roof});
    }
  return g;
}

// 9x5x7 house at (20,0,20): foundation, three wall layers, two windows, a
// door, roof at y=4. No garden.
inline VoxelGrid cottage() {
  return build_house(HouseSpec{{20, 0, 20}, 9, 7, 3, BlockType::plank, 2, true, false});
}

inline HouseSpec random_house_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  HouseSpec spec;
  spec.origin = {pick(20, 120), 0, pick(20, 120)};
  spec.width = pick(5, 11);
  spec.depth = pick(5, 11);
  spec.wall_height = pick(2, 4);
  spec.wall_block = pick(0, 1) == 0 ? BlockType::plank : BlockType::brick;
  spec.window_count = pick(0, 4);
  spec.door = true;
  spec.garden = pick(0, 1) == 1;
  return spec;
}

inline VoxelGrid random_house(std::uint64_t seed) { return build_house(random_house_spec(seed)); }

}  // namespace voxelsmith
