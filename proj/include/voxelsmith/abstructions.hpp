#pragma once

// Abstructions: a label-conditioned sequential placement model run under
// inference-time constraints (start location, block count, optional prompt).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "voxelsmith/grammar.hpp"
#include "voxelsmith/voxel_world.hpp"

namespace voxelsmith {

class GenerationError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Length

inline int resolve_length(SizeWord size) {
  switch (size) {
    case SizeWord::tiny: return 2;
    case SizeWord::small: return 5;
    case SizeWord::default_size: return 20;
    case SizeWord::large: return 50;
    case SizeWord::huge: return 100;
  }
  return 20;
}

inline int resolve_length(int explicit_count) {
  if (explicit_count < 1) throw GenerationError("block count must be at least 1");
  return explicit_count;
}

inline int resolve_length(const Length& length) {
  return length.count ? resolve_length(*length.count) : resolve_length(length.word);
}

// ---------------------------------------------------------------------------
// Location

struct NeedsHint {
  std::string reason;
};

using LocationResult = std::variant<Coord, NeedsHint>;

namespace location_detail {

// The voxels a relative location refers to: the whole grid for the house
// anchor, else the largest instance of the label (first in segment order on
// ties).
inline std::optional<std::set<Coord>> anchor_voxels(const VoxelGrid& grid, const std::optional<SegmentLabel>& anchor) {
  if (grid.empty()) return std::nullopt;
  if (!anchor) {
    std::set<Coord> all;
    for (const auto& entry : grid) all.insert(entry.first);
    return all;
  }
  std::optional<std::set<Coord>> best;
  for (auto& inst : segment(grid))
    if (inst.label == *anchor && (!best || inst.voxels.size() > best->size())) best = std::move(inst.voxels);
  return best;
}

inline std::optional<Coord> first_empty(const VoxelGrid& grid, Coord c, const Offset& dir) {
  while (in_bounds(c)) {
    if (!grid.contains(c)) return c;
    c = c + dir;
  }
  return std::nullopt;
}

inline int rounded_mean(long long sum, std::size_t n) {
  return static_cast<int>(std::floor(static_cast<double>(sum) / static_cast<double>(n) + 0.5));
}

}  // namespace location_detail

// Relative locations are resolved against segment(grid); with no relative
// location the cursor ray is projected onto the nearest house block and the
// empty cell on the hit face is used. Anything unresolvable asks for a hint.
inline LocationResult resolve_location(const VoxelGrid& grid, const std::optional<RelLoc>& relloc,
                                       const std::optional<Ray>& cursor) {
  using namespace location_detail;
  if (relloc) {
    auto voxels = anchor_voxels(grid, relloc->anchor);
    const std::string anchor_name = relloc->anchor ? std::string(label_name(*relloc->anchor)) : "house";
    if (!voxels) return NeedsHint{"there is no " + anchor_name + " here; show me where to build"};

    Box box{*voxels->begin(), *voxels->begin()};
    long long sum_x = 0, sum_z = 0;
    for (const Coord& c : *voxels) {
      box.min = {std::min(box.min.x, c.x), std::min(box.min.y, c.y), std::min(box.min.z, c.z)};
      box.max = {std::max(box.max.x, c.x), std::max(box.max.y, c.y), std::max(box.max.z, c.z)};
      sum_x += c.x;
      sum_z += c.z;
    }
    const int cx = rounded_mean(sum_x, voxels->size());
    const int cz = rounded_mean(sum_z, voxels->size());
    const int ground = bounding_box(grid).min.y;

    std::optional<Coord> out;
    switch (relloc->relation) {
      case Relation::on_top_of: {
        std::optional<Coord> top;
        for (const Coord& c : *voxels)
          if (c.y == box.max.y && (!top || c.x < top->x || (c.x == top->x && c.z < top->z))) top = c;
        out = first_empty(grid, {top->x, top->y + 1, top->z}, {0, 1, 0});
        break;
      }
      case Relation::in_front_of: out = first_empty(grid, {cx, ground, box.min.z - 1}, {0, 0, -1}); break;
      case Relation::behind: out = first_empty(grid, {cx, ground, box.max.z + 1}, {0, 0, 1}); break;
      case Relation::left_of: out = first_empty(grid, {box.min.x - 1, ground, cz}, {-1, 0, 0}); break;
      case Relation::right_of: out = first_empty(grid, {box.max.x + 1, ground, cz}, {1, 0, 0}); break;
      case Relation::next_to: {
        const Coord low = *voxels->begin();
        static constexpr Offset order[] = {{-1, 0, 0}, {1, 0, 0}, {0, 0, -1}, {0, 0, 1}, {0, 1, 0}, {0, -1, 0}};
        for (const Offset& o : order) {
          const Coord n = low + o;
          if (in_bounds(n) && !grid.contains(n)) {
            out = n;
            break;
          }
        }
        break;
      }
    }
    if (!out) return NeedsHint{"no room " + std::string(relation_name(relloc->relation)) + " the " + anchor_name};
    return *out;
  }

  if (cursor) {
    auto hit = raycast(grid, *cursor);
    if (!hit) return NeedsHint{"your cursor is not pointing at the house"};
    Offset face = hit->face;
    if (face == Offset{}) {
      const Vec3& d = cursor->direction();
      int axis = 0;
      for (int a = 1; a < 3; ++a)
        if (std::abs(d[a]) > std::abs(d[axis])) axis = a;
      detail::axis_of(face, axis) = d[axis] > 0 ? -1 : 1;
    }
    const Coord adjacent = hit->cell + face;
    if (!in_bounds(adjacent) || grid.contains(adjacent)) return NeedsHint{"no room next to the block you pointed at"};
    return adjacent;
  }
  return NeedsHint{"where should I build it? point at the house"};
}

// ---------------------------------------------------------------------------
// Constraints and the generator contract

struct PromptBlock {
  Offset offset;
  BlockType type;

  friend bool operator==(const PromptBlock&, const PromptBlock&) = default;
};

struct Prompt {
  std::vector<PromptBlock> blocks;

  Prompt() = default;
  explicit Prompt(std::vector<PromptBlock> b) : blocks(std::move(b)) {
    if (blocks.empty()) throw GenerationError("prompt must contain at least one block");
    std::set<Offset> seen;
    for (const auto& pb : blocks) {
      if (pb.type == BlockType::air) throw GenerationError("prompt blocks cannot be air");
      if (!seen.insert(pb.offset).second) throw GenerationError("prompt offsets must be distinct");
    }
  }

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

struct ConstraintSet {
  Coord location;
  int length = 20;
  std::optional<Prompt> prompt;
};

struct PlacementStep {
  Coord coord;
  BlockType type = BlockType::stone;

  friend bool operator==(const PlacementStep&, const PlacementStep&) = default;
};

struct GeneratorConfig {
  int patch_side = 9;
  int global_side = 16;
  std::size_t history_len = 3;
};

struct OffsetEntry {
  Offset offset;
  BlockType type = BlockType::stone;
  std::uint32_t count = 0;

  friend bool operator==(const OffsetEntry&, const OffsetEntry&) = default;
};

// Per-label parameters. Procedural models only use `label` and `block`;
// the offset model carries its frequency table, sorted by count descending
// then offset ascending.
struct GeneratorParams {
  SegmentLabel label = SegmentLabel::wall;
  BlockType block = BlockType::plank;
  std::vector<OffsetEntry> offsets;

  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

// What a model sees before each placement: a local block-type patch centered
// on the frontier, a coarse occupancy view of the whole world, and the last
// few placements. The world and placed-cell handles are read-only views that
// are valid for the duration of one next_step call.
struct GeneratorContext {
  Coord anchor;
  Coord frontier;
  int target_length = 0;
  int steps_taken = 0;
  std::uint64_t seed = 0;
  std::optional<Box> structure;
  std::vector<PlacementStep> history;
  int patch_side = 9;
  std::vector<BlockType> patch;
  int global_side = 16;
  std::vector<std::uint8_t> global;

  const VoxelGrid* world = nullptr;
  const std::set<Coord>* placed_set = nullptr;
  const std::vector<Coord>* placed_order = nullptr;

  BlockType patch_at(const Offset& o) const {
    const int r = patch_side / 2;
    if (std::abs(o.dx) > r || std::abs(o.dy) > r || std::abs(o.dz) > r) return BlockType::air;
    return patch[static_cast<std::size_t>(((o.dy + r) * patch_side + (o.dx + r)) * patch_side + (o.dz + r))];
  }

  bool occupied(const Coord& c) const { return world->contains(c); }
  bool placed(const Coord& c) const { return placed_set->count(c) != 0; }
  const std::vector<Coord>& placed_cells() const { return *placed_order; }

  bool touches_generated(const Coord& c) const {
    if (c == anchor || adjacent26(c, anchor)) return true;
    for (const Coord& n : neighbors26(c))
      if (placed_set->count(n)) return true;
    return false;
  }

  // In bounds, empty, and 26-adjacent to the location or to something
  // generated in this call (the location itself qualifies).
  bool feasible(const Coord& c) const { return in_bounds(c) && !occupied(c) && touches_generated(c); }
};

class GeneratorModel {
 public:
  virtual ~GeneratorModel() = default;
  virtual std::string_view name() const = 0;
  // nullopt marks the label unsupported.
  virtual std::optional<GeneratorParams> params(SegmentLabel label) const = 0;
  virtual std::optional<PlacementStep> next_step(const GeneratorContext& ctx, const GeneratorParams& params) const = 0;
};

inline BlockType default_block(SegmentLabel label) {
  switch (label) {
    case SegmentLabel::window: return BlockType::glass;
    case SegmentLabel::bed: return BlockType::bed;
    case SegmentLabel::roof: return BlockType::brick;
    case SegmentLabel::foundation:
    case SegmentLabel::walkway:
    case SegmentLabel::column:
    case SegmentLabel::pillar: return BlockType::stone;
    case SegmentLabel::fence:
    case SegmentLabel::railing: return BlockType::fence_post;
    case SegmentLabel::torch:
    case SegmentLabel::lights: return BlockType::torch;
    case SegmentLabel::ladder: return BlockType::ladder;
    case SegmentLabel::grass:
    case SegmentLabel::garden:
    case SegmentLabel::yard: return BlockType::grass;
    case SegmentLabel::ground: return BlockType::dirt;
    default: return BlockType::plank;
  }
}

// ---------------------------------------------------------------------------
// Procedural reference model

namespace procedural_detail {

enum class Axis { x, z };

inline Offset along(Axis axis, int k) { return axis == Axis::x ? Offset{k, 0, 0} : Offset{0, 0, k}; }

// Horizontal axis of a vertical plane through the anchor, parallel to the
// nearest vertical face of the existing structure.
inline Axis plane_axis(const GeneratorContext& ctx) {
  if (!ctx.structure) return Axis::x;
  const Coord& s = ctx.anchor;
  const Box& b = *ctx.structure;
  const int dx = std::min(std::abs(s.x - b.min.x), std::abs(s.x - b.max.x));
  const int dz = std::min(std::abs(s.z - b.min.z), std::abs(s.z - b.max.z));
  return dx <= dz ? Axis::z : Axis::x;
}

// k = 0, 1, -1, 2, -2, ...
inline int alternating(int i) { return (i % 2 == 1) ? (i + 1) / 2 : -(i / 2); }

inline std::optional<Coord> columns(const GeneratorContext& ctx, int height, bool both_ways) {
  const Axis axis = plane_axis(ctx);
  const int span = both_ways ? 2 * kWorldSide : kWorldSide;
  for (int i = 0; i < span; ++i) {
    const int k = both_ways ? alternating(i) : i;
    for (int h = 0; h < height; ++h) {
      const Coord c = ctx.anchor + along(axis, k) + Offset{0, h, 0};
      if (ctx.feasible(c)) return c;
    }
  }
  return std::nullopt;
}

inline std::optional<Coord> wall(const GeneratorContext& ctx) {
  const int top = ctx.structure ? ctx.structure->max.y : ctx.anchor.y;
  return columns(ctx, std::max(3, top - ctx.anchor.y + 1), true);
}

inline std::optional<Coord> window(const GeneratorContext& ctx) {
  const int height = ctx.target_length <= 2 ? std::max(1, ctx.target_length) : 3;
  return columns(ctx, height, false);
}

inline std::optional<Coord> strip(const GeneratorContext& ctx) { return columns(ctx, 1, true); }

inline std::optional<Coord> slab(const GeneratorContext& ctx) {
  const Coord& s = ctx.anchor;
  Box region;
  if (ctx.structure && ctx.structure->contains_column(s.x, s.z)) {
    region = *ctx.structure;
  } else {
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(1, ctx.target_length)))));
    const int r = side / 2;
    region = Box{{s.x - r, s.y, s.z - r}, {s.x - r + side - 1, s.y, s.z - r + side - 1}};
  }
  auto key = [](const Coord& c) { return std::pair{c.x, c.z}; };
  std::optional<Coord> in_region, any;
  auto consider = [&](const Coord& origin) {
    for (const Coord& n : neighbors26(origin)) {
      if (n.y != s.y || !ctx.feasible(n)) continue;
      if (region.contains_column(n.x, n.z) && (!in_region || key(n) < key(*in_region))) in_region = n;
      if (!any || key(n) < key(*any)) any = n;
    }
  };
  consider(s);
  for (const Coord& p : ctx.placed_cells()) consider(p);
  return in_region ? in_region : any;
}

// Clockwise (viewed from above) ring around [x0,x1] x [z0,z1], starting at
// the min corner.
inline std::vector<std::pair<int, int>> ring(int x0, int x1, int z0, int z1) {
  std::vector<std::pair<int, int>> out;
  for (int x = x0; x <= x1; ++x) out.emplace_back(x, z0);
  for (int z = z0 + 1; z <= z1; ++z) out.emplace_back(x1, z);
  if (z1 > z0)
    for (int x = x1 - 1; x >= x0; --x) out.emplace_back(x, z1);
  if (x1 > x0)
    for (int z = z1 - 1; z > z0; --z) out.emplace_back(x0, z);
  return out;
}

// Clockwise path around the structure footprint (or along its edge when the
// anchor sits above it), one course per layer.
inline std::optional<Coord> perimeter(const GeneratorContext& ctx) {
  const Coord& s = ctx.anchor;
  int x0, x1, z0, z1;
  if (ctx.structure) {
    x0 = ctx.structure->min.x, x1 = ctx.structure->max.x;
    z0 = ctx.structure->min.z, z1 = ctx.structure->max.z;
    if (!ctx.structure->contains_column(s.x, s.z)) --x0, ++x1, --z0, ++z1;
  } else {
    x0 = s.x, x1 = s.x + 4, z0 = s.z, z1 = s.z + 4;
  }
  const auto path = ring(x0, x1, z0, z1);
  std::size_t start = 0;
  long long best = -1;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const long long ddx = path[i].first - s.x, ddz = path[i].second - s.z;
    const long long d2 = ddx * ddx + ddz * ddz;
    if (best < 0 || d2 < best) best = d2, start = i;
  }
  int top_layer = 0;
  for (const Coord& p : ctx.placed_cells()) top_layer = std::max(top_layer, p.y - s.y);
  for (int layer = 0; layer <= top_layer + 1; ++layer) {
    const int y = s.y + layer;
    if (y >= kWorldSide) break;
    for (std::size_t j = 0; j < path.size(); ++j) {
      const auto& [x, z] = path[(start + j) % path.size()];
      const Coord c{x, y, z};
      if (ctx.feasible(c)) return c;
    }
  }
  // Off the ring: walk toward its start cell.
  const Coord target{path[start].first, ctx.frontier.y, path[start].second};
  auto dist2 = [&](const Coord& c) {
    const long long a = c.x - target.x, b = c.z - target.z;
    return a * a + b * b;
  };
  std::optional<Coord> step;
  for (const Coord& n : neighbors26(ctx.frontier)) {
    if (n.y != ctx.frontier.y || !ctx.feasible(n)) continue;
    if (!step || dist2(n) < dist2(*step) || (dist2(n) == dist2(*step) && std::pair{n.x, n.z} < std::pair{step->x, step->z}))
      step = n;
  }
  if (step && dist2(*step) < dist2(ctx.frontier)) return step;
  return std::nullopt;
}

inline std::optional<Coord> door(const GeneratorContext& ctx) {
  for (const Coord& c : {ctx.anchor, ctx.anchor + Offset{0, 1, 0}})
    if (ctx.feasible(c)) return c;
  return std::nullopt;
}

inline std::optional<Coord> stair(const GeneratorContext& ctx) {
  const Axis axis = plane_axis(ctx);
  for (int k = 0; k < kWorldSide; ++k) {
    const Coord c = ctx.anchor + along(axis, k) + Offset{0, k, 0};
    if (!in_bounds(c)) break;
    if (ctx.feasible(c)) return c;
  }
  return std::nullopt;
}

// Breadth-first growth around the location, preferring supported cells,
// ascending (y, x, z) within a ring.
inline std::optional<Coord> surface(const GeneratorContext& ctx) {
  std::optional<std::tuple<int, int, Coord>> best;
  auto consider = [&](const Coord& origin) {
    for (const Coord& n : neighbors26(origin)) {
      if (!ctx.feasible(n)) continue;
      const bool supported = n.y == 0 || ctx.occupied(n + Offset{0, -1, 0});
      std::tuple<int, int, Coord> key{supported ? 0 : 1, chebyshev(n, ctx.anchor), n};
      if (!best || key < *best) best = key;
    }
  };
  consider(ctx.anchor);
  for (const Coord& p : ctx.placed_cells()) consider(p);
  if (!best) return std::nullopt;
  return std::get<2>(*best);
}

}  // namespace procedural_detail

// Deterministic per-label growth rules:
//   wall                          vertical plane through the location parallel
//                                 to the nearest house face, column-major,
//                                 bottom-up, columns alternating outward
//   roof/floor/ceiling/foundation horizontal plane at the location's y,
//                                 ascending (x, z)
//   window                        vertical glass column, widening rightward
//   fence/railing                 clockwise perimeter path, course by course
//   door                          1x2 vertical pair
//   torch/lights                  single-height strip along the house face
//   stair/ladder                  +1 y per +1 horizontal step
//   everything else               breadth-first surface growth
// Every rule proposes the location itself first when it is empty.
class ProceduralModel final : public GeneratorModel {
 public:
  std::string_view name() const override { return "procedural"; }

  std::optional<GeneratorParams> params(SegmentLabel label) const override {
    return GeneratorParams{label, default_block(label), {}};
  }

  std::optional<PlacementStep> next_step(const GeneratorContext& ctx, const GeneratorParams& params) const override {
    using namespace procedural_detail;
    std::optional<Coord> c;
    if (ctx.feasible(ctx.anchor)) {
      c = ctx.anchor;
    } else {
      switch (params.label) {
        case SegmentLabel::wall: c = wall(ctx); break;
        case SegmentLabel::roof:
        case SegmentLabel::floor:
        case SegmentLabel::ceiling:
        case SegmentLabel::foundation: c = slab(ctx); break;
        case SegmentLabel::window: c = window(ctx); break;
        case SegmentLabel::fence:
        case SegmentLabel::railing: c = perimeter(ctx); break;
        case SegmentLabel::door: c = door(ctx); break;
        case SegmentLabel::torch:
        case SegmentLabel::lights: c = strip(ctx); break;
        case SegmentLabel::stair:
        case SegmentLabel::ladder: c = stair(ctx); break;
        default: c = surface(ctx); break;
      }
    }
    if (!c) return std::nullopt;
    return PlacementStep{*c, params.block};
  }
};

// ---------------------------------------------------------------------------
// Constrained generation

enum class Termination {
  completed,  // placed the requested number of blocks
  exhausted,  // the model returned no further step
  blocked,    // the location is occupied and has no empty neighbour
  rejected,   // the model proposed an occupied, out-of-bounds or detached cell
};

inline std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::exhausted: return "exhausted";
    case Termination::blocked: return "blocked";
    case Termination::rejected: return "rejected";
  }
  return "completed";
}

inline std::optional<Termination> termination_from_name(std::string_view s) {
  for (auto t : {Termination::completed, Termination::exhausted, Termination::blocked, Termination::rejected})
    if (termination_name(t) == s) return t;
  return std::nullopt;
}

struct GenerationResult {
  std::vector<PlacementStep> steps;
  std::vector<PlacementStep> prompt_placed;
  std::vector<PlacementStep> prompt_skipped;
  VoxelGrid grid;
  Termination termination = Termination::completed;
};

namespace generate_detail {

inline int coarse_cell(int v, int side) {
  const int size = (kWorldSide + side - 1) / side;
  return v / size;
}

inline void mark_global(std::vector<std::uint8_t>& global, int side, const Coord& c) {
  const auto i = static_cast<std::size_t>((coarse_cell(c.y, side) * side + coarse_cell(c.x, side)) * side +
                                          coarse_cell(c.z, side));
  global[i] = 1;
}

inline std::vector<BlockType> local_patch(const VoxelGrid& world, const Coord& center, int side) {
  std::vector<BlockType> patch(static_cast<std::size_t>(side) * side * side, BlockType::air);
  const int r = side / 2;
  std::size_t i = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      for (int dz = -r; dz <= r; ++dz, ++i)
        if (const Cell* cell = world.find(center + Offset{dx, dy, dz})) patch[i] = cell->type;
  return patch;
}

}  // namespace generate_detail

// Runs the model under the constraints. Prompt blocks go down first
// (occupied, out-of-bounds or detached ones are skipped), then up to
// c.length steps. Every accepted step is empty at placement time and
// 26-adjacent to the location or to something generated in this call.
// Window steps are always glass and bed steps always bed. All placed cells
// carry the invoked label.
inline GenerationResult generate(const VoxelGrid& grid, SegmentLabel label, const ConstraintSet& c,
                                 const GeneratorModel& model, std::uint64_t seed, const GeneratorConfig& cfg = {}) {
  using namespace generate_detail;
  if (c.length < 1) throw GenerationError("length must be at least 1");
  if (!in_bounds(c.location)) throw GenerationError("location out of bounds");
  if (cfg.patch_side < 1 || cfg.patch_side % 2 == 0) throw GenerationError("patch side must be odd");
  if (cfg.global_side < 1) throw GenerationError("global side must be positive");
  auto params = model.params(label);
  if (!params)
    throw GenerationError("model '" + std::string(model.name()) + "' does not support label '" +
                          std::string(label_name(label)) + "'");

  GenerationResult r;
  r.grid = grid;
  if (grid.contains(c.location)) {
    bool open = false;
    for (const Coord& n : neighbors26(c.location)) open = open || (in_bounds(n) && !grid.contains(n));
    if (!open) {
      r.termination = Termination::blocked;
      return r;
    }
  }

  std::set<Coord> placed_set;
  std::vector<Coord> placed_order;
  std::vector<PlacementStep> trail;
  std::vector<std::uint8_t> global(static_cast<std::size_t>(cfg.global_side) * cfg.global_side * cfg.global_side, 0);
  for (const auto& entry : grid) mark_global(global, cfg.global_side, entry.first);

  auto commit = [&](const PlacementStep& step) {
    r.grid.set(step.coord, Cell{step.type, label});
    placed_set.insert(step.coord);
    placed_order.push_back(step.coord);
    trail.push_back(step);
    mark_global(global, cfg.global_side, step.coord);
  };

  if (c.prompt) {
    std::map<Coord, BlockType> open;
    for (const auto& pb : c.prompt->blocks) {
      const Coord cell = c.location + pb.offset;
      if (in_bounds(cell) && !grid.contains(cell)) open.emplace(cell, pb.type);
    }
    // Keep only prompt cells connected to the location.
    std::set<Coord> reach;
    std::deque<Coord> queue;
    for (const auto& [cell, type] : open)
      if (cell == c.location || adjacent26(cell, c.location)) reach.insert(cell), queue.push_back(cell);
    while (!queue.empty()) {
      const Coord cur = queue.front();
      queue.pop_front();
      for (const Coord& n : neighbors26(cur))
        if (open.count(n) && reach.insert(n).second) queue.push_back(n);
    }
    for (const auto& pb : c.prompt->blocks) {
      const PlacementStep step{c.location + pb.offset, pb.type};
      if (reach.count(step.coord)) {
        commit(step);
        r.prompt_placed.push_back(step);
      } else {
        r.prompt_skipped.push_back(step);
      }
    }
  }

  const std::optional<Box> structure = grid.empty() ? std::nullopt : std::optional<Box>(bounding_box(grid));
  GeneratorContext ctx;
  ctx.anchor = c.location;
  ctx.target_length = c.length;
  ctx.seed = seed;
  ctx.structure = structure;
  ctx.patch_side = cfg.patch_side;
  ctx.global_side = cfg.global_side;
  ctx.placed_set = &placed_set;
  ctx.placed_order = &placed_order;

  while (static_cast<int>(r.steps.size()) < c.length) {
    ctx.steps_taken = static_cast<int>(r.steps.size());
    ctx.frontier = trail.empty() ? c.location : trail.back().coord;
    const std::size_t keep = std::min(cfg.history_len, trail.size());
    ctx.history.assign(trail.end() - static_cast<std::ptrdiff_t>(keep), trail.end());
    ctx.patch = local_patch(r.grid, ctx.frontier, cfg.patch_side);
    ctx.global = global;
    ctx.world = &r.grid;

    auto step = model.next_step(ctx, *params);
    if (!step) {
      r.termination = Termination::exhausted;
      return r;
    }
    if (!ctx.feasible(step->coord) || step->type == BlockType::air) {
      r.termination = Termination::rejected;
      return r;
    }
    if (label == SegmentLabel::window) step->type = BlockType::glass;
    if (label == SegmentLabel::bed) step->type = BlockType::bed;
    commit(*step);
    r.steps.push_back(*step);
  }
  r.termination = Termination::completed;
  return r;
}

}  // namespace voxelsmith
