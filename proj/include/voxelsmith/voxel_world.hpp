#pragma once

// Sparse labeled block world: coordinates, palette, labels, schematic I/O,
// cursor raycasting and label-aware instance segmentation.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace voxelsmith {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchematicError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kWorldSide = 256;

struct Offset {
  int dx = 0;
  int dy = 0;
  int dz = 0;

  friend constexpr auto operator<=>(const Offset&, const Offset&) = default;
};

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;

  friend constexpr bool operator==(const Coord&, const Coord&) = default;

  // Coords order by (y, x, z), the schematic serialization order.
  friend constexpr std::strong_ordering operator<=>(const Coord& a, const Coord& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    if (auto c = a.x <=> b.x; c != 0) return c;
    return a.z <=> b.z;
  }

  constexpr Coord operator+(const Offset& o) const { return {x + o.dx, y + o.dy, z + o.dz}; }
  constexpr Offset operator-(const Coord& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

constexpr bool in_bounds(const Coord& c) {
  return c.x >= 0 && c.x < kWorldSide && c.y >= 0 && c.y < kWorldSide && c.z >= 0 &&
         c.z < kWorldSide;
}

// True when a and b are distinct and differ by at most one along every axis.
constexpr bool adjacent26(const Coord& a, const Coord& b) {
  const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  const int dz = a.z > b.z ? a.z - b.z : b.z - a.z;
  return !(dx == 0 && dy == 0 && dz == 0) && dx <= 1 && dy <= 1 && dz <= 1;
}

constexpr int chebyshev(const Coord& a, const Coord& b) {
  const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  const int dz = a.z > b.z ? a.z - b.z : b.z - a.z;
  return std::max({dx, dy, dz});
}

inline std::array<Coord, 26> neighbors26(const Coord& c) {
  std::array<Coord, 26> out{};
  std::size_t i = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      for (int dz = -1; dz <= 1; ++dz)
        if (dx != 0 || dy != 0 || dz != 0) out[i++] = Coord{c.x + dx, c.y + dy, c.z + dz};
  return out;
}

struct CoordHash {
  std::size_t operator()(const Coord& c) const noexcept {
    return (static_cast<std::size_t>(c.x) << 20) ^ (static_cast<std::size_t>(c.y) << 10) ^
           static_cast<std::size_t>(c.z);
  }
};

// ---------------------------------------------------------------------------
// Palette

enum class BlockType : std::uint8_t {
  air = 0,
  stone = 1,
  dirt = 2,
  plank = 3,
  brick = 4,
  glass = 5,
  bed = 6,
  fence_post = 7,
  torch = 8,
  ladder = 9,
  grass = 10,
};

inline constexpr int kPaletteSize = 11;
inline constexpr int kPaletteVersion = 1;

inline constexpr std::array<std::string_view, kPaletteSize> kBlockNames = {
    "air", "stone", "dirt", "plank", "brick", "glass", "bed", "fence-post", "torch", "ladder", "grass"};

inline std::string_view block_name(BlockType t) { return kBlockNames[static_cast<std::size_t>(t)]; }

inline std::optional<BlockType> block_from_id(long long id) {
  if (id < 0 || id >= kPaletteSize) return std::nullopt;
  return static_cast<BlockType>(id);
}

inline std::optional<BlockType> block_from_name(std::string_view name) {
  for (int i = 0; i < kPaletteSize; ++i)
    if (kBlockNames[i] == name) return static_cast<BlockType>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Segment labels

enum class SegmentLabel : std::uint8_t {
  balcony, bed, bookcase, ceiling, column, deck, door, fence, floor, foundation,
  garden, grass, ground, ladder, lights, patio, pillar, porch, railing, roof,
  stair, torch, walkway, wall, window, yard,
};

inline constexpr int kLabelCount = 26;

inline constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "balcony", "bed",    "bookcase", "ceiling", "column", "deck",    "door",  "fence",   "floor",
    "foundation", "garden", "grass", "ground",  "ladder", "lights",  "patio", "pillar",  "porch",
    "railing", "roof",   "stair",    "torch",   "walkway", "wall",   "window", "yard"};

inline constexpr std::array<SegmentLabel, kLabelCount> all_labels() {
  std::array<SegmentLabel, kLabelCount> out{};
  for (int i = 0; i < kLabelCount; ++i) out[i] = static_cast<SegmentLabel>(i);
  return out;
}

inline std::string_view label_name(SegmentLabel l) { return kLabelNames[static_cast<std::size_t>(l)]; }

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::optional<SegmentLabel> parse_label(std::string_view name) {
  const std::string lower = ascii_lower(name);
  for (int i = 0; i < kLabelCount; ++i)
    if (kLabelNames[i] == lower) return static_cast<SegmentLabel>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Grid

struct Cell {
  BlockType type = BlockType::stone;
  std::optional<SegmentLabel> label;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Box {
  Coord min;
  Coord max;

  Offset extents() const { return {max.x - min.x + 1, max.y - min.y + 1, max.z - min.z + 1}; }
  bool contains_column(int x, int z) const { return x >= min.x && x <= max.x && z >= min.z && z <= max.z; }

  friend bool operator==(const Box&, const Box&) = default;
};

class VoxelGrid {
 public:
  using Map = std::map<Coord, Cell>;
  using const_iterator = Map::const_iterator;

  VoxelGrid() = default;

  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }
  bool contains(const Coord& c) const { return cells_.count(c) != 0; }

  const Cell* find(const Coord& c) const {
    auto it = cells_.find(c);
    return it == cells_.end() ? nullptr : &it->second;
  }

  const_iterator begin() const { return cells_.begin(); }
  const_iterator end() const { return cells_.end(); }
  const Map& cells() const { return cells_; }

  // Inserts or replaces a cell. AIR is never stored.
  void set(const Coord& c, Cell cell) {
    if (!in_bounds(c)) throw GridError("coordinate out of bounds");
    if (cell.type == BlockType::air) throw GridError("air is never stored in a grid");
    cells_[c] = cell;
  }

  bool erase(const Coord& c) { return cells_.erase(c) != 0; }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  Map cells_;
};

inline VoxelGrid place_block(const VoxelGrid& grid, const Coord& c, BlockType type,
                             std::optional<SegmentLabel> label) {
  if (!in_bounds(c)) throw GridError("coordinate out of bounds");
  if (type == BlockType::air) throw GridError("cannot place air");
  if (grid.contains(c)) throw GridError("coordinate already occupied");
  VoxelGrid out = grid;
  out.set(c, Cell{type, label});
  return out;
}

template <typename Range>
VoxelGrid remove_blocks(const VoxelGrid& grid, const Range& coords) {
  VoxelGrid out = grid;
  for (const Coord& c : coords) out.erase(c);
  return out;
}

inline VoxelGrid remove_blocks(const VoxelGrid& grid, std::initializer_list<Coord> coords) {
  return remove_blocks<std::initializer_list<Coord>>(grid, coords);
}

inline Box bounding_box(const VoxelGrid& grid) {
  if (grid.empty()) throw GridError("bounding box of an empty grid");
  Box b{grid.begin()->first, grid.begin()->first};
  for (const auto& [c, cell] : grid) {
    b.min = {std::min(b.min.x, c.x), std::min(b.min.y, c.y), std::min(b.min.z, c.z)};
    b.max = {std::max(b.max.x, c.x), std::max(b.max.y, c.y), std::max(b.max.z, c.z)};
  }
  return b;
}

// ---------------------------------------------------------------------------
// Schematic documents

inline VoxelGrid load_house(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchematicError(std::string("malformed schematic: ") + e.what());
  }
  if (!doc.is_object()) throw SchematicError("malformed schematic: top level must be an object");
  auto version = doc.find("palette_version");
  if (version == doc.end() || !version->is_number_integer())
    throw SchematicError("malformed schematic: missing integer palette_version");
  if (version->get<long long>() != kPaletteVersion)
    throw SchematicError("unsupported palette_version " + version->dump());
  auto blocks = doc.find("blocks");
  if (blocks == doc.end() || !blocks->is_array())
    throw SchematicError("malformed schematic: missing blocks array");

  VoxelGrid grid;
  for (const auto& entry : *blocks) {
    if (!entry.is_object()) throw SchematicError("malformed schematic: block entry must be an object");
    auto int_field = [&](const char* key) -> long long {
      auto it = entry.find(key);
      if (it == entry.end() || !it->is_number_integer())
        throw SchematicError(std::string("malformed schematic: block field '") + key + "' must be an integer");
      return it->get<long long>();
    };
    const long long x = int_field("x"), y = int_field("y"), z = int_field("z");
    const long long t = int_field("t");
    if (x < 0 || y < 0 || z < 0 || x >= kWorldSide || y >= kWorldSide || z >= kWorldSide)
      throw SchematicError("block coordinate out of bounds");
    const Coord c{static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)};
    auto type = block_from_id(t);
    if (!type || *type == BlockType::air) throw SchematicError("unknown block id " + std::to_string(t));
    std::optional<SegmentLabel> label;
    if (auto it = entry.find("label"); it != entry.end() && !it->is_null()) {
      if (!it->is_string()) throw SchematicError("malformed schematic: label must be a string or null");
      label = parse_label(it->get<std::string>());
      if (!label) throw SchematicError("unknown label '" + it->get<std::string>() + "'");
    }
    if (grid.contains(c))
      throw SchematicError("duplicate coordinate (" + std::to_string(x) + "," + std::to_string(y) + "," +
                           std::to_string(z) + ")");
    grid.set(c, Cell{*type, label});
  }
  return grid;
}

inline nlohmann::ordered_json block_json(const Coord& c, const Cell& cell) {
  nlohmann::ordered_json b;
  b["x"] = c.x;
  b["y"] = c.y;
  b["z"] = c.z;
  b["t"] = static_cast<int>(cell.type);
  if (cell.label)
    b["label"] = std::string(label_name(*cell.label));
  else
    b["label"] = nullptr;
  return b;
}

// One block per line, ascending (y, x, z).
inline std::string save_house(const VoxelGrid& grid) {
  std::string out = "{\n  \"palette_version\": 1,\n  \"blocks\": [";
  bool first = true;
  for (const auto& [c, cell] : grid) {
    out += first ? "\n    " : ",\n    ";
    first = false;
    out += block_json(c, cell).dump();
  }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Raycasting

using Vec3 = std::array<double, 3>;

class Ray {
 public:
  Ray() = default;

  // direction must be unit length within 1e-9.
  Ray(const Vec3& origin, const Vec3& direction) : origin_(origin), direction_(direction) {
    const double n = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                               direction[2] * direction[2]);
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-9) throw GridError("ray direction must be a unit vector");
    for (double v : origin)
      if (!std::isfinite(v)) throw GridError("ray origin must be finite");
  }

  // Normalizes direction; rejects zero or non-finite vectors.
  static Ray toward(const Vec3& origin, const Vec3& direction) {
    const double n = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                               direction[2] * direction[2]);
    if (!std::isfinite(n) || n == 0.0) throw GridError("ray direction must be non-zero");
    return Ray(origin, {direction[0] / n, direction[1] / n, direction[2] / n});
  }

  const Vec3& origin() const { return origin_; }
  const Vec3& direction() const { return direction_; }

  friend bool operator==(const Ray&, const Ray&) = default;

 private:
  Vec3 origin_{0.0, 0.0, 0.0};
  Vec3 direction_{1.0, 0.0, 0.0};
};

struct RayHit {
  Coord cell;
  // Outward normal of the face the ray entered through; zero when the origin
  // lies inside the hit cell.
  Offset face;
};

namespace detail {
inline int& axis_of(Offset& o, int a) { return a == 0 ? o.dx : (a == 1 ? o.dy : o.dz); }
}  // namespace detail

// Grid march through every cell the ray passes, in order. Axis ties advance x
// before y before z.
inline std::optional<RayHit> raycast(const VoxelGrid& grid, const Ray& ray) {
  if (grid.empty()) return std::nullopt;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const Vec3& o = ray.origin();
  const Vec3& d = ray.direction();

  double t_enter = 0.0;
  double t_exit = inf;
  int enter_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < 0.0 || o[a] >= kWorldSide) return std::nullopt;
      continue;
    }
    double t0 = (0.0 - o[a]) / d[a];
    double t1 = (kWorldSide - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = a;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return std::nullopt;

  std::array<int, 3> cell{};
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  for (int a = 0; a < 3; ++a) {
    const double p = o[a] + t_enter * d[a];
    cell[a] = std::clamp(static_cast<int>(std::floor(p)), 0, kWorldSide - 1);
    if (d[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (cell[a] + 1 - o[a]) / d[a];
      t_delta[a] = 1.0 / d[a];
    } else if (d[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (cell[a] - o[a]) / d[a];
      t_delta[a] = -1.0 / d[a];
    } else {
      t_max[a] = inf;
      t_delta[a] = inf;
    }
  }

  Offset face{};
  if (enter_axis >= 0) detail::axis_of(face, enter_axis) = -step[enter_axis];
  for (;;) {
    const Coord c{cell[0], cell[1], cell[2]};
    if (grid.contains(c)) return RayHit{c, face};
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] > t_exit) return std::nullopt;
    cell[a] += step[a];
    if (cell[a] < 0 || cell[a] >= kWorldSide) return std::nullopt;
    face = Offset{};
    detail::axis_of(face, a) = -step[a];
    t_max[a] += t_delta[a];
  }
}

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentInstance {
  SegmentLabel label;
  std::set<Coord> voxels;

  friend bool operator==(const SegmentInstance&, const SegmentInstance&) = default;
};

// Maximal 26-connected groups of `cells`, each group ordered by (y, x, z).
inline std::vector<std::set<Coord>> connected_components(const std::set<Coord>& cells) {
  std::vector<std::set<Coord>> out;
  std::set<Coord> seen;
  for (const Coord& start : cells) {
    if (seen.count(start)) continue;
    std::set<Coord> component;
    std::deque<Coord> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      const Coord c = queue.front();
      queue.pop_front();
      component.insert(c);
      for (const Coord& n : neighbors26(c)) {
        if (cells.count(n) && !seen.count(n)) {
          seen.insert(n);
          queue.push_back(n);
        }
      }
    }
    out.push_back(std::move(component));
  }
  return out;
}

// Stored labels, with the deterministic fallback for unlabeled cells:
// block-type rules first, then top layer of the cell's component -> roof,
// bottom layer touching y=0 -> foundation, otherwise wall.
inline std::map<Coord, SegmentLabel> effective_labels(const VoxelGrid& grid) {
  std::map<Coord, SegmentLabel> out;
  bool any_unlabeled = false;
  for (const auto& [c, cell] : grid) {
    if (cell.label)
      out.emplace(c, *cell.label);
    else
      any_unlabeled = true;
  }
  if (!any_unlabeled) return out;

  std::set<Coord> all;
  for (const auto& entry : grid) all.insert(entry.first);
  for (const auto& component : connected_components(all)) {
    int top = component.begin()->y;
    for (const Coord& c : component) top = std::max(top, c.y);
    for (const Coord& c : component) {
      const Cell& cell = *grid.find(c);
      if (cell.label) continue;
      SegmentLabel label = SegmentLabel::wall;
      switch (cell.type) {
        case BlockType::glass: label = SegmentLabel::window; break;
        case BlockType::bed: label = SegmentLabel::bed; break;
        case BlockType::torch: label = SegmentLabel::torch; break;
        case BlockType::ladder: label = SegmentLabel::ladder; break;
        case BlockType::fence_post: label = SegmentLabel::fence; break;
        case BlockType::grass: label = SegmentLabel::grass; break;
        default:
          if (c.y == top)
            label = SegmentLabel::roof;
          else if (c.y == 0)
            label = SegmentLabel::foundation;
          break;
      }
      out.emplace(c, label);
    }
  }
  return out;
}

// Ordered by (label, lowest voxel).
inline std::vector<SegmentInstance> segment(const VoxelGrid& grid) {
  std::map<SegmentLabel, std::set<Coord>> by_label;
  for (const auto& [c, label] : effective_labels(grid)) by_label[label].insert(c);
  std::vector<SegmentInstance> out;
  for (const auto& [label, cells] : by_label)
    for (auto& component : connected_components(cells)) out.push_back({label, std::move(component)});
  std::sort(out.begin(), out.end(), [](const SegmentInstance& a, const SegmentInstance& b) {
    if (a.label != b.label) return a.label < b.label;
    return *a.voxels.begin() < *b.voxels.begin();
  });
  return out;
}

}  // namespace voxelsmith
