#pragma once

// House catalog: schematic files in a directory, keyed by file stem, with
// bounding-box dimensions for size filtering.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "voxelsmith/config.hpp"
#include "voxelsmith/voxel_world.hpp"

namespace voxelsmith {

struct CatalogEntry {
  std::string house_id;
  std::filesystem::path path;
  Offset dims;  // bounding-box extents in cells

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

using HouseCatalog = std::vector<CatalogEntry>;

inline std::filesystem::path house_path(const std::filesystem::path& dir, std::string_view house_id) {
  return dir / (std::string(house_id) + ".json");
}

inline VoxelGrid load_house_file(const std::filesystem::path& dir, std::string_view house_id) {
  const auto p = house_path(dir, house_id);
  if (!std::filesystem::is_regular_file(p)) throw Error("house '" + std::string(house_id) + "' not found in " + dir.string());
  return load_house(read_file(p));
}

inline HouseCatalog load_catalog(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("house directory not found: " + dir.string());
  HouseCatalog out;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (!f.is_regular_file() || f.path().extension() != ".json") continue;
    const VoxelGrid g = load_house(read_file(f.path()));
    if (g.empty()) throw Error("house " + f.path().string() + " is empty");
    out.push_back({f.path().stem().string(), f.path(), bounding_box(g).extents()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.house_id < b.house_id; });
  return out;
}

// Keeps houses whose extents lie within [min, max] componentwise.
inline HouseCatalog filter_houses(const HouseCatalog& catalog, const Offset& min, const Offset& max) {
  if (min.dx > max.dx || min.dy > max.dy || min.dz > max.dz) throw Error("inverted size range: min exceeds max");
  HouseCatalog out;
  for (const auto& e : catalog)
    if (e.dims.dx >= min.dx && e.dims.dx <= max.dx && e.dims.dy >= min.dy && e.dims.dy <= max.dy &&
        e.dims.dz >= min.dz && e.dims.dz <= max.dz)
      out.push_back(e);
  return out;
}

}  // namespace voxelsmith
