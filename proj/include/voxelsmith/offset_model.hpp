#pragma once

// Statistical reference generator: per-label frequency tables over
// (offset from the previous same-label block, block type), fitted by scanning
// every labeled instance of a corpus in ascending (y, x, z) order.

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "voxelsmith/abstructions.hpp"

namespace voxelsmith {

class OffsetModel final : public GeneratorModel {
 public:
  static constexpr std::string_view kHeader = "voxelsmith-offset-model v1";

  OffsetModel() = default;

  static OffsetModel fit(const std::vector<VoxelGrid>& corpus) {
    if (corpus.empty()) throw GenerationError("cannot fit an offset model on an empty corpus");
    std::map<SegmentLabel, std::map<std::pair<Offset, BlockType>, std::uint32_t>> counts;
    std::map<SegmentLabel, std::array<std::uint32_t, kPaletteSize>> type_counts;
    for (const VoxelGrid& grid : corpus) {
      for (const auto& [c, cell] : grid)
        if (!cell.label) throw GenerationError("corpus grids must be fully labeled");
      for (const auto& inst : segment(grid)) {
        auto& types = type_counts[inst.label];
        const Coord* prev = nullptr;
        for (const Coord& c : inst.voxels) {
          const BlockType t = grid.find(c)->type;
          ++types[static_cast<std::size_t>(t)];
          if (prev) ++counts[inst.label][{c - *prev, t}];
          prev = &c;
        }
      }
    }
    OffsetModel m;
    for (const auto& [label, types] : type_counts) {
      GeneratorParams p;
      p.label = label;
      const auto best = std::max_element(types.begin(), types.end());
      p.block = static_cast<BlockType>(best - types.begin());
      for (const auto& [key, n] : counts[label]) p.offsets.push_back({key.first, key.second, n});
      sort_entries(p.offsets);
      m.table_[label] = std::move(p);
    }
    return m;
  }

  std::string_view name() const override { return "statistical"; }

  std::optional<GeneratorParams> params(SegmentLabel label) const override {
    auto it = table_.find(label);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<SegmentLabel, GeneratorParams>& table() const { return table_; }

  // The location first, then the most frequent feasible offset from the
  // frontier; if the frontier is boxed in, earlier placements are tried
  // newest first.
  std::optional<PlacementStep> next_step(const GeneratorContext& ctx, const GeneratorParams& params) const override {
    if (ctx.feasible(ctx.anchor)) return PlacementStep{ctx.anchor, params.block};
    std::vector<Coord> origins{ctx.frontier};
    const auto& placed = ctx.placed_cells();
    for (auto it = placed.rbegin(); it != placed.rend(); ++it)
      if (*it != ctx.frontier) origins.push_back(*it);
    for (const Coord& origin : origins)
      for (const OffsetEntry& e : params.offsets) {
        const Coord c = origin + e.offset;
        if (ctx.feasible(c)) return PlacementStep{c, e.type};
      }
    return std::nullopt;
  }

  // Text format:
  //   voxelsmith-offset-model v1
  //   label <name> <first-type-name> <entry count>
  //   <dx> <dy> <dz> <type-name> <count>     (one per entry)
  std::string save() const {
    std::ostringstream out;
    out << kHeader << '\n';
    for (const auto& [label, p] : table_) {
      out << "label " << label_name(label) << ' ' << block_name(p.block) << ' ' << p.offsets.size() << '\n';
      for (const auto& e : p.offsets)
        out << e.offset.dx << ' ' << e.offset.dy << ' ' << e.offset.dz << ' ' << block_name(e.type) << ' ' << e.count
            << '\n';
    }
    return out.str();
  }

  static OffsetModel load(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw GenerationError("offset model: bad header");
    OffsetModel m;
    std::string word, label_text, type_text;
    std::size_t n = 0;
    while (in >> word) {
      if (word != "label" || !(in >> label_text >> type_text >> n)) throw GenerationError("offset model: bad label record");
      auto label = parse_label(label_text);
      auto first = block_from_name(type_text);
      if (!label || !first || *first == BlockType::air) throw GenerationError("offset model: unknown label or type");
      GeneratorParams p{*label, *first, {}};
      for (std::size_t i = 0; i < n; ++i) {
        OffsetEntry e;
        if (!(in >> e.offset.dx >> e.offset.dy >> e.offset.dz >> type_text >> e.count))
          throw GenerationError("offset model: truncated entry");
        auto t = block_from_name(type_text);
        if (!t || *t == BlockType::air) throw GenerationError("offset model: unknown type " + type_text);
        e.type = *t;
        p.offsets.push_back(e);
      }
      sort_entries(p.offsets);
      if (!m.table_.emplace(*label, std::move(p)).second) throw GenerationError("offset model: duplicate label");
    }
    return m;
  }

 private:
  static void sort_entries(std::vector<OffsetEntry>& v) {
    std::sort(v.begin(), v.end(), [](const OffsetEntry& a, const OffsetEntry& b) {
      return std::tuple(-static_cast<long long>(a.count), a.offset, a.type) <
             std::tuple(-static_cast<long long>(b.count), b.offset, b.type);
    });
  }

  std::map<SegmentLabel, GeneratorParams> table_;
};

}  // namespace voxelsmith
