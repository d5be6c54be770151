#pragma once

// Session logs: one Exchange per dialogue turn, stored as newline-delimited
// JSON (schema version 1), plus world diffs and exchange classification.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxelsmith/abstructions.hpp"

namespace voxelsmith {

class LogError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kLogVersion = 1;

// ---------------------------------------------------------------------------
// World diffs

struct WorldDiff {
  std::map<Coord, Cell> placed;
  std::set<Coord> removed;

  bool empty() const { return placed.empty() && removed.empty(); }
  friend bool operator==(const WorldDiff&, const WorldDiff&) = default;
};

inline WorldDiff diff_between(const VoxelGrid& before, const VoxelGrid& after) {
  WorldDiff d;
  for (const auto& [c, cell] : before) {
    const Cell* now = after.find(c);
    if (!now || !(*now == cell)) d.removed.insert(c);
  }
  for (const auto& [c, cell] : after) {
    const Cell* was = before.find(c);
    if (!was || !(*was == cell)) d.placed.emplace(c, cell);
  }
  return d;
}

// Removals first, then placements.
inline void apply_diff(VoxelGrid& grid, const WorldDiff& d) {
  for (const Coord& c : d.removed) grid.erase(c);
  for (const auto& [c, cell] : d.placed) {
    grid.erase(c);
    grid.set(c, cell);
  }
}

// The single diff equivalent to applying a then b.
inline WorldDiff compose(const WorldDiff& a, const WorldDiff& b) {
  WorldDiff out = a;
  for (const Coord& c : b.removed) {
    if (out.placed.erase(c) == 0 || a.removed.count(c)) out.removed.insert(c);
  }
  for (const auto& [c, cell] : b.placed) out.placed.insert_or_assign(c, cell);
  return out;
}

// ---------------------------------------------------------------------------
// Exchange records

enum class Resolution { core, induced, unparsable, conversational, definition };
enum class Classification { core, induced, unparsable, excluded };

inline std::string_view resolution_name(Resolution r) {
  switch (r) {
    case Resolution::core: return "core";
    case Resolution::induced: return "induced";
    case Resolution::unparsable: return "unparsable";
    case Resolution::conversational: return "conversational";
    case Resolution::definition: return "definition";
  }
  return "unparsable";
}

inline std::optional<Resolution> resolution_from_name(std::string_view s) {
  for (auto r : {Resolution::core, Resolution::induced, Resolution::unparsable, Resolution::conversational,
                 Resolution::definition})
    if (resolution_name(r) == s) return r;
  return std::nullopt;
}

inline std::string_view classification_name(Classification c) {
  switch (c) {
    case Classification::core: return "core";
    case Classification::induced: return "induced";
    case Classification::unparsable: return "unparsable";
    case Classification::excluded: return "excluded";
  }
  return "excluded";
}

struct HintRecord {
  Ray cursor;
  std::optional<Prompt> prompt;

  friend bool operator==(const HintRecord&, const HintRecord&) = default;
};

struct Action {
  std::string op;  // "build" or "destroy"
  std::string utterance;
  std::optional<SegmentLabel> label;
  int length = 0;
  std::optional<Coord> location;
  std::vector<PlacementStep> prompt_cells;
  std::vector<PlacementStep> steps;
  std::vector<Coord> removed;
  bool ok = false;
  std::string reason;
  std::optional<Termination> termination;

  friend bool operator==(const Action&, const Action&) = default;
};

// Classification of one body command of a definition, decided when the
// definition is made.
struct SubExchange {
  std::string raw;
  Resolution resolution = Resolution::core;
  std::vector<std::string> body;  // one-level body when induced
  std::vector<std::string> leaves;

  friend bool operator==(const SubExchange&, const SubExchange&) = default;
};

struct Exchange {
  std::string session_id;
  std::string house_id;
  int session_index = 1;
  std::int64_t seq = 0;
  std::int64_t timestamp = 0;
  std::string raw;
  std::optional<Ray> cursor;
  std::vector<HintRecord> hints;
  bool cancelled = false;
  Resolution resolution = Resolution::unparsable;
  bool pending = false;
  std::string reason;
  std::string head;                // definition head, or the matched head when induced
  std::vector<std::string> body;   // one-level body
  std::vector<std::string> leaves; // fully expanded leaves
  std::optional<double> similarity;
  std::vector<SubExchange> sub_exchanges;
  std::vector<Action> actions;
  WorldDiff diff;

  friend bool operator==(const Exchange&, const Exchange&) = default;
};

using SessionLog = std::vector<Exchange>;

// One unit on the curves: a top-level exchange or one definition body command.
struct ScoredExchange {
  Classification cls = Classification::excluded;
  std::string raw;
  std::vector<std::string> body;
  std::vector<std::string> leaves;
};

inline Classification classify_resolution(Resolution r) {
  switch (r) {
    case Resolution::core: return Classification::core;
    case Resolution::induced: return Classification::induced;
    case Resolution::unparsable: return Classification::unparsable;
    default: return Classification::excluded;
  }
}

inline std::vector<ScoredExchange> score_exchange(const Exchange& e) {
  std::vector<ScoredExchange> out;
  if (e.resolution == Resolution::definition) {
    for (const auto& s : e.sub_exchanges) out.push_back({classify_resolution(s.resolution), s.raw, s.body, s.leaves});
    return out;
  }
  Classification cls = classify_resolution(e.resolution);
  if (e.pending && cls != Classification::excluded) cls = Classification::unparsable;
  out.push_back({cls, e.raw, e.body, e.leaves});
  return out;
}

// Definitions expand to one classification per body command.
inline std::vector<Classification> classify_exchange(const Exchange& e) {
  std::vector<Classification> out;
  for (const auto& s : score_exchange(e)) out.push_back(s.cls);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace log_json {

using json = nlohmann::ordered_json;

inline json coord(const Coord& c) { return json::array({c.x, c.y, c.z}); }

inline Coord coord(const json& j) {
  if (!j.is_array() || j.size() != 3) throw LogError("coordinate must be [x, y, z]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

inline json vec3(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

inline Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw LogError("vector must have 3 components");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json ray(const Ray& r) { return json{{"origin", vec3(r.origin())}, {"direction", vec3(r.direction())}}; }

inline Ray ray(const json& j) {
  try {
    return Ray(vec3(j.at("origin")), vec3(j.at("direction")));
  } catch (const GridError& e) {
    throw LogError(e.what());
  }
}

inline BlockType block(const json& j) {
  auto t = block_from_id(j.get<long long>());
  if (!t || *t == BlockType::air) throw LogError("unknown block id");
  return *t;
}

inline json step(const PlacementStep& s) {
  return json::array({s.coord.x, s.coord.y, s.coord.z, static_cast<int>(s.type)});
}

inline PlacementStep step(const json& j) {
  if (!j.is_array() || j.size() != 4) throw LogError("placement must be [x, y, z, t]");
  return {{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()}, block(j[3])};
}

inline json prompt(const Prompt& p) {
  json out = json::array();
  for (const auto& b : p.blocks)
    out.push_back(json::array({b.offset.dx, b.offset.dy, b.offset.dz, static_cast<int>(b.type)}));
  return out;
}

inline Prompt prompt(const json& j) {
  std::vector<PromptBlock> blocks;
  for (const auto& b : j) {
    if (!b.is_array() || b.size() != 4) throw LogError("prompt block must be [dx, dy, dz, t]");
    blocks.push_back({{b[0].get<int>(), b[1].get<int>(), b[2].get<int>()}, block(b[3])});
  }
  try {
    return Prompt(std::move(blocks));
  } catch (const GenerationError& e) {
    throw LogError(e.what());
  }
}

inline json strings(const std::vector<std::string>& v) {
  json out = json::array();
  for (const auto& s : v) out.push_back(s);
  return out;
}

inline std::vector<std::string> strings(const json& j) { return j.get<std::vector<std::string>>(); }

inline json diff(const WorldDiff& d) {
  json placed = json::array(), removed = json::array();
  for (const auto& [c, cell] : d.placed) placed.push_back(block_json(c, cell));
  for (const Coord& c : d.removed) removed.push_back(coord(c));
  return json{{"placed", placed}, {"removed", removed}};
}

inline WorldDiff diff(const json& j) {
  WorldDiff d;
  for (const auto& b : j.at("placed")) {
    const Coord c{b.at("x").get<int>(), b.at("y").get<int>(), b.at("z").get<int>()};
    Cell cell{block(b.at("t")), std::nullopt};
    if (!b.at("label").is_null()) {
      cell.label = parse_label(b.at("label").get<std::string>());
      if (!cell.label) throw LogError("unknown label in diff");
    }
    d.placed.emplace(c, cell);
  }
  for (const auto& c : j.at("removed")) d.removed.insert(coord(c));
  return d;
}

inline json action(const Action& a) {
  json steps = json::array(), prompt_cells = json::array(), removed = json::array();
  for (const auto& s : a.steps) steps.push_back(step(s));
  for (const auto& s : a.prompt_cells) prompt_cells.push_back(step(s));
  for (const auto& c : a.removed) removed.push_back(coord(c));
  return json{{"op", a.op},
              {"utterance", a.utterance},
              {"label", a.label ? json(std::string(label_name(*a.label))) : json(nullptr)},
              {"length", a.length},
              {"location", a.location ? coord(*a.location) : json(nullptr)},
              {"prompt_cells", prompt_cells},
              {"steps", steps},
              {"removed", removed},
              {"ok", a.ok},
              {"reason", a.reason},
              {"termination", a.termination ? json(std::string(termination_name(*a.termination))) : json(nullptr)}};
}

inline Action action(const json& j) {
  Action a;
  a.op = j.at("op").get<std::string>();
  if (a.op != "build" && a.op != "destroy") throw LogError("unknown action op '" + a.op + "'");
  a.utterance = j.at("utterance").get<std::string>();
  if (!j.at("label").is_null()) {
    a.label = parse_label(j.at("label").get<std::string>());
    if (!a.label) throw LogError("unknown action label");
  }
  a.length = j.at("length").get<int>();
  if (!j.at("location").is_null()) a.location = coord(j.at("location"));
  for (const auto& s : j.at("prompt_cells")) a.prompt_cells.push_back(step(s));
  for (const auto& s : j.at("steps")) a.steps.push_back(step(s));
  for (const auto& c : j.at("removed")) a.removed.push_back(coord(c));
  a.ok = j.at("ok").get<bool>();
  a.reason = j.at("reason").get<std::string>();
  if (!j.at("termination").is_null()) {
    a.termination = termination_from_name(j.at("termination").get<std::string>());
    if (!a.termination) throw LogError("unknown termination marker");
  }
  return a;
}

}  // namespace log_json

inline nlohmann::ordered_json exchange_to_json(const Exchange& e) {
  using namespace log_json;
  json hints = json::array();
  for (const auto& h : e.hints)
    hints.push_back(json{{"cursor", ray(h.cursor)}, {"prompt", h.prompt ? prompt(*h.prompt) : json(nullptr)}});
  json subs = json::array();
  for (const auto& s : e.sub_exchanges)
    subs.push_back(json{{"raw", s.raw},
                        {"resolution", std::string(resolution_name(s.resolution))},
                        {"body", strings(s.body)},
                        {"leaves", strings(s.leaves)}});
  json actions = json::array();
  for (const auto& a : e.actions) actions.push_back(action(a));
  return json{{"v", kLogVersion},
              {"session_id", e.session_id},
              {"house_id", e.house_id},
              {"session_index", e.session_index},
              {"seq", e.seq},
              {"timestamp", e.timestamp},
              {"raw", e.raw},
              {"cursor", e.cursor ? ray(*e.cursor) : json(nullptr)},
              {"hints", hints},
              {"cancelled", e.cancelled},
              {"resolution", std::string(resolution_name(e.resolution))},
              {"pending", e.pending},
              {"reason", e.reason},
              {"head", e.head},
              {"body", strings(e.body)},
              {"leaves", strings(e.leaves)},
              {"similarity", e.similarity ? json(*e.similarity) : json(nullptr)},
              {"sub_exchanges", subs},
              {"actions", actions},
              {"diff", diff(e.diff)}};
}

// Fields a hand-written transcript may omit: hints, cancelled, pending,
// reason, head, body, leaves, similarity, sub_exchanges, actions, diff.
inline Exchange exchange_from_json(const nlohmann::json& j0) {
  using namespace log_json;
  const json j = j0;
  try {
    if (!j.is_object()) throw LogError("exchange record must be an object");
    if (j.at("v").get<int>() != kLogVersion) throw LogError("unsupported log version");
    Exchange e;
    e.session_id = j.at("session_id").get<std::string>();
    e.house_id = j.at("house_id").get<std::string>();
    e.session_index = j.at("session_index").get<int>();
    e.seq = j.value("seq", std::int64_t{0});
    e.timestamp = j.at("timestamp").get<std::int64_t>();
    e.raw = j.at("raw").get<std::string>();
    if (j.contains("cursor") && !j["cursor"].is_null()) e.cursor = ray(j["cursor"]);
    if (j.contains("hints"))
      for (const auto& h : j["hints"]) {
        HintRecord rec{ray(h.at("cursor")), std::nullopt};
        if (h.contains("prompt") && !h["prompt"].is_null()) rec.prompt = prompt(h["prompt"]);
        e.hints.push_back(std::move(rec));
      }
    e.cancelled = j.value("cancelled", false);
    auto res = resolution_from_name(j.at("resolution").get<std::string>());
    if (!res) throw LogError("unknown resolution '" + j.at("resolution").get<std::string>() + "'");
    e.resolution = *res;
    e.pending = j.value("pending", false);
    e.reason = j.value("reason", std::string());
    e.head = j.value("head", std::string());
    if (j.contains("body")) e.body = strings(j["body"]);
    if (j.contains("leaves")) e.leaves = strings(j["leaves"]);
    if (j.contains("similarity") && !j["similarity"].is_null()) e.similarity = j["similarity"].get<double>();
    if (j.contains("sub_exchanges"))
      for (const auto& s : j["sub_exchanges"]) {
        SubExchange sub;
        sub.raw = s.at("raw").get<std::string>();
        auto r = resolution_from_name(s.at("resolution").get<std::string>());
        if (!r || (*r != Resolution::core && *r != Resolution::induced && *r != Resolution::unparsable))
          throw LogError("bad sub-exchange resolution");
        sub.resolution = *r;
        if (s.contains("body")) sub.body = strings(s["body"]);
        if (s.contains("leaves")) sub.leaves = strings(s["leaves"]);
        e.sub_exchanges.push_back(std::move(sub));
      }
    if (e.resolution == Resolution::definition && e.sub_exchanges.empty())
      throw LogError("definition exchange without sub-exchanges");
    if (j.contains("actions"))
      for (const auto& a : j["actions"]) e.actions.push_back(action(a));
    if (j.contains("diff")) e.diff = diff(j["diff"]);
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw LogError(std::string("exchange schema: ") + ex.what());
  }
}

inline std::string write_log(const SessionLog& log) {
  std::string out;
  for (const auto& e : log) out += exchange_to_json(e).dump() + '\n';
  return out;
}

inline SessionLog read_log(std::string_view text) {
  SessionLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      log.push_back(exchange_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw LogError("line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const LogError& ex) {
      throw LogError("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return log;
}

}  // namespace voxelsmith
