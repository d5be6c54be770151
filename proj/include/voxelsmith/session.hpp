#pragma once

// One user session: definition store lookup, then the core parser, then
// constraint resolution and execution (or a hint request), with every turn
// logged as an Exchange.

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxelsmith/abstructions.hpp"
#include "voxelsmith/naturalize.hpp"
#include "voxelsmith/session_log.hpp"

namespace voxelsmith {

class SessionError : public Error {
 public:
  using Error::Error;
};

class PendingHintError : public SessionError {
 public:
  PendingHintError() : SessionError("a hint is pending; call provide_hint or cancel_hint first") {}
};

class NoPendingHintError : public SessionError {
 public:
  NoPendingHintError() : SessionError("no hint is pending") {}
};

class SnapshotError : public SessionError {
 public:
  using SessionError::SessionError;
};

struct SessionInfo {
  std::string session_id;
  std::string house_id;
  int session_index = 1;
};

struct AgentConfig {
  GeneratorConfig generator;
  int max_depth = DefinitionStore::kDefaultMaxDepth;
  std::uint64_t rng_seed = 0;
};

using Clock = std::function<std::int64_t()>;

inline Clock wall_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

struct PendingBuild {
  SegmentLabel label = SegmentLabel::wall;
  int length = 0;
  std::string utterance;
  std::vector<std::string> remaining;  // leaves still to run after the hinted build
  std::optional<Ray> cursor;           // cursor of the original utterance, reused for the remaining leaves

  friend bool operator==(const PendingBuild&, const PendingBuild&) = default;
};

struct AgentReply {
  std::string text;
  std::int64_t seq = 0;
  Resolution resolution = Resolution::unparsable;
  bool needs_hint = false;
  WorldDiff diff;  // change caused by this call
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto sm = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return sm(sm(sm(a) ^ b) ^ c);
}

// Squared distance from a cell center to a ray (to its origin behind it).
inline double ray_distance2(const Ray& r, const Coord& c) {
  const Vec3& o = r.origin();
  const Vec3& d = r.direction();
  const Vec3 p{c.x + 0.5 - o[0], c.y + 0.5 - o[1], c.z + 0.5 - o[2]};
  const double t = std::max(0.0, p[0] * d[0] + p[1] * d[1] + p[2] * d[2]);
  double s = 0;
  for (int a = 0; a < 3; ++a) s += (p[a] - t * d[a]) * (p[a] - t * d[a]);
  return s;
}

class Session {
 public:
  Session(SessionInfo info, VoxelGrid house, std::shared_ptr<SharedDefinitionStore> store,
          std::shared_ptr<const GeneratorModel> model, AgentConfig config = {}, Clock clock = wall_clock())
      : info_(std::move(info)),
        initial_(house),
        grid_(std::move(house)),
        store_(std::move(store)),
        model_(std::move(model)),
        config_(config),
        clock_(std::move(clock)) {
    if (!store_ || !model_) throw SessionError("session needs a store and a model");
    if (info_.session_index < 1 || info_.session_index > 3) throw SessionError("session index must be 1, 2 or 3");
    history_.push_back({0, diff_between(VoxelGrid{}, grid_)});
  }

  const SessionInfo& info() const { return info_; }
  const VoxelGrid& grid() const { return grid_; }
  const VoxelGrid& initial_grid() const { return initial_; }
  const SessionLog& log() const { return log_; }
  const std::optional<PendingBuild>& pending() const { return pending_; }
  std::int64_t seq() const { return seq_; }
  const GeneratorModel& model() const { return *model_; }
  void set_clock(Clock clock) { clock_ = std::move(clock); }

  // Composite of every world change at or after `since_seq`; seq 0 is the
  // initial house, so since_seq = 0 rebuilds the current world from nothing.
  WorldDiff world_since(std::int64_t since_seq) const {
    WorldDiff out;
    for (const auto& [s, d] : history_)
      if (s >= since_seq) out = compose(out, d);
    return out;
  }

  AgentReply handle_utterance(std::string_view raw, const std::optional<Ray>& cursor = std::nullopt) {
    if (pending_) throw PendingHintError();
    ++seq_;
    const VoxelGrid before = grid_;
    Exchange ex = new_exchange(raw, cursor);
    const Utterance u(raw);
    auto store = store_->snapshot();

    if (is_definition(raw)) {
      handle_definition(ex, raw, *store);
    } else if (auto hit = u.empty() ? std::nullopt : store->lookup(u)) {
      ex.resolution = Resolution::induced;
      ex.head = hit->entry.head.raw;
      ex.similarity = hit->similarity;
      for (const auto& b : hit->entry.body) ex.body.push_back(b.raw);
      try {
        for (const auto& leaf : store->expand(u, config_.max_depth)) ex.leaves.push_back(leaf.raw);
        run_leaves(ex, ex.leaves, cursor);
      } catch (const NaturalizeError& e) {
        fail(ex, e.what());
      }
    } else {
      const CommandAst ast = parse_core(u);
      if (std::holds_alternative<Conversational>(ast)) {
        ex.resolution = Resolution::conversational;
      } else if (auto* bad = std::get_if<Unparsable>(&ast)) {
        fail(ex, bad->reason);
      } else {
        ex.resolution = Resolution::core;
        ex.leaves = {ex.raw};
        run_leaves(ex, ex.leaves, cursor);
      }
    }
    return finish(std::move(ex), before, false);
  }

  AgentReply provide_hint(const Ray& cursor, const std::optional<Prompt>& prompt = std::nullopt) {
    if (!pending_) throw NoPendingHintError();
    ++seq_;
    const VoxelGrid before = grid_;
    Exchange ex = std::move(log_.back());
    log_.pop_back();
    ex.hints.push_back({cursor, prompt});
    auto loc = resolve_location(grid_, std::nullopt, cursor);
    if (auto* need = std::get_if<NeedsHint>(&loc)) {
      ex.reason = need->reason;
      return finish(std::move(ex), before, true);
    }
    PendingBuild p = std::move(*pending_);
    pending_.reset();
    ex.pending = false;
    ex.reason.clear();
    if (execute_build(ex, p.utterance, p.label, p.length, std::get<Coord>(loc), prompt))
      run_leaves(ex, p.remaining, p.cursor);
    return finish(std::move(ex), before, true);
  }

  AgentReply cancel_hint() {
    if (!pending_) throw NoPendingHintError();
    ++seq_;
    Exchange ex = std::move(log_.back());
    log_.pop_back();
    pending_.reset();
    ex.pending = false;
    ex.cancelled = true;
    fail(ex, "hint cancelled");
    return finish(std::move(ex), grid_, true);
  }

  // -------------------------------------------------------------------------
  // Snapshot

  std::string snapshot() const {
    using json = nlohmann::ordered_json;
    json log = json::array();
    for (const auto& e : log_) log.push_back(exchange_to_json(e));
    json history = json::array();
    for (const auto& [s, d] : history_) history.push_back(json{{"seq", s}, {"diff", log_json::diff(d)}});
    json pending = nullptr;
    if (pending_)
      pending = json{{"label", std::string(label_name(pending_->label))},
                     {"length", pending_->length},
                     {"utterance", pending_->utterance},
                     {"remaining", log_json::strings(pending_->remaining)},
                     {"cursor", pending_->cursor ? log_json::ray(*pending_->cursor) : json(nullptr)}};
    return json{{"v", kSnapshotVersion},
                {"session_id", info_.session_id},
                {"house_id", info_.house_id},
                {"session_index", info_.session_index},
                {"store", store_->name()},
                {"model", std::string(model_->name())},
                {"seq", seq_},
                {"initial", nlohmann::ordered_json::parse(save_house(initial_))},
                {"grid", nlohmann::ordered_json::parse(save_house(grid_))},
                {"pending", pending},
                {"log", log},
                {"history", history}}
        .dump();
  }

  static Session restore(std::string_view bytes, std::shared_ptr<SharedDefinitionStore> store,
                         std::shared_ptr<const GeneratorModel> model, AgentConfig config = {},
                         Clock clock = wall_clock()) {
    try {
      const auto j = nlohmann::json::parse(bytes);
      if (!j.is_object() || j.at("v").get<int>() != kSnapshotVersion) throw SnapshotError("unsupported snapshot version");
      if (j.at("store").get<std::string>() != store->name()) throw SnapshotError("snapshot refers to another store");
      if (j.at("model").get<std::string>() != model->name()) throw SnapshotError("snapshot refers to another model");
      SessionInfo info{j.at("session_id").get<std::string>(), j.at("house_id").get<std::string>(),
                       j.at("session_index").get<int>()};
      Session s(info, load_house(j.at("initial").dump()), std::move(store), std::move(model), config, std::move(clock));
      s.grid_ = load_house(j.at("grid").dump());
      s.seq_ = j.at("seq").get<std::int64_t>();
      for (const auto& e : j.at("log")) s.log_.push_back(exchange_from_json(e));
      s.history_.clear();
      for (const auto& h : j.at("history"))
        s.history_.push_back({h.at("seq").get<std::int64_t>(), log_json::diff(nlohmann::ordered_json(h.at("diff")))});
      const auto& p = j.at("pending");
      if (!p.is_null()) {
        PendingBuild pb;
        auto label = parse_label(p.at("label").get<std::string>());
        if (!label) throw SnapshotError("unknown pending label");
        pb.label = *label;
        pb.length = p.at("length").get<int>();
        pb.utterance = p.at("utterance").get<std::string>();
        pb.remaining = p.at("remaining").get<std::vector<std::string>>();
        if (!p.at("cursor").is_null()) pb.cursor = log_json::ray(nlohmann::ordered_json(p.at("cursor")));
        s.pending_ = std::move(pb);
      }
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw SnapshotError(std::string("corrupt snapshot: ") + e.what());
    } catch (const SchematicError& e) {
      throw SnapshotError(std::string("corrupt snapshot grid: ") + e.what());
    } catch (const LogError& e) {
      throw SnapshotError(std::string("corrupt snapshot log: ") + e.what());
    }
  }

  friend bool operator==(const Session& a, const Session& b) {
    return a.info_.session_id == b.info_.session_id && a.info_.house_id == b.info_.house_id &&
           a.info_.session_index == b.info_.session_index && a.initial_ == b.initial_ && a.grid_ == b.grid_ &&
           a.log_ == b.log_ && a.pending_ == b.pending_ && a.seq_ == b.seq_ && a.history_ == b.history_ &&
           a.store_ == b.store_;
  }

  static constexpr int kSnapshotVersion = 1;

 private:
  Exchange new_exchange(std::string_view raw, const std::optional<Ray>& cursor) const {
    Exchange ex;
    ex.session_id = info_.session_id;
    ex.house_id = info_.house_id;
    ex.session_index = info_.session_index;
    ex.seq = seq_;
    ex.timestamp = clock_();
    ex.raw = std::string(trim(raw));
    ex.cursor = cursor;
    return ex;
  }

  static void fail(Exchange& ex, std::string reason) {
    ex.resolution = Resolution::unparsable;
    ex.reason = std::move(reason);
  }

  // Body commands must be groundable now (a store hit or a core Build or
  // Destroy); they are not executed.
  void handle_definition(Exchange& ex, std::string_view raw, const DefinitionStore& store) {
    DefineCmd def;
    try {
      def = parse_definition(raw);
    } catch (const GrammarError& e) {
      fail(ex, e.what());
      return;
    }
    ex.head = def.head.raw;
    std::vector<SubExchange> subs;
    for (const auto& b : def.body) {
      ex.body.push_back(b.raw);
      SubExchange sub{b.raw, Resolution::core, {}, {}};
      if (auto hit = store.lookup(b)) {
        sub.resolution = Resolution::induced;
        for (const auto& x : hit->entry.body) sub.body.push_back(x.raw);
        try {
          for (const auto& leaf : store.expand(b, config_.max_depth)) sub.leaves.push_back(leaf.raw);
        } catch (const NaturalizeError& e) {
          fail(ex, "cannot use '" + b.raw + "' in a definition: " + e.what());
          return;
        }
      } else {
        const CommandAst ast = parse_core(b);
        if (!std::holds_alternative<BuildCmd>(ast) && !std::holds_alternative<DestroyCmd>(ast)) {
          const auto* bad = std::get_if<Unparsable>(&ast);
          fail(ex, "I don't know how to '" + b.raw + "'" + (bad ? ": " + bad->reason : std::string()));
          return;
        }
        sub.leaves = {b.raw};
      }
      subs.push_back(std::move(sub));
    }
    try {
      store_->define(def.head, def.body, info_.session_id, ex.timestamp);
    } catch (const NaturalizeError& e) {
      fail(ex, e.what());
      return;
    }
    ex.resolution = Resolution::definition;
    ex.sub_exchanges = std::move(subs);
  }

  // Runs leaves in order, stopping at the first failure (earlier leaves stay
  // applied) or at a build that needs a hint.
  void run_leaves(Exchange& ex, const std::vector<std::string>& leaves, const std::optional<Ray>& cursor) {
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const std::string& leaf = leaves[i];
      const CommandAst ast = parse_core(leaf);
      if (const auto* build = std::get_if<BuildCmd>(&ast)) {
        int length = 0;
        try {
          length = resolve_length(build->size);
        } catch (const GenerationError& e) {
          record_failure(ex, "build", leaf, build->label, e.what());
          return;
        }
        auto loc = resolve_location(grid_, build->relloc, cursor);
        if (auto* need = std::get_if<NeedsHint>(&loc)) {
          pending_ = PendingBuild{build->label, length, leaf, {leaves.begin() + static_cast<std::ptrdiff_t>(i) + 1, leaves.end()},
                                  cursor};
          ex.pending = true;
          ex.reason = need->reason;
          return;
        }
        if (!execute_build(ex, leaf, build->label, length, std::get<Coord>(loc), std::nullopt)) return;
      } else if (const auto* destroy = std::get_if<DestroyCmd>(&ast)) {
        if (!execute_destroy(ex, leaf, destroy->label, cursor)) return;
      } else {
        const auto* bad = std::get_if<Unparsable>(&ast);
        record_failure(ex, "build", leaf, std::nullopt,
                       bad ? bad->reason : "'" + leaf + "' is not a build or destroy command");
        return;
      }
    }
  }

  void record_failure(Exchange& ex, std::string op, const std::string& leaf, std::optional<SegmentLabel> label,
                      std::string reason) {
    Action a;
    a.op = std::move(op);
    a.utterance = leaf;
    a.label = label;
    a.ok = false;
    a.reason = reason;
    ex.actions.push_back(std::move(a));
    fail(ex, std::move(reason));
  }

  bool execute_build(Exchange& ex, const std::string& leaf, SegmentLabel label, int length, const Coord& location,
                     const std::optional<Prompt>& prompt) {
    Action a;
    a.op = "build";
    a.utterance = leaf;
    a.label = label;
    a.length = length;
    a.location = location;
    if (!model_->params(label)) {
      record_failure(ex, "build", leaf, label, "I can't build a " + std::string(label_name(label)) + " yet");
      ex.actions.back().length = length;
      ex.actions.back().location = location;
      return false;
    }
    const std::uint64_t seed = mix_seed(config_.rng_seed, static_cast<std::uint64_t>(seq_), ex.actions.size());
    GenerationResult r;
    try {
      r = generate(grid_, label, ConstraintSet{location, length, prompt}, *model_, seed, config_.generator);
    } catch (const Error& e) {
      a.reason = e.what();
      ex.actions.push_back(a);
      fail(ex, e.what());
      return false;
    }
    a.prompt_cells = r.prompt_placed;
    a.steps = r.steps;
    a.termination = r.termination;
    if (r.steps.empty() && r.prompt_placed.empty()) {
      a.reason = "nothing could be built there (" + std::string(termination_name(r.termination)) + ")";
      const std::string reason = a.reason;
      ex.actions.push_back(std::move(a));
      fail(ex, reason);
      return false;
    }
    grid_ = std::move(r.grid);
    a.ok = true;
    ex.actions.push_back(std::move(a));
    return true;
  }

  bool execute_destroy(Exchange& ex, const std::string& leaf, SegmentLabel label, const std::optional<Ray>& cursor) {
    std::optional<SegmentInstance> target;
    double best = std::numeric_limits<double>::infinity();
    for (auto& inst : segment(grid_)) {
      if (inst.label != label) continue;
      if (cursor) {
        double d = std::numeric_limits<double>::infinity();
        for (const Coord& c : inst.voxels) d = std::min(d, ray_distance2(*cursor, c));
        if (d < best) best = d, target = std::move(inst);
      } else if (!target || inst.voxels.size() > target->voxels.size()) {
        target = std::move(inst);
      }
    }
    if (!target) {
      record_failure(ex, "destroy", leaf, label, "I can't find a " + std::string(label_name(label)) + " here");
      return false;
    }
    grid_ = remove_blocks(grid_, target->voxels);
    Action a;
    a.op = "destroy";
    a.utterance = leaf;
    a.label = label;
    a.removed.assign(target->voxels.begin(), target->voxels.end());
    a.ok = true;
    ex.actions.push_back(std::move(a));
    return true;
  }

  AgentReply finish(Exchange ex, const VoxelGrid& before, bool continuing) {
    WorldDiff step = diff_between(before, grid_);
    ex.diff = continuing ? compose(ex.diff, step) : step;
    if (!step.empty()) history_.push_back({seq_, step});
    AgentReply reply;
    reply.seq = seq_;
    reply.resolution = ex.resolution;
    reply.needs_hint = ex.pending;
    reply.diff = std::move(step);
    reply.text = reply_text(ex);
    log_.push_back(std::move(ex));
    return reply;
  }

  static std::string reply_text(const Exchange& ex) {
    if (ex.pending) return ex.reason;
    switch (ex.resolution) {
      case Resolution::conversational: return "Hi! Tell me what to build.";
      case Resolution::definition: return "Got it: '" + ex.head + "' is now a command.";
      case Resolution::unparsable: return "Sorry, I couldn't do that: " + ex.reason;
      default: return "Done.";
    }
  }

  SessionInfo info_;
  VoxelGrid initial_;
  VoxelGrid grid_;
  std::shared_ptr<SharedDefinitionStore> store_;
  std::shared_ptr<const GeneratorModel> model_;
  AgentConfig config_;
  Clock clock_;
  SessionLog log_;
  std::optional<PendingBuild> pending_;
  std::int64_t seq_ = 0;
  std::vector<std::pair<std::int64_t, WorldDiff>> history_;
};

}  // namespace voxelsmith
