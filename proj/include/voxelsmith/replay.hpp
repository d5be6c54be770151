#pragma once

// Deterministic transcript replay: re-executes recorded exchanges against
// fresh sessions and a freshly seeded store, in global timestamp order, and
// checks each replayed classification against the recorded one.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "voxelsmith/catalog.hpp"
#include "voxelsmith/config.hpp"
#include "voxelsmith/metrics.hpp"
#include "voxelsmith/session.hpp"

namespace voxelsmith {

using HouseLoader = std::function<VoxelGrid(const std::string& house_id)>;

inline HouseLoader directory_loader(std::filesystem::path dir) {
  return [dir = std::move(dir)](const std::string& id) { return load_house_file(dir, id); };
}

struct ReplayMismatch {
  std::string session_id;
  std::int64_t timestamp = 0;
  std::string raw;
  std::vector<Classification> recorded;
  std::vector<Classification> replayed;
};

struct ReplayResult {
  std::vector<SessionLog> logs;  // replayed, one per session in first-seen order
  std::vector<ReplayMismatch> mismatches;
};

inline ReplayResult replay(const std::vector<SessionLog>& recorded, const HouseLoader& houses, const Config& config) {
  std::vector<const Exchange*> order;
  for (const auto& log : recorded)
    for (const auto& e : log) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const Exchange* a, const Exchange* b) { return a->timestamp < b->timestamp; });

  auto store = make_store(config);
  auto model = make_model(config);
  std::vector<std::string> first_seen;
  std::map<std::string, std::unique_ptr<Session>> sessions;
  ReplayResult result;

  for (const Exchange* e : order) {
    auto it = sessions.find(e->session_id);
    if (it == sessions.end()) {
      auto s = std::make_unique<Session>(SessionInfo{e->session_id, e->house_id, e->session_index},
                                         houses(e->house_id), store, model, config.agent());
      it = sessions.emplace(e->session_id, std::move(s)).first;
      first_seen.push_back(e->session_id);
    } else if (it->second->info().house_id != e->house_id) {
      throw LogError("session " + e->session_id + " switches house mid-log");
    }
    Session& s = *it->second;
    const std::int64_t ts = e->timestamp;
    s.set_clock([ts] { return ts; });
    if (s.pending()) s.cancel_hint();
    s.handle_utterance(e->raw, e->cursor);
    for (const auto& h : e->hints)
      if (s.pending()) s.provide_hint(h.cursor, h.prompt);
    if (e->cancelled && s.pending()) s.cancel_hint();

    const auto want = classify_exchange(*e);
    const auto got = classify_exchange(s.log().back());
    if (want != got) result.mismatches.push_back({e->session_id, e->timestamp, e->raw, want, got});
  }
  for (const auto& id : first_seen) result.logs.push_back(sessions.at(id)->log());
  return result;
}

}  // namespace voxelsmith
