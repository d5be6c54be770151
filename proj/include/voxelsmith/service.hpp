#pragma once

// Transport-independent API: versioned JSON requests and replies over many
// concurrent sessions. Requests for one session are serialized by that
// session's lock; the definition store is the only shared object.

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxelsmith/metrics.hpp"
#include "voxelsmith/replay.hpp"
#include "voxelsmith/session.hpp"

namespace voxelsmith {

inline constexpr int kApiVersion = 1;

class ApiError : public Error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

inline nlohmann::ordered_json error_body(const ApiError& e) {
  return {{"v", kApiVersion}, {"error", {{"code", e.code()}, {"message", e.what()}}}};
}

class ApiService {
 public:
  ApiService(Config config, HouseLoader houses)
      : config_(std::move(config)),
        houses_(std::move(houses)),
        store_(make_store(config_)),
        model_(make_model(config_)) {}

  using json = nlohmann::ordered_json;

  json create_session(const nlohmann::json& req) {
    check_version(req);
    const std::string house_id = field<std::string>(req, "house_id");
    const int index = req.contains("session_index") ? field<int>(req, "session_index") : 2;
    VoxelGrid house;
    try {
      house = houses_(house_id);
    } catch (const Error& e) {
      throw ApiError(404, "unknown_house", e.what());
    }
    const std::string id = "s" + std::to_string(++next_id_);
    auto slot = std::make_shared<Slot>();
    try {
      slot->session = std::make_unique<Session>(SessionInfo{id, house_id, index}, std::move(house), store_, model_,
                                                config_.agent());
    } catch (const SessionError& e) {
      throw ApiError(400, "bad_request", e.what());
    }
    {
      std::lock_guard lock(mu_);
      sessions_.emplace(id, slot);
    }
    return {{"v", kApiVersion}, {"status", "ok"}, {"session_id", id}, {"house_id", house_id}, {"seq", 0}};
  }

  json post_utterance(const std::string& id, const nlohmann::json& req) {
    check_version(req);
    auto slot = find(id);
    const std::string text = field<std::string>(req, "text");
    std::optional<Ray> cursor;
    if (req.contains("cursor") && !req["cursor"].is_null()) cursor = parse_ray(req["cursor"]);
    std::lock_guard lock(slot->mu);
    Session& s = *slot->session;
    if (s.pending())
      return {{"v", kApiVersion},
              {"status", "needs_hint_first"},
              {"session_id", id},
              {"seq", s.seq()},
              {"agent_text", "finish the pending build first: " + s.log().back().reason}};
    return publish(*slot, id, s.handle_utterance(text, cursor));
  }

  // {"cursor": ray, "prompt": [...]} or {"cancel": true}
  json post_hint(const std::string& id, const nlohmann::json& req) {
    check_version(req);
    auto slot = find(id);
    std::lock_guard lock(slot->mu);
    Session& s = *slot->session;
    if (!s.pending()) throw ApiError(409, "no_pending_hint", "no hint is pending");
    if (req.value("cancel", false)) return publish(*slot, id, s.cancel_hint());
    if (!req.contains("cursor")) throw ApiError(400, "bad_request", "hint needs a cursor");
    const Ray cursor = parse_ray(req["cursor"]);
    std::optional<Prompt> prompt;
    if (req.contains("prompt") && !req["prompt"].is_null()) {
      try {
        prompt = log_json::prompt(json(req["prompt"]));
      } catch (const Error& e) {
        throw ApiError(400, "bad_request", e.what());
      }
    }
    return publish(*slot, id, s.provide_hint(cursor, prompt));
  }

  json world(const std::string& id, std::int64_t since_seq) {
    auto slot = find(id);
    std::lock_guard lock(slot->mu);
    const Session& s = *slot->session;
    return {{"v", kApiVersion},
            {"status", "ok"},
            {"session_id", id},
            {"seq", s.seq()},
            {"since_seq", since_seq},
            {"diff", log_json::diff(s.world_since(since_seq))}};
  }

  json definitions() const {
    json entries = json::array();
    for (const auto& e : store_->snapshot()->entries()) {
      json body = json::array();
      for (const auto& b : e.body) body.push_back(b.raw);
      entries.push_back({{"head", e.head.raw}, {"body", body}, {"author", e.author}, {"created_at", e.created_at}});
    }
    return {{"v", kApiVersion}, {"status", "ok"}, {"entries", entries}};
  }

  json metrics(const SessionFilter& filter) {
    std::vector<SessionLog> logs;
    for (auto& slot : all_slots()) {
      std::lock_guard lock(slot->mu);
      logs.push_back(slot->session->log());
    }
    json nat = json::array(), expr = json::array();
    for (const auto& p : naturalization_curve(logs, filter))
      nat.push_back({{"exchange_index", p.exchange_index},
                     {"frac_core", p.frac_core},
                     {"frac_induced", p.frac_induced},
                     {"frac_unparsable", p.frac_unparsable}});
    for (const auto& p : expressiveness_curve(logs, filter))
      expr.push_back({{"exchange_index", p.exchange_index}, {"expressiveness_mean", p.mean}});
    return {{"v", kApiVersion}, {"status", "ok"}, {"naturalization", nat}, {"expressiveness", expr}};
  }

  // Server-push channel: events with seq greater than `after_seq`, waiting up
  // to `wait` for one to arrive.
  std::vector<std::string> events_after(const std::string& id, std::int64_t after_seq,
                                        std::chrono::milliseconds wait) {
    auto slot = find(id);
    std::unique_lock lock(slot->mu);
    slot->cv.wait_for(lock, wait, [&] { return !slot->events.empty() && slot->events.back().first > after_seq; });
    std::vector<std::string> out;
    for (const auto& [seq, data] : slot->events)
      if (seq > after_seq) out.push_back(data);
    return out;
  }

  std::int64_t current_seq(const std::string& id) {
    auto slot = find(id);
    std::lock_guard lock(slot->mu);
    return slot->session->seq();
  }

  const Config& config() const { return config_; }

 private:
  struct Slot {
    std::mutex mu;
    std::condition_variable cv;
    std::unique_ptr<Session> session;
    std::deque<std::pair<std::int64_t, std::string>> events;
  };

  static void check_version(const nlohmann::json& req) {
    if (!req.is_object()) throw ApiError(400, "bad_request", "request body must be a JSON object");
    if (!req.contains("v") || !req["v"].is_number_integer() || req["v"].get<int>() != kApiVersion)
      throw ApiError(400, "bad_version", "request must carry \"v\": 1");
  }

  template <typename T>
  static T field(const nlohmann::json& req, const char* name) {
    try {
      return req.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ApiError(400, "bad_request", std::string("missing or invalid field '") + name + "'");
    }
  }

  static Ray parse_ray(const nlohmann::json& j) {
    try {
      return log_json::ray(nlohmann::ordered_json(j));
    } catch (const std::exception& e) {
      throw ApiError(400, "bad_request", std::string("invalid cursor: ") + e.what());
    }
  }

  std::shared_ptr<Slot> find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown_session", "unknown session '" + id + "'");
    return it->second;
  }

  std::vector<std::shared_ptr<Slot>> all_slots() {
    std::lock_guard lock(mu_);
    std::vector<std::shared_ptr<Slot>> out;
    for (auto& [id, slot] : sessions_) out.push_back(slot);
    return out;
  }

  // Caller holds slot.mu.
  json publish(Slot& slot, const std::string& id, const AgentReply& r) {
    json reply{{"v", kApiVersion},
               {"status", "ok"},
               {"session_id", id},
               {"seq", r.seq},
               {"agent_text", r.text},
               {"classification", std::string(resolution_name(r.resolution))},
               {"needs_hint", r.needs_hint},
               {"diff", log_json::diff(r.diff)}};
    json event{{"v", kApiVersion}, {"session_id", id}, {"seq", r.seq}, {"diff", reply["diff"]}};
    slot.events.emplace_back(r.seq, event.dump());
    while (slot.events.size() > 1024) slot.events.pop_front();
    slot.cv.notify_all();
    return reply;
  }

  Config config_;
  HouseLoader houses_;
  std::shared_ptr<SharedDefinitionStore> store_;
  std::shared_ptr<const GeneratorModel> model_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::atomic<int> next_id_{0};
};

inline SessionFilter parse_session_filter(std::string_view text) {
  SessionFilter f;
  std::string item;
  auto flush = [&] {
    const std::string t(trim(item));
    item.clear();
    if (t.empty()) return;
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v < 1 || v > 3)
      throw Error("session filter entries must be 1, 2 or 3");
    f.insert(v);
  };
  for (char c : text) {
    if (c == ',') flush();
    else item += c;
  }
  flush();
  return f;
}

}  // namespace voxelsmith
