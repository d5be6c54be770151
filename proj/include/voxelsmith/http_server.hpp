#pragma once

// HTTP binding for ApiService (cpp-httplib), with a server-sent-events
// stream of world diffs per session.

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>

#include "voxelsmith/service.hpp"

namespace voxelsmith {

inline void bind_routes(httplib::Server& server, std::shared_ptr<ApiService> api) {
  auto send = [](httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto guarded = [send](auto fn) {
    return [send, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, 200, fn(req));
      } catch (const ApiError& e) {
        send(res, e.status(), error_body(e));
      } catch (const nlohmann::json::exception& e) {
        send(res, 400, error_body(ApiError(400, "bad_request", e.what())));
      } catch (const std::exception& e) {
        send(res, 500, error_body(ApiError(500, "internal", e.what())));
      }
    };
  };
  auto body = [](const httplib::Request& req) { return nlohmann::json::parse(req.body); };
  auto int_param = [](const httplib::Request& req, const char* name, std::int64_t fallback) {
    if (!req.has_param(name)) return fallback;
    try {
      return static_cast<std::int64_t>(std::stoll(req.get_param_value(name)));
    } catch (const std::exception&) {
      throw ApiError(400, "bad_request", std::string("invalid ") + name);
    }
  };

  server.Post("/v1/sessions", guarded([api, body](const httplib::Request& req) { return api->create_session(body(req)); }));
  server.Post(R"(/v1/sessions/([^/]+)/utterance)", guarded([api, body](const httplib::Request& req) {
                return api->post_utterance(req.matches[1], body(req));
              }));
  server.Post(R"(/v1/sessions/([^/]+)/hint)", guarded([api, body](const httplib::Request& req) {
                return api->post_hint(req.matches[1], body(req));
              }));
  server.Get(R"(/v1/sessions/([^/]+)/world)", guarded([api, int_param](const httplib::Request& req) {
               return api->world(req.matches[1], int_param(req, "since_seq", 0));
             }));
  server.Get("/v1/definitions", guarded([api](const httplib::Request&) { return api->definitions(); }));
  server.Get("/v1/metrics", guarded([api](const httplib::Request& req) {
               SessionFilter filter = default_session_filter();
               if (req.has_param("sessions")) {
                 try {
                   filter = parse_session_filter(req.get_param_value("sessions"));
                 } catch (const Error& e) {
                   throw ApiError(400, "bad_request", e.what());
                 }
               }
               return api->metrics(filter);
             }));

  server.Get(R"(/v1/sessions/([^/]+)/events)", [api, send, int_param](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::int64_t after = 0;
    try {
      after = int_param(req, "after_seq", api->current_seq(id));
    } catch (const ApiError& e) {
      send(res, e.status(), error_body(e));
      return;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [api, id, after](std::size_t, httplib::DataSink& sink) mutable {
      std::vector<std::string> events;
      try {
        events = api->events_after(id, after, std::chrono::milliseconds(1000));
      } catch (const ApiError&) {
        sink.done();
        return false;
      }
      if (events.empty()) {
        const std::string ping = ": keep-alive\n\n";
        return sink.write(ping.data(), ping.size());
      }
      for (const auto& e : events) {
        const std::string frame = "event: diff\ndata: " + e + "\n\n";
        if (!sink.write(frame.data(), frame.size())) return false;
        after = nlohmann::json::parse(e).at("seq").get<std::int64_t>();
      }
      return true;
    });
  });
}

}  // namespace voxelsmith
