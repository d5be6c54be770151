// voxelsmith command-line tool: serve, replay, filter-houses, gen-fixtures.

#include <glob.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voxelsmith/http_server.hpp"
#include "voxelsmith/voxelsmith.hpp"

namespace fs = std::filesystem;
using namespace voxelsmith;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitError = 2;

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw Error("cannot expand " + pattern);
  std::sort(out.begin(), out.end());
  return out;
}

Offset parse_dims(const std::string& text) {
  int v[3];
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d%c", &v[0], &v[1], &v[2], &tail) != 3)
    throw Error("dimensions must be X,Y,Z, got '" + text + "'");
  return {v[0], v[1], v[2]};
}

std::string classes(const std::vector<Classification>& cs) {
  std::string out;
  for (auto c : cs) out += (out.empty() ? "" : ",") + std::string(classification_name(c));
  return out.empty() ? "-" : out;
}

int run_replay(const std::string& logs_glob, const std::string& houses, const std::string& out_dir,
               const std::string& sessions, const std::optional<std::string>& config_path, bool write_logs) {
  const Config config = load_config(config_path);
  const SessionFilter filter = parse_session_filter(sessions);
  const auto files = expand_glob(logs_glob);
  if (files.empty()) throw Error("no log files match " + logs_glob);
  std::vector<SessionLog> recorded;
  for (const auto& f : files) {
    try {
      recorded.push_back(read_log(read_file(f)));
    } catch (const LogError& e) {
      throw LogError(f + ": " + e.what());
    }
  }
  const ReplayResult r = replay(recorded, directory_loader(houses), config);

  fs::create_directories(out_dir);
  const auto curve = naturalization_curve(r.logs, filter);
  write_file(fs::path(out_dir) / "naturalization.csv", naturalization_csv(curve));
  write_file(fs::path(out_dir) / "expressiveness.csv", expressiveness_csv(expressiveness_curve(r.logs, filter)));
  if (write_logs) {
    std::string all;
    for (const auto& log : r.logs) all += write_log(log);
    write_file(fs::path(out_dir) / "replayed.ndjson", all);
  }

  for (const auto& m : r.mismatches)
    std::cerr << "mismatch: session " << m.session_id << " t=" << m.timestamp << " '" << m.raw << "' recorded "
              << classes(m.recorded) << " replayed " << classes(m.replayed) << '\n';
  if (curve.empty()) {
    std::cout << "exchanges 0\n";
  } else {
    const auto& last = curve.back();
    std::cout << "exchanges " << last.exchange_index << " core " << last.core << " induced " << last.induced
              << " unparsable " << last.unparsable << " final_induced_fraction " << format_fixed(last.frac_induced)
              << '\n';
  }
  return r.mismatches.empty() ? 0 : kExitMismatch;
}

int run_filter(const std::string& houses, const std::string& min, const std::string& max) {
  const auto kept = filter_houses(load_catalog(houses), parse_dims(min), parse_dims(max));
  for (const auto& e : kept) std::cout << e.house_id << ' ' << e.dims.dx << ' ' << e.dims.dy << ' ' << e.dims.dz << '\n';
  return 0;
}

int run_gen(int count, std::uint64_t seed, const std::string& out_dir, bool named) {
  if (count < 0) throw Error("count must be non-negative");
  fs::create_directories(out_dir);
  if (named) {
    write_file(fs::path(out_dir) / "box_house.json", save_house(box_house()));
    write_file(fs::path(out_dir) / "cottage.json", save_house(cottage()));
  }
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "house_%03d.json", i);
    write_file(fs::path(out_dir) / name, save_house(random_house(mix_seed(seed, static_cast<std::uint64_t>(i), 0))));
  }
  return 0;
}

int run_serve(const std::optional<std::string>& config_path, int port, const std::string& host) {
  const Config config = load_config(config_path);
  auto api = std::make_shared<ApiService>(config, directory_loader(config.house_dir));
  httplib::Server server;
  bind_routes(server, api);
  std::cout << "listening on " << host << ':' << port << std::endl;
  if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxelsmith: a naturalizing voxel build agent"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--config", config_path, "config file (VOXELSMITH_CONFIG overrides)");
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--host", host);

  std::string logs, houses = "houses", out = "out", sessions = "2,3";
  bool write_logs = false;
  auto* rep = app.add_subcommand("replay", "re-execute transcripts and export metric CSVs");
  rep->add_option("--logs", logs, "glob of NDJSON session logs")->required();
  rep->add_option("--houses", houses, "directory of <house_id>.json schematics")->required();
  rep->add_option("--out", out, "output directory")->required();
  rep->add_option("--sessions", sessions, "session indices to measure");
  rep->add_option("--config", config_path);
  rep->add_flag("--write-logs", write_logs, "also write the replayed log");

  std::string min, max;
  auto* filt = app.add_subcommand("filter-houses", "list houses whose bounding box fits a size range");
  filt->add_option("--min", min, "X,Y,Z")->required();
  filt->add_option("--max", max, "X,Y,Z")->required();
  filt->add_option("--houses", houses);

  int count = 0;
  std::uint64_t seed = 0;
  bool named = false;
  std::string gen_out = "houses";
  auto* gen = app.add_subcommand("gen-fixtures", "write procedural house schematics");
  gen->add_option("--count", count)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", gen_out);
  gen->add_flag("--named", named, "also write box_house.json and cottage.json");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve) return run_serve(config_path, port, host);
    if (*rep) return run_replay(logs, houses, out, sessions, config_path, write_logs);
    if (*filt) return run_filter(houses, min, max);
    if (*gen) return run_gen(count, seed, gen_out, named);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
