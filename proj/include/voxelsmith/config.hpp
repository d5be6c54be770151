#pragma once

// Runtime configuration (JSON) and construction of the configured model,
// embedder and store.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "voxelsmith/fixtures.hpp"
#include "voxelsmith/naturalize.hpp"
#include "voxelsmith/offset_model.hpp"
#include "voxelsmith/session.hpp"

namespace voxelsmith {

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kConfigEnv = "VOXELSMITH_CONFIG";

struct Config {
  GeneratorConfig generator;
  std::string default_model = "procedural";  // procedural | statistical
  std::uint64_t rng_seed = 0;
  double tau = DefinitionStore::kDefaultTau;
  std::size_t embedding_dim = 128;
  int max_depth = DefinitionStore::kDefaultMaxDepth;
  std::string house_dir = "houses";
  std::string params_path;  // statistical model table; empty fits the fixture corpus

  AgentConfig agent() const { return AgentConfig{generator, max_depth, rng_seed}; }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << data;
}

inline Config parse_config(std::string_view text) {
  Config c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "v") {
        if (value.get<int>() != 1) throw ConfigError("unsupported config version");
      } else if (key == "patch_side") {
        c.generator.patch_side = value.get<int>();
      } else if (key == "global_side") {
        c.generator.global_side = value.get<int>();
      } else if (key == "history_len") {
        c.generator.history_len = value.get<std::size_t>();
      } else if (key == "default_model") {
        c.default_model = value.get<std::string>();
      } else if (key == "rng_seed") {
        c.rng_seed = value.get<std::uint64_t>();
      } else if (key == "tau") {
        c.tau = value.get<double>();
      } else if (key == "embedding_dim") {
        c.embedding_dim = value.get<std::size_t>();
      } else if (key == "max_depth") {
        c.max_depth = value.get<int>();
      } else if (key == "house_dir") {
        c.house_dir = value.get<std::string>();
      } else if (key == "params_path") {
        c.params_path = value.get<std::string>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.generator.patch_side < 1 || c.generator.patch_side % 2 == 0) throw ConfigError("patch_side must be odd");
  if (c.generator.global_side < 1) throw ConfigError("global_side must be positive");
  if (c.default_model != "procedural" && c.default_model != "statistical")
    throw ConfigError("default_model must be procedural or statistical");
  if (!(c.tau >= 0 && c.tau <= 1)) throw ConfigError("tau must lie in [0, 1]");
  if (c.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (c.max_depth < 1) throw ConfigError("max_depth must be at least 1");
  return c;
}

// The environment variable wins over an explicit path; neither gives defaults.
inline Config load_config(const std::optional<std::string>& path) {
  std::optional<std::string> chosen = path;
  if (const char* env = std::getenv(std::string(kConfigEnv).c_str()); env && *env) chosen = env;
  if (!chosen) return Config{};
  return parse_config(read_file(*chosen));
}

inline std::vector<VoxelGrid> default_training_corpus() {
  std::vector<VoxelGrid> corpus;
  for (std::uint64_t s = 1; s <= 16; ++s) corpus.push_back(random_house(s));
  return corpus;
}

inline std::shared_ptr<const GeneratorModel> make_model(const Config& c) {
  if (c.default_model == "procedural") return std::make_shared<ProceduralModel>();
  if (!c.params_path.empty()) return std::make_shared<OffsetModel>(OffsetModel::load(read_file(c.params_path)));
  return std::make_shared<OffsetModel>(OffsetModel::fit(default_training_corpus()));
}

inline std::shared_ptr<const Embedder> make_embedder(const Config& c) {
  return std::make_shared<HashedEmbedder>(c.embedding_dim);
}

inline std::shared_ptr<SharedDefinitionStore> make_store(const Config& c) {
  return make_seeded_store(make_embedder(c), c.tau);
}

}  // namespace voxelsmith
