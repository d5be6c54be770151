#pragma once

// Naturalization: utterance embeddings (per-token vectors, mean aggregated),
// a nearest-neighbour definition store queried by cosine similarity, and
// recursive expansion of induced commands down to core leaves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxelsmith/grammar.hpp"

namespace voxelsmith {

class NaturalizeError : public Error {
 public:
  using Error::Error;
};

class CycleError : public NaturalizeError {
 public:
  explicit CycleError(std::string head)
      : NaturalizeError("definition cycle through '" + head + "'"), head_(std::move(head)) {}
  const std::string& head() const { return head_; }

 private:
  std::string head_;
};

class DepthError : public NaturalizeError {
 public:
  using NaturalizeError::NaturalizeError;
};

using Embedding = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Embedding token_embed(const Token& token) const = 0;

  virtual Embedding aggregate(const std::vector<Embedding>& vectors) const {
    Embedding mean(dim(), 0.0);
    if (vectors.empty()) return mean;
    for (const auto& v : vectors)
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
    for (double& x : mean) x /= static_cast<double>(vectors.size());
    return mean;
  }
};

// Each token maps to a pseudo-random unit Gaussian direction drawn from a
// splitmix64 stream keyed by FNV-1a(token) xor a global seed.
class HashedEmbedder final : public Embedder {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x766f78656c736d74ULL;

  explicit HashedEmbedder(std::size_t dim = 128, std::uint64_t seed = kDefaultSeed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw NaturalizeError("embedding dimension must be positive");
  }

  std::string id() const override {
    std::ostringstream s;
    s << "hashed-fnv1a-splitmix64/d" << dim_ << "/s" << std::hex << seed_;
    return s.str();
  }
  std::size_t dim() const override { return dim_; }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  Embedding token_embed(const Token& token) const override {
    std::uint64_t state = fnv1a(token) ^ seed_;
    auto next = [&state] {
      std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    auto uniform = [&] { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; };  // (0, 1]
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    Embedding v(dim_);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim_; i += 2) {
      const double r = std::sqrt(-2.0 * std::log(uniform()));
      const double theta = kTwoPi * uniform();
      v[i] = r * std::cos(theta);
      if (i + 1 < dim_) v[i + 1] = r * std::sin(theta);
    }
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Mean over tokens taken in sorted order; bitwise permutation invariant.
inline Embedding embed(const Utterance& u, const Embedder& e) {
  if (u.tokens.empty()) throw NaturalizeError("cannot embed an empty utterance");
  std::vector<Token> tokens = u.tokens;
  std::sort(tokens.begin(), tokens.end());
  std::vector<Embedding> vectors;
  vectors.reserve(tokens.size());
  for (const auto& t : tokens) vectors.push_back(e.token_embed(t));
  return e.aggregate(vectors);
}

inline double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

struct DefinitionEntry {
  Utterance head;
  Embedding embedding;
  std::vector<Utterance> body;
  std::string author;
  std::int64_t created_at = 0;
};

struct LookupHit {
  DefinitionEntry entry;
  double similarity = 0.0;
};

inline std::string token_key(const Utterance& u) {
  std::string key;
  for (const auto& t : u.tokens) key += t + ' ';
  return key;
}

class DefinitionStore {
 public:
  static constexpr double kDefaultTau = 0.95;
  static constexpr int kDefaultMaxDepth = 16;

  explicit DefinitionStore(std::shared_ptr<const Embedder> embedder, double tau = kDefaultTau)
      : embedder_(std::move(embedder)), tau_(tau) {
    if (!embedder_) throw NaturalizeError("store needs an embedder");
    if (!(tau_ >= 0.0 && tau_ <= 1.0)) throw NaturalizeError("tau must lie in [0, 1]");
  }

  const Embedder& embedder() const { return *embedder_; }
  std::shared_ptr<const Embedder> embedder_ptr() const { return embedder_; }
  double tau() const { return tau_; }
  const std::vector<DefinitionEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Appends, replacing any entry whose head has the same token sequence.
  void define(const Utterance& head, const std::vector<Utterance>& body, std::string author,
              std::int64_t created_at = 0) {
    if (head.empty()) throw NaturalizeError("definition head is empty");
    if (body.empty()) throw NaturalizeError("definition body is empty");
    for (const auto& b : body) {
      if (b.empty()) throw NaturalizeError("definition body contains an empty command");
      if (b.tokens == head.tokens) throw NaturalizeError("'" + head.raw + "' is defined in terms of itself");
    }
    std::erase_if(entries_, [&](const DefinitionEntry& e) { return e.head.tokens == head.tokens; });
    entries_.push_back({head, embed(head, *embedder_), body, std::move(author), created_at});
  }

  // Highest cosine at or above tau; later entries win ties.
  std::optional<LookupHit> lookup(const Utterance& u) const {
    if (u.empty() || entries_.empty()) return std::nullopt;
    const Embedding q = embed(u, *embedder_);
    const DefinitionEntry* best = nullptr;
    double best_sim = -2.0;
    for (const auto& e : entries_) {
      const double s = cosine(q, e.embedding);
      if (s >= best_sim) best_sim = s, best = &e;
    }
    if (!best || best_sim < tau_) return std::nullopt;
    return LookupHit{*best, best_sim};
  }

  std::vector<Utterance> expand(const Utterance& u, int max_depth = kDefaultMaxDepth) const {
    if (max_depth < 1) throw NaturalizeError("max_depth must be at least 1");
    std::vector<Utterance> leaves;
    std::set<std::string> path;
    expand_into(u, 0, max_depth, path, leaves);
    return leaves;
  }

  // Versioned line-oriented snapshot: a header record, then one JSON record
  // per entry. Embeddings are recomputed on load.
  std::string save() const {
    std::string out = nlohmann::ordered_json{{"v", 1}, {"embedder", embedder_->id()}, {"tau", tau_}}.dump() + '\n';
    for (const auto& e : entries_) {
      nlohmann::ordered_json body = nlohmann::ordered_json::array();
      for (const auto& b : e.body) body.push_back(b.raw);
      out += nlohmann::ordered_json{{"head", e.head.raw}, {"body", body}, {"author", e.author},
                                    {"created_at", e.created_at}}
                 .dump() +
             '\n';
    }
    return out;
  }

  static DefinitionStore load(std::string_view text, std::shared_ptr<const Embedder> embedder) {
    std::istringstream in{std::string(text)};
    std::string line;
    try {
      if (!std::getline(in, line)) throw NaturalizeError("store snapshot is empty");
      const auto header = nlohmann::json::parse(line);
      if (header.at("v").get<int>() != 1) throw NaturalizeError("unsupported store snapshot version");
      if (header.at("embedder").get<std::string>() != embedder->id())
        throw NaturalizeError("store snapshot was written with a different embedder");
      DefinitionStore store(std::move(embedder), header.at("tau").get<double>());
      while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto rec = nlohmann::json::parse(line);
        std::vector<Utterance> body;
        for (const auto& b : rec.at("body")) body.emplace_back(b.get<std::string>());
        store.define(Utterance(rec.at("head").get<std::string>()), body, rec.at("author").get<std::string>(),
                     rec.at("created_at").get<std::int64_t>());
      }
      return store;
    } catch (const nlohmann::json::exception& e) {
      throw NaturalizeError(std::string("malformed store snapshot: ") + e.what());
    }
  }

 private:
  void expand_into(const Utterance& u, int depth, int max_depth, std::set<std::string>& path,
                   std::vector<Utterance>& leaves) const {
    auto hit = lookup(u);
    if (!hit) {
      leaves.push_back(u);
      return;
    }
    const std::string key = token_key(hit->entry.head);
    if (path.count(key)) throw CycleError(hit->entry.head.raw);
    if (depth >= max_depth)
      throw DepthError("expansion of '" + u.raw + "' exceeds depth " + std::to_string(max_depth));
    path.insert(key);
    for (const auto& b : hit->entry.body) expand_into(b, depth + 1, max_depth, path, leaves);
    path.erase(key);
  }

  std::shared_ptr<const Embedder> embedder_;
  double tau_;
  std::vector<DefinitionEntry> entries_;
};

struct SeedDefinition {
  std::string_view head;
  std::vector<std::string_view> body;
};

// "make me a place to sit down" has no published body; "build a bed" is a
// reconstruction from its observed effect.
inline const std::vector<SeedDefinition>& seed_definitions() {
  static const std::vector<SeedDefinition> seeds = {
      {"make the house taller", {"remove the roof", "build a huge wall", "build a large roof"}},
      {"build a skylight", {"build a tiny window on the roof"}},
      {"make me a place to sit down", {"build a bed"}},
  };
  return seeds;
}

inline void seed_store(DefinitionStore& store) {
  if (!store.empty()) throw NaturalizeError("only an empty store can be seeded");
  for (const auto& s : seed_definitions()) {
    std::vector<Utterance> body;
    for (auto b : s.body) body.emplace_back(b);
    store.define(Utterance(s.head), body, "seed", 0);
  }
}

// The population-wide store. Readers take immutable snapshots; writers
// copy, modify and publish under a single lock.
class SharedDefinitionStore {
 public:
  explicit SharedDefinitionStore(DefinitionStore initial, std::string name = "default")
      : current_(std::make_shared<const DefinitionStore>(std::move(initial))), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  std::shared_ptr<const DefinitionStore> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  void define(const Utterance& head, const std::vector<Utterance>& body, std::string author,
              std::int64_t created_at = 0) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<DefinitionStore>(*current_);
    next->define(head, body, std::move(author), created_at);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const DefinitionStore> current_;
  std::string name_;
};

inline std::shared_ptr<SharedDefinitionStore> make_seeded_store(std::shared_ptr<const Embedder> embedder,
                                                                double tau = DefinitionStore::kDefaultTau,
                                                                std::string name = "default") {
  DefinitionStore store(std::move(embedder), tau);
  seed_store(store);
  return std::make_shared<SharedDefinitionStore>(std::move(store), std::move(name));
}

}  // namespace voxelsmith
