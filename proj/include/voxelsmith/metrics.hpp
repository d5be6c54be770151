#pragma once

// Measurements over session logs: cumulative naturalization curve,
// expressiveness, and cross-house transfer of defined commands.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "voxelsmith/session_log.hpp"

namespace voxelsmith {

using SessionFilter = std::set<int>;  // empty keeps every session

inline const SessionFilter& default_session_filter() {
  static const SessionFilter f{2, 3};
  return f;
}

// Sum of body word counts over the utterance's word count.
inline double expressiveness(std::string_view utterance, const std::vector<std::string>& body) {
  const std::size_t n = word_count(utterance);
  if (n == 0) throw Error("expressiveness of an empty utterance");
  std::size_t m = 0;
  for (const auto& b : body) m += word_count(b);
  return static_cast<double>(m) / static_cast<double>(n);
}

// Exchanges in time order (stable across logs), filtered by session index,
// definitions expanded into their body commands, excluded ones dropped.
inline std::vector<ScoredExchange> flatten(const std::vector<SessionLog>& logs,
                                           const SessionFilter& filter = default_session_filter()) {
  std::vector<const Exchange*> all;
  for (const auto& log : logs)
    for (const auto& e : log)
      if (filter.empty() || filter.count(e.session_index)) all.push_back(&e);
  std::stable_sort(all.begin(), all.end(), [](const Exchange* a, const Exchange* b) { return a->timestamp < b->timestamp; });
  std::vector<ScoredExchange> out;
  for (const Exchange* e : all)
    for (auto& s : score_exchange(*e))
      if (s.cls != Classification::excluded) out.push_back(std::move(s));
  return out;
}

struct CurvePoint {
  int exchange_index = 0;  // 1-based
  double frac_core = 0, frac_induced = 0, frac_unparsable = 0;
  int core = 0, induced = 0, unparsable = 0;
};

inline std::vector<CurvePoint> naturalization_curve(const std::vector<SessionLog>& logs,
                                                    const SessionFilter& filter = default_session_filter()) {
  std::vector<CurvePoint> out;
  int core = 0, induced = 0, unparsable = 0;
  for (const auto& s : flatten(logs, filter)) {
    core += s.cls == Classification::core;
    induced += s.cls == Classification::induced;
    unparsable += s.cls == Classification::unparsable;
    const double n = core + induced + unparsable;
    out.push_back({static_cast<int>(out.size()) + 1, core / n, induced / n, unparsable / n, core, induced, unparsable});
  }
  return out;
}

enum class ExpressivenessMode { one_level, full_expansion };

struct ExpressivenessPoint {
  int exchange_index = 0;
  double mean = 0;
};

// Score of one exchange; nullopt for unparsable ones.
inline std::optional<double> exchange_expressiveness(const ScoredExchange& s,
                                                     ExpressivenessMode mode = ExpressivenessMode::one_level) {
  if (s.cls == Classification::core) return 1.0;
  if (s.cls != Classification::induced) return std::nullopt;
  const auto& primary = mode == ExpressivenessMode::one_level ? s.body : s.leaves;
  const auto& fallback = mode == ExpressivenessMode::one_level ? s.leaves : s.body;
  if (!primary.empty()) return expressiveness(s.raw, primary);
  if (!fallback.empty()) return expressiveness(s.raw, fallback);
  return std::nullopt;
}

// Running mean over the flattened sequence; indices match the naturalization
// curve, and no point is emitted until something has been scored.
inline std::vector<ExpressivenessPoint> expressiveness_curve(const std::vector<SessionLog>& logs,
                                                             const SessionFilter& filter = default_session_filter(),
                                                             ExpressivenessMode mode = ExpressivenessMode::one_level) {
  std::vector<ExpressivenessPoint> out;
  double sum = 0;
  int n = 0, index = 0;
  for (const auto& s : flatten(logs, filter)) {
    ++index;
    if (auto v = exchange_expressiveness(s, mode)) sum += *v, ++n;
    if (n > 0) out.push_back({index, sum / n});
  }
  return out;
}

struct TransferRow {
  std::string house_id;
  int executions = 0;
  int leaves_attempted = 0;
  int leaves_unparsable = 0;
};

struct TransferEntry {
  std::string head;
  std::vector<TransferRow> houses;  // sorted by house id
};

using TransferReport = std::vector<TransferEntry>;

// Induced executions grouped by matched head and house; a leaf counts as
// unparsable unless it ran successfully. Heads seen on fewer than two houses
// are left out.
inline TransferReport transfer_report(const std::vector<SessionLog>& logs) {
  std::map<std::string, std::map<std::string, TransferRow>> by_head;
  for (const auto& log : logs)
    for (const auto& e : log) {
      if (e.resolution != Resolution::induced && !(e.resolution == Resolution::unparsable && !e.head.empty()))
        continue;
      if (e.head.empty()) continue;
      TransferRow& row = by_head[e.head][e.house_id];
      row.house_id = e.house_id;
      ++row.executions;
      const int attempted = std::max<int>(1, static_cast<int>(e.leaves.size()));
      const int ok = static_cast<int>(std::count_if(e.actions.begin(), e.actions.end(), [](const Action& a) { return a.ok; }));
      row.leaves_attempted += attempted;
      row.leaves_unparsable += attempted - std::min(ok, attempted);
    }
  TransferReport out;
  for (auto& [head, houses] : by_head) {
    if (houses.size() < 2) continue;
    TransferEntry entry{head, {}};
    for (auto& [id, row] : houses) entry.houses.push_back(row);
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string naturalization_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "exchange_index,frac_core,frac_induced,frac_unparsable\n";
  for (const auto& p : curve)
    out += std::to_string(p.exchange_index) + ',' + format_fixed(p.frac_core) + ',' + format_fixed(p.frac_induced) + ',' +
           format_fixed(p.frac_unparsable) + '\n';
  return out;
}

inline std::string expressiveness_csv(const std::vector<ExpressivenessPoint>& curve) {
  std::string out = "exchange_index,expressiveness_mean\n";
  for (const auto& p : curve) out += std::to_string(p.exchange_index) + ',' + format_fixed(p.mean) + '\n';
  return out;
}

}  // namespace voxelsmith
