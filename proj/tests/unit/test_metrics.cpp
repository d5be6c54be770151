#include <gtest/gtest.h>

#include <random>

#include "voxelsmith/voxelsmith.hpp"

using namespace voxelsmith;

namespace {

Exchange ex(Resolution r, std::string raw, std::int64_t ts, int session_index = 2, std::vector<std::string> body = {}) {
  Exchange e;
  e.session_id = "s" + std::to_string(session_index);
  e.house_id = "h";
  e.session_index = session_index;
  e.timestamp = ts;
  e.seq = ts;
  e.resolution = r;
  e.raw = std::move(raw);
  e.body = body;
  e.leaves = body.empty() ? std::vector<std::string>{e.raw} : body;
  if (r == Resolution::unparsable) e.leaves.clear();
  return e;
}

Exchange definition(std::vector<Resolution> subs, std::int64_t ts, int session_index = 2) {
  Exchange e = ex(Resolution::definition, "def: x; ...", ts, session_index);
  for (std::size_t i = 0; i < subs.size(); ++i)
    e.sub_exchanges.push_back({"build a wall " + std::to_string(i), subs[i], {}, {"build a wall"}});
  return e;
}

}  // namespace

TEST(Expressiveness, PublishedValues) {
  EXPECT_NEAR(expressiveness("build a skylight", {"build a tiny window on the roof"}), 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(expressiveness("build a skylight", {"build a tiny window on the roof"}), 2.33, 0.01);
  EXPECT_NEAR(expressiveness("build an awning on house", {"build a roof"}), 0.6, 1e-12);
  EXPECT_EQ(expressiveness("build a roof", {"build a roof"}), 1.0);
  EXPECT_THROW(expressiveness("  ", {"build a roof"}), Error);
}

TEST(Expressiveness, ScaleConsistent) {
  std::mt19937 rng(2);
  const std::vector<std::string> cmds = {"build a wall", "remove the roof", "build a tiny window on the roof",
                                         "build 12 blocks of fence next to the house"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> body;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) body.push_back(cmds[rng() % cmds.size()]);
    auto doubled = body;
    doubled.insert(doubled.end(), body.begin(), body.end());
    EXPECT_EQ(expressiveness("do the thing", doubled), 2 * expressiveness("do the thing", body));
  }
}

TEST(NaturalizationCurve, HandCountedExample) {
  const SessionLog log = {ex(Resolution::core, "build a wall", 1), ex(Resolution::core, "build a roof", 2),
                          ex(Resolution::induced, "build a skylight", 3, 2, {"build a tiny window on the roof"}),
                          ex(Resolution::unparsable, "do a dance", 4)};
  const auto curve = naturalization_curve({log});
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_EQ(curve.back().exchange_index, 4);
  EXPECT_DOUBLE_EQ(curve.back().frac_core, 0.5);
  EXPECT_DOUBLE_EQ(curve.back().frac_induced, 0.25);
  EXPECT_DOUBLE_EQ(curve.back().frac_unparsable, 0.25);
  EXPECT_DOUBLE_EQ(curve[1].frac_core, 1.0);
}

TEST(NaturalizationCurve, AllCoreHasNoInduced) {
  SessionLog log;
  for (int i = 0; i < 10; ++i) log.push_back(ex(Resolution::core, "build a wall", i));
  for (const auto& p : naturalization_curve({log})) EXPECT_EQ(p.frac_induced, 0.0);
}

TEST(NaturalizationCurve, DefinitionCountsAsItsBodyCommands) {
  const auto curve = naturalization_curve({{definition({Resolution::core, Resolution::core, Resolution::core}, 1)}});
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve.back().core, 3);
  EXPECT_EQ(curve.back().induced, 0);
}

TEST(NaturalizationCurve, FiltersSessionsAndDropsConversation) {
  const SessionLog log = {ex(Resolution::core, "build a wall", 1, 1), ex(Resolution::conversational, "hello", 2, 2),
                          ex(Resolution::induced, "build a skylight", 3, 3, {"build a tiny window on the roof"}),
                          ex(Resolution::unparsable, "do a dance", 4, 2)};
  EXPECT_EQ(naturalization_curve({log}).size(), 2u);
  EXPECT_EQ(naturalization_curve({log}, {2}).size(), 1u);
  EXPECT_EQ(naturalization_curve({log}, {}).size(), 3u);
  EXPECT_TRUE(naturalization_curve({}).empty());
}

TEST(NaturalizationCurve, InterleavesLogsByTimestamp) {
  const SessionLog a = {ex(Resolution::core, "build a wall", 1), ex(Resolution::core, "build a wall", 5)};
  const SessionLog b = {ex(Resolution::induced, "build a skylight", 3, 2, {"build a tiny window on the roof"})};
  const auto curve = naturalization_curve({a, b});
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[1].induced, 1);
  EXPECT_EQ(curve[2].core, 2);
}

TEST(NaturalizationCurve, WellFormedOnRandomLogs) {
  std::mt19937 rng(13);
  const Resolution kinds[] = {Resolution::core, Resolution::induced, Resolution::unparsable,
                              Resolution::conversational};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SessionLog> logs(1 + rng() % 4);
    for (auto& log : logs)
      for (int i = 0; i < 30; ++i) {
        const auto ts = static_cast<std::int64_t>(rng() % 1000);
        const int idx = 1 + static_cast<int>(rng() % 3);
        if (rng() % 8 == 0)
          log.push_back(definition({kinds[rng() % 3], kinds[rng() % 3]}, ts, idx));
        else
          log.push_back(ex(kinds[rng() % 4], "build a wall", ts, idx, {"build a wall", "build a roof"}));
      }
    const auto curve = naturalization_curve(logs);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto& p = curve[i];
      EXPECT_NEAR(p.frac_core + p.frac_induced + p.frac_unparsable, 1.0, 1e-9);
      EXPECT_GE(std::min({p.frac_core, p.frac_induced, p.frac_unparsable}), 0.0);
      EXPECT_EQ(p.core + p.induced + p.unparsable, static_cast<int>(i) + 1);
      if (i) {
        EXPECT_GE(p.core, curve[i - 1].core);
        EXPECT_GE(p.induced, curve[i - 1].induced);
        EXPECT_GE(p.unparsable, curve[i - 1].unparsable);
      }
    }
  }
}

TEST(ExpressivenessCurve, CoreThenSkylight) {
  const SessionLog log = {ex(Resolution::core, "build a wall", 1),
                          ex(Resolution::induced, "build a skylight", 2, 2, {"build a tiny window on the roof"})};
  const auto curve = expressiveness_curve({log});
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_DOUBLE_EQ(curve[0].mean, 1.0);
  EXPECT_NEAR(curve[1].mean, (1.0 + 7.0 / 3.0) / 2, 1e-12);
  EXPECT_NEAR(curve[1].mean, 1.667, 1e-3);
}

TEST(ExpressivenessCurve, AllCoreConstantAndDipsBelowOne) {
  SessionLog core;
  for (int i = 0; i < 5; ++i) core.push_back(ex(Resolution::core, "build a wall", i));
  for (const auto& p : expressiveness_curve({core})) EXPECT_EQ(p.mean, 1.0);
  const auto awning =
      expressiveness_curve({{ex(Resolution::induced, "build an awning on house", 1, 2, {"build a roof"})}});
  ASSERT_EQ(awning.size(), 1u);
  EXPECT_NEAR(awning[0].mean, 0.6, 1e-12);
}

TEST(ExpressivenessCurve, UnparsableExcludedFromMeanButKeepsIndex) {
  const SessionLog log = {ex(Resolution::unparsable, "do a dance", 1), ex(Resolution::core, "build a wall", 2),
                          ex(Resolution::unparsable, "do a dance", 3)};
  const auto curve = expressiveness_curve({log});
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].exchange_index, 2);
  EXPECT_EQ(curve[1].exchange_index, 3);
  EXPECT_EQ(curve[1].mean, 1.0);
}

TEST(ExpressivenessCurve, FullExpansionMode) {
  auto e = ex(Resolution::induced, "make a cozy spot", 1, 2, {"make me a place to sit down"});
  e.leaves = {"build a bed"};
  EXPECT_NEAR(expressiveness_curve({{e}})[0].mean, 7.0 / 4.0, 1e-12);
  EXPECT_NEAR(expressiveness_curve({{e}}, default_session_filter(), ExpressivenessMode::full_expansion)[0].mean,
              3.0 / 4.0, 1e-12);
}

TEST(TransferReport, WallAroundTheHouseOnTwoHouses) {
  auto store = make_seeded_store(std::make_shared<HashedEmbedder>());
  auto model = std::make_shared<ProceduralModel>();
  Session a({"a", "house_a", 3}, random_house(101), store, model);
  Session b({"b", "house_b", 3}, random_house(202), store, model);
  a.handle_utterance("def: build a wall around the house; build a wall; build a wall; build a wall; build a wall");
  auto front = [](const Session& s) {
    const Box box = bounding_box(s.grid());
    return Ray({(box.min.x + box.max.x) / 2 + 0.5, 1.5, box.min.z - 5.5}, {0, 0, 1});
  };
  a.handle_utterance("build a wall around the house", front(a));
  b.handle_utterance("build a wall around the house", front(b));
  b.handle_utterance("build a skylight");  // only on one house: left out
  const auto report = transfer_report({a.log(), b.log()});
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].head, "build a wall around the house");
  ASSERT_EQ(report[0].houses.size(), 2u);
  EXPECT_EQ(report[0].houses[0].house_id, "house_a");
  EXPECT_EQ(report[0].houses[0].leaves_attempted, 4);
  EXPECT_EQ(report[0].houses[0].leaves_unparsable, 0);
  EXPECT_EQ(report[0].houses[1].house_id, "house_b");
  EXPECT_EQ(report[0].houses[1].leaves_attempted, 4);
  EXPECT_EQ(report[0].houses[1].leaves_unparsable, 0);
}

TEST(TransferReport, AbsentLabelCountsUnparsableOnSecondHouse) {
  auto store = make_seeded_store(std::make_shared<HashedEmbedder>());
  auto model = std::make_shared<ProceduralModel>();
  VoxelGrid with_garden = box_house();
  for (int x = 0; x < 3; ++x) with_garden.set({x, 0, 8}, {BlockType::grass, SegmentLabel::garden});
  Session a({"a", "house_a", 3}, with_garden, store, model);
  Session b({"b", "house_b", 3}, box_house(), store, model);
  a.handle_utterance("def: clear the yard; remove the garden");
  a.handle_utterance("clear the yard");
  b.handle_utterance("clear the yard");
  const auto report = transfer_report({a.log(), b.log()});
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].houses[0].leaves_unparsable, 0);
  EXPECT_EQ(report[0].houses[1].leaves_attempted, 1);
  EXPECT_EQ(report[0].houses[1].leaves_unparsable, 1);
}

TEST(TransferReport, NeverReExecutedIsExcluded) {
  auto e = ex(Resolution::induced, "build a skylight", 1, 2, {"build a tiny window on the roof"});
  e.head = "build a skylight";
  EXPECT_TRUE(transfer_report({{e, e}}).empty());
}

TEST(Csv, ExactFormat) {
  const SessionLog log = {ex(Resolution::core, "build a wall", 1),
                          ex(Resolution::induced, "build a skylight", 2, 2, {"build a tiny window on the roof"}),
                          ex(Resolution::unparsable, "do a dance", 3)};
  EXPECT_EQ(naturalization_csv(naturalization_curve({log})),
            "exchange_index,frac_core,frac_induced,frac_unparsable\n"
            "1,1.000000,0.000000,0.000000\n"
            "2,0.500000,0.500000,0.000000\n"
            "3,0.333333,0.333333,0.333333\n");
  EXPECT_EQ(expressiveness_csv(expressiveness_curve({log})),
            "exchange_index,expressiveness_mean\n"
            "1,1.000000\n"
            "2,1.666667\n"
            "3,1.666667\n");
}

TEST(Metrics, PersistedLogGivesSameCurves) {
  auto store = make_seeded_store(std::make_shared<HashedEmbedder>());
  Session s({"s", "box_house", 2}, box_house(), store, std::make_shared<ProceduralModel>());
  for (auto u : {"build a skylight", "hello", "remove the roof", "do a dance", "build a large roof on the wall"})
    s.handle_utterance(u);
  const auto back = read_log(write_log(s.log()));
  EXPECT_EQ(naturalization_csv(naturalization_curve({back})), naturalization_csv(naturalization_curve({s.log()})));
  EXPECT_EQ(expressiveness_csv(expressiveness_curve({back})), expressiveness_csv(expressiveness_curve({s.log()})));
}
