#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gr1/game.hpp"
#include "gr1/parser.hpp"
#include "oracles/brute_game.hpp"
#include "oracles/random_spec.hpp"

using namespace gr1;

namespace {

std::string fixture(const std::string& name) { return std::string(GR1_FIXTURE_DIR) + "/" + name; }

const std::vector<std::string> kFixtures = {"work_zone.gr1",          "stop_sign.gr1",
                                            "strictness.gr1",         "vacuous.gr1",
                                            "traffic_light_baseline.gr1", "traffic_light_incremental.gr1",
                                            "yield_baseline.gr1",     "yield_incremental.gr1"};

std::set<std::size_t> game_joint(const GameStructure& g) { return {g.joint.begin(), g.joint.end()}; }

// Moves, successors, initial choices and goal sets agree with the tables
// evaluated straight from the formulas.
void expect_matches_tables(const GameStructure& g, const GR1Spec& spec) {
  const oracle::Semantics t(spec);
  ASSERT_EQ(g.env.size(), t.nx());
  ASSERT_EQ(g.sys.size(), t.ny());
  const std::size_t ny = t.ny();
  std::vector<std::size_t> init_env;
  for (std::size_t x = 0; x < t.nx(); ++x)
    if (t.theta_e(x)) init_env.push_back(x);
  EXPECT_EQ(g.initial_env, init_env);
  for (std::size_t k = 0; k < g.initial_env.size(); ++k) {
    std::vector<std::size_t> ys;
    for (StateIdx s : g.initial_choices[k]) {
      EXPECT_EQ(g.env_of(s), g.initial_env[k]);
      ys.push_back(g.sys_of(s));
    }
    std::vector<std::size_t> expected;
    for (std::size_t y = 0; y < ny; ++y)
      if (t.theta_s(g.initial_env[k], y)) expected.push_back(y);
    EXPECT_EQ(ys, expected);
  }
  for (StateIdx s = 0; s < g.num_states(); ++s) {
    const std::size_t x = g.env_of(s), y = g.sys_of(s);
    std::vector<std::size_t> moves;
    for (std::uint32_t m = g.move_begin[s]; m < g.move_begin[s + 1]; ++m) {
      const std::size_t x2 = g.move_env[m];
      moves.push_back(x2);
      std::vector<std::size_t> ys;
      for (std::uint32_t e = g.succ_begin[m]; e < g.succ_begin[m + 1]; ++e) {
        EXPECT_EQ(g.env_of(g.succ[e]), x2);
        ys.push_back(g.sys_of(g.succ[e]));
      }
      std::vector<std::size_t> expected;
      for (std::size_t y2 = 0; y2 < ny; ++y2)
        if (t.rs(x, y, x2, y2)) expected.push_back(y2);
      EXPECT_EQ(ys, expected);
    }
    std::vector<std::size_t> expected_moves;
    for (std::size_t x2 = 0; x2 < t.nx(); ++x2)
      if (t.re(x, y, x2)) expected_moves.push_back(x2);
    EXPECT_EQ(moves, expected_moves);
    const Valuation v = t.joint(x, y);
    for (std::size_t i = 0; i < spec.env_progress.size(); ++i)
      EXPECT_EQ(g.env_goals[i].test(s), eval_expr(spec.env_progress[i], v));
    for (std::size_t i = 0; i < spec.sys_progress.size(); ++i)
      EXPECT_EQ(g.sys_goals[i].test(s), eval_expr(spec.sys_progress[i], v));
  }
}

}  // namespace

TEST(BuildGame, WorkZoneStateCounts) {
  const GR1Spec s = load_spec(fixture("work_zone.gr1"));
  const auto full = build_game(s, GameOptions{kDefaultStateCap, false, true});
  EXPECT_EQ(full.num_states(), 4u);
  EXPECT_EQ(full.env.size() * full.sys.size(), 4u);
  // Unconstrained environment: both env values are allowed from every state.
  for (StateIdx st = 0; st < full.num_states(); ++st) EXPECT_EQ(full.move_begin[st + 1] - full.move_begin[st], 2u);
  const auto reach = build_game(s);
  EXPECT_EQ(reach.num_states(), 3u);  // (work_zone, !move_slow) is never reached
  const auto wz = reach.env.from_valuation({{"work_zone", "true"}});
  const auto slow = reach.sys.from_valuation({{"move_slow", "false"}});
  EXPECT_EQ(reach.state_of(wz, slow), -1);
}

TEST(BuildGame, ReachableCountMatchesEnumeration) {
  for (const auto& name : kFixtures) {
    const GR1Spec s = load_spec(fixture(name));
    for (bool strict : {true, false}) {
      const auto g = build_game(s, GameOptions{kDefaultStateCap, true, strict});
      EXPECT_EQ(game_joint(g), oracle::reachable_joint(s, strict)) << name << (strict ? "" : " non-strict");
    }
  }
}

TEST(BuildGame, StopSignCountFromProductEnumeration) {
  // Direct product of consistent perception levels and control actions,
  // filtered by the constraints and closed under reachability.
  const GR1Spec s = load_spec(fixture("stop_sign.gr1"));
  const auto g = build_game(s);
  EXPECT_EQ(g.num_states(), oracle::reachable_joint(s, true).size());
  EXPECT_GE(g.num_states(), 5u);  // nothing, and one state per refinement level
}

TEST(BuildGame, StructureMatchesFormulaTables) {
  for (const auto& name : {"work_zone.gr1", "stop_sign.gr1", "strictness.gr1", "yield_incremental.gr1"}) {
    const GR1Spec s = load_spec(fixture(name));
    SCOPED_TRACE(name);
    expect_matches_tables(build_game(s), s);
    expect_matches_tables(build_game(s, GameOptions{kDefaultStateCap, false, true}), s);
  }
}

TEST(BuildGame, RandomSpecsMatchEnumeration) {
  std::mt19937_64 rng(41);
  int built = 0;
  for (int k = 0; k < 300; ++k) {
    const GR1Spec s = oracle::random_spec(rng, 1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 3));
    const auto te = oracle::make_tables(s).theta_e;
    if (std::find(te.begin(), te.end(), 1) == te.end()) {
      EXPECT_THROW(build_game(s), GameError);
      continue;
    }
    for (bool strict : {true, false}) {
      const auto g = build_game(s, GameOptions{kDefaultStateCap, true, strict});
      ASSERT_EQ(game_joint(g), oracle::reachable_joint(s, strict)) << print_spec(s);
    }
    SCOPED_TRACE(print_spec(s));
    expect_matches_tables(build_game(s), s);
    ++built;
  }
  EXPECT_GT(built, 200);
}

TEST(BuildGame, EmptySysRelation) {
  GR1Spec s = load_spec(fixture("work_zone.gr1"));
  s.sys_safety = {BoolExpr::constant(false)};
  const auto g = build_game(s);
  EXPECT_TRUE(g.succ.empty());
  EXPECT_GT(g.num_moves(), 0u);
}

TEST(BuildGame, Errors) {
  const GR1Spec s = load_spec(fixture("stop_sign.gr1"));
  EXPECT_THROW(build_game(s, GameOptions{100, true, true}), GameError);  // 16 x 32 joint valuations
  EXPECT_NO_THROW(build_game(s, GameOptions{512, true, true}));
  GR1Spec no_init = s;
  no_init.theta_env = BoolExpr::constant(false);
  try {
    build_game(no_init);
    FAIL();
  } catch (const GameError& e) {
    EXPECT_NE(std::string(e.what()).find("no initial pair"), std::string::npos);
  }
  GR1Spec bad = s;
  bad.env_safety.push_back(next(BoolExpr::atom("stop")));
  EXPECT_THROW(build_game(bad), GameError);
}
