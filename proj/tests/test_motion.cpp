#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "gr1/corridor.hpp"

using namespace gr1::motion;

namespace {

struct Best {
  double weight = std::numeric_limits<double>::infinity();
  std::vector<StateId> path;
};

// Every simple path a ->* b; minimum weight, then lexicographically smallest.
Best enumerate_paths(const TransitionSystem& ts, StateId a, StateId b) {
  Best best;
  std::vector<StateId> path{a};
  std::vector<char> on(ts.size(), 0);
  on[a] = 1;
  std::function<void(StateId, double)> dfs = [&](StateId u, double w) {
    if (u == b) {
      if (w < best.weight - 1e-9 || (w <= best.weight + 1e-9 && path < best.path)) {
        best.weight = w;
        best.path = path;
      }
      return;
    }
    for (const auto& t : ts.successors(u)) {
      if (on[t.to]) continue;
      on[t.to] = 1;
      path.push_back(t.to);
      dfs(t.to, w + t.weight);
      path.pop_back();
      on[t.to] = 0;
    }
  };
  dfs(a, 0.0);
  return best;
}

TransitionSystem random_ts(std::mt19937_64& rng, std::size_t n) {
  TransitionSystem ts;
  for (std::size_t i = 0; i < n; ++i) ts.add_state("s" + std::to_string(i), {"p" + std::to_string(i % 3)});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng() % 3 == 0) ts.add_transition(i, j, static_cast<double>(1 + rng() % 3));
  return ts;
}

}  // namespace

TEST(TrajectoryWeight, UnitCorridor) {
  const auto ts = cell_transition_system(CellCorridor::unit(7));
  EXPECT_EQ(trajectory_weight(ts, {6, 5, 4}), 2.0);
  EXPECT_EQ(trajectory_weight(ts, {3}), 0.0);
  EXPECT_EQ(trajectory_weight(ts, {3, 3, 2}), 2.0);
  EXPECT_THROW(trajectory_weight(ts, {6, 4}), MotionError);
}

TEST(TrajectoryWeight, MatchesFoldSum) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> w(0.1, 5.0);
  for (int k = 0; k < 200; ++k) {
    CellCorridor c = CellCorridor::unit(2 + rng() % 9);
    for (auto& x : c.boundary_weights) x = w(rng);
    c.stationary_weight = w(rng);
    const auto ts = cell_transition_system(c);
    std::vector<StateId> path{rng() % c.cells};
    double expected = 0.0;
    for (int s = 0; s < 12; ++s) {
      const StateId u = path.back();
      const int dir = static_cast<int>(rng() % 3) - 1;
      if ((dir < 0 && u == 0) || (dir > 0 && u + 1 == c.cells)) continue;
      const StateId v = static_cast<StateId>(static_cast<long>(u) + dir);
      expected += dir == 0 ? c.stationary_weight : c.boundary_weights[std::min(u, v)];
      path.push_back(v);
    }
    EXPECT_NEAR(trajectory_weight(ts, path), expected, 1e-9);
  }
}

TEST(MinWeightPath, CorridorExamples) {
  const auto ts = cell_transition_system(CellCorridor::unit(7));
  const auto p = min_weight_path(ts, 2, 0);
  EXPECT_EQ(p.weight, 2.0);
  EXPECT_EQ(p.states, (std::vector<StateId>{2, 1, 0}));
  const auto q = min_weight_path(ts, "c4", "c4");
  EXPECT_EQ(q.weight, 0.0);
  EXPECT_EQ(q.states, std::vector<StateId>{4});
}

TEST(MinWeightPath, UnreachableTarget) {
  TransitionSystem ts;
  ts.add_state("a");
  ts.add_state("b");
  ts.add_transition("b", "a");
  EXPECT_THROW(min_weight_path(ts, "a", "b"), MotionError);
  EXPECT_EQ(min_weight_path(ts, "b", "a").weight, 1.0);
}

TEST(MinWeightPath, LexicographicTieBreak) {
  TransitionSystem ts;
  for (const char* n : {"a", "b", "c", "d"}) ts.add_state(n);
  ts.add_transition("a", "c");
  ts.add_transition("a", "b");
  ts.add_transition("c", "d");
  ts.add_transition("b", "d");
  EXPECT_EQ(min_weight_path(ts, "a", "d").states, (std::vector<StateId>{0, 1, 3}));
}

TEST(MinWeightPath, MatchesSimplePathEnumeration) {
  std::mt19937_64 rng(17);
  int compared = 0;
  for (int k = 0; k < 300; ++k) {
    const auto ts = random_ts(rng, 2 + rng() % 9);
    const StateId a = rng() % ts.size(), b = rng() % ts.size();
    const Best oracle = enumerate_paths(ts, a, b);
    if (std::isinf(oracle.weight)) {
      EXPECT_THROW(min_weight_path(ts, a, b), MotionError);
      continue;
    }
    const auto p = min_weight_path(ts, a, b);
    EXPECT_NEAR(p.weight, oracle.weight, 1e-9);
    EXPECT_EQ(p.states, oracle.path);
    EXPECT_NEAR(trajectory_weight(ts, p.states), p.weight, 1e-9);
    ++compared;
  }
  EXPECT_GT(compared, 100);
}

TEST(MinWeightPath, NeverWorseThanAnyTrajectory) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 300; ++k) {
    const auto ts = random_ts(rng, 2 + rng() % 8);
    std::vector<StateId> walk{rng() % ts.size()};
    for (int s = 0; s < 10; ++s) {
      const auto& out = ts.successors(walk.back());
      if (out.empty()) break;
      walk.push_back(out[rng() % out.size()].to);
    }
    EXPECT_LE(min_weight_path(ts, walk.front(), walk.back()).weight, trajectory_weight(ts, walk) + 1e-9);
  }
}

TEST(MinWeightPath, TriangleInequalityOnCorridors) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> w(0.5, 3.0);
  for (int k = 0; k < 50; ++k) {
    CellCorridor c = CellCorridor::unit(2 + rng() % 8);
    for (auto& x : c.boundary_weights) x = w(rng);
    const auto ts = cell_transition_system(c);
    for (StateId a = 0; a < c.cells; ++a)
      for (StateId b = 0; b < c.cells; ++b)
        for (StateId d = 0; d < c.cells; ++d)
          EXPECT_LE(min_weight_path(ts, a, d).weight,
                    min_weight_path(ts, a, b).weight + min_weight_path(ts, b, d).weight + 1e-9);
  }
}

TEST(Performance, UnitCorridorDistances) {
  const auto c = CellCorridor::unit(7);
  EXPECT_EQ(performance(c, 2), 2.0);
  EXPECT_EQ(performance(c, 3), 3.0);
  EXPECT_EQ(performance(c, 4), 4.0);
  EXPECT_EQ(performance(c, 0), 0.0);
  EXPECT_THROW(performance(c, 7), MotionError);
}

TEST(Performance, DoubledWeightsDoubleScore) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> w(0.2, 4.0);
  for (int k = 0; k < 50; ++k) {
    CellCorridor c = CellCorridor::unit(2 + rng() % 8, 0);
    c.target = rng() % c.cells;
    for (auto& x : c.boundary_weights) x = w(rng);
    CellCorridor d = c;
    for (auto& x : d.boundary_weights) x *= 2;
    d.stationary_weight *= 2;
    for (std::size_t i = 0; i < c.cells; ++i) EXPECT_NEAR(performance(d, i), 2 * performance(c, i), 1e-9);
  }
}

TEST(Performance, NonIncreasingTowardTarget) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> w(0.2, 4.0);
  for (int k = 0; k < 50; ++k) {
    CellCorridor c = CellCorridor::unit(2 + rng() % 8);
    c.target = rng() % c.cells;
    for (auto& x : c.boundary_weights) x = w(rng);
    for (std::size_t i = c.target; i + 1 < c.cells; ++i) EXPECT_LE(performance(c, i), performance(c, i + 1));
    for (std::size_t i = c.target; i > 0; --i) EXPECT_LE(performance(c, i), performance(c, i - 1));
  }
}

TEST(Corridor, InvalidConfigurations) {
  CellCorridor c = CellCorridor::unit(3);
  c.target = 3;
  EXPECT_THROW(c.validate(), MotionError);
  c = CellCorridor::unit(3);
  c.boundary_weights[1] = 0.0;
  EXPECT_THROW(c.validate(), MotionError);
  c.boundary_weights.pop_back();
  EXPECT_THROW(c.validate(), MotionError);
  EXPECT_THROW(CellCorridor::unit(0).validate(), MotionError);
  TransitionSystem ts;
  ts.add_state("a");
  EXPECT_THROW(ts.add_transition("a", "a", -1.0), MotionError);
  EXPECT_THROW(ts.add_state("a"), MotionError);
}

TEST(Corridor, FixtureJson) {
  std::ifstream in(std::string(GR1_FIXTURE_DIR) + "/corridor7.json");
  const auto c = corridor_from_json(nlohmann::json::parse(in));
  EXPECT_EQ(c.cells, 7u);
  EXPECT_EQ(c.target, 0u);
  const auto d = corridor_from_json(to_json(c));
  EXPECT_EQ(d.boundary_weights, c.boundary_weights);
  const auto ts = cell_transition_system(c);
  EXPECT_EQ(ts.initial(), 6u);
  const auto back = ts_from_json(to_json(ts));
  EXPECT_EQ(back.size(), ts.size());
  EXPECT_EQ(back.transitions().size(), ts.transitions().size());
  EXPECT_NE(to_dot(ts).find("c1"), std::string::npos);
}

TEST(Movement, ThreeCellCorridor) {
  const auto m = movement_abstraction(CellCorridor::unit(3));
  std::size_t still = 0, moving = 0;
  for (StateId s = 0; s < m.ts.size(); ++s) {
    const bool st = m.stationary(s);
    still += st;
    moving += !st;
    EXPECT_EQ(m.ts.label(s).count("stationary"), st ? 1u : 0u);
    EXPECT_EQ(m.ts.label(s).count("moving"), st ? 0u : 1u);
  }
  EXPECT_EQ(still, 3u);
  EXPECT_EQ(moving, 4u);
}

TEST(Movement, OneCellCorridor) {
  const auto m = movement_abstraction(CellCorridor::unit(1));
  ASSERT_EQ(m.ts.size(), 1u);
  EXPECT_TRUE(m.stationary(0));
  EXPECT_EQ(m.ts.successors(0).size(), 1u);
}

// (c1,c2) exists iff c1 -> c2 in TS_C, and (c1,c2) -> (c2,c3) iff c2 -> c3.
TEST(Movement, PairStatesMirrorCellTransitions) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto c = CellCorridor::unit(n);
    const auto tc = cell_transition_system(c);
    const auto m = movement_abstraction(c);
    EXPECT_EQ(m.ts.size(), tc.transitions().size());
    for (StateId s = 0; s < m.ts.size(); ++s) {
      const auto [c1, c2] = m.pairs[s];
      EXPECT_TRUE(tc.weight(c1, c2).has_value());
      for (const auto& t : m.ts.successors(s)) {
        EXPECT_EQ(m.pairs[t.to].first, c2);
        EXPECT_TRUE(tc.weight(c2, m.pairs[t.to].second).has_value());
      }
      EXPECT_EQ(m.ts.successors(s).size(), tc.successors(c2).size());
    }
  }
}

TEST(OutputTrajectory, LabelsPerState) {
  const auto ts = cell_transition_system(CellCorridor::unit(4));
  const std::vector<StateId> xs{3, 2, 2, 1, 0};
  const auto out = output_trajectory(ts, xs);
  ASSERT_EQ(out.size(), xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_EQ(out[k], ts.label(xs[k]));
  EXPECT_TRUE(out.back().count("target"));
  EXPECT_THROW(output_trajectory(ts, {3, 1}), MotionError);
}
