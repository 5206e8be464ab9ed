#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "railguard/error.hpp"
#include "railguard/maxsum.hpp"

using namespace railguard;

namespace {

constexpr ActionValues kMove{-1.0, 1.0};
constexpr ActionValues kStop{1.0, -1.0};

// Every variable owns one factor; each edge of a random tree over the
// variables goes into exactly one of its endpoints' factors, so the factor
// graph itself is a tree.
FactorGraph random_tree(std::mt19937& rng, std::size_t n) {
  FactorGraph g;
  for (std::size_t v = 0; v < n; ++v) g.add_variable();
  std::vector<std::vector<std::size_t>> scopes(n);
  for (std::size_t v = 0; v < n; ++v) scopes[v].push_back(v);
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    if (rng() & 1U) {
      scopes[v].push_back(parent);
    } else {
      scopes[parent].push_back(v);
    }
  }
  std::bernoulli_distribution coin(0.5);
  for (std::size_t v = 0; v < n; ++v) g.add_factor(v, scopes[v], coin(rng) ? kMove : kStop);
  return g;
}

// Exhaustive max over the other scope variables, written independently of
// the library: the utility penalises each Moving neighbour when the owner Moves.
ActionValues exhaustive_gamma(const FactorGraph& g, std::size_t z, std::size_t var,
                              const std::vector<ActionValues>& zeta_by_slot) {
  const auto& f = g.factors()[z];
  ActionValues out{-1e300, -1e300};
  const std::size_t m = f.scope.size();
  for (std::size_t mask = 0; mask < (1u << m); ++mask) {
    double owner_moves = 0;
    double moving_neighbours = 0;
    double incoming = 0;
    std::size_t own_action = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t a = (mask >> k) & 1u;
      if (f.scope[k] == f.owner) owner_moves = static_cast<double>(a);
      else moving_neighbours += static_cast<double>(a);
      if (f.scope[k] == var) own_action = a;
      else incoming += zeta_by_slot[k][a];
    }
    const double u = (owner_moves > 0 ? f.beta[1] - moving_neighbours : f.beta[0]);
    out[own_action] = std::max(out[own_action], u + incoming);
  }
  return out;
}

// Head-on topology: trains at 0 and 2, relay at 1.
FactorGraph head_on_graph() {
  FactorGraph g;
  for (int k = 0; k < 3; ++k) g.add_variable();
  g.add_factor(0, {0, 1}, kMove);
  g.add_factor(1, {0, 1, 2}, kStop);
  g.add_factor(2, {1, 2}, kMove);
  return g;
}

// Rear-end topology: follower, station, leader with two active factors.
FactorGraph rear_end_graph() {
  FactorGraph g;
  for (int k = 0; k < 3; ++k) g.add_variable();
  g.add_factor(0, {0, 1, 2}, kMove);
  g.add_factor(2, {0, 2}, kMove);
  return g;
}

double enumerate_best(const FactorGraph& g) {
  const std::size_t n = g.variables().size();
  double best = -1e300;
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<Action> a(n);
    for (std::size_t v = 0; v < n; ++v) a[v] = static_cast<Action>((mask >> v) & 1u);
    best = std::max(best, total_utility(g, a));
  }
  return best;
}

}  // namespace

TEST(MaxSum, LocalUtilityExamples) {
  FactorGraph g;
  for (int k = 0; k < 3; ++k) g.add_variable();
  g.add_factor(0, {0, 1}, kMove);
  g.add_factor(0, {0, 1, 2}, kMove);
  g.add_factor(1, {0, 1, 2}, kStop);
  const std::vector<Action> ms{Action::Move, Action::Stop};
  EXPECT_EQ(local_utility(g, 0, ms), 1.0);
  const std::vector<Action> mmm{Action::Move, Action::Move, Action::Move};
  EXPECT_EQ(local_utility(g, 1, mmm), -1.0);
  for (std::size_t mask = 0; mask < 4; ++mask) {
    const std::vector<Action> j{static_cast<Action>(mask & 1u), Action::Stop,
                                static_cast<Action>(mask >> 1)};
    EXPECT_EQ(local_utility(g, 2, j), 1.0);
  }
  EXPECT_THROW(local_utility(g, 1, ms), Error);
}

TEST(MaxSum, GraphValidation) {
  FactorGraph g;
  g.add_variable();
  g.add_variable();
  EXPECT_THROW(g.add_factor(0, {1}, kMove), Error);
  EXPECT_THROW(g.add_factor(0, {0, 0}, kMove), Error);
  EXPECT_THROW(g.add_factor(0, {0, 5}, kMove), Error);
  EXPECT_THROW(g.add_factor(3, {3}, kMove), Error);
  EXPECT_THROW(g.add_factor(0, {0}, {std::nan(""), 0.0}), Error);
  g.add_factor(0, {0}, kMove);
  EXPECT_THROW(g.link_between(0, 1), Error);
  EXPECT_THROW(g.link_between(4, 0), Error);
}

TEST(MaxSum, VarToFnExamples) {
  FactorGraph g;
  g.add_variable();
  g.add_variable();
  g.add_variable();
  const auto z0 = g.add_factor(0, {0}, kMove);
  auto t = MsgTable::zeros(g);
  EXPECT_EQ(msg_var_to_fn(g, 0, z0, t), (ActionValues{0.0, 0.0}));

  const auto z1 = g.add_factor(0, {0, 1}, kMove);
  t = MsgTable::zeros(g);
  t.gamma[g.link_between(z1, 0)] = {2.0, 4.0};
  EXPECT_EQ(msg_var_to_fn(g, 0, z0, t), (ActionValues{-1.0, 1.0}));

  const auto z2 = g.add_factor(2, {0, 2}, kMove);
  t = MsgTable::zeros(g);
  t.gamma[g.link_between(z1, 0)] = {1.0, 0.0};
  t.gamma[g.link_between(z2, 0)] = {0.0, 1.0};
  EXPECT_EQ(msg_var_to_fn(g, 0, z0, t), (ActionValues{0.0, 0.0}));
}

TEST(MaxSum, FnToVarExamples) {
  FactorGraph g;
  g.add_variable();
  g.add_variable();
  g.add_variable();
  const auto single = g.add_factor(0, {0}, {0.5, -2.0});
  const auto pair = g.add_factor(0, {0, 1}, kMove);
  auto t = MsgTable::zeros(g);
  EXPECT_EQ(msg_fn_to_var(g, single, 0, t), (ActionValues{0.5, -2.0}));
  // Own variable Stop: -1 whatever b does. Own Move: best with b Stop gives 1.
  EXPECT_EQ(msg_fn_to_var(g, pair, 0, t), (ActionValues{-1.0, 1.0}));
  // Towards b: b Stop lets the owner Move (1); b Move makes Move worth 0 and Stop -1.
  EXPECT_EQ(msg_fn_to_var(g, pair, 1, t), (ActionValues{1.0, 0.0}));
}

TEST(MaxSum, FnToVarMatchesExhaustiveOracle) {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> z(-3, 3);
  for (int round = 0; round < 200; ++round) {
    FactorGraph g;
    for (int k = 0; k < 3; ++k) g.add_variable();
    const std::size_t owner = rng() % 3;
    const auto f = g.add_factor(owner, {0, 1, 2}, {double(z(rng)), double(z(rng))});
    auto t = MsgTable::zeros(g);
    std::vector<ActionValues> zeta(3);
    for (std::size_t k = 0; k < 3; ++k) {
      zeta[k] = {double(z(rng)), double(z(rng))};
      t.zeta[g.link_between(f, k)] = zeta[k];
    }
    for (std::size_t v = 0; v < 3; ++v) {
      EXPECT_EQ(msg_fn_to_var(g, f, v, t), exhaustive_gamma(g, f, v, zeta));
    }
  }
}

TEST(MaxSum, SingleVariable) {
  FactorGraph g;
  g.add_variable();
  g.add_factor(0, {0}, {5.0, -5.0});
  const auto a = run_maxsum(g, 100, 0.0);
  EXPECT_EQ(a.actions, std::vector{Action::Stop});
  EXPECT_TRUE(a.converged);
  EXPECT_EQ(a.iterations, 1u);
}

TEST(MaxSum, SampleTopologiesReachOptimum) {
  for (const auto& g : {head_on_graph(), rear_end_graph()}) {
    const auto a = run_maxsum(g, 100, g.is_acyclic() ? 0.0 : 0.5);
    EXPECT_DOUBLE_EQ(total_utility(g, a.actions), enumerate_best(g));
    const auto bf = brute_force_optimum(g);
    EXPECT_DOUBLE_EQ(total_utility(g, bf.actions), enumerate_best(g));
  }
  EXPECT_FALSE(head_on_graph().is_acyclic());
}

TEST(MaxSum, TreesAreSolvedExactly) {
  std::mt19937 rng(37);
  for (int seed = 0; seed < 100; ++seed) {
    const std::size_t n = 2 + static_cast<std::size_t>(seed % 9);
    const auto g = random_tree(rng, n);
    ASSERT_TRUE(g.is_acyclic());
    const auto a = run_maxsum(g, 100, 0.0);
    EXPECT_TRUE(a.converged);
    EXPECT_DOUBLE_EQ(total_utility(g, a.actions), enumerate_best(g)) << "seed " << seed;
  }
}

TEST(MaxSum, StoredMessagesAreRecentred) {
  std::mt19937 rng(41);
  for (int k = 0; k < 20; ++k) {
    const auto g = random_tree(rng, 6);
    const auto r = run_maxsum_detailed(g, MaxSumOptions{});
    for (std::size_t l = 0; l < g.links().size(); ++l) {
      EXPECT_NEAR(r.table.zeta[l][0] + r.table.zeta[l][1], 0.0, 1e-12);
      EXPECT_NEAR(r.table.gamma[l][0] + r.table.gamma[l][1], 0.0, 1e-12);
    }
  }
}

TEST(MaxSum, ConflictingPairKeepsAtMostOneMover) {
  FactorGraph g;
  g.add_variable();
  g.add_variable();
  g.add_factor(0, {0, 1}, {0.0, 0.5});
  g.add_factor(1, {0, 1}, {0.0, 0.5});
  const auto bf = brute_force_optimum(g);
  EXPECT_LE(std::count(bf.actions.begin(), bf.actions.end(), Action::Move), 1);
  EXPECT_DOUBLE_EQ(total_utility(g, std::vector{Action::Move, Action::Move}), -1.0);
}

TEST(MaxSum, EmptyGraph) {
  FactorGraph g;
  EXPECT_TRUE(brute_force_optimum(g).actions.empty());
  EXPECT_EQ(total_utility(g, std::vector<Action>{}), 0.0);
  EXPECT_TRUE(g.is_acyclic());
}

TEST(MaxSum, BruteForceLimit) {
  FactorGraph g;
  for (int k = 0; k < 21; ++k) g.add_factor(g.add_variable(), {std::size_t(k)}, kMove);
  EXPECT_THROW(brute_force_optimum(g), Error);
}

TEST(MaxSum, OptionValidation) {
  const auto g = head_on_graph();
  EXPECT_THROW(run_maxsum(g, 0, 0.0), Error);
  EXPECT_THROW(run_maxsum(g, 10, 1.0), Error);
  EXPECT_THROW(run_maxsum(g, 10, -0.1), Error);
}

TEST(MaxSum, RoundsGrowWithTreeDepth) {
  // Path graphs: information needs more rounds to cross a longer chain.
  std::size_t previous = 0;
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    FactorGraph g;
    for (std::size_t v = 0; v < n; ++v) g.add_variable();
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::size_t> scope{v};
      if (v + 1 < n) scope.push_back(v + 1);
      g.add_factor(v, scope, kMove);
    }
    const auto a = run_maxsum(g, 200, 0.0);
    EXPECT_TRUE(a.converged);
    EXPECT_GE(a.iterations, previous);
    previous = a.iterations;
    EXPECT_DOUBLE_EQ(total_utility(g, a.actions), enumerate_best(g));
  }
}

TEST(MaxSum, TraceFormat) {
  const auto g = rear_end_graph();
  std::ostringstream os;
  MaxSumOptions o;
  o.trace = &os;
  const auto r = run_maxsum_detailed(g, o);
  std::istringstream in(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(line.rfind("round=", 0), 0u) << line;
    EXPECT_NE(line.find(" edge="), std::string::npos);
    EXPECT_NE(line.find("->"), std::string::npos);
    EXPECT_NE(line.find(" stop="), std::string::npos);
    EXPECT_NE(line.find(" move="), std::string::npos);
  }
  EXPECT_EQ(lines % (2 * g.links().size()), 0u);
  EXPECT_GE(lines, 2 * g.links().size() * r.assignment.iterations);
}
