#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace kuramoto;

static Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

static double gauge_distance(const std::vector<double>& a, const std::vector<double>& b) {
  // best global shift: align on every vertex in turn, keep the smallest spread
  double best = 1e9;
  for (std::size_t r = 0; r < a.size(); ++r) {
    double shift = a[r] - b[r];
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, oracle::circular_distance(a[i], b[i] + shift));
    best = std::min(best, d);
  }
  return best;
}

TEST(SolveWinding, ZeroWindingGivesOrigin) {
  for (auto g : {fixtures::triangle(), fixtures::theta({2, 2, 2}), fixtures::complete(4)}) {
    auto ctx = fixtures::context(g);
    auto r = solve_winding(ctx, Winding(ctx.dim(), 0));
    ASSERT_EQ(r.status, SolveStatus::found);
    ASSERT_EQ(r.roots.size(), 1u);
    EXPECT_LT(r.roots[0].alpha.norm(), 1e-10);
  }
}

TEST(SolveWinding, DiamondExampleLatticePoint) {
  auto ctx = fixtures::diamond_context();
  auto r = solve_winding(ctx, {2, -1});
  ASSERT_EQ(r.status, SolveStatus::found);
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_NEAR(r.roots[0].alpha(0), 0.994148, 1e-5);
  EXPECT_NEAR(r.roots[0].alpha(1), -0.779356, 1e-5);
  EXPECT_LT((ctx.W(r.roots[0].alpha) - vec({2, -1})).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(SolveWinding, FiveCycleOneTwist) {
  auto ctx = fixtures::context(fixtures::cycle(5));
  auto r = solve_winding(ctx, {1});
  ASSERT_EQ(r.status, SolveStatus::found);
  EXPECT_NEAR(r.roots[0].alpha(0), std::sin(two_pi / 5), 1e-12);
  auto none = solve_winding(ctx, {2});
  EXPECT_EQ(none.status, SolveStatus::excluded);
}

TEST(SolveWinding, BoundaryRootOnFourCycle) {
  auto ctx = fixtures::context(fixtures::cycle(4));
  auto r = solve_winding(ctx, {1});
  ASSERT_EQ(r.status, SolveStatus::found);
  EXPECT_NEAR(r.roots[0].alpha(0), 1.0, 1e-12);
  for (Eigen::Index e = 0; e < 4; ++e) EXPECT_NEAR(r.roots[0].phi(e), pi / 2, 1e-12);
}

TEST(Reconstruct, TriangleSynchronised) {
  auto ctx = fixtures::context(fixtures::triangle());
  auto s = reconstruct_state(ctx, vec({0.0}), {0});
  for (double t : s.theta) EXPECT_EQ(t, 0.0);
  EXPECT_FALSE(s.boundary_flag);
}

TEST(Reconstruct, FiveCycleTwistedState) {
  auto ctx = fixtures::context(fixtures::cycle(5));
  auto r = solve_winding(ctx, {1});
  auto s = reconstruct_state(ctx, r.roots[0], {1});
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.theta[i], two_pi * i / 5.0, 1e-12);
}

TEST(Reconstruct, DiamondMatchesListedAngles) {
  auto ctx = fixtures::diamond_context();
  auto r = solve_winding(ctx, {2, -1});
  ASSERT_EQ(r.status, SolveStatus::found);
  auto s = reconstruct_state(ctx, r.roots[0], {2, -1});
  EXPECT_LT(gauge_distance(s.theta, fixtures::diamond_theta()), 1e-4);
  EXPECT_LE(s.residual, 1e-9);
}

TEST(Reconstruct, AnyIntegerLiftGivesTheSameAngles) {
  auto ctx = fixtures::diamond_context();
  auto r = solve_winding(ctx, {2, -1});
  auto s = reconstruct_state(ctx, r.roots[0], {2, -1});
  // the listed K has the same inner products; theta from it agrees mod 2pi
  Eigen::VectorXd k = Eigen::VectorXd::Zero(20);
  k(0) = 1;
  k(1) = -1;
  k(10) = 1;
  Eigen::VectorXd psi = r.roots[0].phi - two_pi * k;
  const auto& b = ctx.incidence();
  Eigen::VectorXd theta = b.transpose().completeOrthogonalDecomposition().solve(psi);
  std::vector<double> t(theta.data(), theta.data() + theta.size());
  EXPECT_LT(gauge_distance(s.theta, t), 1e-9);
}

TEST(Enumerate, FiveCycleHasThreeStates) {
  auto rep = enumerate_states(fixtures::context(fixtures::cycle(5)));
  ASSERT_EQ(rep.states.size(), 3u);
  EXPECT_EQ(rep.states[0].winding, Winding{-1});
  EXPECT_EQ(rep.states[1].winding, Winding{0});
  EXPECT_EQ(rep.states[2].winding, Winding{1});
  EXPECT_TRUE(rep.solver_failures.empty());
}

TEST(Enumerate, FourCycleBoundaryStatesAreFlagged) {
  auto rep = enumerate_states(fixtures::context(fixtures::cycle(4)));
  ASSERT_EQ(rep.states.size(), 3u);
  EXPECT_TRUE(rep.states[0].boundary_flag);
  EXPECT_FALSE(rep.states[1].boundary_flag);
  EXPECT_TRUE(rep.states[2].boundary_flag);
}

TEST(Enumerate, DiamondContainsExampleState) {
  auto rep = enumerate_states(fixtures::diamond_context());
  bool seen = false;
  for (const auto& s : rep.states) seen = seen || s.winding == Winding{2, -1};
  EXPECT_TRUE(seen);
  EXPECT_TRUE(rep.solver_failures.empty());
  for (const auto& s : rep.states) EXPECT_LE(s.residual, 1e-9);
}

TEST(Enumerate, ParallelMatchesSerial) {
  auto ctx = fixtures::diamond_context();
  EnumerationOptions opt;
  opt.threads = 3;
  auto a = enumerate_states(ctx);
  auto b = enumerate_states(ctx, opt);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    EXPECT_EQ(a.states[i].winding, b.states[i].winding);
    EXPECT_EQ(a.states[i].theta, b.states[i].theta);
  }
}

static void expect_oracle_agreement(const ModelContext& ctx) {
  auto rep = enumerate_states(ctx);
  EXPECT_TRUE(rep.solver_failures.empty());
  auto orc = oracle::brute_force_oracle(ctx.graph(), ctx.branches(), ctx.basis().rows, ctx.omega());
  ASSERT_EQ(rep.states.size(), orc.size());
  for (const auto& s : rep.states) {
    bool match = false;
    for (const auto& o : orc)
      if (o.winding == s.winding && gauge_distance(o.theta, s.theta) <= 1e-6) match = true;
    EXPECT_TRUE(match);
  }
}

TEST(Oracle, FiveCycle) {
  auto ctx = fixtures::context(fixtures::cycle(5));
  auto orc = oracle::brute_force_oracle(ctx.graph(), ctx.branches(), ctx.basis().rows);
  EXPECT_EQ(orc.size(), 3u);
  expect_oracle_agreement(ctx);
}

TEST(Oracle, TriangleWithReflectedEdge) {
  expect_oracle_agreement(
      fixtures::context(fixtures::triangle(), {Branch::principal(), Branch::principal(), Branch::reflected()}));
}

TEST(Oracle, BowtieCountIsProductOfTriangles) {
  auto tri = enumerate_states(fixtures::context(fixtures::triangle())).states.size();
  auto bow = fixtures::context(fixtures::bowtie());
  auto states = enumerate_states(bow).states.size();
  EXPECT_EQ(states, tri * tri);
  auto orc = oracle::brute_force_oracle(bow.graph(), bow.branches(), bow.basis().rows);
  EXPECT_EQ(orc.size(), tri * tri);
}

TEST(Oracle, BoundaryCopiesCollapse) {
  auto g = fixtures::cycle(8);
  BranchAssignment br(8, Branch::principal());
  br[0] = Branch::reflected();
  auto ctx = fixtures::context(g, br);
  EXPECT_EQ(oracle::brute_force_oracle(g, br, ctx.basis().rows).size(), 4u);
  expect_oracle_agreement(ctx);
}

static WeightedGraph six_vertex(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<Edge> es;
  for (auto [a, b] : pairs) es.push_back({a, b, 1.0});
  return WeightedGraph(fixtures::numbered(6), es);
}

TEST(VertexRoots, AllReflectedBarrierPath) {
  auto g = six_vertex({{0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}});
  auto ctx = fixtures::context(g, BranchAssignment(g.num_edges(), Branch::reflected()));
  auto res = solve_winding(ctx, {-1, -1, 0, 0, 0});
  ASSERT_EQ(res.status, SolveStatus::found);
  expect_oracle_agreement(ctx);
}

TEST(VertexRoots, OneReflectedEdgeBranchAndBound) {
  auto g = six_vertex({{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}});
  BranchAssignment br(g.num_edges(), Branch::principal());
  br[0] = Branch::reflected();
  auto ctx = fixtures::context(g, br);
  auto rep = enumerate_states(ctx);
  EXPECT_EQ(rep.states.size(), 2u);
  for (const auto& s : rep.states) EXPECT_TRUE(s.boundary_flag);
  expect_oracle_agreement(ctx);
}

TEST(VertexRoots, FacePolishNeedsPinnedEdges) {
  auto ctx = fixtures::context(fixtures::cycle(5));
  EXPECT_FALSE(polish_on_face(ctx, vec({0.0}), vec({0.0}), 1e-6));
  auto r = polish_on_face(ctx, vec({0.999999}), vec({1.25}), 1e-4);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->alpha(0), 1.0, 1e-15);
}

TEST(Oracle, MixedWeightsAndFrequencies) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    auto g = fixtures::random_bridgeless(rng, 4 + trial % 2, 1 + trial % 2, trial % 2 == 0);
    BranchAssignment br;
    for (std::size_t e = 0; e < g.num_edges(); ++e) br.push_back(g.edge(e).weight > 0 ? Branch::principal() : Branch::reflected());
    std::vector<double> omega(g.num_vertices(), 0.0);
    omega[0] = 0.2;
    omega[1] = -0.2;
    expect_oracle_agreement(fixtures::context(g, br, omega));
  }
}

TEST(Invariants, BasisIndependence) {
  auto g = fixtures::theta({2, 2, 3});
  auto trees = enumerate_spanning_trees(g);
  auto a = enumerate_states(ModelContext(g, fundamental_cycle_basis(g, trees.front()), uniform_branches(g.num_edges())));
  auto b = enumerate_states(ModelContext(g, fundamental_cycle_basis(g, trees.back()), uniform_branches(g.num_edges())));
  ASSERT_EQ(a.states.size(), b.states.size());
  for (const auto& s : a.states) {
    bool match = false;
    for (const auto& t : b.states) match = match || gauge_distance(s.theta, t.theta) <= 1e-9;
    EXPECT_TRUE(match);
  }
}

TEST(Invariants, InjectivityOnDefiniteBranches) {
  auto rep = enumerate_states(fixtures::context(fixtures::complete(4)));
  for (std::size_t i = 0; i < rep.states.size(); ++i)
    for (std::size_t j = i + 1; j < rep.states.size(); ++j) {
      EXPECT_NE(rep.states[i].winding, rep.states[j].winding);
      EXPECT_GT((rep.states[i].alpha - rep.states[j].alpha).norm(), 1e-8);
    }
  EXPECT_TRUE(rep.non_injective.empty());
}

TEST(Invariants, GaugeShiftLeavesResidualUnchanged) {
  auto ctx = fixtures::diamond_context();
  auto rep = enumerate_states(ctx);
  for (const auto& s : rep.states) {
    auto shifted = s.theta;
    for (auto& t : shifted) t += 1.2345;
    EXPECT_NEAR(fixed_point_residual(ctx.graph(), shifted, ctx.omega()), s.residual, 1e-12);
  }
}

TEST(Invariants, MixedBranchesCanBreakInjectivity) {
  // two principal and two reflected edges on a 4-cycle: W is constant on A
  auto ctx = fixtures::context(fixtures::cycle(4),
                               {Branch::principal(), Branch::reflected(), Branch::principal(), Branch::reflected()});
  EXPECT_FALSE(ctx.is_definite());
  auto w0 = ctx.W(vec({-0.5}))(0);
  auto w1 = ctx.W(vec({0.7}))(0);
  EXPECT_NEAR(w0, w1, 1e-14);
}
