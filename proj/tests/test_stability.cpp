#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

using namespace kuramoto;

static std::vector<double> twisted(std::size_t n, long q) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = two_pi * static_cast<double>(q) * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

static SteadyState diamond_state(const ModelContext& ctx) {
  auto r = solve_winding(ctx, {2, -1});
  return reconstruct_state(ctx, r.roots.at(0), {2, -1});
}

TEST(Jacobian, TriangleAtSynchronyIsNegativeLaplacian) {
  auto j = jacobian_at(fixtures::triangle(), {0, 0, 0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  EXPECT_NEAR(es.eigenvalues()(0), -3, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), -3, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(2), 0, 1e-12);
}

TEST(Jacobian, AnnihilatesRotation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, two_pi);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = fixtures::random_bridgeless(rng, 7, 3, true);
    std::vector<double> th(7);
    for (auto& x : th) x = u(rng);
    auto j = jacobian_at(g, th);
    EXPECT_LT((j * Eigen::VectorXd::Ones(7)).norm(), 1e-12);
    EXPECT_LT((j - j.transpose()).norm(), 1e-14);
  }
}

TEST(Jacobian, MatchesFiniteDifferenceOfFlow) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, two_pi);
  auto g = fixtures::random_bridgeless(rng, 6, 3, true);
  std::vector<double> th(6), f0, f1;
  for (auto& x : th) x = u(rng);
  auto j = jacobian_at(g, th);
  const double h = 1e-6;
  for (std::size_t c = 0; c < 6; ++c) {
    auto a = th, b = th;
    a[c] += h;
    b[c] -= h;
    kuramoto_rhs(g, {}, a, f0);
    kuramoto_rhs(g, {}, b, f1);
    for (std::size_t r = 0; r < 6; ++r) EXPECT_NEAR((f0[r] - f1[r]) / (2 * h), j(r, c), 1e-6);
  }
}

TEST(Jacobian, ThreeTwistOnEightCycleHasNegativeCosines) {
  auto v = classify_stability(fixtures::cycle(8), twisted(8, 3));
  EXPECT_EQ(v.negative_cosine_edges.size(), 8u);
}

TEST(Classify, SynchronyIsStable) {
  for (auto g : {fixtures::triangle(), fixtures::complete(5), fixtures::theta({2, 3, 3})}) {
    auto v = classify_stability(g, std::vector<double>(g.num_vertices(), 0.0));
    EXPECT_EQ(v.label, StabilityLabel::stable);
    EXPECT_EQ(v.criterion_used, StabilityCriterion::branch_shortcut);
    EXPECT_LT(v.max_nontrivial_eigenvalue, -1e-9);
  }
}

TEST(Classify, ThreeTwistOnEightCycleIsUnstable) {
  auto v = classify_stability(fixtures::cycle(8), twisted(8, 3));
  EXPECT_EQ(v.label, StabilityLabel::unstable);
  EXPECT_EQ(v.criterion_used, StabilityCriterion::spectrum);
}

TEST(Classify, DiamondStateIsStable) {
  auto ctx = fixtures::diamond_context();
  auto v = classify_stability(ctx.graph(), diamond_state(ctx));
  EXPECT_EQ(v.label, StabilityLabel::stable);
}

TEST(Classify, ShortcutAgreesWithSpectrumOnEnumeratedStates) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 8; ++trial) {
    auto g = fixtures::random_bridgeless(rng, 6, 2);
    auto ctx = fixtures::context(g);
    for (const auto& s : enumerate_states(ctx).states) {
      auto v = classify_stability(g, s);
      if (v.criterion_used == StabilityCriterion::branch_shortcut) EXPECT_LE(v.max_nontrivial_eigenvalue, -1e-9);
    }
  }
}

TEST(RingCriterion, EightCycleTwists) {
  auto ctx = fixtures::context(fixtures::cycle(8));
  EXPECT_TRUE(ring_instability_criterion(ctx, twisted(8, 3)));
  EXPECT_TRUE(ring_instability_criterion(ctx, twisted(8, 5)));
  EXPECT_FALSE(ring_instability_criterion(ctx, twisted(8, 1)));
  EXPECT_EQ(classify_stability(ctx.graph(), twisted(8, 1)).label, StabilityLabel::stable);
}

TEST(RingCriterion, ZeroAlphaIsInconclusive) {
  auto ctx = fixtures::context(fixtures::cycle(6));
  auto r = ring_instability_check(ctx, twisted(6, 0));
  EXPECT_TRUE(r.tie);
  EXPECT_FALSE(r.unstable);
}

TEST(RingCriterion, RejectsNonRing) {
  auto ctx = fixtures::context(fixtures::theta({2, 2, 2}));
  EXPECT_THROW(ring_instability_check(ctx, std::vector<double>(5, 0.0)), std::invalid_argument);
}

TEST(RingCriterion, SoundOnRandomRings) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> wd(0.5, 2.0);
  std::bernoulli_distribution flip(0.3);
  std::size_t certified = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 3 + trial % 8;
    std::vector<double> w(n);
    for (auto& x : w) x = (flip(rng) ? -1 : 1) * wd(rng);
    auto g = fixtures::cycle_weighted(w);
    BranchAssignment br;
    for (std::size_t e = 0; e < n; ++e) br.push_back(flip(rng) ? Branch::reflected() : Branch::principal());
    auto ctx = fixtures::context(g, br);
    for (const auto& s : enumerate_states(ctx).states) {
      if (ring_instability_criterion(ctx, s)) {
        ++certified;
        EXPECT_EQ(classify_stability(g, s).label, StabilityLabel::unstable);
      }
    }
  }
  EXPECT_GT(certified, 0u);
}

TEST(Simulate, FixedPointStaysPut) {
  auto ctx = fixtures::diamond_context();
  auto s = diamond_state(ctx);
  auto tr = simulate(ctx.graph(), s.theta, ctx.omega(), 1e-2, 10.0);
  for (std::size_t i = 0; i < s.theta.size(); ++i) EXPECT_NEAR(tr.states.back()[i], s.theta[i], 1e-9);
  EXPECT_NEAR(tr.times.back(), 10.0, 1e-12);
}

TEST(Simulate, DiamondPerturbationContracts) {
  auto ctx = fixtures::diamond_context();
  auto s = diamond_state(ctx);
  auto start = perturb(s.theta, 0.25, 2024);
  auto tr = simulate(ctx.graph(), start, ctx.omega(), 1e-2, 50.0, {100});
  double d0 = gauge_aligned_distance(start, s.theta);
  double d1 = gauge_aligned_distance(tr.states.back(), s.theta);
  EXPECT_LT(d1, d0);
  EXPECT_LT(d1, 0.25);
}

TEST(Simulate, UnstableTwistEscapes) {
  auto g = fixtures::cycle(8);
  auto tr = simulate(g, perturb(twisted(8, 3), 1e-3, 7), {}, 1e-2, 200.0, {1000});
  EXPECT_GT(gauge_aligned_distance(tr.states.back(), twisted(8, 3)), 0.1);
}

TEST(Simulate, EnergyDoesNotIncrease) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, two_pi);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = fixtures::random_bridgeless(rng, 8, 4, true);
    std::vector<double> th(8);
    for (auto& x : th) x = u(rng);
    auto tr = simulate(g, th, {}, 1e-2, 5.0);
    for (std::size_t k = 1; k < tr.states.size(); ++k)
      EXPECT_LE(energy(g, tr.states[k]) - energy(g, tr.states[k - 1]), 1e-6 * (tr.times[k] - tr.times[k - 1]));
  }
}

TEST(Simulate, LinearisationErrorIsQuadratic) {
  auto ctx = fixtures::diamond_context();
  auto s = diamond_state(ctx);
  auto j = jacobian_at(ctx.graph(), s.theta);
  Eigen::MatrixXd ejt = (j * 0.1).exp();
  auto dir = perturb(std::vector<double>(s.theta.size(), 0.0), 1.0, 11);
  auto err = [&](double scale) {
    std::vector<double> start(s.theta);
    Eigen::VectorXd d(static_cast<Eigen::Index>(dir.size()));
    for (std::size_t i = 0; i < dir.size(); ++i) {
      start[i] += scale * dir[i];
      d(static_cast<Eigen::Index>(i)) = scale * dir[i];
    }
    auto tr = simulate(ctx.graph(), start, ctx.omega(), 1e-3, 0.1);
    Eigen::VectorXd lin = ejt * d;
    double e = 0;
    for (std::size_t i = 0; i < dir.size(); ++i)
      e = std::max(e, std::abs(tr.states.back()[i] - s.theta[i] - lin(static_cast<Eigen::Index>(i))));
    return e;
  };
  double e1 = err(1e-2), e2 = err(5e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.6);
}

TEST(Simulate, RejectsBadInputs) {
  auto g = fixtures::triangle();
  EXPECT_THROW(simulate(g, {0, 0, 0}, {}, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(simulate(g, {0, 0, 0}, {}, 0.1, 0.01), std::invalid_argument);
  EXPECT_THROW(simulate(g, {0, 0}, {}, 0.1, 1.0), std::invalid_argument);
}
