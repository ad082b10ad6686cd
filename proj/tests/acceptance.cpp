// Acceptance run: one PASS/FAIL line per criterion. Usage: acceptance [criterion ...]
#include "corpus.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

using namespace kuramoto;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const SteadyState* find_winding(const EnumerationReport& rep, const Winding& k) {
  for (const auto& s : rep.states)
    if (s.winding == k) return &s;
  return nullptr;
}

SteadyState diamond_state() {
  auto ctx = fixtures::diamond_context();
  auto rep = enumerate_states(ctx);
  auto s = find_winding(rep, {2, -1});
  if (!s) throw std::runtime_error("diamond enumeration has no (2,-1) state");
  return *s;
}

// 1
Outcome diamond_reproduction() {
  auto ctx = fixtures::diamond_context();
  auto rep = enumerate_states(ctx);
  auto s = find_winding(rep, {2, -1});
  if (!s) return {false, std::to_string(rep.states.size()) + " states, none with winding (2,-1)"};
  Eigen::Vector2d expected(0.994148, -0.779356);
  double da = (s->alpha - expected).lpNorm<Eigen::Infinity>();
  double dt = gauge_aligned_distance(s->theta, fixtures::diamond_theta());
  auto verdict = classify_stability(ctx.graph(), *s);
  bool ok = da <= 1e-5 && dt <= 1e-4 && verdict.label == StabilityLabel::stable;
  return {ok, std::to_string(rep.states.size()) + " states; alpha err " + fmt("%.2e", da) + ", theta err " +
                  fmt("%.2e", dt) + ", " + to_string(verdict.label) + " (max eig " +
                  fmt("%.4g", verdict.max_nontrivial_eigenvalue) + ")"};
}

// 2
Outcome diamond_perturbation() {
  auto ctx = fixtures::diamond_context();
  auto s = diamond_state();
  const auto& g = ctx.graph();
  auto start = perturb(s.theta, 0.25, 2024);
  auto tr = simulate(g, start, ctx.omega(), 1e-2, 50.0, {1000});
  double d = gauge_aligned_distance(tr.states.back(), s.theta);
  auto half = simulate(g, start, ctx.omega(), 5e-3, 50.0, {10000});
  double dh = gauge_aligned_distance(half.states.back(), s.theta);
  // continue until the tolerance is met, for the report
  auto theta = tr.states.back();
  double t = 50.0, reached = -1;
  while (t < 1000.0) {
    theta = simulate(g, theta, ctx.omega(), 1e-2, 10.0, {1000}).states.back();
    t += 10.0;
    if (gauge_aligned_distance(theta, s.theta) <= 1e-4) {
      reached = t;
      break;
    }
  }
  std::string tail = reached > 0 ? ", within 1e-4 first at T=" + fmt("%.0f", reached) : ", not within 1e-4 by T=1000";
  return {d <= 1e-4, "distance at T=50 " + fmt("%.3e", d) + " (dt=5e-3: " + fmt("%.3e", dh) + ")" + tail};
}

// 3
Outcome face_count_check() {
  auto corpus_graphs = corpus::random_bridgeless_corpus(100, 10, 2024, true);
  std::size_t mismatches = 0, with_cut = 0;
  std::string first;
  for (const auto& g : corpus_graphs) {
    auto faces = count_faces(fixtures::context(g));
    auto predicted = predicted_faces(g);
    if (faces != predicted) {
      ++mismatches;
      if (corpus::has_two_edge_cut(g)) ++with_cut;
      if (first.empty())
        first = "; e.g. |V|=" + std::to_string(g.num_vertices()) + " |E|=" + std::to_string(g.num_edges()) +
                ": " + std::to_string(faces) + " faces vs " + std::to_string(predicted);
    }
  }
  auto chain = load_graph(fixtures::data("threeloop.json"));
  auto chain_faces = count_faces(fixtures::context(chain));
  bool ok = mismatches == 0 && chain_faces == 8 && predicted_faces(chain) == 8;
  return {ok, std::to_string(mismatches) + "/" + std::to_string(corpus_graphs.size()) + " random graphs mismatch (" +
                  std::to_string(with_cut) + " of them have a 2-edge cut)" + first + "; three-loop chain " +
                  std::to_string(chain_faces) + " faces"};
}

// 4
Outcome oracle_equivalence() {
  auto graphs = corpus::small_bridgeless_graphs(6);
  for (std::size_t n = 3; n <= 12; ++n) graphs.push_back(fixtures::cycle(n));
  const std::size_t assignments = 3;
  const std::size_t jobs = graphs.size() * assignments;
  std::vector<std::string> problems(jobs);
  EnumerationOptions eo;
  eo.max_cycle_rank = 10;
  parallel_for(jobs, default_thread_count(), [&](std::size_t job) {
    const auto& g = graphs[job / assignments];
    const auto m = g.num_edges();
    BranchAssignment br(m, Branch::principal());
    switch (job % assignments) {
      case 1: br.assign(m, Branch::reflected()); break;
      case 2: br[0] = Branch::reflected(); break;
      default: break;
    }
    auto ctx = fixtures::context(g, br);
    auto rep = enumerate_states(ctx, eo);
    auto orc = oracle::brute_force_oracle(g, br, ctx.basis().rows, ctx.omega());
    std::ostringstream why;
    if (!rep.solver_failures.empty()) why << rep.solver_failures.size() << " solver failures; ";
    if (rep.states.size() != orc.size()) why << rep.states.size() << " states vs oracle " << orc.size() << "; ";
    for (const auto& s : rep.states) {
      bool matched = false;
      for (const auto& o : orc) {
        if (o.winding != s.winding) continue;
        double d = 0;
        for (std::size_t i = 0; i < s.theta.size(); ++i) d = std::max(d, oracle::circular_distance(s.theta[i], o.theta[i]));
        matched = matched || d <= 1e-6;
      }
      if (!matched) {
        why << "unmatched state; ";
        break;
      }
    }
    if (!why.str().empty())
      problems[job] = "|V|=" + std::to_string(g.num_vertices()) + " |E|=" + std::to_string(m) + " assignment " +
                      std::to_string(job % assignments) + ": " + why.str();
  });
  std::size_t bad = 0;
  std::string first;
  for (const auto& p : problems)
    if (!p.empty()) {
      if (!bad) first = "; first: " + p;
      ++bad;
    }
  return {bad == 0, std::to_string(graphs.size()) + " graphs x " + std::to_string(assignments) +
                        " assignments (principal, reflected, one reflected edge); " + std::to_string(bad) +
                        " disagreements" + first};
}

// 5
Outcome weyl_desk_scale() {
  auto tri = weyl_experiment(SubdivisionScheme{fixtures::triangle(), {1, 1, 1}, 1}, {160});
  double tri_err = std::abs(tri[0].ratio - 1.5) / 1.5;
  auto th = weyl_experiment(SubdivisionScheme{fixtures::theta({1, 2, 2}), {1, 1, 1, 1, 1}, 1}, {20});
  double th_err = std::abs(th[0].ratio - th[0].target) / th[0].target;
  bool ok = tri_err <= 0.02 && th_err <= 0.10 && tri[0].solver_failures == 0 && th[0].solver_failures == 0;
  return {ok, "triangle M=160 count " + std::to_string(tri[0].lattice_count) + " ratio " + fmt("%.5f", tri[0].ratio) +
                  " (" + fmt("%.2f", 100 * tri_err) + "%); theta(1,2,2) M=20 count " +
                  std::to_string(th[0].lattice_count) + " ratio " + fmt("%.5f", th[0].ratio) + " vs " +
                  fmt("%.5f", th[0].target) + " (" + fmt("%.2f", 100 * th_err) + "%)"};
}

// 6
Outcome two_cycle_closed_form_check() {
  std::vector<std::vector<std::size_t>> arms{{1, 2, 2}, {2, 2, 2}, {1, 3, 3}, {2, 3, 4}};
  bool ok = true;
  double worst = 0;
  for (const auto& a : arms) {
    auto g = fixtures::theta(a);
    auto v = volume_W(fixtures::context(g));
    double cf = two_cycle_closed_form(g, 1.0);
    double diff = std::abs(v.value - cf);
    ok = ok && diff <= std::max(0.01 * cf, 3 * v.abs_error);
    worst = std::max(worst, diff / cf);
  }
  auto g = fixtures::theta({2, 3, 4});
  auto ctx = fixtures::context(g);
  double c = two_cycle_bracket_constant();
  double worst_tree = 0;
  auto trees = enumerate_spanning_trees(g);
  for (std::size_t i = 0; i < trees.size(); i += 5) {
    auto it = tree_integral(ctx, trees[i]);
    worst_tree = std::max(worst_tree, std::abs(it.value - c));
  }
  ok = ok && worst_tree <= 1e-4;
  return {ok, std::to_string(arms.size()) + " theta graphs, worst relative gap " + fmt("%.2e", worst) +
                  "; co-tree integral vs constant " + fmt("%.10f", c) + ": worst gap " + fmt("%.2e", worst_tree)};
}

// 7
Outcome branch_maximisation() {
  std::mt19937_64 rng(2024);
  std::vector<WeightedGraph> graphs{fixtures::triangle(1, 1, -1), fixtures::triangle(2, -0.5, 1)};
  {
    auto t = fixtures::theta({1, 2, 2});
    auto es = t.edges();
    es[1].weight = -1.5;
    es[4].weight = 0.7;
    graphs.emplace_back(t.vertex_ids(), es);
  }
  {
    auto k4 = fixtures::complete(4);
    auto es = k4.edges();
    es[0].weight = -1.0;
    es[5].weight = 1.8;
    graphs.emplace_back(k4.vertex_ids(), es);
  }
  graphs.push_back(fixtures::bowtie());
  while (graphs.size() < 7) {
    auto g = fixtures::random_bridgeless(rng, 5, 2, true);
    if (g.num_edges() - g.num_vertices() + 1 <= 3) graphs.push_back(g);
  }
  std::size_t held = 0, violations = 0, alternatives = 0, mixed = 0;
  for (const auto& g : graphs) {
    auto rep = maximize_volume_branches(g);
    held += rep.holds;
    violations += rep.violations.size();
    alternatives += rep.alternatives.size();
    mixed += std::any_of(g.edges().begin(), g.edges().end(), [](const Edge& e) { return e.weight < 0; });
  }
  return {held == graphs.size(), std::to_string(held) + "/" + std::to_string(graphs.size()) + " graphs hold (" +
                                     std::to_string(mixed) + " with negative weights), " + std::to_string(alternatives) +
                                     " alternatives, " + std::to_string(violations) + " violations"};
}

// 8
Outcome twisted_states() {
  std::size_t checked = 0, spectral_bad = 0, ring_missed = 0, ring_false = 0;
  for (std::size_t n = 5; n <= 16; ++n) {
    auto g = fixtures::cycle(n);
    auto ctx = fixtures::context(g);
    const auto N = static_cast<long long>(n);
    for (long long q = -N; q <= N; ++q) {
      std::vector<double> theta(n);
      for (std::size_t i = 0; i < n; ++i)
        theta[i] = oracle::wrap_angle(two_pi * static_cast<double>(q) * static_cast<double>(i) / static_cast<double>(n));
      double x = oracle::wrap_angle(two_pi * static_cast<double>(q) / static_cast<double>(n));
      double cosx = std::cos(x);
      auto verdict = classify_stability(g, theta);
      bool unstable = verdict.label == StabilityLabel::unstable;
      if (unstable != (cosx < -1e-12)) ++spectral_bad;
      bool ring = ring_instability_criterion(ctx, theta);
      const double eps = 1e-12;
      bool in_window = (x > pi / 2 + eps && x < pi - eps) || (x > pi + eps && x < 3 * pi / 2 - eps);
      if (in_window && !ring) ++ring_missed;
      if (ring && verdict.label == StabilityLabel::stable) ++ring_false;
      ++checked;
    }
  }
  bool ok = spectral_bad == 0 && ring_missed == 0 && ring_false == 0;
  return {ok, std::to_string(checked) + " (N, q) pairs; spectral mismatches " + std::to_string(spectral_bad) +
                  ", ring criterion misses " + std::to_string(ring_missed) + ", fires on stable " +
                  std::to_string(ring_false)};
}

// 9
Outcome lattice_bases() {
  auto graphs = corpus::small_bridgeless_graphs(6);
  auto extra = corpus::random_bridgeless_corpus(100, 10, 2024);
  graphs.insert(graphs.end(), extra.begin(), extra.end());
  std::mt19937_64 rng(2024);
  std::size_t bases = 0, bad = 0;
  for (const auto& g : graphs) {
    std::vector<EdgeSet> trees;
    if (spanning_tree_count(g) <= 200) {
      trees = enumerate_spanning_trees(g);
    } else {
      // random spanning trees by Kruskal over shuffled edges
      std::vector<std::size_t> order(g.num_edges());
      std::iota(order.begin(), order.end(), 0);
      for (int t = 0; t < 200; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        DisjointSets sets(g.num_vertices());
        EdgeSet tree;
        for (auto e : order)
          if (sets.unite(g.edge(e).tail, g.edge(e).head)) tree.push_back(e);
        std::sort(tree.begin(), tree.end());
        trees.push_back(tree);
      }
    }
    trees.push_back(default_spanning_tree(g));
    for (const auto& t : trees) {
      ++bases;
      if (!cycle_basis_lattice_check(fundamental_cycle_basis(g, t)).spans_lattice) ++bad;
    }
  }
  return {bad == 0, std::to_string(bases) + " fundamental bases over " + std::to_string(graphs.size()) + " graphs, " +
                        std::to_string(bad) + " with a divisor other than 1"};
}

// 10
Outcome identity_suite() {
  std::mt19937_64 rng(2024);
  double worst_det = 0, worst_fd = 0;
  std::size_t pairs = 0;
  while (pairs < 100) {
    std::uniform_int_distribution<std::size_t> nd(4, 8), cd(1, 3);
    auto n = nd(rng);
    auto g = fixtures::random_bridgeless(rng, n, cd(rng), pairs % 2 == 1);
    BranchAssignment br;
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      br.push_back(pairs % 4 >= 2 && (rng() & 1) ? Branch::reflected() : Branch::principal());
    auto ctx = fixtures::context(g, br);
    if (ctx.polytope().is_empty() || !ctx.polytope().is_full_dimensional()) continue;
    auto alpha = fixtures::random_interior(ctx, rng);
    double direct = ctx.W_jacobian(alpha).determinant();
    double tree = ctx.det_tree_formula(alpha);
    worst_det = std::max(worst_det, std::abs(tree - direct) / std::abs(direct));
    auto j = ctx.W_jacobian(alpha);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      const double h = 1e-6;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(alpha.size());
      d(i) = h;
      Eigen::VectorXd fd = (ctx.W(alpha + d) - ctx.W(alpha - d)) / (2 * h);
      worst_fd = std::max(worst_fd, (fd - j.col(i)).lpNorm<Eigen::Infinity>());
    }
    ++pairs;
  }
  std::size_t increases = 0, steps = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto g = fixtures::random_bridgeless(rng, 6, 3, trial % 2 == 1);
    std::vector<double> omega(g.num_vertices(), 0.0);
    if (trial % 3 == 0) {
      std::normal_distribution<double> nd(0, 0.3);
      double mean = 0;
      for (auto& w : omega) mean += (w = nd(rng));
      for (auto& w : omega) w -= mean / static_cast<double>(omega.size());
    }
    std::uniform_real_distribution<double> u(0, two_pi);
    std::vector<double> start(g.num_vertices());
    for (auto& t : start) t = u(rng);
    auto tr = simulate(g, start, omega, 1e-2, 20.0);
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
      double e0 = energy(g, tr.states[k - 1], omega), e1 = energy(g, tr.states[k], omega);
      ++steps;
      if (e1 > e0 + 1e-12 * (1 + std::abs(e0))) ++increases;
    }
  }
  bool ok = worst_det <= 1e-8 && worst_fd <= 1e-6 && increases == 0;
  return {ok, std::to_string(pairs) + " (graph, alpha) pairs: tree formula rel err " + fmt("%.2e", worst_det) +
                  ", Jacobian vs FD " + fmt("%.2e", worst_fd) + "; energy increases " + std::to_string(increases) +
                  "/" + std::to_string(steps) + " steps"};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all{
      {1, "diamond state (2,-1) reproduced and stable", 10, diamond_reproduction},
      {2, "perturbed diamond state returns within 1e-4 by T=50", 5, diamond_perturbation},
      {3, "face count equals twice the smoothed edge count", 30, face_count_check},
      {4, "enumeration agrees with the brute-force oracle", 300, oracle_equivalence},
      {5, "lattice counts approach the volume of W(A)", 300, weyl_desk_scale},
      {6, "two-cycle volume matches the closed form", 120, two_cycle_closed_form_check},
      {7, "sign-matched branches maximise the volume", 300, branch_maximisation},
      {8, "twisted states on rings: spectrum and ring criterion", 60, twisted_states},
      {9, "fundamental cycle bases span the integer lattice", 10, lattice_bases},
      {10, "tree formula, Jacobian and energy identities", 60, identity_suite},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double secs = seconds_since(t0);
    bool in_time = secs <= c.limit_seconds;
    bool pass = out.pass && in_time;
    failures += !pass;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.title << " | " << out.detail
              << " | " << fmt("%.1f", secs) << " s (limit " << fmt("%.0f", c.limit_seconds) << " s)"
              << (in_time ? "" : " OVER TIME") << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
