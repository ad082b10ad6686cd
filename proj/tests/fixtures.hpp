// Shared graph builders for the test suites.
#pragma once

#include <kuramoto/kuramoto.hpp>

#include <random>
#include <string>
#include <vector>

namespace fixtures {

using kuramoto::Edge;
using kuramoto::WeightedGraph;

inline std::string data(const std::string& name) { return std::string(KURAMOTO_DATA_DIR) + "/" + name; }

inline std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 1; i <= n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

/// 1 -> 2 -> ... -> n -> 1
inline WeightedGraph cycle(std::size_t n, double w = 1.0) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, w});
  return WeightedGraph(numbered(n), edges);
}

inline WeightedGraph cycle_weighted(const std::vector<double>& w) {
  std::vector<Edge> edges;
  const auto n = w.size();
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, w[i]});
  return WeightedGraph(numbered(n), edges);
}

inline WeightedGraph triangle(double w1 = 1, double w2 = 1, double w3 = 1) { return cycle_weighted({w1, w2, w3}); }

/// Two hubs (vertices 0 and 1) joined by paths with the given edge counts.
inline WeightedGraph theta(const std::vector<std::size_t>& arms, double w = 1.0) {
  std::vector<std::string> ids{"1", "2"};
  std::vector<Edge> edges;
  std::size_t next = 2;
  for (auto len : arms) {
    std::size_t prev = 0;
    for (std::size_t k = 0; k + 1 < len; ++k) {
      ids.push_back(std::to_string(next + 1));
      edges.push_back({prev, next, w});
      prev = next++;
    }
    edges.push_back({prev, 1, w});
  }
  return WeightedGraph(ids, edges);
}

inline WeightedGraph complete(std::size_t n, double w = 1.0) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, w});
  return WeightedGraph(numbered(n), edges);
}

/// Two triangles sharing vertex 1.
inline WeightedGraph bowtie() {
  return WeightedGraph(numbered(5), {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {0, 3, 1}, {3, 4, 1}, {4, 0, 1}});
}

/// Random connected bridge-free simple graph: a Hamiltonian cycle plus chords.
inline WeightedGraph random_bridgeless(std::mt19937_64& rng, std::size_t n, std::size_t chords, bool mixed_signs = false) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Edge> edges;
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::uniform_real_distribution<double> wdist(0.5, 2.0);
  std::bernoulli_distribution flip(0.3);
  auto weight = [&] { return (mixed_signs && flip(rng) ? -1.0 : 1.0) * wdist(rng); };
  for (std::size_t i = 0; i < n; ++i) {
    auto a = perm[i], b = perm[(i + 1) % n];
    edges.push_back({a, b, weight()});
    used.insert(std::minmax(a, b));
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t tries = 0;
  while (chords > 0 && tries++ < 1000) {
    auto a = pick(rng), b = pick(rng);
    if (a == b || used.count(std::minmax(a, b))) continue;
    used.insert(std::minmax(a, b));
    if (std::bernoulli_distribution(0.5)(rng)) std::swap(a, b);
    edges.push_back({a, b, weight()});
    --chords;
  }
  return WeightedGraph(numbered(n), edges);
}

inline kuramoto::ModelContext context(const WeightedGraph& g, kuramoto::BranchAssignment br = {},
                                      std::vector<double> omega = {}) {
  if (br.empty()) br = kuramoto::uniform_branches(g.num_edges());
  return kuramoto::ModelContext(g, kuramoto::default_cycle_basis(g), br, omega);
}

/// Uniform sample from the bounding box of A, kept when it is at least `margin` inside A.
inline Eigen::VectorXd random_interior(const kuramoto::ModelContext& ctx, std::mt19937_64& rng, double margin = 0.02) {
  const auto& p = ctx.polytope();
  std::uniform_real_distribution<double> u(0, 1);
  for (int tries = 0; tries < 100000; ++tries) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(ctx.dim()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = p.box_lo()(i) + (p.box_hi()(i) - p.box_lo()(i)) * u(rng);
    if (p.min_slack(x) > margin && ctx.singular_gap(x) > margin) return x;
  }
  return p.chebyshev_center();
}

inline kuramoto::ModelContext diamond_context() {
  auto doc = kuramoto::load_graph_document(data("diamond.json"));
  return kuramoto::ModelContext(doc.graph, *doc.cycle_basis, doc.branches, doc.omega);
}

inline const std::vector<double>& diamond_theta() {
  static const std::vector<double> t{0.724472, 1.61811, 2.51175, 3.40538, 4.29902, 5.19266, 6.0863,
                                     0.696749, 1.59039, 3.05294, 4.5155,  5.97806, 1.15743, 2.61999,
                                     4.08254,  5.5451,  0.94095, 1.15743, 1.37391};
  return t;
}

}  // namespace fixtures
