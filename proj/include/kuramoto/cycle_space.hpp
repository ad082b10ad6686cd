/**
 * Incidence matrix, spanning trees and integer cycle bases.
 *
 * A cycle basis is stored row-wise: row i is the edge vector v_i, with
 * B v_i = 0 for the incidence matrix B.
 */
#pragma once

#include "exact.hpp"
#include "graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kuramoto {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using EdgeSet = std::vector<std::size_t>;

/// B_{ie} = +1 if i is the head of e, -1 if i is the tail, 0 otherwise.
inline IntMatrix incidence_matrix(const WeightedGraph& g) {
  IntMatrix b = IntMatrix::Zero(static_cast<Eigen::Index>(g.num_vertices()), static_cast<Eigen::Index>(g.num_edges()));
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    b(static_cast<Eigen::Index>(ed.head), static_cast<Eigen::Index>(e)) += 1;
    b(static_cast<Eigen::Index>(ed.tail), static_cast<Eigen::Index>(e)) -= 1;
  }
  return b;
}

struct CycleBasis {
  IntMatrix rows;                 ///< c x |E|
  std::optional<EdgeSet> tree;    ///< generating spanning tree, when fundamental

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

inline bool is_spanning_tree(const WeightedGraph& g, const EdgeSet& tree) {
  if (tree.size() + 1 != g.num_vertices()) return false;
  DisjointSets sets(g.num_vertices());
  std::vector<bool> used(g.num_edges(), false);
  for (auto e : tree) {
    if (e >= g.num_edges() || used[e]) return false;
    used[e] = true;
    if (!sets.unite(g.edge(e).tail, g.edge(e).head)) return false;
  }
  return true;
}

/// Breadth-first spanning tree from the first vertex, scanning edges in order.
inline EdgeSet default_spanning_tree(const WeightedGraph& g) {
  auto inc = g.incident_edges();
  std::vector<bool> seen(g.num_vertices(), false);
  EdgeSet tree;
  std::queue<std::size_t> frontier;
  seen[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    auto v = frontier.front();
    frontier.pop();
    auto edges = inc[v];
    std::sort(edges.begin(), edges.end());
    for (auto e : edges) {
      const auto& ed = g.edge(e);
      auto w = ed.tail == v ? ed.head : ed.tail;
      if (seen[w]) continue;
      seen[w] = true;
      tree.push_back(e);
      frontier.push(w);
    }
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

inline EdgeSet complement_edges(const WeightedGraph& g, const EdgeSet& tree) {
  std::vector<bool> in_tree(g.num_edges(), false);
  for (auto e : tree) in_tree[e] = true;
  EdgeSet out;
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (!in_tree[e]) out.push_back(e);
  return out;
}

/**
 * One row per co-tree edge e (in edge order): +1 on e, then the tree path
 * from head(e) back to tail(e) with +1 where the path follows an edge's
 * orientation and -1 where it runs against it.
 */
inline CycleBasis fundamental_cycle_basis(const WeightedGraph& g, const EdgeSet& tree) {
  if (!is_spanning_tree(g, tree))
    throw GraphError(GraphErrorKind::invalid_tree, "", "edge set is not a spanning tree");
  const auto n = g.num_vertices();

  // root the tree at vertex 0
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto e : tree) {
    adj[g.edge(e).tail].push_back(e);
    adj[g.edge(e).head].push_back(e);
  }
  std::vector<std::size_t> parent_edge(n, SIZE_MAX), depth(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto e : adj[v]) {
      auto w = g.edge(e).tail == v ? g.edge(e).head : g.edge(e).tail;
      if (seen[w]) continue;
      seen[w] = true;
      parent_edge[w] = e;
      depth[w] = depth[v] + 1;
      stack.push_back(w);
    }
  }
  auto parent_of = [&](std::size_t v) {
    const auto& ed = g.edge(parent_edge[v]);
    return ed.tail == v ? ed.head : ed.tail;
  };

  auto cotree = complement_edges(g, tree);
  CycleBasis basis;
  basis.rows = IntMatrix::Zero(static_cast<Eigen::Index>(cotree.size()), static_cast<Eigen::Index>(g.num_edges()));
  basis.tree = tree;
  for (std::size_t r = 0; r < cotree.size(); ++r) {
    auto ri = static_cast<Eigen::Index>(r);
    auto e = cotree[r];
    basis.rows(ri, static_cast<Eigen::Index>(e)) = 1;
    // walk head(e) -> tail(e) through the tree: climb from both ends to the
    // common ancestor, then orient the two halves.
    std::size_t from = g.edge(e).head, to = g.edge(e).tail;
    std::vector<std::pair<std::size_t, std::size_t>> up_from, up_to;  // (edge, lower vertex)
    while (depth[from] > depth[to]) { up_from.push_back({parent_edge[from], from}); from = parent_of(from); }
    while (depth[to] > depth[from]) { up_to.push_back({parent_edge[to], to}); to = parent_of(to); }
    while (from != to) {
      up_from.push_back({parent_edge[from], from});
      from = parent_of(from);
      up_to.push_back({parent_edge[to], to});
      to = parent_of(to);
    }
    // climbing from the head side we move lower -> upper
    for (auto [te, lower] : up_from) {
      basis.rows(ri, static_cast<Eigen::Index>(te)) += g.edge(te).tail == lower ? 1 : -1;
    }
    // descending to the tail side we move upper -> lower
    for (auto [te, lower] : up_to) {
      basis.rows(ri, static_cast<Eigen::Index>(te)) += g.edge(te).head == lower ? 1 : -1;
    }
  }
  return basis;
}

inline CycleBasis default_cycle_basis(const WeightedGraph& g) {
  return fundamental_cycle_basis(g, default_spanning_tree(g));
}

template <class Int = exact::Integer>
exact::Matrix<Int> to_exact(const IntMatrix& m) {
  exact::Matrix<Int> out(static_cast<std::size_t>(m.rows()), std::vector<Int>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Int(m(i, j));
  return out;
}

struct LatticeCheck {
  bool spans_lattice = false;               ///< all elementary divisors equal 1 and full rank
  std::vector<exact::Integer> divisors;
};

/// Exact Smith-normal-form test that the rows span Z^c.
inline LatticeCheck cycle_basis_lattice_check(const CycleBasis& basis) {
  LatticeCheck out;
  out.divisors = exact::elementary_divisors(to_exact(basis.rows));
  out.spans_lattice = out.divisors.size() == basis.size() &&
                      std::all_of(out.divisors.begin(), out.divisors.end(), [](const auto& d) { return d == 1; });
  return out;
}

/// Matrix-tree count on the underlying unweighted multigraph (loops ignored).
inline exact::Integer spanning_tree_count_exact(const WeightedGraph& g) {
  const auto n = g.num_vertices();
  if (n == 1) return 1;
  exact::Matrix<exact::Integer> lap(n - 1, std::vector<exact::Integer>(n - 1, 0));
  for (const auto& e : g.edges()) {
    if (e.tail == e.head) continue;
    auto add = [&](std::size_t i, std::size_t j, int v) {
      if (i > 0 && j > 0) lap[i - 1][j - 1] += v;
    };
    add(e.tail, e.tail, 1);
    add(e.head, e.head, 1);
    add(e.tail, e.head, -1);
    add(e.head, e.tail, -1);
  }
  return exact::bareiss_determinant(std::move(lap));
}

inline std::uint64_t spanning_tree_count(const WeightedGraph& g) {
  auto c = spanning_tree_count_exact(g);
  if (c > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("spanning tree count exceeds 64 bits");
  return c.convert_to<std::uint64_t>();
}

class TreeCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every spanning tree exactly once, as sorted edge sets in lexicographic order.
inline std::vector<EdgeSet> enumerate_spanning_trees(const WeightedGraph& g, std::uint64_t cap = 1'000'000) {
  auto count = spanning_tree_count_exact(g);
  if (count > cap)
    throw TreeCapExceeded("graph has " + count.str() + " spanning trees, above the cap of " + std::to_string(cap));
  const auto n = g.num_vertices();
  const auto m = g.num_edges();
  std::vector<EdgeSet> out;
  out.reserve(count.convert_to<std::size_t>());
  EdgeSet current;

  auto can_span = [&](std::size_t from, DisjointSets sets, std::size_t joined) {
    for (std::size_t e = from; e < m && joined + 1 < n; ++e)
      if (sets.unite(g.edge(e).tail, g.edge(e).head)) ++joined;
    return joined + 1 == n;
  };

  std::function<void(std::size_t, const DisjointSets&)> recurse = [&](std::size_t e, const DisjointSets& sets) {
    if (current.size() + 1 == n) {
      out.push_back(current);
      return;
    }
    if (e == m) return;
    DisjointSets with = sets;
    if (with.unite(g.edge(e).tail, g.edge(e).head)) {
      current.push_back(e);
      recurse(e + 1, with);
      current.pop_back();
    }
    if (can_span(e + 1, sets, current.size())) recurse(e + 1, sets);
  };
  recurse(0, DisjointSets(n));
  return out;
}

/// Exact check that every row lies in ker B.
inline bool rows_in_cycle_space(const WeightedGraph& g, const IntMatrix& rows) {
  if (rows.cols() != static_cast<Eigen::Index>(g.num_edges())) return false;
  IntMatrix prod = incidence_matrix(g) * rows.transpose();
  return prod.isZero();
}

/// Throws unless `basis` is a Z-basis of the integer cycle space of g.
inline void validate_cycle_basis(const WeightedGraph& g, const CycleBasis& basis) {
  if (basis.size() != g.cycle_rank())
    throw GraphError(GraphErrorKind::invalid_basis, "cycle_basis",
                     "cycle basis has " + std::to_string(basis.size()) + " rows, expected " +
                         std::to_string(g.cycle_rank()));
  if (!rows_in_cycle_space(g, basis.rows))
    throw GraphError(GraphErrorKind::invalid_basis, "cycle_basis", "cycle basis rows are not in the kernel of B");
  if (!cycle_basis_lattice_check(basis).spans_lattice)
    throw GraphError(GraphErrorKind::invalid_basis, "cycle_basis",
                     "cycle basis does not span the integer cycle space (elementary divisors != 1)");
}

/**
 * Integer matrix M with to.rows = M * from.rows, if one exists. Found by an
 * exact rational solve on the co-tree columns of a spanning tree and then
 * verified on every column.
 */
inline std::optional<IntMatrix> basis_change_matrix(const WeightedGraph& g, const CycleBasis& from, const CycleBasis& to) {
  const auto c = from.size();
  if (to.size() != c) return std::nullopt;
  auto cotree = complement_edges(g, default_spanning_tree(g));
  // columns of `from` restricted to the co-tree form an invertible c x c block
  exact::Matrix<exact::Rational> block(c, std::vector<exact::Rational>(c));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      block[j][i] = exact::Rational(from.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cotree[j])));
  IntMatrix m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
  for (std::size_t r = 0; r < c; ++r) {
    // row r of M solves  M_r * from_S = to_r,S   i.e.  from_S^T M_r^T = to_r,S^T
    std::vector<exact::Rational> rhs(c);
    for (std::size_t j = 0; j < c; ++j)
      rhs[j] = exact::Rational(to.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cotree[j])));
    auto sol = exact::solve(block, rhs);
    if (!sol) return std::nullopt;
    for (std::size_t i = 0; i < c; ++i) {
      if (boost::multiprecision::denominator((*sol)[i]) != 1) return std::nullopt;
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
          static_cast<long long>(boost::multiprecision::numerator((*sol)[i]));
    }
  }
  if (m * from.rows != to.rows) return std::nullopt;
  return m;
}

inline exact::Integer integer_determinant(const IntMatrix& m) {
  return exact::bareiss_determinant(to_exact(m));
}

}  // namespace kuramoto
