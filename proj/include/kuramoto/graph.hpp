/**
 * Weighted oriented graphs: validation, incidence structure, smoothing of
 * 2-valent vertices and edge subdivision.
 *
 * Edges are stored in input order and oriented tail -> head. An input graph
 * must be simple, connected and bridge-free; smoothed outputs are multigraphs
 * and skip those checks.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kuramoto {

enum class GraphErrorKind {
  malformed,
  unknown_vertex,
  duplicate_vertex,
  self_loop,
  duplicate_edge,
  zero_weight,
  disconnected,
  bridge,
  invalid_tree,
  invalid_basis,
};

inline const char* to_string(GraphErrorKind kind) {
  switch (kind) {
    case GraphErrorKind::malformed: return "malformed";
    case GraphErrorKind::unknown_vertex: return "unknown_vertex";
    case GraphErrorKind::duplicate_vertex: return "duplicate_vertex";
    case GraphErrorKind::self_loop: return "self_loop";
    case GraphErrorKind::duplicate_edge: return "duplicate_edge";
    case GraphErrorKind::zero_weight: return "zero_weight";
    case GraphErrorKind::disconnected: return "disconnected";
    case GraphErrorKind::bridge: return "bridge";
    case GraphErrorKind::invalid_tree: return "invalid_tree";
    case GraphErrorKind::invalid_basis: return "invalid_basis";
  }
  return "unknown";
}

/// Validation failure; `element()` names the offending vertex or edge.
class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrorKind kind, std::string element, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        element_(std::move(element)) {}

  GraphErrorKind kind() const noexcept { return kind_; }
  const std::string& element() const noexcept { return element_; }

 private:
  GraphErrorKind kind_;
  std::string element_;
};

struct Edge {
  std::size_t tail = 0;
  std::size_t head = 0;
  double weight = 1.0;
};

/// Small union-find used by the tree and connectivity routines.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// With `simple == true` the graph is validated as an input graph
  /// (no self-loops, no parallel edges, connected, bridge-free).
  WeightedGraph(std::vector<std::string> vertex_ids, std::vector<Edge> edges, bool simple = true)
      : ids_(std::move(vertex_ids)), edges_(std::move(edges)), simple_(simple) {
    validate();
  }

  std::size_t num_vertices() const noexcept { return ids_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  bool is_simple() const noexcept { return simple_; }

  /// Dimension of the cycle space, |E| - |V| + 1 for a connected graph.
  std::size_t cycle_rank() const noexcept {
    return edges_.size() + 1 - std::min(ids_.size(), edges_.size() + 1);
  }

  const std::vector<std::string>& vertex_ids() const noexcept { return ids_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }

  std::size_t vertex_index(const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw GraphError(GraphErrorKind::unknown_vertex, id, "unknown vertex '" + id + "'");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::string edge_label(std::size_t e) const {
    const auto& ed = edges_.at(e);
    return "edge " + std::to_string(e) + " (" + ids_[ed.tail] + "->" + ids_[ed.head] + ")";
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(ids_.size(), 0);
    for (const auto& e : edges_) {
      ++deg[e.tail];
      ++deg[e.head];
    }
    return deg;
  }

  /// Incident edge indices per vertex (a self-loop appears twice).
  std::vector<std::vector<std::size_t>> incident_edges() const {
    std::vector<std::vector<std::size_t>> inc(ids_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      inc[edges_[e].tail].push_back(e);
      inc[edges_[e].head].push_back(e);
    }
    return inc;
  }

  bool is_connected() const { return connected_without(std::numeric_limits<std::size_t>::max()); }

  /// True when deleting edge `skip` leaves the graph connected.
  bool connected_without(std::size_t skip) const {
    if (ids_.empty()) return false;
    DisjointSets sets(ids_.size());
    std::size_t components = ids_.size();
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (e == skip) continue;
      if (sets.unite(edges_[e].tail, edges_[e].head)) --components;
    }
    return components == 1;
  }

  std::vector<std::size_t> bridges() const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (edges_[e].tail != edges_[e].head && !connected_without(e)) out.push_back(e);
    }
    return out;
  }

  /// Cycle graph test: connected, every vertex of degree 2.
  bool is_ring() const {
    if (edges_.size() != ids_.size() || !is_connected()) return false;
    auto deg = degrees();
    return std::all_of(deg.begin(), deg.end(), [](std::size_t d) { return d == 2; });
  }

 private:
  void validate() const {
    if (ids_.empty()) throw GraphError(GraphErrorKind::malformed, "", "graph has no vertices");
    {
      std::set<std::string> seen;
      for (const auto& id : ids_) {
        if (!seen.insert(id).second)
          throw GraphError(GraphErrorKind::duplicate_vertex, id, "vertex '" + id + "' listed twice");
      }
    }
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& ed = edges_[e];
      if (ed.tail >= ids_.size() || ed.head >= ids_.size())
        throw GraphError(GraphErrorKind::unknown_vertex, "edge " + std::to_string(e),
                         "edge " + std::to_string(e) + " references a vertex outside the graph");
      if (!std::isfinite(ed.weight))
        throw GraphError(GraphErrorKind::malformed, edge_label(e), edge_label(e) + " has a non-finite weight");
      if (ed.weight == 0.0)
        throw GraphError(GraphErrorKind::zero_weight, edge_label(e), edge_label(e) + " has zero weight");
      if (!simple_) continue;
      if (ed.tail == ed.head)
        throw GraphError(GraphErrorKind::self_loop, edge_label(e), edge_label(e) + " is a self-loop");
      auto key = std::minmax(ed.tail, ed.head);
      if (!pairs.insert(key).second)
        throw GraphError(GraphErrorKind::duplicate_edge, edge_label(e), edge_label(e) + " duplicates an earlier edge");
    }
    if (!is_connected())
      throw GraphError(GraphErrorKind::disconnected, "", "graph is not connected");
    if (simple_) {
      auto br = bridges();
      if (!br.empty())
        throw GraphError(GraphErrorKind::bridge, edge_label(br.front()),
                         edge_label(br.front()) + " is a bridge: every spanning tree contains it");
    }
  }

  std::vector<std::string> ids_;
  std::vector<Edge> edges_;
  bool simple_ = true;
};

/**
 * Repeatedly replaces a 2-valent vertex and its two incident edges by a
 * single edge. A vertex whose only incidence is one self-loop is kept, so a
 * cycle smooths to one vertex carrying one loop. The result is a multigraph;
 * only its edge count is meaningful downstream (weights are set to 1).
 */
inline WeightedGraph smooth_two_valent(const WeightedGraph& g) {
  struct Link {
    std::size_t a, b;
    bool alive = true;
  };
  std::vector<Link> links;
  links.reserve(g.num_edges());
  for (const auto& e : g.edges()) links.push_back({e.tail, e.head});
  std::vector<bool> vertex_alive(g.num_vertices(), true);

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::vector<std::size_t>> inc(g.num_vertices());
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!links[i].alive) continue;
      inc[links[i].a].push_back(i);
      inc[links[i].b].push_back(i);
    }
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      if (!vertex_alive[v] || inc[v].size() != 2) continue;
      std::size_t e1 = inc[v][0], e2 = inc[v][1];
      if (e1 == e2) continue;  // lone self-loop
      std::size_t x = links[e1].a == v ? links[e1].b : links[e1].a;
      std::size_t y = links[e2].a == v ? links[e2].b : links[e2].a;
      links[e1].alive = false;
      links[e2].alive = false;
      links.push_back({x, y});
      vertex_alive[v] = false;
      changed = true;
      break;
    }
  }

  std::vector<std::size_t> remap(g.num_vertices(), 0);
  std::vector<std::string> ids;
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    if (!vertex_alive[v]) continue;
    remap[v] = ids.size();
    ids.push_back(g.vertex_ids()[v]);
  }
  std::vector<Edge> edges;
  for (const auto& l : links) {
    if (l.alive) edges.push_back({remap[l.a], remap[l.b], 1.0});
  }
  return WeightedGraph(std::move(ids), std::move(edges), false);
}

/// Base graph, per-edge positive rates and integer scale M.
struct SubdivisionScheme {
  WeightedGraph base;
  std::vector<double> rates;
  int scale = 1;
};

struct Subdivision {
  WeightedGraph graph;
  std::vector<std::size_t> parent_edge;  ///< base edge each new edge came from
};

/// Path length used for a base edge: ceil(rate * M), at least 1.
inline std::size_t subdivided_length(double rate, int scale) {
  double raw = rate * static_cast<double>(scale);
  // guard against 0.1 * 30 = 3.0000000000000004 style roundoff
  double n = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return static_cast<std::size_t>(std::max(1.0, n));
}

/**
 * Replaces each base edge by an oriented path of ceil(r_e * M) edges running
 * from the base tail to the base head. New edges inherit the parent weight;
 * `parent_edge` lets callers inherit branches and basis entries.
 */
inline Subdivision subdivide(const SubdivisionScheme& scheme) {
  const auto& g = scheme.base;
  if (scheme.scale < 1) throw std::invalid_argument("subdivision scale must be >= 1");
  if (scheme.rates.size() != g.num_edges()) throw std::invalid_argument("one rate per base edge required");
  for (double r : scheme.rates) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("subdivision rates must be positive");
  }

  std::vector<std::string> ids = g.vertex_ids();
  std::vector<Edge> edges;
  std::vector<std::size_t> parent;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& base = g.edge(e);
    std::size_t len = subdivided_length(scheme.rates[e], scheme.scale);
    std::size_t prev = base.tail;
    for (std::size_t k = 1; k <= len; ++k) {
      std::size_t next = base.head;
      if (k < len) {
        next = ids.size();
        ids.push_back("e" + std::to_string(e) + "." + std::to_string(k));
      }
      edges.push_back({prev, next, base.weight});
      parent.push_back(e);
      prev = next;
    }
  }
  return {WeightedGraph(std::move(ids), std::move(edges), g.is_simple()), std::move(parent)};
}

}  // namespace kuramoto
