/**
 * JSON graph documents.
 *
 *   {"vertices": [id, ...],
 *    "edges": [{"tail": id, "head": id, "weight": w, "branch": b}, ...],
 *    "omega": [w_1, ...],            optional
 *    "cycle_basis": [[...], ...]}    optional, one integer row per cycle
 *
 * Ids may be strings or integers. "branch" is "principal", "reflected" or a
 * two-element array [lo, hi]. Edge order in the file is the edge order.
 */
#pragma once

#include "branch.hpp"
#include "cycle_space.hpp"
#include "graph.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kuramoto {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphDocument {
  WeightedGraph graph;
  BranchAssignment branches;            ///< principal where the file says nothing
  bool branches_given = false;
  std::vector<double> omega;            ///< zeros when absent
  std::optional<CycleBasis> cycle_basis;
};

namespace detail {

inline std::string id_text(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw GraphError(GraphErrorKind::malformed, where, where + ": vertex id must be a string or an integer");
}

inline Branch parse_branch(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "principal") return Branch::principal();
    if (s == "reflected") return Branch::reflected();
    throw GraphError(GraphErrorKind::malformed, where, where + ": unknown branch '" + s + "'");
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    try {
      return Branch(j[0].get<double>(), j[1].get<double>());
    } catch (const std::invalid_argument& e) {
      throw GraphError(GraphErrorKind::malformed, where, where + ": " + e.what());
    }
  }
  throw GraphError(GraphErrorKind::malformed, where, where + ": branch must be a name or [lo, hi]");
}

}  // namespace detail

inline nlohmann::json branch_to_json(const Branch& b) {
  if (b.is_principal()) return "principal";
  if (b.is_reflected()) return "reflected";
  return nlohmann::json::array({b.lo(), b.hi()});
}

inline GraphDocument parse_graph_document(const nlohmann::json& doc) {
  using detail::id_text;
  if (!doc.is_object()) throw GraphError(GraphErrorKind::malformed, "", "graph document must be a JSON object");
  if (!doc.contains("vertices") || !doc["vertices"].is_array())
    throw GraphError(GraphErrorKind::malformed, "vertices", "missing 'vertices' array");
  if (!doc.contains("edges") || !doc["edges"].is_array())
    throw GraphError(GraphErrorKind::malformed, "edges", "missing 'edges' array");

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < doc["vertices"].size(); ++i)
    ids.push_back(id_text(doc["vertices"][i], "vertices[" + std::to_string(i) + "]"));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  std::vector<Edge> edges;
  GraphDocument out;
  for (std::size_t e = 0; e < doc["edges"].size(); ++e) {
    const auto& je = doc["edges"][e];
    const std::string where = "edges[" + std::to_string(e) + "]";
    if (!je.is_object() || !je.contains("tail") || !je.contains("head"))
      throw GraphError(GraphErrorKind::malformed, where, where + ": edge needs 'tail' and 'head'");
    auto t = id_text(je["tail"], where), h = id_text(je["head"], where);
    auto ti = index.find(t), hi = index.find(h);
    if (ti == index.end()) throw GraphError(GraphErrorKind::unknown_vertex, where, where + ": unknown vertex '" + t + "'");
    if (hi == index.end()) throw GraphError(GraphErrorKind::unknown_vertex, where, where + ": unknown vertex '" + h + "'");
    double w = 1.0;
    if (je.contains("weight")) {
      if (!je["weight"].is_number()) throw GraphError(GraphErrorKind::malformed, where, where + ": weight must be a number");
      w = je["weight"].get<double>();
    }
    edges.push_back({ti->second, hi->second, w});
    if (je.contains("branch")) {
      out.branches.push_back(detail::parse_branch(je["branch"], where));
      out.branches_given = true;
    } else {
      out.branches.push_back(Branch::principal());
    }
  }
  out.graph = WeightedGraph(std::move(ids), std::move(edges), true);

  out.omega.assign(out.graph.num_vertices(), 0.0);
  if (doc.contains("omega") && !doc["omega"].is_null()) {
    const auto& jo = doc["omega"];
    if (!jo.is_array() || jo.size() != out.graph.num_vertices())
      throw GraphError(GraphErrorKind::malformed, "omega", "'omega' must list one number per vertex");
    for (std::size_t i = 0; i < jo.size(); ++i) {
      if (!jo[i].is_number()) throw GraphError(GraphErrorKind::malformed, "omega", "'omega' entries must be numbers");
      out.omega[i] = jo[i].get<double>();
    }
  }

  if (doc.contains("cycle_basis") && !doc["cycle_basis"].is_null()) {
    const auto& jb = doc["cycle_basis"];
    if (!jb.is_array()) throw GraphError(GraphErrorKind::malformed, "cycle_basis", "'cycle_basis' must be an array of rows");
    CycleBasis basis;
    basis.rows = IntMatrix::Zero(static_cast<Eigen::Index>(jb.size()), static_cast<Eigen::Index>(out.graph.num_edges()));
    for (std::size_t r = 0; r < jb.size(); ++r) {
      if (!jb[r].is_array() || jb[r].size() != out.graph.num_edges())
        throw GraphError(GraphErrorKind::invalid_basis, "cycle_basis", "each cycle_basis row needs one integer per edge");
      for (std::size_t e = 0; e < jb[r].size(); ++e) {
        if (!jb[r][e].is_number_integer())
          throw GraphError(GraphErrorKind::invalid_basis, "cycle_basis", "cycle_basis entries must be integers");
        basis.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e)) = jb[r][e].get<long long>();
      }
    }
    validate_cycle_basis(out.graph, basis);
    out.cycle_basis = std::move(basis);
  }
  return out;
}

inline GraphDocument load_graph_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw GraphError(GraphErrorKind::malformed, path, std::string("invalid JSON: ") + e.what());
  }
  return parse_graph_document(doc);
}

inline WeightedGraph load_graph(const std::string& path) { return load_graph_document(path).graph; }

inline nlohmann::json graph_to_json(const WeightedGraph& g, const BranchAssignment* branches = nullptr,
                                    const std::vector<double>* omega = nullptr) {
  nlohmann::json doc;
  doc["vertices"] = g.vertex_ids();
  doc["edges"] = nlohmann::json::array();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    nlohmann::json je{{"tail", g.vertex_ids()[ed.tail]}, {"head", g.vertex_ids()[ed.head]}, {"weight", ed.weight}};
    if (branches) je["branch"] = branch_to_json((*branches)[e]);
    doc["edges"].push_back(je);
  }
  if (omega) doc["omega"] = *omega;
  return doc;
}

}  // namespace kuramoto
