/**
 * JSON and CSV serialisation of results. Key order is fixed (ordered_json) so
 * identical inputs give byte-identical documents.
 */
#pragma once

#include "enumeration.hpp"
#include "graph_io.hpp"
#include "measure.hpp"
#include "stability.hpp"

#include <json.hpp>

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace kuramoto::report {

using Json = nlohmann::ordered_json;

inline Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json branches_json(const BranchAssignment& br) {
  Json a = Json::array();
  for (const auto& b : br) a.push_back(Json::parse(branch_to_json(b).dump()));
  return a;
}

inline Json tolerances_json(const Tolerances& t) {
  return Json{{"residual", t.residual}, {"solver", t.solver}, {"boundary", t.boundary}};
}

inline Json state_json(const SteadyState& s) {
  return Json{{"winding", s.winding},
              {"alpha", vector_json(s.alpha)},
              {"theta", s.theta},
              {"edge_angles", vector_json(s.edge_angles)},
              {"lift", s.lift},
              {"boundary_flag", s.boundary_flag},
              {"residual", s.residual},
              {"min_slack", s.min_slack}};
}

inline Json verdict_json(const StabilityVerdict& v) {
  Json j{{"label", to_string(v.label)},
         {"max_nontrivial_eigenvalue", v.max_nontrivial_eigenvalue},
         {"negative_cosine_edges", v.negative_cosine_edges},
         {"criterion_used", to_string(v.criterion_used)}};
  return j;
}

inline Json enumeration_json(const EnumerationReport& r, bool with_time) {
  Json states = Json::array();
  for (const auto& s : r.states) states.push_back(state_json(s));
  Json failures = Json::array();
  for (const auto& f : r.solver_failures) failures.push_back(Json{{"winding", f.k}, {"diagnostic", f.diagnostic}});
  Json j{{"state_count", r.states.size()},
         {"states", states},
         {"candidates_tested", r.candidates_tested},
         {"excluded", r.excluded},
         {"solver_failures", failures},
         {"non_injective", r.non_injective},
         {"winding_box", Json{{"lo", r.winding_box.lo}, {"hi", r.winding_box.hi}}}};
  if (with_time) j["seconds"] = r.seconds;
  return j;
}

inline Json volume_json(const VolumeEstimate& v) {
  Json j{{"value", v.value},
         {"abs_error", v.abs_error},
         {"method", to_string(v.method)},
         {"samples_or_cells", v.samples_or_cells}};
  j["seed"] = v.seed ? Json(*v.seed) : Json(nullptr);
  return j;
}

inline Json weyl_row_json(const WeylRow& r) {
  return Json{{"M", r.M},
              {"lattice_count", r.lattice_count},
              {"ratio", r.ratio},
              {"target", r.target},
              {"target_error", r.target_error},
              {"solver_failures", r.solver_failures}};
}

inline Json maximize_json(const MaximizeReport& r) {
  Json alts = Json::array();
  for (const auto& a : r.alternatives)
    alts.push_back(Json{{"branches", branches_json(a.branches)}, {"volume", volume_json(a.volume)}});
  return Json{{"optimal", branches_json(r.optimal)},
              {"optimal_volume", volume_json(r.optimal_volume)},
              {"exhaustive", r.exhaustive},
              {"holds", r.holds},
              {"violations", r.violations},
              {"alternatives", alts}};
}

/// "time,theta_1,...,theta_N" with full precision.
inline void trajectory_csv(std::ostream& out, const Trajectory& tr, const std::vector<std::string>& ids) {
  out << "time";
  for (const auto& id : ids) out << ",theta_" << id;
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out << tr.times[k];
    for (double t : tr.states[k]) out << ',' << t;
    out << '\n';
  }
}

}  // namespace kuramoto::report
