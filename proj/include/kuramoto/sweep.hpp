/**
 * Enumeration over every principal/reflected branch assignment, with states
 * deduplicated by their gauge-fixed angles.
 */
#pragma once

#include "enumeration.hpp"

#include <cstdint>
#include <vector>

namespace kuramoto {

struct SweptState {
  std::vector<double> theta;
  std::vector<std::uint64_t> assignments;  ///< bit e set: edge e reflected
  Winding winding;                         ///< winding under the first assignment that found it
  bool boundary_flag = false;
};

struct SweepReport {
  std::size_t assignments = 0;
  std::size_t empty_assignments = 0;
  std::vector<SweptState> states;
  std::vector<std::pair<std::uint64_t, SolverFailure>> solver_failures;
};

inline constexpr std::size_t kSweepEdgeLimit = 12;

inline double max_circular_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = std::remainder(a[i] - b[i], two_pi);
    d = std::max(d, std::abs(x));
  }
  return d;
}

inline SweepReport sweep_branches(const WeightedGraph& g, const std::vector<double>& omega = {},
                                  const EnumerationOptions& opt = {}, const Tolerances& tol = {}) {
  const auto m = g.num_edges();
  if (m > kSweepEdgeLimit) throw std::invalid_argument("branch sweep is limited to 12 edges");
  const auto basis = default_cycle_basis(g);
  SweepReport rep;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    ++rep.assignments;
    BranchAssignment br(m, Branch::principal());
    for (std::size_t e = 0; e < m; ++e)
      if (mask >> e & 1) br[e] = Branch::reflected();
    ModelContext ctx(g, basis, br, omega, tol);
    if (ctx.polytope().is_empty()) {
      ++rep.empty_assignments;
      continue;
    }
    auto er = enumerate_states(ctx, opt);
    for (auto& f : er.solver_failures) rep.solver_failures.emplace_back(mask, f);
    for (const auto& s : er.states) {
      bool merged = false;
      for (auto& known : rep.states) {
        if (max_circular_distance(known.theta, s.theta) <= 1e-6) {
          known.assignments.push_back(mask);
          merged = true;
          break;
        }
      }
      if (!merged) rep.states.push_back({s.theta, {mask}, s.winding, s.boundary_flag});
    }
  }
  return rep;
}

}  // namespace kuramoto
