/**
 * Linear stability of steady states and fixed-step RK4 integration of
 *
 *   dtheta/dt = omega - B diag(gamma) sin(B^T theta).
 *
 * Stability is taken modulo the rotation zero mode along the all-ones vector.
 */
#pragma once

#include "enumeration.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace kuramoto {

enum class StabilityLabel { stable, unstable, marginal };
enum class StabilityCriterion { spectrum, ring_criterion, branch_shortcut };

inline std::string to_string(StabilityLabel l) {
  switch (l) {
    case StabilityLabel::stable: return "stable";
    case StabilityLabel::unstable: return "unstable";
    default: return "marginal";
  }
}

inline std::string to_string(StabilityCriterion c) {
  switch (c) {
    case StabilityCriterion::spectrum: return "spectrum";
    case StabilityCriterion::ring_criterion: return "ring_criterion";
    default: return "branch_shortcut";
  }
}

struct StabilityVerdict {
  StabilityLabel label = StabilityLabel::marginal;
  double max_nontrivial_eigenvalue = 0.0;
  std::vector<std::size_t> negative_cosine_edges;
  StabilityCriterion criterion_used = StabilityCriterion::spectrum;
  Eigen::VectorXd spectrum;  ///< nontrivial eigenvalues, ascending
};

inline constexpr double kSpectralThreshold = 1e-9;

/// -B diag(gamma_e cos theta_e) B^T.
inline Eigen::MatrixXd jacobian_at(const WeightedGraph& g, const std::vector<double>& theta) {
  if (theta.size() != g.num_vertices()) throw std::invalid_argument("theta needs one entry per vertex");
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    double w = e.weight * std::cos(theta[e.head] - theta[e.tail]);
    auto h = static_cast<Eigen::Index>(e.head), t = static_cast<Eigen::Index>(e.tail);
    j(h, h) -= w;
    j(t, t) -= w;
    j(h, t) += w;
    j(t, h) += w;
  }
  return j;
}

/// Eigenvalues of the Jacobian restricted to the complement of the all-ones vector.
inline Eigen::VectorXd nontrivial_spectrum(const Eigen::MatrixXd& j) {
  const auto n = j.rows();
  if (n <= 1) return Eigen::VectorXd();
  Eigen::MatrixXd ones_basis = Eigen::MatrixXd::Ones(n, 1) / std::sqrt(static_cast<double>(n));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones_basis);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd perp = q.rightCols(n - 1);
  Eigen::MatrixXd m = perp.transpose() * j * perp;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline StabilityVerdict classify_stability(const WeightedGraph& g, const std::vector<double>& theta) {
  StabilityVerdict v;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    if (ed.weight * std::cos(theta[ed.head] - theta[ed.tail]) < 0) v.negative_cosine_edges.push_back(e);
  }
  v.spectrum = nontrivial_spectrum(jacobian_at(g, theta));
  v.max_nontrivial_eigenvalue = v.spectrum.size() ? v.spectrum.maxCoeff() : -std::numeric_limits<double>::infinity();

  bool all_positive = true;
  for (const auto& ed : g.edges())
    if (!(ed.weight * std::cos(theta[ed.head] - theta[ed.tail]) > 0)) all_positive = false;
  if (all_positive) {
    v.label = StabilityLabel::stable;
    v.criterion_used = StabilityCriterion::branch_shortcut;
    return v;
  }
  if (v.max_nontrivial_eigenvalue >= kSpectralThreshold)
    v.label = StabilityLabel::unstable;
  else if (v.max_nontrivial_eigenvalue <= -kSpectralThreshold)
    v.label = StabilityLabel::stable;
  else
    v.label = StabilityLabel::marginal;
  return v;
}

inline StabilityVerdict classify_stability(const WeightedGraph& g, const SteadyState& s) {
  return classify_stability(g, s.theta);
}

// ---------------------------------------------------------------------------
// ring criterion

namespace detail {

/// sin^{-1} on the union (0, pi/2) u (pi, 3pi/2): value in the piece where sine has the sign of y.
inline double asin_plus(double y) {
  y = std::clamp(y, -1.0, 1.0);
  return y >= 0 ? std::asin(y) : pi - std::asin(y);
}

/// sin^{-1} on (pi/2, pi) u (3pi/2, 2pi).
inline double asin_minus(double y) {
  y = std::clamp(y, -1.0, 1.0);
  return y >= 0 ? pi - std::asin(y) : two_pi + std::asin(y);
}

}  // namespace detail

struct RingCriterionResult {
  bool unstable = false;   ///< a certificate; false means inconclusive
  bool tie = false;        ///< alpha or the comparison within 1e-12
  double alpha = 0.0;
  double total_angle = 0.0;
  double bound = 0.0;
};

/**
 * Edge angles are read in the traversal direction of the single basis cycle
 * and wrapped into [0, 2pi); alpha comes from gamma_e sin psi_e.
 */
inline RingCriterionResult ring_instability_check(const ModelContext& ctx, const std::vector<double>& theta) {
  const auto& g = ctx.graph();
  if (!g.is_ring()) throw std::invalid_argument("ring criterion needs a single-cycle graph");
  for (double w : ctx.omega())
    if (w != 0.0) throw std::invalid_argument("ring criterion needs omega = 0");
  const auto& v = ctx.basis().rows;
  const auto m = g.num_edges();
  std::vector<double> psi(m), gamma(m);
  RingCriterionResult r;
  double alpha_sum = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    const auto& ed = g.edge(e);
    double sgn = static_cast<double>(v(0, static_cast<Eigen::Index>(e)));
    double d = sgn * (theta[ed.head] - theta[ed.tail]);
    psi[e] = d - two_pi * std::floor(d / two_pi);
    gamma[e] = ed.weight;
    alpha_sum += ed.weight * std::sin(psi[e]);
  }
  r.alpha = alpha_sum / static_cast<double>(m);
  for (double p : psi) r.total_angle += p;
  if (std::abs(r.alpha) <= 1e-12) {
    r.tie = true;
    return r;
  }
  if (r.alpha > 0) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < m; ++e) {
      double s = detail::asin_minus(r.alpha / gamma[e]);
      for (std::size_t f = 0; f < m; ++f)
        if (f != e) s += detail::asin_plus(r.alpha / gamma[f]);
      best = std::max(best, s);
    }
    r.bound = best;
    r.tie = std::abs(r.total_angle - best) <= 1e-12;
    r.unstable = !r.tie && r.total_angle > best;
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < m; ++e) {
      double s = detail::asin_plus(r.alpha / gamma[e]);
      for (std::size_t f = 0; f < m; ++f)
        if (f != e) s += detail::asin_minus(r.alpha / gamma[f]);
      best = std::min(best, s);
    }
    r.bound = best;
    r.tie = std::abs(r.total_angle - best) <= 1e-12;
    r.unstable = !r.tie && r.total_angle < best;
  }
  return r;
}

inline bool ring_instability_criterion(const ModelContext& ctx, const SteadyState& s) {
  return ring_instability_check(ctx, s.theta).unstable;
}

inline bool ring_instability_criterion(const ModelContext& ctx, const std::vector<double>& theta) {
  return ring_instability_check(ctx, theta).unstable;
}

// ---------------------------------------------------------------------------
// dynamics

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  double terminal_residual = 0.0;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Right-hand side omega - B diag(gamma) sin(B^T theta).
inline void kuramoto_rhs(const WeightedGraph& g, const std::vector<double>& omega, const std::vector<double>& theta,
                         std::vector<double>& out) {
  const auto n = g.num_vertices();
  out.assign(n, 0.0);
  if (!omega.empty())
    for (std::size_t i = 0; i < n; ++i) out[i] = omega[i];
  for (const auto& e : g.edges()) {
    double f = e.weight * std::sin(theta[e.head] - theta[e.tail]);
    out[e.head] -= f;
    out[e.tail] += f;
  }
}

/// sum over edges of -gamma_e cos(theta_head - theta_tail) minus omega . theta
inline double energy(const WeightedGraph& g, const std::vector<double>& theta, const std::vector<double>& omega = {}) {
  double s = 0.0;
  for (const auto& e : g.edges()) s -= e.weight * std::cos(theta[e.head] - theta[e.tail]);
  for (std::size_t i = 0; i < omega.size(); ++i) s -= omega[i] * theta[i];
  return s;
}

struct SimulationOptions {
  std::size_t record_every = 1;  ///< store every n-th step (the last step is always stored)
};

inline Trajectory simulate(const WeightedGraph& g, std::vector<double> theta, const std::vector<double>& omega,
                           double dt, double horizon, SimulationOptions opt = {}) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= dt)) throw std::invalid_argument("T must be at least dt");
  if (theta.size() != g.num_vertices()) throw std::invalid_argument("theta0 needs one entry per vertex");
  if (!omega.empty() && omega.size() != g.num_vertices()) throw std::invalid_argument("omega needs one entry per vertex");
  opt.record_every = std::max<std::size_t>(opt.record_every, 1);

  const auto n = theta.size();
  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(theta);
  std::vector<double> k1, k2, k3, k4, tmp(n);
  for (std::size_t s = 1; s <= steps; ++s) {
    double h = std::min(dt, horizon - dt * static_cast<double>(s - 1));
    kuramoto_rhs(g, omega, theta, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = theta[i] + 0.5 * h * k1[i];
    kuramoto_rhs(g, omega, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = theta[i] + 0.5 * h * k2[i];
    kuramoto_rhs(g, omega, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = theta[i] + h * k3[i];
    kuramoto_rhs(g, omega, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!std::isfinite(theta[i])) throw SimulationError("non-finite state at step " + std::to_string(s));
    }
    if (s % opt.record_every == 0 || s == steps) {
      tr.times.push_back(std::min(horizon, dt * static_cast<double>(s)));
      tr.states.push_back(theta);
    }
  }
  tr.terminal_residual = fixed_point_residual(g, theta, omega);
  return tr;
}

/// Uniform perturbation on [-bound, bound]^n.
inline std::vector<double> perturb(const std::vector<double>& theta, double bound, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-bound, bound);
  auto out = theta;
  for (auto& t : out) t += u(rng);
  return out;
}

/// Max circular distance after the best global rotation (mean angular offset).
inline double gauge_aligned_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  if (a.empty()) return 0.0;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sx += std::cos(a[i] - b[i]);
    sy += std::sin(a[i] - b[i]);
  }
  double shift = std::atan2(sy, sx);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i] - shift;
    d -= two_pi * std::round(d / two_pi);
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace kuramoto
