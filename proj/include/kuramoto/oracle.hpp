/**
 * Brute-force steady-state search used to cross-check the enumeration.
 *
 * General graphs: a grid of starting points over the tree-edge angles, each
 * polished by Levenberg-Marquardt on the fixed-point equations plus a hinge
 * penalty keeping every edge angle in its branch. Rings: a scan over the
 * common edge flow with bisection, plus the analytic twisted states.
 */
#pragma once

#include "branch.hpp"
#include "cycle_space.hpp"
#include "graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kuramoto::oracle {

struct OracleState {
  std::vector<double> theta;           ///< gauge fixed, in [0, 2pi)
  std::vector<long long> winding;      ///< with respect to the supplied basis
};

struct OracleOptions {
  std::size_t grid_density = 5;        ///< starting values per tree edge
  std::size_t max_vertices = 7;
  double accept_residual = 1e-10;
  double dedupe = 1e-6;
};

inline double wrap_angle(double x) {
  x = std::fmod(x, two_pi);
  if (x < 0) x += two_pi;
  if (x >= two_pi) x -= two_pi;
  return x;
}

inline double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

namespace detail {

inline std::vector<double> gauge_fix(const std::vector<double>& theta) {
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = wrap_angle(theta[i] - theta[0]);
  for (auto& t : out)
    if (two_pi - t < 1e-12) t = 0.0;
  return out;
}

/// Signed excess of x beyond the branch (mod 2pi): 0 inside, +d above hi, -d below lo.
inline double hinge(const Branch& b, double x) {
  double shifted = x - two_pi * std::floor((x - b.lo()) / two_pi);
  if (shifted <= b.hi()) return 0.0;
  double above = shifted - b.hi(), below = b.lo() + two_pi - shifted;
  return above <= below ? above : -below;
}

inline bool add_unique(std::vector<std::vector<double>>& found, const std::vector<double>& theta, double tol) {
  for (const auto& f : found) {
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) d = std::max(d, circular_distance(f[i], theta[i]));
    if (d <= tol) return false;
  }
  found.push_back(theta);
  return true;
}

}  // namespace detail

/// Winding of a gauge-fixed state: v . phi / 2pi with phi_e the branch representative of theta_e.
inline std::vector<long long> winding_of(const WeightedGraph& g, const BranchAssignment& br, const IntMatrix& basis,
                                         const std::vector<double>& theta) {
  Eigen::VectorXd phi(static_cast<Eigen::Index>(g.num_edges()));
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    double x = theta[g.edge(e).head] - theta[g.edge(e).tail];
    double shifted = x - two_pi * std::floor((x - br[e].lo()) / two_pi);
    if (shifted > br[e].hi() + 0.5 * (two_pi - (br[e].hi() - br[e].lo()))) shifted -= two_pi;
    phi(static_cast<Eigen::Index>(e)) = shifted;
  }
  Eigen::VectorXd w = basis.cast<double>() * phi / two_pi;
  std::vector<long long> out;
  for (Eigen::Index i = 0; i < w.size(); ++i) out.push_back(std::llround(w(i)));
  return out;
}

/// Levenberg-Marquardt from theta (theta[0] held at 0). Returns the final residual norm.
inline double levenberg_marquardt(const WeightedGraph& g, const BranchAssignment& br, const std::vector<double>& omega,
                                  std::vector<double>& theta, int max_iter = 200) {
  const auto n = g.num_vertices();
  const auto m = g.num_edges();
  const auto un = static_cast<Eigen::Index>(n - 1);
  auto residual = [&](const std::vector<double>& th, Eigen::VectorXd& r) {
    r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + m));
    for (std::size_t i = 0; i < n; ++i) r(static_cast<Eigen::Index>(i)) = omega.empty() ? 0.0 : omega[i];
    for (std::size_t e = 0; e < m; ++e) {
      const auto& ed = g.edge(e);
      double x = th[ed.head] - th[ed.tail];
      double f = ed.weight * std::sin(x);
      r(static_cast<Eigen::Index>(ed.head)) -= f;
      r(static_cast<Eigen::Index>(ed.tail)) += f;
      r(static_cast<Eigen::Index>(n + e)) = detail::hinge(br[e], x);
    }
  };
  Eigen::VectorXd r;
  residual(theta, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iter && cost > 1e-26; ++it) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + m), un);
    for (std::size_t e = 0; e < m; ++e) {
      const auto& ed = g.edge(e);
      double x = theta[ed.head] - theta[ed.tail];
      double d = ed.weight * std::cos(x);
      auto add = [&](std::size_t row, std::size_t vertex, double val) {
        if (vertex == 0) return;
        j(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(vertex - 1)) += val;
      };
      // d r_head / d theta = -d * (dx/dtheta), x = theta_head - theta_tail
      add(ed.head, ed.head, -d);
      add(ed.head, ed.tail, d);
      add(ed.tail, ed.head, d);
      add(ed.tail, ed.tail, -d);
      if (detail::hinge(br[e], x) != 0.0) {
        add(n + e, ed.head, 1.0);
        add(n + e, ed.tail, -1.0);
      }
    }
    Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::VectorXd jtr = j.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
      Eigen::VectorXd step = -a.ldlt().solve(jtr);
      std::vector<double> trial = theta;
      for (Eigen::Index i = 0; i < un; ++i) trial[static_cast<std::size_t>(i + 1)] += step(i);
      Eigen::VectorXd r2;
      residual(trial, r2);
      double c2 = r2.squaredNorm();
      if (c2 < cost) {
        theta = trial;
        r = r2;
        cost = c2;
        lambda = std::max(1e-12, lambda * 0.3);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return std::sqrt(cost);
}

inline bool in_branches(const WeightedGraph& g, const BranchAssignment& br, const std::vector<double>& theta, double tol) {
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (!br[e].contains_mod_2pi(theta[g.edge(e).head] - theta[g.edge(e).tail], tol)) return false;
  return true;
}

inline double max_residual(const WeightedGraph& g, const std::vector<double>& theta, const std::vector<double>& omega) {
  std::vector<double> r(g.num_vertices(), 0.0);
  if (!omega.empty()) r = omega;
  for (const auto& e : g.edges()) {
    double f = e.weight * std::sin(theta[e.head] - theta[e.tail]);
    r[e.head] -= f;
    r[e.tail] += f;
  }
  double out = 0.0;
  for (double x : r) out = std::max(out, std::abs(x));
  return out;
}

namespace detail {

/// Edge-flow scan on a ring: gamma_e sin(theta_e) = s * v_e for one cycle vector v.
inline std::vector<std::vector<double>> ring_states(const WeightedGraph& g, const BranchAssignment& br,
                                                    const Eigen::VectorXd& v) {
  const auto m = g.num_edges();
  // admissible s: s v_e / gamma_e within sin(I_e)
  double smin = -std::numeric_limits<double>::infinity(), smax = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < m; ++e) {
    double coef = v(static_cast<Eigen::Index>(e)) / g.edge(e).weight;
    double a = br[e].sin_min() / coef, b = br[e].sin_max() / coef;
    smin = std::max(smin, std::min(a, b));
    smax = std::min(smax, std::max(a, b));
  }
  std::vector<std::vector<double>> out;
  if (!(smin <= smax)) return out;
  auto edge_angles = [&](double s) {
    std::vector<double> phi(m);
    for (std::size_t e = 0; e < m; ++e) {
      double y = s * v(static_cast<Eigen::Index>(e)) / g.edge(e).weight;
      phi[e] = br[e].inverse(std::clamp(y, br[e].sin_min(), br[e].sin_max()));
    }
    return phi;
  };
  auto total = [&](double s) {
    auto phi = edge_angles(s);
    double t = 0.0;
    for (std::size_t e = 0; e < m; ++e) t += v(static_cast<Eigen::Index>(e)) * phi[e];
    return t / two_pi;
  };
  auto to_theta = [&](double s) {
    auto phi = edge_angles(s);
    std::vector<double> theta(g.num_vertices(), 0.0);
    std::vector<bool> done(g.num_vertices(), false);
    done[0] = true;
    // walk the ring: all but one edge determine theta
    for (std::size_t pass = 0; pass < m; ++pass)
      for (std::size_t e = 0; e < m; ++e) {
        const auto& ed = g.edge(e);
        if (done[ed.tail] && !done[ed.head]) {
          theta[ed.head] = theta[ed.tail] + phi[e];
          done[ed.head] = true;
        } else if (done[ed.head] && !done[ed.tail]) {
          theta[ed.tail] = theta[ed.head] - phi[e];
          done[ed.tail] = true;
        }
      }
    return gauge_fix(theta);
  };

  const int samples = 20000;
  std::vector<double> grid(samples + 1), values(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    grid[static_cast<std::size_t>(i)] = smin + (smax - smin) * i / samples;
    values[static_cast<std::size_t>(i)] = total(grid[static_cast<std::size_t>(i)]);
  }
  std::vector<double> roots;
  for (double s : {smin, smax}) {
    double t = total(s);
    if (std::abs(t - std::round(t)) < 1e-9) roots.push_back(s);
  }
  for (int i = 0; i < samples; ++i) {
    double a = grid[static_cast<std::size_t>(i)], b = grid[static_cast<std::size_t>(i + 1)];
    double fa = values[static_cast<std::size_t>(i)], fb = values[static_cast<std::size_t>(i + 1)];
    double lo = std::min(fa, fb), hi = std::max(fa, fb);
    for (double q = std::ceil(lo); q <= hi; q += 1.0) {
      if ((q == fa && i > 0) || (q == fb && i + 1 < samples)) {
        if (q == fb) roots.push_back(b);
        continue;
      }
      double x0 = a, x1 = b, f0 = fa - q;
      for (int it = 0; it < 200 && x1 - x0 > 1e-16 * std::max(1.0, std::abs(x0)); ++it) {
        double xm = 0.5 * (x0 + x1);
        double fm = total(xm) - q;
        if ((fm < 0) == (f0 < 0)) {
          x0 = xm;
          f0 = fm;
        } else {
          x1 = xm;
        }
      }
      roots.push_back(0.5 * (x0 + x1));
    }
  }
  for (double s : roots) out.push_back(to_theta(s));
  return out;
}

/// BFS order from vertex 0 and the tree edge reaching each vertex.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> bfs_tree(const WeightedGraph& g) {
  const auto n = g.num_vertices();
  std::vector<std::size_t> parent_edge(n, SIZE_MAX), order{0};
  std::vector<bool> seen(n, false);
  seen[0] = true;
  auto inc = g.incident_edges();
  for (std::size_t head = 0; head < order.size(); ++head) {
    auto u = order[head];
    for (auto e : inc[u]) {
      auto w = g.edge(e).tail == u ? g.edge(e).head : g.edge(e).tail;
      if (seen[w]) continue;
      seen[w] = true;
      parent_edge[w] = e;
      order.push_back(w);
    }
  }
  return {order, parent_edge};
}

/**
 * Boundary states converge only linearly (the residual is quadratic in the
 * distance to sin = +-1). Tree-edge angles within 1e-3 of pi/2 mod pi are set
 * exactly and theta is rebuilt; the caller keeps whichever version fits better.
 */
inline std::vector<double> snap_boundary(const WeightedGraph& g, const std::vector<double>& theta) {
  auto [order, parent_edge] = bfs_tree(g);
  std::vector<double> out(theta.size(), 0.0);
  out[0] = theta[0];
  for (std::size_t pos = 1; pos < order.size(); ++pos) {
    auto w = order[pos];
    const auto& ed = g.edge(parent_edge[w]);
    double x = theta[ed.head] - theta[ed.tail];
    double q = std::round((x - pi / 2) / pi);
    if (std::abs(x - (pi / 2 + q * pi)) < 1e-3) x = pi / 2 + q * pi;
    out[w] = ed.head == w ? out[ed.tail] + x : out[ed.head] - x;
  }
  return out;
}

}  // namespace detail

/// All steady states with theta_e in I_e + 2pi Z, found by brute force.
inline std::vector<OracleState> brute_force_oracle(const WeightedGraph& g, const BranchAssignment& br,
                                                   const IntMatrix& basis, const std::vector<double>& omega = {},
                                                   const OracleOptions& opt = {}) {
  const auto n = g.num_vertices();
  std::vector<std::vector<double>> found;
  auto consider = [&](std::vector<double> theta) {
    auto snapped = detail::snap_boundary(g, theta);
    if (max_residual(g, snapped, omega) <= max_residual(g, theta, omega)) theta = snapped;
    theta = detail::gauge_fix(theta);
    if (max_residual(g, theta, omega) > opt.accept_residual * 10) return;
    if (!in_branches(g, br, theta, 1e-9)) return;
    detail::add_unique(found, theta, opt.dedupe);
  };

  const bool ring = g.is_ring();
  const bool zero_omega = std::all_of(omega.begin(), omega.end(), [](double w) { return w == 0.0; });
  if (ring && zero_omega) {
    for (auto& th : detail::ring_states(g, br, basis.row(0).cast<double>().transpose())) {
      // final LM touch-up keeps the residual independent of the scan resolution
      levenberg_marquardt(g, br, omega, th, 20);
      consider(th);
    }
    // analytic twisted candidates along the ring order
    if (std::all_of(g.edges().begin(), g.edges().end(), [&](const Edge& e) { return e.weight == g.edge(0).weight; })) {
      std::vector<std::size_t> order{0};
      std::vector<bool> seen(n, false);
      seen[0] = true;
      auto inc = g.incident_edges();
      while (order.size() < n) {
        auto u = order.back();
        bool moved = false;
        for (auto e : inc[u]) {
          auto w = g.edge(e).tail == u ? g.edge(e).head : g.edge(e).tail;
          if (!seen[w]) {
            seen[w] = true;
            order.push_back(w);
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
      for (long long q = -static_cast<long long>(n); q <= static_cast<long long>(n); ++q) {
        std::vector<double> theta(n);
        for (std::size_t i = 0; i < order.size(); ++i)
          theta[order[i]] = two_pi * static_cast<double>(q) * static_cast<double>(i) / static_cast<double>(n);
        consider(theta);
      }
    }
  } else {
    if (n > opt.max_vertices) throw std::invalid_argument("brute-force oracle limited to small graphs");
    if (n == 1) {
      consider({0.0});
    } else {
      // starting grid over the angles of a BFS tree, sampled inside each edge's branch
      auto [order, parent_edge] = detail::bfs_tree(g);
      const std::size_t d = opt.grid_density;
      std::size_t total = 1;
      for (std::size_t i = 1; i < n; ++i) total *= d;
      std::vector<std::size_t> digits(n, 0);
      for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (std::size_t i = 1; i < n; ++i) {
          digits[i] = rest % d;
          rest /= d;
        }
        std::vector<double> theta(n, 0.0);
        for (std::size_t pos = 1; pos < order.size(); ++pos) {
          auto w = order[pos];
          auto e = parent_edge[w];
          const auto& b = br[e];
          double frac = (static_cast<double>(digits[pos]) + 0.5) / static_cast<double>(d);
          double angle = b.lo() + frac * (b.hi() - b.lo());
          const auto& ed = g.edge(e);
          theta[w] = ed.head == w ? theta[ed.tail] + angle : theta[ed.head] - angle;
        }
        double res = levenberg_marquardt(g, br, omega, theta);
        if (res < 1e-8) consider(theta);
      }
    }
  }

  std::vector<OracleState> out;
  for (auto& th : found) out.push_back({th, winding_of(g, br, basis, th)});
  std::sort(out.begin(), out.end(), [](const OracleState& a, const OracleState& b) {
    if (a.winding != b.winding) return a.winding < b.winding;
    return a.theta < b.theta;
  });
  return out;
}

}  // namespace kuramoto::oracle
