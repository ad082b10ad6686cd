/**
 * Steady states from lattice points of W(A): root finding for W(alpha) = k,
 * reconstruction of the angle vector and the full enumeration driver.
 */
#pragma once

#include "parallel.hpp"
#include "winding_map.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kuramoto {

using Winding = std::vector<long long>;

struct SteadyState {
  std::vector<double> theta;        ///< gauge fixed (first vertex 0), each in [0, 2pi)
  Eigen::VectorXd alpha;
  Winding winding;
  std::vector<long long> lift;      ///< K, supported on co-tree edges
  Eigen::VectorXd edge_angles;      ///< branch angles phi_e = sin_I^{-1} L(alpha)_e
  bool boundary_flag = false;
  double residual = 0.0;
  double min_slack = 0.0;           ///< distance of L(alpha) to the edge of sin(I)
};

class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A root (alpha, phi) of  sin(phi) = L(alpha),  V phi = 2 pi k,  phi_e in I_e.
struct WindingRoot {
  Eigen::VectorXd alpha;
  Eigen::VectorXd phi;
  double residual = 0.0;
  int iterations = 0;
};

enum class SolveStatus { found, excluded, failure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::found: return "found";
    case SolveStatus::excluded: return "excluded";
    case SolveStatus::failure: return "failure";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::failure;
  std::vector<WindingRoot> roots;   ///< more than one only when W is not injective
  std::string method;
  std::string diagnostic;
  std::size_t cells = 0;
};

struct SolveOptions {
  double activation = 1e-3;          ///< edges this close to the edge of sin(I) get a free angle
  int max_polish_iterations = 200;
  double barrier_gap = 1e-12;
  double polish_threshold = 1e-2;    ///< barrier residual below which a root is polished
  std::size_t cell_budget = 200000;
  double leaf_width = 0.05;
};

namespace detail {

inline double distance_to_range(const Branch& br, double y) {
  return std::min(y - br.sin_min(), br.sin_max() - y);
}

inline bool near_edge(const Branch& br, double y, double activation) {
  return distance_to_range(br, y) < activation || 1.0 - std::abs(y) < activation;
}

}  // namespace detail

/**
 * Gauss-Newton on the lifted system. Edges whose L value sits near the edge of
 * its sine range carry their own angle unknown; the others use the branch
 * inverse directly. Returns the root when the residual drops to 1e-12.
 */
inline std::optional<WindingRoot> polish_root(const ModelContext& ctx, Eigen::VectorXd alpha, const Eigen::VectorXd& k,
                                              const SolveOptions& opt = {}) {
  const auto m_full = static_cast<Eigen::Index>(ctx.num_edges());
  const auto c = static_cast<Eigen::Index>(ctx.dim());

  // edges with the same L row, offset and branch always share their angle
  std::vector<Eigen::Index> cls(static_cast<std::size_t>(m_full)), rep;
  {
    std::map<std::vector<double>, Eigen::Index> seen;
    for (Eigen::Index e = 0; e < m_full; ++e) {
      const auto& b = ctx.branches()[static_cast<std::size_t>(e)];
      std::vector<double> key;
      for (Eigen::Index i = 0; i < c; ++i) key.push_back(ctx.l_matrix()(e, i));
      key.push_back(ctx.l_offset()(e));
      key.push_back(b.lo());
      key.push_back(b.hi());
      auto [it, fresh] = seen.emplace(std::move(key), static_cast<Eigen::Index>(rep.size()));
      if (fresh) rep.push_back(e);
      cls[static_cast<std::size_t>(e)] = it->second;
    }
  }
  const auto m = static_cast<Eigen::Index>(rep.size());
  Eigen::MatrixXd lm(m, c), v = Eigen::MatrixXd::Zero(c, m);
  Eigen::VectorXd off(m);
  BranchAssignment br;
  for (Eigen::Index r = 0; r < m; ++r) {
    lm.row(r) = ctx.l_matrix().row(rep[static_cast<std::size_t>(r)]);
    off(r) = ctx.l_offset()(rep[static_cast<std::size_t>(r)]);
    br.push_back(ctx.branches()[static_cast<std::size_t>(rep[static_cast<std::size_t>(r)])]);
  }
  for (Eigen::Index e = 0; e < m_full; ++e) v.col(cls[static_cast<std::size_t>(e)]) += ctx.basis_matrix().col(e);
  auto lmap = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd { return off + lm * a; };

  std::vector<bool> active(static_cast<std::size_t>(m), false);
  Eigen::VectorXd phi(m);
  {
    Eigen::VectorXd l = lmap(alpha);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto& b = br[static_cast<std::size_t>(e)];
      double y = std::clamp(l(e), b.sin_min(), b.sin_max());
      phi(e) = b.inverse(y);
      if (detail::near_edge(b, l(e), opt.activation) || l(e) != y) active[static_cast<std::size_t>(e)] = true;
    }
  }

  // residual: [sin phi_a - L_a ; V phi / 2pi - k]; false if an inactive edge leaves its range
  auto residual = [&](const Eigen::VectorXd& a, Eigen::VectorXd& ph, Eigen::VectorXd& f) -> bool {
    Eigen::VectorXd l = lmap(a);
    f.resize(m + c);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto& b = br[static_cast<std::size_t>(e)];
      if (active[static_cast<std::size_t>(e)]) {
        f(e) = std::sin(ph(e)) - l(e);
      } else {
        if (l(e) < b.sin_min() - Branch::clamp_tolerance || l(e) > b.sin_max() + Branch::clamp_tolerance) return false;
        ph(e) = b.inverse(l(e));
        f(e) = 0.0;
      }
    }
    f.tail(c) = v * ph / two_pi - k;
    return true;
  };

  Eigen::VectorXd f;
  if (!residual(alpha, phi, f)) return std::nullopt;
  double norm = f.lpNorm<Eigen::Infinity>();
  int iter = 0;
  for (; iter < opt.max_polish_iterations && norm > 1e-14; ++iter) {
    // Jacobian in the unknowns (alpha, phi_active)
    std::vector<Eigen::Index> act;
    for (Eigen::Index e = 0; e < m; ++e)
      if (active[static_cast<std::size_t>(e)]) act.push_back(e);
    const auto na = static_cast<Eigen::Index>(act.size());
    Eigen::VectorXd l = lmap(alpha);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(na + c, c + na);
    Eigen::VectorXd rhs(na + c);
    for (Eigen::Index r = 0; r < na; ++r) {
      auto e = act[static_cast<std::size_t>(r)];
      j.block(r, 0, 1, c) = -lm.row(e);
      j(r, c + r) = std::cos(phi(e));
      rhs(r) = f(e);
    }
    Eigen::MatrixXd wpart = Eigen::MatrixXd::Zero(c, c);
    for (Eigen::Index e = 0; e < m; ++e) {
      if (active[static_cast<std::size_t>(e)]) continue;
      double d = br[static_cast<std::size_t>(e)].inverse_derivative(l(e));
      wpart += v.col(e) * (d * lm.row(e)) / two_pi;
    }
    j.block(na, 0, c, c) = wpart;
    for (Eigen::Index r = 0; r < na; ++r) j.block(na, c + r, c, 1) = v.col(act[static_cast<std::size_t>(r)]) / two_pi;
    rhs.tail(c) = f.tail(c);
    Eigen::VectorXd step = -j.completeOrthogonalDecomposition().solve(rhs);

    bool improved = false;
    for (double t = 1.0; t > 1e-10; t *= 0.5) {
      Eigen::VectorXd a2 = alpha + t * step.head(c);
      Eigen::VectorXd ph2 = phi;
      for (Eigen::Index r = 0; r < na; ++r) {
        auto e = act[static_cast<std::size_t>(r)];
        const auto& b = br[static_cast<std::size_t>(e)];
        ph2(e) = std::clamp(phi(e) + t * step(c + r), b.lo(), b.hi());
      }
      Eigen::VectorXd f2;
      if (!residual(a2, ph2, f2)) continue;
      double n2 = f2.lpNorm<Eigen::Infinity>();
      if (n2 < norm) {
        alpha = a2;
        phi = ph2;
        f = f2;
        norm = n2;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    // grow the active set when an inactive edge approaches its range edge
    Eigen::VectorXd l2 = lmap(alpha);
    bool grew = false;
    for (Eigen::Index e = 0; e < m; ++e) {
      auto ue = static_cast<std::size_t>(e);
      if (!active[ue] && detail::near_edge(br[ue], l2(e), opt.activation)) {
        active[ue] = true;
        grew = true;
      }
    }
    if (grew && !residual(alpha, phi, f)) return std::nullopt;
    norm = f.lpNorm<Eigen::Infinity>();
  }
  if (norm > 1e-12) return std::nullopt;
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& b = br[static_cast<std::size_t>(e)];
    if (phi(e) < b.lo() || phi(e) > b.hi()) return std::nullopt;
  }
  Eigen::VectorXd phi_full(m_full);
  for (Eigen::Index e = 0; e < m_full; ++e) phi_full(e) = phi(cls[static_cast<std::size_t>(e)]);
  return WindingRoot{alpha, phi_full, norm, iter};
}

/**
 * Root search restricted to a face of A: edges with |L_e| within `tol` of 1
 * are pinned to the branch point where sin = +-1, alpha is projected onto the
 * affine set they cut out and W = k is solved there by Gauss-Newton. Handles
 * roots at vertices of A, where the lifted system above is singular.
 */
inline std::optional<WindingRoot> polish_on_face(const ModelContext& ctx, const Eigen::VectorXd& alpha0,
                                                 const Eigen::VectorXd& k, double tol, int max_iter = 100) {
  const auto m = static_cast<Eigen::Index>(ctx.num_edges());
  const auto c = static_cast<Eigen::Index>(ctx.dim());
  const auto& lm = ctx.l_matrix();
  const auto& off = ctx.l_offset();
  const auto& v = ctx.basis_matrix();
  Eigen::VectorXd l0 = ctx.L(alpha0);
  std::vector<Eigen::Index> pinned, free_edges;
  std::vector<double> target;
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& b = ctx.branches()[static_cast<std::size_t>(e)];
    if (b.sin_max() >= 1.0 && 1.0 - l0(e) <= tol) {
      pinned.push_back(e);
      target.push_back(1.0);
    } else if (b.sin_min() <= -1.0 && 1.0 + l0(e) <= tol) {
      pinned.push_back(e);
      target.push_back(-1.0);
    } else {
      free_edges.push_back(e);
    }
  }
  if (pinned.empty()) return std::nullopt;
  const auto np = static_cast<Eigen::Index>(pinned.size());
  Eigen::MatrixXd a(np, c);
  Eigen::VectorXd rhs(np);
  for (Eigen::Index r = 0; r < np; ++r) {
    a.row(r) = lm.row(pinned[static_cast<std::size_t>(r)]);
    rhs(r) = target[static_cast<std::size_t>(r)] - off(pinned[static_cast<std::size_t>(r)]);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-10);
  Eigen::VectorXd base = alpha0 + cod.solve(rhs - a * alpha0);
  if ((a * base - rhs).lpNorm<Eigen::Infinity>() > 1e-10) return std::nullopt;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  Eigen::MatrixXd null;
  if (lu.rank() < c) null = Eigen::HouseholderQR<Eigen::MatrixXd>(lu.kernel()).householderQ() *
                            Eigen::MatrixXd::Identity(c, c - lu.rank());
  else null = Eigen::MatrixXd::Zero(c, 0);

  Eigen::VectorXd phi(m);
  for (Eigen::Index r = 0; r < np; ++r)
    phi(pinned[static_cast<std::size_t>(r)]) =
        ctx.branches()[static_cast<std::size_t>(pinned[static_cast<std::size_t>(r)])].inverse(target[static_cast<std::size_t>(r)]);
  auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& ph, Eigen::VectorXd& f) -> bool {
    Eigen::VectorXd l = ctx.L(x);
    for (auto e : free_edges) {
      const auto& b = ctx.branches()[static_cast<std::size_t>(e)];
      if (l(e) < b.sin_min() - Branch::clamp_tolerance || l(e) > b.sin_max() + Branch::clamp_tolerance) return false;
      ph(e) = b.inverse(l(e));
    }
    f = v * ph / two_pi - k;
    return true;
  };

  Eigen::VectorXd x = base, f;
  if (!evaluate(x, phi, f)) return std::nullopt;
  double norm = f.lpNorm<Eigen::Infinity>();
  int iter = 0;
  for (; iter < max_iter && norm > 1e-14 && null.cols() > 0; ++iter) {
    Eigen::VectorXd l = ctx.L(x);
    Eigen::MatrixXd jw = Eigen::MatrixXd::Zero(c, c);
    for (auto e : free_edges) {
      if (1.0 - std::abs(l(e)) < 1e-14) return std::nullopt;
      double d = ctx.branches()[static_cast<std::size_t>(e)].inverse_derivative(l(e));
      jw += v.col(e) * (d * lm.row(e)) / two_pi;
    }
    Eigen::MatrixXd j = jw * null;
    Eigen::VectorXd step = -j.completeOrthogonalDecomposition().solve(f);
    bool improved = false;
    for (double t = 1.0; t > 1e-10; t *= 0.5) {
      Eigen::VectorXd x2 = x + t * (null * step);
      Eigen::VectorXd ph2 = phi, f2;
      if (!evaluate(x2, ph2, f2)) continue;
      double n2 = f2.lpNorm<Eigen::Infinity>();
      if (n2 < norm) {
        x = x2;
        phi = ph2;
        f = f2;
        norm = n2;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (norm > 1e-12) return std::nullopt;
  return WindingRoot{x, phi, norm, iter};
}

/// polish_root, then polish_on_face over a ladder of pinning tolerances.
inline std::optional<WindingRoot> polish_any(const ModelContext& ctx, const Eigen::VectorXd& alpha,
                                             const Eigen::VectorXd& k, const SolveOptions& opt = {}) {
  if (auto root = polish_root(ctx, alpha, k, opt)) return root;
  for (double tol : {1e-8, 1e-6, 1e-4, 1e-2})
    if (auto root = polish_on_face(ctx, alpha, k, tol)) return root;
  return std::nullopt;
}

namespace detail {

/// Log-barrier minimisation of sigma * (Psi(alpha) - k.alpha) over A.
inline Eigen::VectorXd barrier_minimise(const ModelContext& ctx, const Eigen::VectorXd& k, const SolveOptions& opt) {
  const auto& poly = ctx.polytope();
  const auto& reps = poly.representatives();
  const auto c = static_cast<Eigen::Index>(ctx.dim());
  const double sigma = ctx.definite_sign();
  std::vector<Eigen::VectorXd> a;
  std::vector<double> b;
  for (auto r : reps) {
    const auto& h = poly.constraints()[r];
    double n = h.a.norm();
    a.push_back(h.a / n);
    b.push_back(h.b / n);
  }
  auto feasible = [&](const Eigen::VectorXd& x) {
    for (std::size_t j = 0; j < a.size(); ++j)
      if (b[j] - a[j].dot(x) <= 0) return false;
    Eigen::VectorXd l = ctx.L(x);
    for (Eigen::Index e = 0; e < l.size(); ++e) {
      const auto& br = ctx.branches()[static_cast<std::size_t>(e)];
      if (!(l(e) > br.sin_min() && l(e) < br.sin_max()) || !(std::abs(l(e)) < 1.0)) return false;
    }
    return true;
  };
  auto objective = [&](double t, const Eigen::VectorXd& x) {
    double f = t * sigma * (ctx.potential(x) - k.dot(x));
    for (std::size_t j = 0; j < a.size(); ++j) f -= std::log(b[j] - a[j].dot(x));
    return f;
  };

  Eigen::VectorXd x = poly.chebyshev_center();
  if (!feasible(x)) return x;
  const double mcount = static_cast<double>(a.size());
  for (double t = 1.0; mcount / t > opt.barrier_gap; t *= 8.0) {
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd l = ctx.L(x);
      Eigen::VectorXd g = t * sigma * (ctx.winding_of_angles(ctx.edge_angles_from_L(l)) - k);
      Eigen::MatrixXd h = t * sigma * ctx.jacobian_from_L(l);
      for (std::size_t j = 0; j < a.size(); ++j) {
        double s = b[j] - a[j].dot(x);
        g += a[j] / s;
        h += a[j] * a[j].transpose() / (s * s);
      }
      Eigen::VectorXd dx = -h.ldlt().solve(g);
      double dec = -g.dot(dx);
      if (!std::isfinite(dec)) break;
      if (dec < 1e-14) break;
      double f0 = objective(t, x);
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        Eigen::VectorXd y = x + step * dx;
        if (!feasible(y)) continue;
        double f1 = objective(t, y);
        if (f1 <= f0 - 1e-4 * step * dec || dec < 1e-8) {
          x = y;
          moved = true;
          break;
        }
      }
      if (!moved) break;
      if (dec < 1e-12) break;
    }
  }
  return x;
}

inline Eigen::VectorXd pull_inside(const ModelContext& ctx, const Eigen::VectorXd& x) {
  const auto& poly = ctx.polytope();
  const auto& centre = poly.chebyshev_center();
  if (poly.min_slack(x) > 0) return x;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (poly.min_slack(centre + mid * (x - centre)) > 0) lo = mid;
    else hi = mid;
  }
  return centre + lo * (x - centre);
}

inline bool same_root(const WindingRoot& a, const WindingRoot& b) {
  return (a.alpha - b.alpha).lpNorm<Eigen::Infinity>() <= 1e-8 * std::max(1.0, a.alpha.lpNorm<Eigen::Infinity>());
}

/// Interval branch and bound over alpha-boxes for indefinite branch mixes.
inline SolveResult branch_and_bound(const ModelContext& ctx, const Eigen::VectorXd& k, const SolveOptions& opt) {
  SolveResult out;
  out.method = "interval branch and bound";
  const auto& poly = ctx.polytope();
  const auto c = static_cast<Eigen::Index>(ctx.dim());
  const auto m = static_cast<Eigen::Index>(ctx.num_edges());
  const auto& lm = ctx.l_matrix();
  const auto& v = ctx.basis_matrix();
  Eigen::MatrixXd lm_abs = lm.cwiseAbs();
  const double scale = std::max(1e-300, (poly.box_hi() - poly.box_lo()).maxCoeff());
  const double min_side = 1e-9 * scale;

  struct Cell {
    Eigen::VectorXd lo, hi;
  };
  std::vector<Cell> stack{{poly.box_lo(), poly.box_hi()}};
  std::size_t unresolved = 0;
  Eigen::VectorXd wlo(c), whi(c);
  while (!stack.empty()) {
    Cell cell = std::move(stack.back());
    stack.pop_back();
    if (++out.cells > opt.cell_budget) {
      out.status = SolveStatus::failure;
      out.diagnostic = "cell budget of " + std::to_string(opt.cell_budget) + " exhausted";
      return out;
    }
    Eigen::VectorXd mid = 0.5 * (cell.lo + cell.hi);
    Eigen::VectorXd half = 0.5 * (cell.hi - cell.lo);
    Eigen::VectorXd lc = ctx.L(mid);
    Eigen::VectorXd lr = lm_abs * half;
    wlo.setZero();
    whi.setZero();
    bool outside = false;
    for (Eigen::Index e = 0; e < m && !outside; ++e) {
      const auto& br = ctx.branches()[static_cast<std::size_t>(e)];
      double ylo = std::max(lc(e) - lr(e), br.sin_min());
      double yhi = std::min(lc(e) + lr(e), br.sin_max());
      if (ylo > yhi + 1e-12) {
        outside = true;
        break;
      }
      yhi = std::max(ylo, yhi);
      double p1 = br.inverse(ylo), p2 = br.inverse(yhi);
      double plo = std::min(p1, p2), phi = std::max(p1, p2);
      for (Eigen::Index i = 0; i < c; ++i) {
        double x1 = v(i, e) * plo, x2 = v(i, e) * phi;
        wlo(i) += std::min(x1, x2);
        whi(i) += std::max(x1, x2);
      }
    }
    if (outside) continue;
    wlo /= two_pi;
    whi /= two_pi;
    bool excluded = false;
    for (Eigen::Index i = 0; i < c; ++i)
      if (k(i) < wlo(i) - 1e-9 || k(i) > whi(i) + 1e-9) excluded = true;
    if (excluded) continue;

    double width = (whi - wlo).maxCoeff();
    Eigen::Index axis;
    double side = (cell.hi - cell.lo).maxCoeff(&axis);
    if (width > opt.leaf_width && side > min_side) {
      Cell a = cell, b = cell;
      a.hi(axis) = mid(axis);
      b.lo(axis) = mid(axis);
      stack.push_back(std::move(b));
      stack.push_back(std::move(a));
      continue;
    }
    // leaf: polish from the centre (pulled into A)
    auto root = polish_any(ctx, pull_inside(ctx, mid), k, opt);
    bool near = false;
    if (root) {
      Eigen::VectorXd gap = (root->alpha - mid).cwiseAbs() - half;
      near = gap.maxCoeff() <= 2.0 * half.maxCoeff();
      bool dup = false;
      for (const auto& r : out.roots) dup = dup || same_root(r, *root);
      if (!dup) out.roots.push_back(*root);
    }
    if (near) continue;
    if (side > min_side) {
      Cell a = cell, b = cell;
      a.hi(axis) = mid(axis);
      b.lo(axis) = mid(axis);
      stack.push_back(std::move(b));
      stack.push_back(std::move(a));
    } else {
      ++unresolved;
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const WindingRoot& a, const WindingRoot& b) {
    return std::lexicographical_compare(a.alpha.data(), a.alpha.data() + a.alpha.size(), b.alpha.data(),
                                        b.alpha.data() + b.alpha.size());
  });
  if (!out.roots.empty()) {
    out.status = SolveStatus::found;
    if (unresolved) out.diagnostic = std::to_string(unresolved) + " minimal cells left unresolved";
  } else if (unresolved) {
    out.status = SolveStatus::failure;
    out.diagnostic = std::to_string(unresolved) + " minimal cells could be neither excluded nor solved";
  } else {
    out.status = SolveStatus::excluded;
    out.diagnostic = "every cell excluded by interval enclosure";
  }
  return out;
}

}  // namespace detail

/**
 * Solves W(alpha) = k on A. For a definite branch mix W is the gradient of a
 * strictly convex potential, so the barrier minimiser either is the root or
 * certifies that none exists; otherwise an interval branch and bound runs.
 */
inline SolveResult solve_winding(const ModelContext& ctx, const Winding& k_int, const SolveOptions& opt = {}) {
  const auto c = static_cast<Eigen::Index>(ctx.dim());
  if (static_cast<Eigen::Index>(k_int.size()) != c) throw std::invalid_argument("winding vector has the wrong length");
  Eigen::VectorXd k(c);
  for (Eigen::Index i = 0; i < c; ++i) k(i) = static_cast<double>(k_int[static_cast<std::size_t>(i)]);

  SolveResult out;
  const auto& poly = ctx.polytope();
  if (poly.is_empty()) {
    out.status = SolveStatus::excluded;
    out.method = "empty polytope";
    out.diagnostic = "A is empty";
    return out;
  }
  if (c == 0) {
    out.method = "trivial";
    auto root = polish_root(ctx, Eigen::VectorXd(0), k, opt);
    if (root) {
      out.status = SolveStatus::found;
      out.roots.push_back(*root);
    } else {
      out.status = SolveStatus::excluded;
    }
    return out;
  }
  if (!poly.is_full_dimensional()) {
    // A degenerates to a lower-dimensional set; try the centre directly
    out.method = "degenerate polytope";
    auto root = polish_root(ctx, poly.chebyshev_center(), k, opt);
    if (root) {
      out.status = SolveStatus::found;
      out.roots.push_back(*root);
    } else {
      out.status = SolveStatus::failure;
      out.diagnostic = "A has empty interior; no root found at its centre";
    }
    return out;
  }

  if (ctx.is_definite()) {
    out.method = "convex barrier";
    Eigen::VectorXd x = detail::barrier_minimise(ctx, k, opt);
    double res;
    try {
      res = (ctx.W(x) - k).lpNorm<Eigen::Infinity>();
    } catch (const DomainError&) {
      res = std::numeric_limits<double>::infinity();
    }
    if (res <= opt.polish_threshold) {
      if (auto root = polish_any(ctx, x, k, opt)) {
        out.status = SolveStatus::found;
        out.roots.push_back(*root);
        return out;
      }
      out.status = SolveStatus::failure;
      out.diagnostic = "barrier minimiser has residual " + std::to_string(res) + " but polishing did not converge";
      return out;
    }
    out.status = SolveStatus::excluded;
    out.diagnostic = "strictly convex potential minimised with gradient residual " + std::to_string(res);
    return out;
  }
  return detail::branch_and_bound(ctx, k, opt);
}

inline bool is_boundary_state(const ModelContext& ctx, const Eigen::VectorXd& phi, double tol) {
  for (Eigen::Index e = 0; e < phi.size(); ++e) {
    const auto& b = ctx.branches()[static_cast<std::size_t>(e)];
    if (phi(e) - b.lo() <= tol || b.hi() - phi(e) <= tol) return true;
  }
  return false;
}

/// Fixed-point residual |omega - B D sin(B^T theta)|_inf.
inline double fixed_point_residual(const WeightedGraph& g, const std::vector<double>& theta,
                                   const std::vector<double>& omega) {
  std::vector<double> r(omega);
  if (r.empty()) r.assign(g.num_vertices(), 0.0);
  for (const auto& e : g.edges()) {
    double f = e.weight * std::sin(theta[e.head] - theta[e.tail]);
    r[e.head] -= f;
    r[e.tail] += f;
  }
  double out = 0.0;
  for (double x : r) out = std::max(out, std::abs(x));
  return out;
}

/// Integer K on the co-tree edges of the context's tree with V K = k.
inline std::vector<long long> lift_winding(const ModelContext& ctx, const Winding& k) {
  const auto& cot = ctx.lift_cotree();
  const auto c = ctx.dim();
  exact::Matrix<exact::Rational> vs(c, std::vector<exact::Rational>(c));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      vs[i][j] = exact::Rational(ctx.basis().rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cot[j])));
  std::vector<exact::Rational> rhs(k.begin(), k.end());
  auto sol = exact::solve(vs, rhs);
  if (!sol) throw ConsistencyError("cycle basis is singular on the co-tree edges");
  std::vector<long long> lift(ctx.num_edges(), 0);
  for (std::size_t j = 0; j < c; ++j) {
    if (boost::multiprecision::denominator((*sol)[j]) != 1)
      throw ConsistencyError("winding vector has no integer lift: the basis does not span the cycle lattice");
    lift[cot[j]] = static_cast<long long>(boost::multiprecision::numerator((*sol)[j]));
  }
  return lift;
}

/**
 * theta from B^T theta = phi - 2 pi K: integrate along the lift tree from the
 * first vertex, which gives the exact solution when the system is consistent.
 */
inline SteadyState reconstruct_state(const ModelContext& ctx, const WindingRoot& root, const Winding& k) {
  const auto& g = ctx.graph();
  const auto n = g.num_vertices();
  const auto& tol = ctx.tolerances();
  SteadyState s;
  s.alpha = root.alpha;
  s.edge_angles = root.phi;
  s.winding = k;
  s.lift = lift_winding(ctx, k);

  Eigen::VectorXd psi = root.phi;
  for (std::size_t e = 0; e < ctx.num_edges(); ++e)
    psi(static_cast<Eigen::Index>(e)) -= two_pi * static_cast<double>(s.lift[e]);

  std::vector<double> theta(n, 0.0);
  std::vector<bool> done(n, false);
  done[0] = true;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto e : ctx.lift_tree()) {
    adj[g.edge(e).tail].push_back(e);
    adj[g.edge(e).head].push_back(e);
  }
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto e : adj[u]) {
      const auto& ed = g.edge(e);
      auto w = ed.tail == u ? ed.head : ed.tail;
      if (done[w]) continue;
      theta[w] = ed.tail == u ? theta[u] + psi(static_cast<Eigen::Index>(e)) : theta[u] - psi(static_cast<Eigen::Index>(e));
      done[w] = true;
      stack.push_back(w);
    }
  }
  for (auto& t : theta) {
    t = std::fmod(t, two_pi);
    if (t < 0) t += two_pi;
    if (t >= two_pi) t -= two_pi;
  }
  s.theta = theta;
  s.residual = fixed_point_residual(g, theta, ctx.omega());

  // invariants
  for (std::size_t e = 0; e < ctx.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    double diff = theta[ed.head] - theta[ed.tail];
    if (ctx.branches()[e].distance_mod_2pi(diff) > tol.residual)
      throw ConsistencyError("reconstructed " + g.edge_label(e) + " leaves its branch");
    double wrap = diff - psi(static_cast<Eigen::Index>(e));
    double off = std::abs(wrap - two_pi * std::round(wrap / two_pi));
    if (off > tol.residual) throw ConsistencyError("B^T theta differs from the lifted edge angles on " + g.edge_label(e));
  }
  Eigen::VectorXd w = ctx.winding_of_angles(root.phi);
  for (std::size_t i = 0; i < k.size(); ++i)
    if (std::abs(w(static_cast<Eigen::Index>(i)) - static_cast<double>(k[i])) > tol.residual)
      throw ConsistencyError("winding of the edge angles differs from k");
  if (s.residual > tol.residual)
    throw ConsistencyError("fixed-point residual " + std::to_string(s.residual) + " above tolerance");

  Eigen::VectorXd l = ctx.L(root.alpha);
  s.min_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index e = 0; e < l.size(); ++e)
    s.min_slack = std::min(s.min_slack, detail::distance_to_range(ctx.branches()[static_cast<std::size_t>(e)], l(e)));
  if (l.size() == 0) s.min_slack = 0.0;
  s.boundary_flag = s.min_slack <= tol.boundary || is_boundary_state(ctx, root.phi, tol.boundary);
  return s;
}

inline SteadyState reconstruct_state(const ModelContext& ctx, const Eigen::VectorXd& alpha, const Winding& k) {
  WindingRoot root{alpha, ctx.edge_angles(alpha), 0.0, 0};
  return reconstruct_state(ctx, root, k);
}

struct SolverFailure {
  Winding k;
  std::string diagnostic;
};

struct EnumerationOptions {
  std::size_t max_cycle_rank = 6;
  std::size_t max_candidates = 10'000'000;
  unsigned threads = 1;
  SolveOptions solve;
};

struct EnumerationReport {
  std::vector<SteadyState> states;   ///< lexicographic in k (then alpha)
  std::size_t candidates_tested = 0;
  std::size_t excluded = 0;
  std::vector<SolverFailure> solver_failures;
  std::vector<Winding> non_injective;  ///< k values with several distinct roots
  WindingBox winding_box;
  double seconds = 0.0;
};

class EnumerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Winding candidate_at(const WindingBox& box, std::size_t index) {
  Winding k(box.lo.size());
  for (std::size_t i = box.lo.size(); i-- > 0;) {
    auto span = static_cast<std::size_t>(box.hi[i] - box.lo[i] + 1);
    k[i] = box.lo[i] + static_cast<long long>(index % span);
    index /= span;
  }
  return k;
}

inline EnumerationReport enumerate_states(const ModelContext& ctx, const EnumerationOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  if (ctx.dim() > opt.max_cycle_rank)
    throw EnumerationError("cycle rank " + std::to_string(ctx.dim()) + " exceeds the cap of " +
                           std::to_string(opt.max_cycle_rank));
  EnumerationReport rep;
  rep.winding_box = winding_bounds(ctx);
  const auto total = rep.winding_box.candidate_count();
  if (total > opt.max_candidates)
    throw EnumerationError("winding box holds " + std::to_string(total) + " candidates, above the cap of " +
                           std::to_string(opt.max_candidates));

  struct Slot {
    SolveResult solve;
    std::vector<SteadyState> states;
    std::string error;
  };
  std::vector<Slot> slots(total);
  parallel_for(total, opt.threads, [&](std::size_t i) {
    auto k = candidate_at(rep.winding_box, i);
    auto& slot = slots[i];
    slot.solve = solve_winding(ctx, k, opt.solve);
    for (const auto& root : slot.solve.roots) {
      try {
        slot.states.push_back(reconstruct_state(ctx, root, k));
      } catch (const ConsistencyError& e) {
        slot.error = e.what();
      }
    }
  });

  rep.candidates_tested = total;
  for (std::size_t i = 0; i < total; ++i) {
    auto& slot = slots[i];
    auto k = candidate_at(rep.winding_box, i);
    if (slot.solve.status == SolveStatus::excluded) ++rep.excluded;
    if (slot.solve.status == SolveStatus::failure) rep.solver_failures.push_back({k, slot.solve.diagnostic});
    if (!slot.error.empty()) rep.solver_failures.push_back({k, "reconstruction: " + slot.error});
    if (slot.states.size() > 1) rep.non_injective.push_back(k);
    for (auto& s : slot.states) rep.states.push_back(std::move(s));
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace kuramoto
