/**
 * The model context (graph, cycle basis, branches, frequencies) and the maps
 * built on it: L, the winding map W, its Jacobian, the polytope A and the
 * spanning-tree expansion of det W'.
 */
#pragma once

#include "branch.hpp"
#include "cycle_space.hpp"
#include "graph.hpp"
#include "polytope.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kuramoto {

struct Tolerances {
  double residual = 1e-9;   ///< fixed-point residual of a reported state
  double solver = 1e-10;    ///< |W(alpha) - k| for an accepted root
  double boundary = 1e-9;   ///< slack below which a state counts as boundary
};

class ContextError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModelContext {
 public:
  ModelContext(WeightedGraph g, CycleBasis basis, BranchAssignment branches, std::vector<double> omega = {},
               Tolerances tol = {})
      : g_(std::move(g)), basis_(std::move(basis)), branches_(std::move(branches)), omega_(std::move(omega)), tol_(tol) {
    const auto n = g_.num_vertices();
    const auto m = g_.num_edges();
    if (omega_.empty()) omega_.assign(n, 0.0);
    if (omega_.size() != n) throw ContextError("omega needs one entry per vertex");
    if (branches_.size() != m) throw ContextError("branch assignment needs one branch per edge");
    if (static_cast<std::size_t>(basis_.rows.cols()) != m) throw ContextError("cycle basis width differs from edge count");
    if (basis_.size() != g_.cycle_rank()) throw ContextError("cycle basis size differs from the cycle rank");
    double sum = 0.0, scale = 1.0;
    for (double w : omega_) {
      if (!std::isfinite(w)) throw ContextError("omega has a non-finite entry");
      sum += w;
      scale = std::max(scale, std::abs(w));
    }
    if (std::abs(sum) > 1e-9 * scale * static_cast<double>(n))
      throw ContextError("omega must sum to zero (got " + std::to_string(sum) + ")");

    const auto c = basis_.size();
    b_ = incidence_matrix(g_).cast<double>();
    v_ = basis_.rows.cast<double>();
    gamma_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t e = 0; e < m; ++e) gamma_(static_cast<Eigen::Index>(e)) = g_.edge(e).weight;
    lmat_ = gamma_.cwiseInverse().asDiagonal() * v_.transpose();

    // minimum-norm x with B x = omega: x = B^T y where (B B^T) y = omega
    Eigen::MatrixXd lap = b_ * b_.transpose();
    Eigen::VectorXd om = Eigen::Map<const Eigen::VectorXd>(omega_.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (n > 1) {
      grounded_ = lap.bottomRightCorner(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1)).ldlt();
      y.tail(static_cast<Eigen::Index>(n - 1)) = grounded_.solve(om.tail(static_cast<Eigen::Index>(n - 1)));
    }
    omega_edge_ = b_.transpose() * y;
    offset_ = gamma_.cwiseInverse().cwiseProduct(omega_edge_);

    tree_ = basis_.tree ? *basis_.tree : default_spanning_tree(g_);
    cotree_ = complement_edges(g_, tree_);

    int sigma = 0;
    definite_ = true;
    for (std::size_t e = 0; e < m; ++e) {
      int s = branches_[e].orientation() * (g_.edge(e).weight > 0 ? 1 : -1);
      if (sigma == 0) sigma = s;
      else if (s != sigma) definite_ = false;
    }
    sigma_ = sigma == 0 ? 1 : sigma;
    (void)c;
    build_polytope();
  }

  const WeightedGraph& graph() const noexcept { return g_; }
  const CycleBasis& basis() const noexcept { return basis_; }
  const BranchAssignment& branches() const noexcept { return branches_; }
  const std::vector<double>& omega() const noexcept { return omega_; }
  const Tolerances& tolerances() const noexcept { return tol_; }
  std::size_t dim() const noexcept { return basis_.size(); }
  std::size_t num_edges() const noexcept { return g_.num_edges(); }
  const Eigen::MatrixXd& incidence() const noexcept { return b_; }
  const Eigen::MatrixXd& basis_matrix() const noexcept { return v_; }
  const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
  /// Row e is dL_e/dalpha.
  const Eigen::MatrixXd& l_matrix() const noexcept { return lmat_; }
  const Eigen::VectorXd& l_offset() const noexcept { return offset_; }
  const PolytopeH& polytope() const noexcept { return poly_; }
  const EdgeSet& lift_tree() const noexcept { return tree_; }
  const EdgeSet& lift_cotree() const noexcept { return cotree_; }
  /// Solves the Laplacian system grounded at vertex 0 (size |V|-1).
  const Eigen::LDLT<Eigen::MatrixXd>& grounded_laplacian() const noexcept { return grounded_; }
  bool omega_is_zero() const {
    return std::all_of(omega_.begin(), omega_.end(), [](double w) { return w == 0.0; });
  }
  /// True when every edge has the same sign of orientation * weight; W is then
  /// the gradient of a strictly convex (or concave) potential.
  bool is_definite() const noexcept { return definite_; }
  int definite_sign() const noexcept { return sigma_; }

  Eigen::VectorXd L(const Eigen::VectorXd& alpha) const { return offset_ + lmat_ * alpha; }

  /// Branch inverse of L(alpha), edge by edge; throws DomainError outside A.
  Eigen::VectorXd edge_angles(const Eigen::VectorXd& alpha) const { return edge_angles_from_L(L(alpha)); }

  Eigen::VectorXd edge_angles_from_L(const Eigen::VectorXd& l) const {
    Eigen::VectorXd phi(l.size());
    for (Eigen::Index e = 0; e < l.size(); ++e) phi(e) = branches_[static_cast<std::size_t>(e)].inverse(l(e));
    return phi;
  }

  Eigen::VectorXd W(const Eigen::VectorXd& alpha) const { return winding_of_angles(edge_angles(alpha)); }

  Eigen::VectorXd winding_of_angles(const Eigen::VectorXd& phi) const { return v_ * phi / two_pi; }

  /// Per-edge factor eps_e / (gamma_e sqrt(1 - L_e^2)).
  Eigen::VectorXd edge_factors(const Eigen::VectorXd& l) const {
    Eigen::VectorXd d(l.size());
    for (Eigen::Index e = 0; e < l.size(); ++e)
      d(e) = branches_[static_cast<std::size_t>(e)].orientation() / (gamma_(e) * std::sqrt((1.0 - l(e)) * (1.0 + l(e))));
    return d;
  }

  /// Smallest 1 - |L_e|: distance of L(alpha) to the singular values +-1.
  double singular_gap(const Eigen::VectorXd& alpha) const {
    Eigen::VectorXd l = L(alpha);
    return 1.0 - l.cwiseAbs().maxCoeff();
  }

  /// dW/dalpha; requires every |L_e| to stay at least `boundary` away from 1.
  Eigen::MatrixXd W_jacobian(const Eigen::VectorXd& alpha) const {
    Eigen::VectorXd l = L(alpha);
    for (Eigen::Index e = 0; e < l.size(); ++e) {
      const auto& br = branches_[static_cast<std::size_t>(e)];
      if (l(e) < br.sin_min() - tol_.boundary || l(e) > br.sin_max() + tol_.boundary)
        throw DomainError("alpha lies outside A");
      if (1.0 - std::abs(l(e)) < tol_.boundary)
        throw DomainError("alpha is within the boundary tolerance of a singular face of A");
    }
    return jacobian_from_L(l);
  }

  Eigen::MatrixXd jacobian_from_L(const Eigen::VectorXd& l) const {
    Eigen::VectorXd d = edge_factors(l);
    Eigen::MatrixXd j = v_ * d.asDiagonal() * v_.transpose() / two_pi;
    return 0.5 * (j + j.transpose());
  }

  /// Potential Psi with grad Psi = W (defined on A).
  double potential(const Eigen::VectorXd& alpha) const {
    Eigen::VectorXd l = L(alpha);
    double s = 0.0;
    for (Eigen::Index e = 0; e < l.size(); ++e) {
      const auto& br = branches_[static_cast<std::size_t>(e)];
      double y = std::clamp(l(e), -1.0, 1.0);
      double asin_part = y * std::asin(y) + std::sqrt((1.0 - y) * (1.0 + y));
      s += gamma_(e) * (static_cast<double>(br.sheet()) * pi * y + br.orientation() * asin_part);
    }
    return s / two_pi;
  }

  /**
   * det W'(alpha) as a sum over spanning trees T of the product over co-tree
   * edges of eps_e / (gamma_e sqrt(1 - L_e^2)), times (2 pi)^-c.
   */
  double det_tree_formula(const Eigen::VectorXd& alpha, const std::vector<EdgeSet>& trees) const {
    Eigen::VectorXd d = edge_factors(L(alpha));
    std::vector<bool> in_tree(num_edges());
    double sum = 0.0;
    for (const auto& t : trees) {
      std::fill(in_tree.begin(), in_tree.end(), false);
      for (auto e : t) in_tree[e] = true;
      double prod = 1.0;
      for (std::size_t e = 0; e < num_edges(); ++e)
        if (!in_tree[e]) prod *= d(static_cast<Eigen::Index>(e));
      sum += prod;
    }
    return sum * std::pow(two_pi, -static_cast<double>(dim()));
  }

  double det_tree_formula(const Eigen::VectorXd& alpha) const {
    if (!trees_) trees_ = enumerate_spanning_trees(g_);
    return det_tree_formula(alpha, *trees_);
  }

  const std::vector<EdgeSet>& spanning_trees() const {
    if (!trees_) trees_ = enumerate_spanning_trees(g_);
    return *trees_;
  }

  /// Same context with basis rows replaced by M * rows (M unimodular).
  ModelContext with_basis(const IntMatrix& m) const {
    CycleBasis nb;
    nb.rows = m * basis_.rows;
    if (m.isIdentity()) nb.tree = basis_.tree;
    return ModelContext(g_, nb, branches_, omega_, tol_);
  }

  ModelContext with_branches(BranchAssignment br) const {
    return ModelContext(g_, basis_, std::move(br), omega_, tol_);
  }

 private:
  void build_polytope() {
    const auto c = dim();
    std::vector<HalfSpace> rows;
    for (std::size_t e = 0; e < num_edges(); ++e) {
      const auto ei = static_cast<Eigen::Index>(e);
      Eigen::VectorXd a = lmat_.row(ei).transpose();
      const auto& br = branches_[e];
      rows.push_back({a, br.sin_max() - offset_(ei), e, true});
      rows.push_back({-a, offset_(ei) - br.sin_min(), e, false});
    }
    poly_ = PolytopeH(c, std::move(rows));
  }

  WeightedGraph g_;
  CycleBasis basis_;
  BranchAssignment branches_;
  std::vector<double> omega_;
  Tolerances tol_;
  Eigen::MatrixXd b_, v_, lmat_;
  Eigen::VectorXd gamma_, omega_edge_, offset_;
  Eigen::LDLT<Eigen::MatrixXd> grounded_;
  EdgeSet tree_, cotree_;
  PolytopeH poly_;
  bool definite_ = true;
  int sigma_ = 1;
  mutable std::optional<std::vector<EdgeSet>> trees_;
};

class FaceCountError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Number of facets of A; requires every branch to cover the full sine range.
inline std::size_t count_faces(const ModelContext& ctx) {
  for (const auto& b : ctx.branches())
    if (!b.full_range()) throw FaceCountError("face count needs every branch to map onto [-1, 1]");
  const auto& p = ctx.polytope();
  if (p.is_empty()) throw FaceCountError("polytope A is empty");
  if (!p.is_full_dimensional()) throw FaceCountError("polytope A is not full-dimensional");
  return p.facet_count();
}

/// Face count predicted from the smoothed graph: twice its edge count.
inline std::size_t predicted_faces(const WeightedGraph& g) { return 2 * smooth_two_valent(g).num_edges(); }

struct WindingBox {
  std::vector<long long> lo, hi;

  std::size_t candidate_count() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (hi[i] < lo[i]) return 0;
      n *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    }
    return n;
  }
};

/**
 * Integer box containing W(A): component i is bounded by (1/2pi) times the
 * sum over edges of the extremes of v_ie * I_e.
 */
inline WindingBox winding_bounds(const ModelContext& ctx) {
  WindingBox box;
  const auto& v = ctx.basis_matrix();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index e = 0; e < v.cols(); ++e) {
      const auto& br = ctx.branches()[static_cast<std::size_t>(e)];
      double a = v(i, e) * br.lo(), b = v(i, e) * br.hi();
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    lo /= two_pi;
    hi /= two_pi;
    box.lo.push_back(static_cast<long long>(std::ceil(lo - 1e-9)));
    box.hi.push_back(static_cast<long long>(std::floor(hi + 1e-9)));
  }
  return box;
}

/// Real-valued bounds before rounding, for reporting.
inline std::vector<std::pair<double, double>> winding_bounds_real(const ModelContext& ctx) {
  std::vector<std::pair<double, double>> out;
  const auto& v = ctx.basis_matrix();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index e = 0; e < v.cols(); ++e) {
      const auto& br = ctx.branches()[static_cast<std::size_t>(e)];
      double a = v(i, e) * br.lo(), b = v(i, e) * br.hi();
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    out.emplace_back(lo / two_pi, hi / two_pi);
  }
  return out;
}

}  // namespace kuramoto
