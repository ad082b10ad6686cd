/**
 * Bounded polytopes in H-representation: redundancy detection, Chebyshev
 * centre, bounding box, vertex enumeration and a pulling triangulation.
 */
#pragma once

#include "exact.hpp"
#include "lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace kuramoto {

/// a.x <= b; `edge`/`upper` record which edge bound produced the row.
struct HalfSpace {
  Eigen::VectorXd a;
  double b = 0.0;
  std::size_t edge = 0;
  bool upper = true;
};

struct PolytopeOptions {
  double feasibility_tol = 1e-9;
  double ambiguity_band = 1e-7;   ///< LP gaps inside this band are re-decided exactly
  bool exact_fallback = true;
};

class PolytopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PolytopeH {
 public:
  PolytopeH() = default;

  PolytopeH(std::size_t dim, std::vector<HalfSpace> rows, PolytopeOptions opt = {})
      : dim_(dim), rows_(std::move(rows)), opt_(opt) {
    for (const auto& h : rows_)
      if (static_cast<std::size_t>(h.a.size()) != dim_) throw std::invalid_argument("half-space dimension mismatch");
    classify();
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<HalfSpace>& constraints() const noexcept { return rows_; }
  /// Indices of one representative per class of positively proportional rows.
  const std::vector<std::size_t>& representatives() const noexcept { return reps_; }
  /// Representatives that are facets (non-redundant).
  const std::vector<std::size_t>& facets() const noexcept { return facets_; }
  std::size_t facet_count() const noexcept { return facets_.size(); }
  bool is_empty() const noexcept { return empty_; }
  bool is_full_dimensional() const noexcept { return !empty_ && radius_ > opt_.feasibility_tol; }
  const Eigen::VectorXd& chebyshev_center() const noexcept { return center_; }
  double chebyshev_radius() const noexcept { return radius_; }
  const Eigen::VectorXd& box_lo() const noexcept { return box_lo_; }
  const Eigen::VectorXd& box_hi() const noexcept { return box_hi_; }
  std::size_t exact_decisions() const noexcept { return exact_decisions_; }

  /// Smallest scaled slack (b - a.x)/|a| over all rows; negative outside.
  double min_slack(const Eigen::VectorXd& x) const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& h : rows_) {
      double n = h.a.norm();
      if (n == 0) continue;
      s = std::min(s, (h.b - h.a.dot(x)) / n);
    }
    return s;
  }

  bool contains(const Eigen::VectorXd& x, double tol) const { return min_slack(x) >= -tol; }

  /// Vertices (deduplicated) and, per vertex, the facets active there.
  struct VertexData {
    std::vector<Eigen::VectorXd> points;
    std::vector<std::vector<std::size_t>> active;   ///< indices into facets()
  };

  VertexData vertices() const {
    VertexData out;
    if (empty_ || dim_ == 0) return out;
    const std::size_t f = facets_.size();
    const double tol = 1e-9;
    std::vector<std::size_t> pick(dim_);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
      if (depth == dim_) {
        Eigen::MatrixXd m(dim_, dim_);
        Eigen::VectorXd rhs(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
          const auto& h = rows_[facets_[pick[i]]];
          m.row(static_cast<Eigen::Index>(i)) = h.a.transpose() / h.a.norm();
          rhs(static_cast<Eigen::Index>(i)) = h.b / h.a.norm();
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        lu.setThreshold(1e-10);
        if (lu.rank() < static_cast<Eigen::Index>(dim_)) return;
        Eigen::VectorXd x = lu.solve(rhs);
        if (!contains(x, tol)) return;
        for (const auto& p : out.points)
          if ((p - x).lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) return;
        out.points.push_back(x);
        return;
      }
      for (std::size_t j = start; j < f; ++j) {
        pick[depth] = j;
        rec(j + 1, depth + 1);
      }
    };
    rec(0, 0);
    for (const auto& x : out.points) {
      std::vector<std::size_t> act;
      for (std::size_t j = 0; j < f; ++j) {
        const auto& h = rows_[facets_[j]];
        if (std::abs(h.b - h.a.dot(x)) / h.a.norm() <= tol) act.push_back(j);
      }
      out.active.push_back(std::move(act));
    }
    return out;
  }

  /// Pulling triangulation: each simplex is dim+1 indices into `v.points`.
  static std::vector<std::vector<std::size_t>> triangulate(const VertexData& v, std::size_t dim) {
    std::vector<std::size_t> all(v.points.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::vector<std::size_t>> out;
    if (all.empty()) return out;
    pull(v, all, dim, {}, out);
    return out;
  }

 private:
  static std::size_t affine_rank(const VertexData& v, const std::vector<std::size_t>& ids) {
    if (ids.size() <= 1) return 0;
    const auto d = v.points[ids[0]].size();
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(ids.size() - 1));
    for (std::size_t i = 1; i < ids.size(); ++i) m.col(static_cast<Eigen::Index>(i - 1)) = v.points[ids[i]] - v.points[ids[0]];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-9);
    return static_cast<std::size_t>(qr.rank());
  }

  /// `face` has affine dimension k; `prefix` collects pulled apexes.
  static void pull(const VertexData& v, const std::vector<std::size_t>& face, std::size_t k,
                   std::vector<std::size_t> prefix, std::vector<std::vector<std::size_t>>& out) {
    if (k == 0) {
      prefix.push_back(face.front());
      out.push_back(std::move(prefix));
      return;
    }
    const std::size_t apex = face.front();
    prefix.push_back(apex);
    // sub-faces: intersections of the face with each facet of the polytope
    std::set<std::vector<std::size_t>> seen;
    std::set<std::size_t> facet_ids;
    for (auto i : face)
      for (auto j : v.active[i]) facet_ids.insert(j);
    for (auto j : facet_ids) {
      std::vector<std::size_t> sub;
      for (auto i : face)
        if (std::binary_search(v.active[i].begin(), v.active[i].end(), j)) sub.push_back(i);
      if (sub.empty() || std::binary_search(sub.begin(), sub.end(), apex)) continue;
      if (sub.size() == face.size()) continue;
      if (affine_rank(v, sub) != k - 1) continue;
      if (!seen.insert(sub).second) continue;
      pull(v, sub, k - 1, prefix, out);
    }
  }

  std::vector<double> unit_lp_row(std::size_t r) const {
    const auto& h = rows_[r];
    const double n = h.a.norm();
    std::vector<double> out(h.a.data(), h.a.data() + h.a.size());
    for (auto& v : out) v /= n;
    return out;
  }

  lp::Result<double> solve_double(const std::vector<std::size_t>& rows, const std::vector<double>& obj,
                                  std::optional<std::pair<std::vector<double>, double>> extra = std::nullopt) const {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (auto r : rows) {
      double n = rows_[r].a.norm();
      a.push_back(unit_lp_row(r));
      b.push_back(rows_[r].b / n);
    }
    if (extra) {
      a.push_back(extra->first);
      b.push_back(extra->second);
    }
    return lp::maximize(a, b, obj);
  }

  /// Exact rational LP on the unscaled rows; maximizes a_j.x over `rows`.
  lp::Result<exact::Rational> solve_exact(const std::vector<std::size_t>& rows, std::size_t j) const {
    std::vector<std::vector<exact::Rational>> a;
    std::vector<exact::Rational> b;
    for (auto r : rows) {
      std::vector<exact::Rational> row;
      for (Eigen::Index i = 0; i < rows_[r].a.size(); ++i) row.emplace_back(rows_[r].a(i));
      a.push_back(std::move(row));
      b.emplace_back(rows_[r].b);
    }
    std::vector<exact::Rational> obj;
    for (Eigen::Index i = 0; i < rows_[j].a.size(); ++i) obj.emplace_back(rows_[j].a(i));
    return lp::maximize(a, b, obj);
  }

  void classify() {
    // zero rows: infeasible if b < 0, ignorable otherwise
    std::vector<std::size_t> nonzero;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].a.norm() == 0.0) {
        if (rows_[r].b < -opt_.feasibility_tol) empty_ = true;
        continue;
      }
      nonzero.push_back(r);
    }
    // positively proportional rows: keep the tightest (smallest scaled b)
    std::vector<bool> taken(rows_.size(), false);
    for (std::size_t x = 0; x < nonzero.size(); ++x) {
      auto r = nonzero[x];
      if (taken[r]) continue;
      Eigen::VectorXd u = rows_[r].a / rows_[r].a.norm();
      std::size_t best = r;
      double best_b = rows_[r].b / rows_[r].a.norm();
      for (std::size_t y = x + 1; y < nonzero.size(); ++y) {
        auto s = nonzero[y];
        if (taken[s]) continue;
        Eigen::VectorXd w = rows_[s].a / rows_[s].a.norm();
        if ((u - w).lpNorm<Eigen::Infinity>() > 1e-12) continue;
        taken[s] = true;
        double bs = rows_[s].b / rows_[s].a.norm();
        if (bs < best_b) {
          best_b = bs;
          best = s;
        }
      }
      reps_.push_back(best);
    }
    std::sort(reps_.begin(), reps_.end());

    center_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    box_lo_ = box_hi_ = center_;
    if (empty_) return;
    if (dim_ == 0) {
      for (auto r : reps_)
        if (rows_[r].b < -opt_.feasibility_tol) empty_ = true;
      return;
    }

    // Chebyshev centre: maximize r s.t. a_j.x / |a_j| + r <= b_j / |a_j|
    {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (auto r : reps_) {
        auto row = unit_lp_row(r);
        row.push_back(1.0);
        a.push_back(std::move(row));
        b.push_back(rows_[r].b / rows_[r].a.norm());
      }
      std::vector<double> obj(dim_ + 1, 0.0);
      obj[dim_] = 1.0;
      auto res = lp::maximize(a, b, obj);
      if (res.status == lp::Status::unbounded) throw PolytopeError("polytope is unbounded");
      if (res.status == lp::Status::infeasible || res.value < -opt_.feasibility_tol) {
        empty_ = true;
        return;
      }
      for (std::size_t i = 0; i < dim_; ++i) center_(static_cast<Eigen::Index>(i)) = res.x[i];
      radius_ = std::max(0.0, res.value);
    }

    // bounding box
    for (std::size_t i = 0; i < dim_; ++i) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> obj(dim_, 0.0);
        obj[i] = sign;
        auto res = solve_double(reps_, obj);
        if (res.status != lp::Status::optimal) throw PolytopeError("polytope is unbounded");
        (sign > 0 ? box_hi_ : box_lo_)(static_cast<Eigen::Index>(i)) = sign * res.value;
      }
    }

    // redundancy
    for (auto j : reps_) {
      std::vector<std::size_t> others;
      for (auto r : reps_)
        if (r != j) others.push_back(r);
      const double n = rows_[j].a.norm();
      auto res = solve_double(others, unit_lp_row(j));
      bool facet;
      if (res.status == lp::Status::unbounded) {
        facet = true;
      } else {
        double gap = res.value - rows_[j].b / n;
        if (std::abs(gap) <= opt_.ambiguity_band && opt_.exact_fallback) {
          ++exact_decisions_;
          auto ex = solve_exact(others, j);
          facet = ex.status == lp::Status::unbounded ||
                  (ex.status == lp::Status::optimal && ex.value > exact::Rational(rows_[j].b));
        } else {
          facet = gap > opt_.feasibility_tol;
        }
      }
      if (facet) facets_.push_back(j);
    }
  }

  std::size_t dim_ = 0;
  std::vector<HalfSpace> rows_;
  PolytopeOptions opt_;
  std::vector<std::size_t> reps_, facets_;
  bool empty_ = false;
  Eigen::VectorXd center_, box_lo_, box_hi_;
  double radius_ = 0.0;
  std::size_t exact_decisions_ = 0;
};

}  // namespace kuramoto
