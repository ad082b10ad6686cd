/**
 * Integration over the polytope A of integrands that blow up like
 * 1/sqrt(1 - L_e^2) on its faces.
 *
 * A is split into simplices (pulling triangulation of its vertex set); each
 * simplex is mapped from the unit cube by a collapsed (Duffy) map and
 * integrated with a tensor tanh-sinh rule. Node positions are carried in
 * barycentric form so that 1 - L_e and 1 + L_e keep full relative accuracy
 * next to the faces where they vanish.
 */
#pragma once

#include "parallel.hpp"
#include "polytope.hpp"
#include "winding_map.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace kuramoto {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrand evaluated from L(alpha) and q_e = 1 - L_e^2 (both per edge).
using LIntegrand = std::function<double(const Eigen::VectorXd& l, const Eigen::VectorXd& q)>;

/// One-dimensional tanh-sinh nodes on (0, 1), stored with their complements.
struct TanhSinh1D {
  std::vector<double> u, uc, w;

  static TanhSinh1D make(int level, double t_max = 4.0) {
    TanhSinh1D r;
    const double h = std::ldexp(1.0, -level);
    const long n = static_cast<long>(std::floor(t_max / h));
    for (long k = -n; k <= n; ++k) {
      double t = h * static_cast<double>(k);
      double s = pi / 2 * std::sinh(t);
      double e = std::exp(-2 * s);
      double c = std::cosh(s);
      r.u.push_back(1.0 / (1.0 + e));
      r.uc.push_back(e / (1.0 + e));
      r.w.push_back(h * pi / 4 * std::cosh(t) / (c * c));
    }
    return r;
  }

  std::size_t size() const { return u.size(); }
};

inline std::size_t tensor_node_count(int level, std::size_t dim, std::size_t simplices) {
  auto one = TanhSinh1D::make(level).size();
  double n = std::pow(static_cast<double>(one), static_cast<double>(dim)) * static_cast<double>(simplices);
  return static_cast<std::size_t>(std::min(n, 1e18));
}

/// Triangulated A together with per-vertex L values and snapped slacks.
class SimplexDecomposition {
 public:
  SimplexDecomposition(const ModelContext& ctx) : dim_(ctx.dim()), edges_(ctx.num_edges()) {
    const auto& poly = ctx.polytope();
    if (poly.is_empty() || !poly.is_full_dimensional()) throw QuadratureError("A is empty or lower dimensional");
    auto vd = poly.vertices();
    if (vd.points.size() < dim_ + 1) throw QuadratureError("A is unbounded or degenerate");
    simplices_ = PolytopeH::triangulate(vd, dim_);
    points_ = vd.points;
    for (const auto& p : points_) {
      Eigen::VectorXd l = ctx.L(p);
      Eigen::VectorXd up = Eigen::VectorXd::Ones(l.size()) - l, dn = Eigen::VectorXd::Ones(l.size()) + l;
      for (Eigen::Index e = 0; e < l.size(); ++e) {
        if (std::abs(up(e)) <= 1e-10) up(e) = 0.0;
        if (std::abs(dn(e)) <= 1e-10) dn(e) = 0.0;
      }
      l_.push_back(l);
      up_.push_back(up);
      dn_.push_back(dn);
    }
    for (const auto& s : simplices_) {
      Eigen::MatrixXd m(dim_, dim_);
      for (std::size_t i = 1; i <= dim_; ++i) m.col(static_cast<Eigen::Index>(i - 1)) = points_[s[i]] - points_[s[0]];
      volumes_.push_back(std::abs(m.determinant()));  // d! times the simplex volume
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return simplices_.size(); }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<std::vector<std::size_t>>& simplices() const { return simplices_; }

  /// sum of simplex volumes
  double volume() const {
    double f = 1;
    for (std::size_t i = 2; i <= dim_; ++i) f *= static_cast<double>(i);
    double s = 0;
    for (double v : volumes_) s += v / f;
    return s;
  }

  /// Tensor tanh-sinh estimate; per-simplex sums are reduced in simplex order.
  double integrate(const LIntegrand& f, int level, unsigned threads = 1, std::size_t* nodes = nullptr) const {
    const auto rule = TanhSinh1D::make(level);
    const std::size_t n1 = rule.size();
    std::vector<double> partial(simplices_.size(), 0.0);
    parallel_for(simplices_.size(), threads, [&](std::size_t si) {
      const auto& s = simplices_[si];
      const auto d = dim_;
      std::vector<std::size_t> idx(d, 0);
      std::vector<double> bary(d + 1);
      Eigen::VectorXd l(static_cast<Eigen::Index>(edges_)), q(static_cast<Eigen::Index>(edges_));
      Eigen::VectorXd up(static_cast<Eigen::Index>(edges_)), dn(static_cast<Eigen::Index>(edges_));
      double sum = 0.0;
      while (true) {
        double w = volumes_[si];
        double prefix = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
          const auto k = idx[i];
          bary[i] = prefix * rule.uc[k];
          prefix *= rule.u[k];
          w *= rule.w[k] * std::pow(rule.u[k], static_cast<double>(d - 1 - i));
        }
        bary[d] = prefix;
        if (w > 0) {
          l.setZero();
          up.setZero();
          dn.setZero();
          for (std::size_t i = 0; i <= d; ++i) {
            l += bary[i] * l_[s[i]];
            up += bary[i] * up_[s[i]];
            dn += bary[i] * dn_[s[i]];
          }
          q = up.cwiseProduct(dn);
          if (q.minCoeff() > 0) {
            double v = f(l, q);
            if (std::isfinite(v)) sum += w * v;
          }
        }
        std::size_t i = d;
        while (i > 0) {
          --i;
          if (++idx[i] < n1) break;
          idx[i] = 0;
          if (i == 0) {
            i = d + 1;
            break;
          }
        }
        if (i == d + 1 || d == 0) break;
      }
      partial[si] = sum;
    });
    if (nodes) *nodes = static_cast<std::size_t>(std::pow(static_cast<double>(n1), static_cast<double>(dim_))) * simplices_.size();
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
  }

 private:
  std::size_t dim_, edges_;
  std::vector<Eigen::VectorXd> points_, l_, up_, dn_;
  std::vector<std::vector<std::size_t>> simplices_;
  std::vector<double> volumes_;
};

}  // namespace kuramoto
