/**
 * Volumes |W(A)| = int_A |det W'(alpha)| dalpha, spanning-tree integrals,
 * the two-cycle closed form, lattice-count (Weyl) experiments and the
 * branch assignment maximising the volume.
 */
#pragma once

#include "enumeration.hpp"
#include "quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace kuramoto {

enum class VolumeMethod { quadrature, monte_carlo };

inline std::string to_string(VolumeMethod m) { return m == VolumeMethod::quadrature ? "quadrature" : "monte_carlo"; }

struct VolumeEstimate {
  double value = 0.0;
  double abs_error = 0.0;
  VolumeMethod method = VolumeMethod::quadrature;
  std::size_t samples_or_cells = 0;
  std::optional<std::uint64_t> seed;
};

struct VolumeOptions {
  VolumeMethod method = VolumeMethod::quadrature;
  std::size_t budget = 400000;  ///< integrand evaluations (quadrature nodes or samples)
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int max_level = 7;
};

class MeasureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// |det (V diag(r_e eps_e / (gamma_e sqrt(q_e))) V^T / 2pi)|; r empty means all ones.
inline LIntegrand det_integrand(const ModelContext& ctx, std::vector<double> rates = {}) {
  if (rates.empty()) rates.assign(ctx.num_edges(), 1.0);
  Eigen::MatrixXd v = ctx.basis_matrix();
  Eigen::VectorXd scale(static_cast<Eigen::Index>(ctx.num_edges()));
  for (std::size_t e = 0; e < ctx.num_edges(); ++e)
    scale(static_cast<Eigen::Index>(e)) = rates[e] * ctx.branches()[e].orientation() / ctx.gamma()(static_cast<Eigen::Index>(e));
  const double norm = std::pow(two_pi, -static_cast<double>(ctx.dim()));
  return [v, scale, norm](const Eigen::VectorXd&, const Eigen::VectorXd& q) {
    Eigen::VectorXd d = scale.cwiseQuotient(q.cwiseSqrt());
    Eigen::MatrixXd j = v * d.asDiagonal() * v.transpose();
    return std::abs(j.determinant()) * norm;
  };
}

/// prod over co-tree edges of 1 / sqrt(1 - L_e^2)
inline LIntegrand tree_integrand(const ModelContext& ctx, const EdgeSet& tree) {
  std::vector<bool> in_tree(ctx.num_edges(), false);
  for (auto e : tree) in_tree[e] = true;
  std::vector<Eigen::Index> cotree;
  for (std::size_t e = 0; e < ctx.num_edges(); ++e)
    if (!in_tree[e]) cotree.push_back(static_cast<Eigen::Index>(e));
  return [cotree](const Eigen::VectorXd&, const Eigen::VectorXd& q) {
    double p = 1.0;
    for (auto e : cotree) p /= std::sqrt(q(e));
    return p;
  };
}

inline std::vector<double> edge_weights(const WeightedGraph& g) {
  std::vector<double> w;
  for (const auto& e : g.edges()) w.push_back(e.weight);
  return w;
}

namespace detail {

inline VolumeEstimate quadrature_estimate(const SimplexDecomposition& dec, const LIntegrand& f, const VolumeOptions& opt) {
  const std::size_t simplices = std::max<std::size_t>(dec.size(), 1);
  int level = 1;
  while (level < opt.max_level && tensor_node_count(level + 1, dec.dim(), simplices) <= opt.budget) ++level;
  if (level < 2) level = 2;
  std::size_t nodes = 0;
  double coarse = dec.integrate(f, level - 1, opt.threads);
  double fine = dec.integrate(f, level, opt.threads, &nodes);
  VolumeEstimate out;
  out.value = fine;
  out.abs_error = std::max(std::abs(fine - coarse), 4 * std::numeric_limits<double>::epsilon() * std::abs(fine));
  if (out.abs_error == 0.0) out.abs_error = std::numeric_limits<double>::min();
  out.method = VolumeMethod::quadrature;
  out.samples_or_cells = nodes;
  return out;
}

inline VolumeEstimate monte_carlo_estimate(const ModelContext& ctx, const LIntegrand& f, const VolumeOptions& opt) {
  const auto& poly = ctx.polytope();
  if (poly.is_empty()) throw MeasureError("A is empty");
  const Eigen::VectorXd lo = poly.box_lo(), hi = poly.box_hi();
  double box = (hi - lo).prod();
  const std::size_t batch = 1u << 14;
  const std::size_t batches = std::max<std::size_t>(1, (opt.budget + batch - 1) / batch);
  std::vector<double> s1(batches, 0.0), s2(batches, 0.0);
  parallel_for(batches, opt.threads, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd x(lo.size());
    double a = 0, a2 = 0;
    for (std::size_t k = 0; k < batch; ++k) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
      if (!poly.contains(x, 0.0)) continue;
      Eigen::VectorXd l = ctx.L(x);
      Eigen::VectorXd q = (Eigen::VectorXd::Ones(l.size()) - l).cwiseProduct(Eigen::VectorXd::Ones(l.size()) + l);
      if (q.minCoeff() <= 0) continue;
      double v = f(l, q);
      if (!std::isfinite(v)) continue;
      a += v;
      a2 += v * v;
    }
    s1[b] = a;
    s2[b] = a2;
  });
  double a = 0, a2 = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    a += s1[b];
    a2 += s2[b];
  }
  const double n = static_cast<double>(batches * batch);
  double mean = a / n;
  double var = std::max(0.0, a2 / n - mean * mean);
  VolumeEstimate out;
  out.value = box * mean;
  out.abs_error = std::max(box * std::sqrt(var / (n - 1)), std::numeric_limits<double>::min());
  out.method = VolumeMethod::monte_carlo;
  out.samples_or_cells = batches * batch;
  out.seed = opt.seed;
  return out;
}

}  // namespace detail

inline VolumeEstimate integrate_over_A(const ModelContext& ctx, const LIntegrand& f, const VolumeOptions& opt = {}) {
  if (opt.method == VolumeMethod::quadrature) {
    if (ctx.dim() > 4) throw MeasureError("quadrature supports cycle rank <= 4; use monte_carlo");
    return detail::quadrature_estimate(SimplexDecomposition(ctx), f, opt);
  }
  return detail::monte_carlo_estimate(ctx, f, opt);
}

inline VolumeEstimate volume_W(const ModelContext& ctx, const VolumeOptions& opt = {}) {
  return integrate_over_A(ctx, det_integrand(ctx), opt);
}

inline VolumeEstimate tree_integral(const ModelContext& ctx, const EdgeSet& tree, const VolumeOptions& opt = {}) {
  if (!is_spanning_tree(ctx.graph(), tree)) throw MeasureError("not a spanning tree");
  return integrate_over_A(ctx, tree_integrand(ctx, tree), opt);
}

// ---------------------------------------------------------------------------
// two-cycle closed form

/// int_0^1 asin(1 - b) / sqrt(1 - b^2) db by tanh-sinh.
inline double asin_integral_tanh_sinh() {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(
      [](double b, double bc) {
        double omb = bc > 0 ? bc : 1.0 - b;  // bc is the distance to the nearer endpoint, signed
        return std::asin(omb) / std::sqrt(omb * (2.0 - omb));
      },
      0.0, 1.0);
}

/// The same integral after b = sin t, by adaptive Gauss-Kronrod on a smooth integrand.
inline double asin_integral_gauss_kronrod() {
  auto f = [](double t) { return std::asin(1.0 - std::sin(t)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, pi / 2, 15, 1e-14);
}

/// pi^2 / 2 + 2 int_0^1 asin(1 - b) / sqrt(1 - b^2) db
inline double two_cycle_bracket_constant() {
  static const double value = pi * pi / 2 + 2 * asin_integral_tanh_sinh();
  return value;
}

/// True when the smoothed graph is the theta graph (two cycles sharing a path).
inline bool has_intersecting_two_cycles(const WeightedGraph& g) {
  if (g.num_edges() + 1 != g.num_vertices() + 2) return false;
  auto s = smooth_two_valent(g);
  return s.num_edges() == 3 && s.num_vertices() == 2;
}

/**
 * |spt(G)| * I / (2 pi)^2 with I the bracket constant. Each spanning tree
 * contributes gamma^-2 times a co-tree integral over A = gamma * A_1, which
 * equals gamma^2 I, so the common weight cancels.
 */
inline double two_cycle_closed_form(const WeightedGraph& g, double gamma) {
  if (!has_intersecting_two_cycles(g)) throw MeasureError("graph must have two intersecting independent cycles");
  for (const auto& e : g.edges())
    if (e.weight != gamma) throw MeasureError("all edge weights must equal the common weight");
  if (gamma == 0.0) throw MeasureError("common weight must be nonzero");
  double spt = static_cast<double>(spanning_tree_count(g));
  return spt * two_cycle_bracket_constant() / (two_pi * two_pi);
}

inline void check_two_cycle_branches(const BranchAssignment& br) {
  bool all_p = std::all_of(br.begin(), br.end(), [](const Branch& b) { return b.is_principal(); });
  bool all_r = std::all_of(br.begin(), br.end(), [](const Branch& b) { return b.is_reflected(); });
  if (!all_p && !all_r) throw MeasureError("closed form needs uniform principal or uniform reflected branches");
}

// ---------------------------------------------------------------------------
// Weyl experiment

struct WeylRow {
  int M = 0;
  std::size_t lattice_count = 0;
  double ratio = 0.0;
  double target = 0.0;
  double target_error = 0.0;
  std::size_t solver_failures = 0;
};

/// Subdivided context: edges inherit the parent branch, basis rows are expanded.
inline ModelContext subdivided_context(const ModelContext& base, int scale, const std::vector<double>& rates) {
  auto sub = subdivide({base.graph(), rates, scale});
  const auto m = sub.graph.num_edges();
  BranchAssignment br;
  CycleBasis basis;
  basis.rows = IntMatrix::Zero(static_cast<Eigen::Index>(base.dim()), static_cast<Eigen::Index>(m));
  for (std::size_t e = 0; e < m; ++e) {
    br.push_back(base.branches()[sub.parent_edge[e]]);
    basis.rows.col(static_cast<Eigen::Index>(e)) = base.basis().rows.col(static_cast<Eigen::Index>(sub.parent_edge[e]));
  }
  if (!base.omega_is_zero()) throw MeasureError("subdivision experiments require omega = 0");
  return ModelContext(sub.graph, basis, br, {}, base.tolerances());
}

struct WeylOptions {
  VolumeOptions volume;
  EnumerationOptions enumeration;
};

/// |W_r(A_0)| with W_r = V D_r sin^{-1} L_0 / 2pi.
inline VolumeEstimate weyl_target(const ModelContext& base, const std::vector<double>& rates, const VolumeOptions& opt = {}) {
  return integrate_over_A(base, det_integrand(base, rates), opt);
}

inline std::vector<WeylRow> weyl_experiment(const ModelContext& base, const std::vector<double>& rates,
                                            const std::vector<int>& Ms, const WeylOptions& opt = {}) {
  if (base.dim() > 3) throw MeasureError("Weyl experiments need cycle rank <= 3");
  if (rates.size() != base.num_edges()) throw MeasureError("one rate per base edge required");
  for (std::size_t i = 1; i < Ms.size(); ++i)
    if (Ms[i] <= Ms[i - 1]) throw MeasureError("Ms must be increasing");
  auto target = weyl_target(base, rates, opt.volume);
  std::vector<WeylRow> rows;
  for (int m : Ms) {
    auto ctx = subdivided_context(base, m, rates);
    auto eo = opt.enumeration;
    auto rep = enumerate_states(ctx, eo);
    WeylRow r;
    r.M = m;
    r.lattice_count = rep.states.size();
    r.ratio = static_cast<double>(r.lattice_count) / std::pow(static_cast<double>(m), static_cast<double>(base.dim()));
    r.target = target.value;
    r.target_error = target.abs_error;
    r.solver_failures = rep.solver_failures.size();
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<WeylRow> weyl_experiment(const SubdivisionScheme& scheme, const std::vector<int>& Ms,
                                            const WeylOptions& opt = {}) {
  ModelContext base(scheme.base, default_cycle_basis(scheme.base), sign_matched_branches(edge_weights(scheme.base)));
  return weyl_experiment(base, scheme.rates, Ms, opt);
}

// ---------------------------------------------------------------------------
// branch maximisation

struct BranchComparison {
  BranchAssignment branches;
  VolumeEstimate volume;
};

struct MaximizeReport {
  BranchAssignment optimal;                 ///< principal where gamma > 0, reflected where gamma < 0
  VolumeEstimate optimal_volume;
  std::vector<BranchComparison> alternatives;
  bool exhaustive = false;
  bool holds = true;                        ///< optimal >= every alternative - 3 combined errors
  std::vector<std::size_t> violations;      ///< indices into alternatives
};

struct MaximizeOptions {
  VolumeOptions volume;
  std::size_t exhaustive_limit = 10;
  std::size_t samples = 64;
  std::uint64_t seed = 1;
};

inline MaximizeReport maximize_volume_branches(const WeightedGraph& g, const MaximizeOptions& opt = {},
                                               const std::vector<double>& omega = {}) {
  MaximizeReport rep;
  rep.optimal = sign_matched_branches(edge_weights(g));
  const auto basis = default_cycle_basis(g);
  ModelContext best(g, basis, rep.optimal, omega);
  SimplexDecomposition dec(best);
  rep.optimal_volume = detail::quadrature_estimate(dec, det_integrand(best), opt.volume);

  const auto m = g.num_edges();
  std::vector<std::uint64_t> masks;
  if (m <= opt.exhaustive_limit) {
    rep.exhaustive = true;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) masks.push_back(mask);
  } else {
    std::mt19937_64 rng(opt.seed);
    for (std::size_t i = 0; i < opt.samples; ++i) masks.push_back(rng() & ((m >= 64) ? ~0ull : ((std::uint64_t{1} << m) - 1)));
  }
  // all principal/reflected assignments share A, so the decomposition is reused
  for (auto mask : masks) {
    BranchAssignment br(m, Branch::principal());
    for (std::size_t e = 0; e < m; ++e)
      if (mask >> e & 1) br[e] = Branch::reflected();
    ModelContext alt(g, basis, br, omega);
    BranchComparison c{br, detail::quadrature_estimate(dec, det_integrand(alt), opt.volume)};
    double slack = 3 * (c.volume.abs_error + rep.optimal_volume.abs_error);
    if (c.volume.value > rep.optimal_volume.value + slack) {
      rep.holds = false;
      rep.violations.push_back(rep.alternatives.size());
    }
    rep.alternatives.push_back(std::move(c));
  }
  return rep;
}

}  // namespace kuramoto
