/**
 * Branches of the sine function: closed angle intervals on which sine is
 * injective, and the branch inverse.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kuramoto {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/**
 * Closed interval [lo, hi] of angles inside one monotone stretch of sine,
 * i.e. inside [m*pi - pi/2, m*pi + pi/2] for some integer m.
 */
class Branch {
 public:
  static constexpr double clamp_tolerance = 1e-12;

  Branch() : Branch(-pi / 2, pi / 2) {}

  Branch(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("branch needs finite lo < hi");
    m_ = static_cast<long>(std::lround(0.5 * (lo + hi) / pi));
    const double centre = static_cast<double>(m_) * pi;
    const double slack = 1e-12 * std::max(1.0, std::abs(centre));
    if (lo < centre - pi / 2 - slack || hi > centre + pi / 2 + slack)
      throw std::invalid_argument("sine is not injective on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    increasing_ = m_ % 2 == 0;
    sin_lo_ = snapped_sin(lo_);
    sin_hi_ = snapped_sin(hi_);
  }

  static Branch principal() { return Branch(-pi / 2, pi / 2); }
  static Branch reflected() { return Branch(pi / 2, 3 * pi / 2); }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  long sheet() const noexcept { return m_; }
  /// +1 when sine increases across the branch, -1 when it decreases.
  int orientation() const noexcept { return increasing_ ? 1 : -1; }

  double sin_min() const noexcept { return std::min(sin_lo_, sin_hi_); }
  double sin_max() const noexcept { return std::max(sin_lo_, sin_hi_); }

  bool is_principal() const noexcept { return lo_ == -pi / 2 && hi_ == pi / 2; }
  bool is_reflected() const noexcept { return lo_ == pi / 2 && hi_ == 3 * pi / 2; }
  bool full_range() const noexcept { return sin_min() == -1.0 && sin_max() == 1.0; }

  /// Unique x in [lo, hi] with sin x = y; clamps when y overshoots by <= 1e-12.
  double inverse(double y) const {
    if (y < sin_min()) {
      if (y < sin_min() - clamp_tolerance) throw DomainError("value " + std::to_string(y) + " below sine range of branch");
      y = sin_min();
    } else if (y > sin_max()) {
      if (y > sin_max() + clamp_tolerance) throw DomainError("value " + std::to_string(y) + " above sine range of branch");
      y = sin_max();
    }
    if (y == sin_lo_) return lo_;
    if (y == sin_hi_) return hi_;
    const double base = static_cast<double>(m_) * pi;
    double x = increasing_ ? base + std::asin(y) : base - std::asin(y);
    return std::clamp(x, lo_, hi_);
  }

  /// d/dy of inverse(y): orientation / sqrt(1 - y^2).
  double inverse_derivative(double y) const { return orientation() / std::sqrt(1.0 - y * y); }

  /// Whether the angle x lies in the branch shifted by some multiple of 2pi.
  bool contains_mod_2pi(double x, double tol) const {
    double shifted = x - two_pi * std::floor((x - lo_) / two_pi);
    // shifted in [lo, lo + 2pi)
    if (shifted <= hi_ + tol) return true;
    return shifted >= lo_ + two_pi - tol;
  }

  /// Distance from x to the nearest point of the branch modulo 2pi.
  double distance_mod_2pi(double x) const {
    double shifted = x - two_pi * std::floor((x - lo_) / two_pi);
    if (shifted <= hi_) return 0.0;
    return std::min(shifted - hi_, lo_ + two_pi - shifted);
  }

  std::string describe() const {
    if (is_principal()) return "principal";
    if (is_reflected()) return "reflected";
    return "[" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]";
  }

  bool operator==(const Branch& o) const noexcept { return lo_ == o.lo_ && hi_ == o.hi_; }

 private:
  static double snapped_sin(double x) {
    double s = std::sin(x);
    if (std::abs(s - 1.0) < 1e-15) return 1.0;
    if (std::abs(s + 1.0) < 1e-15) return -1.0;
    if (std::abs(s) < 1e-15) return 0.0;
    return s;
  }

  double lo_, hi_;
  long m_ = 0;
  bool increasing_ = true;
  double sin_lo_ = -1.0, sin_hi_ = 1.0;
};

using BranchAssignment = std::vector<Branch>;

inline BranchAssignment uniform_branches(std::size_t edges, const Branch& b = Branch::principal()) {
  return BranchAssignment(edges, b);
}

/// Principal where the weight is positive, reflected where it is negative.
inline BranchAssignment sign_matched_branches(const std::vector<double>& weights) {
  BranchAssignment out;
  out.reserve(weights.size());
  for (double w : weights) out.push_back(w > 0 ? Branch::principal() : Branch::reflected());
  return out;
}

}  // namespace kuramoto
