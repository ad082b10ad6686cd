/**
 * Dense two-phase tableau simplex with Bland's rule.
 *
 * Solves  maximize c.x  subject to  A x <= b  with x free. The scalar type is
 * a template parameter so the same code runs in double and in exact rational
 * arithmetic.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace kuramoto::lp {

enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "?";
}

template <class S>
struct Result {
  Status status = Status::infeasible;
  S value{};
  std::vector<S> x;
};

template <class S>
S tolerance() {
  if constexpr (std::is_floating_point_v<S>) return S(1e-11);
  else return S(0);
}

template <class S>
S abs_of(const S& v) {
  return v < S(0) ? S(-v) : v;
}

class IterationLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class S>
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : t_(rows, std::vector<S>(cols + 1, S(0))), basis_(rows, 0), n_(cols) {}

  S& at(std::size_t i, std::size_t j) { return t_[i][j]; }
  S& rhs(std::size_t i) { return t_[i][n_]; }
  std::size_t& basic(std::size_t i) { return basis_[i]; }
  std::size_t rows() const { return t_.size(); }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t r, std::size_t col) {
    S p = t_[r][col];
    for (auto& v : t_[r]) v /= p;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == r || t_[i][col] == S(0)) continue;
      S f = t_[i][col];
      for (std::size_t j = 0; j <= n_; ++j) t_[i][j] -= f * t_[r][j];
      t_[i][col] = S(0);
    }
    basis_[r] = col;
  }

  /// Maximizes obj.z over the current basic feasible solution.
  Status run(const std::vector<S>& obj, const std::vector<bool>& allowed, std::size_t max_iter) {
    const S eps = tolerance<S>();
    std::vector<bool> is_basic(n_, false);
    for (auto b : basis_) is_basic[b] = true;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_ && enter == n_; ++j) {
        if (!allowed[j] || is_basic[j]) continue;
        S d = obj[j];
        for (std::size_t i = 0; i < t_.size(); ++i)
          if (t_[i][j] != S(0)) d -= obj[basis_[i]] * t_[i][j];
        if (d > eps) enter = j;
      }
      if (enter == n_) return Status::optimal;
      std::size_t leave = t_.size();
      S best{};
      for (std::size_t i = 0; i < t_.size(); ++i) {
        if (!(t_[i][enter] > eps)) continue;
        S ratio = t_[i][n_] / t_[i][enter];
        if (leave == t_.size() || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == t_.size()) return Status::unbounded;
      is_basic[basis_[leave]] = false;
      pivot(leave, enter);
      is_basic[enter] = true;
    }
    throw IterationLimit("simplex iteration limit reached");
  }

 private:
  std::vector<std::vector<S>> t_;
  std::vector<std::size_t> basis_;
  std::size_t n_;
};

}  // namespace detail

/// maximize c.x subject to a x <= b, x in R^d.
template <class S>
Result<S> maximize(const std::vector<std::vector<S>>& a, const std::vector<S>& b, const std::vector<S>& c,
                   std::size_t max_iter = 100000) {
  const std::size_t m = a.size();
  const std::size_t d = c.size();
  const S eps = tolerance<S>();
  // columns: x+ (d), x- (d), slack (m), artificial (one per negative rhs)
  std::vector<std::size_t> art_row;
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < S(0)) art_row.push_back(i);
  const std::size_t n_slack0 = 2 * d;
  const std::size_t n_art0 = 2 * d + m;
  const std::size_t n = n_art0 + art_row.size();

  detail::Tableau<S> tab(m, n);
  std::size_t next_art = n_art0;
  for (std::size_t i = 0; i < m; ++i) {
    S sign = b[i] < S(0) ? S(-1) : S(1);
    for (std::size_t j = 0; j < d; ++j) {
      tab.at(i, j) = sign * a[i][j];
      tab.at(i, d + j) = -sign * a[i][j];
    }
    tab.at(i, n_slack0 + i) = sign;
    tab.rhs(i) = sign * b[i];
    if (b[i] < S(0)) {
      tab.at(i, next_art) = S(1);
      tab.basic(i) = next_art++;
    } else {
      tab.basic(i) = n_slack0 + i;
    }
  }

  Result<S> out;
  if (!art_row.empty()) {
    std::vector<S> obj(n, S(0));
    for (std::size_t j = n_art0; j < n; ++j) obj[j] = S(-1);
    std::vector<bool> allowed(n, true);
    tab.run(obj, allowed, max_iter);
    S infeas{};
    for (std::size_t i = 0; i < m; ++i)
      if (tab.basic(i) >= n_art0) infeas += tab.rhs(i);
    if (infeas > eps * S(static_cast<long>(m + 1))) return out;
    // drive zero-level artificials out of the basis where possible
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basic(i) < n_art0) continue;
      for (std::size_t j = 0; j < n_art0; ++j) {
        if (abs_of(tab.at(i, j)) > eps) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  std::vector<S> obj(n, S(0));
  for (std::size_t j = 0; j < d; ++j) {
    obj[j] = c[j];
    obj[d + j] = -c[j];
  }
  std::vector<bool> allowed(n, true);
  for (std::size_t j = n_art0; j < n; ++j) allowed[j] = false;
  out.status = tab.run(obj, allowed, max_iter);
  if (out.status != Status::optimal) return out;

  std::vector<S> z(n, S(0));
  for (std::size_t i = 0; i < m; ++i) z[tab.basic(i)] = tab.rhs(i);
  out.x.assign(d, S(0));
  out.value = S(0);
  for (std::size_t j = 0; j < d; ++j) {
    out.x[j] = z[j] - z[d + j];
    out.value += c[j] * out.x[j];
  }
  return out;
}

}  // namespace kuramoto::lp
