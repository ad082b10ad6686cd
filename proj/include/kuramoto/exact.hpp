/**
 * Exact integer and rational linear algebra: Smith normal form elementary
 * divisors, Bareiss determinants and Gaussian elimination over a field.
 */
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kuramoto::exact {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class T>
using Matrix = std::vector<std::vector<T>>;

template <class T, class Src>
Matrix<T> convert(const Matrix<Src>& m) {
  Matrix<T> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i].assign(m[i].begin(), m[i].end());
  return out;
}

template <class Int>
Int abs_value(const Int& x) {
  return x < 0 ? Int(-x) : x;
}

/**
 * Nonzero diagonal of the Smith normal form of an integer matrix, as
 * positive values d_1 | d_2 | ... The list length is the rank.
 */
template <class Int>
std::vector<Int> elementary_divisors(Matrix<Int> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  std::vector<Int> out;
  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    while (true) {
      // pivot: smallest nonzero magnitude in the trailing block
      std::optional<std::pair<std::size_t, std::size_t>> piv;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (a[i][j] != 0 && (!piv || abs_value(a[i][j]) < abs_value(a[piv->first][piv->second])))
            piv = {i, j};
      if (!piv) return out;
      std::swap(a[t], a[piv->first]);
      for (auto& row : a) std::swap(row[t], row[piv->second]);

      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (a[i][t] == 0) continue;
        Int q = a[i][t] / a[t][t];
        for (std::size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        if (a[i][t] != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (a[t][j] == 0) continue;
        Int q = a[t][j] / a[t][t];
        for (std::size_t i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
        if (a[t][j] != 0) clean = false;
      }
      if (!clean) continue;

      // divisibility: fold a row with an offending entry into row t
      std::optional<std::size_t> offending;
      for (std::size_t i = t + 1; i < rows && !offending; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (a[i][j] % a[t][t] != 0) {
            offending = i;
            break;
          }
      if (offending) {
        for (std::size_t j = t; j < cols; ++j) a[t][j] += a[*offending][j];
        continue;
      }
      out.push_back(abs_value(a[t][t]));
      break;
    }
  }
  return out;
}

/// Fraction-free determinant of a square integer matrix.
template <class Int>
Int bareiss_determinant(Matrix<Int> a) {
  const std::size_t n = a.size();
  if (n == 0) return Int(1);
  Int sign = 1;
  Int prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k] == 0) ++swap_row;
      if (swap_row == n) return Int(0);
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

/// Solves the square system m x = rhs over a field; nullopt if singular.
template <class Field>
std::optional<std::vector<Field>> solve(Matrix<Field> m, std::vector<Field> rhs) {
  const std::size_t n = m.size();
  if (rhs.size() != n) throw std::invalid_argument("exact::solve: dimension mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && m[piv][k] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(m[k], m[piv]);
    std::swap(rhs[k], rhs[piv]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || m[i][k] == 0) continue;
      Field f = m[i][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<Field> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / m[i][i];
  return x;
}

}  // namespace kuramoto::exact
