#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "polybreak/errors.hpp"

namespace polybreak {

template <class Real = double>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <class Real = double>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

namespace linalg {

// Solves A x = b for symmetric positive definite A. The system is Jacobi
// equilibrated first so the pivot test does not depend on column units
// (raw power designs span many orders of magnitude).
template <class Real>
Vector<Real> spd_solve(const Matrix<Real>& a, const Vector<Real>& b) {
  using std::sqrt;
  const Eigen::Index m = a.rows();
  Vector<Real> d(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(a(i, i) > Real(0))) throw RankDeficient("matrix is not positive definite");
    d(i) = Real(1) / sqrt(a(i, i));
  }
  const Matrix<Real> scaled = d.asDiagonal() * a * d.asDiagonal();
  Eigen::LLT<Matrix<Real>> llt(scaled);
  if (llt.info() != Eigen::Success) throw RankDeficient("matrix is not positive definite");
  Vector<Real> db = d.cwiseProduct(b);
  return d.cwiseProduct(llt.solve(db));
}

/// s^T A^{-1} s for symmetric positive definite A.
template <class Real>
Real inverse_quadratic_form(const Matrix<Real>& a, const Vector<Real>& s) {
  return s.dot(spd_solve<Real>(a, s));
}

/// Row-updating QR factorization via Givens rotations.
///
/// Rows are appended one at a time; the triangular factor R and the rotated
/// right-hand sides are kept, so after every row the residual sum of squares
/// of each right-hand side (against the rows seen so far) and the squared
/// norm of its projection onto the column span are available in O(1).
/// Rotations act on rows only, so results do not depend on column scaling.
class IncrementalQr {
 public:
  IncrementalQr(int columns, int rhs_count)
      : m_(columns),
        q_(rhs_count),
        r_(Matrix<double>::Zero(columns, columns)),
        z_(Matrix<double>::Zero(columns, rhs_count)),
        rss_(static_cast<std::size_t>(rhs_count), 0.0),
        row_(static_cast<std::size_t>(columns)),
        tail_(static_cast<std::size_t>(rhs_count)) {}

  void add_row(std::span<const double> x, std::span<const double> rhs) {
    std::copy(x.begin(), x.end(), row_.begin());
    std::copy(rhs.begin(), rhs.end(), tail_.begin());
    for (int j = 0; j < m_; ++j) {
      const double b = row_[j];
      if (b == 0.0) continue;
      const double a = r_(j, j);
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      r_(j, j) = h;
      for (int l = j + 1; l < m_; ++l) {
        const double t = r_(j, l);
        r_(j, l) = c * t + s * row_[l];
        row_[l] = c * row_[l] - s * t;
      }
      for (int v = 0; v < q_; ++v) {
        const double t = z_(j, v);
        z_(j, v) = c * t + s * tail_[v];
        tail_[v] = c * tail_[v] - s * t;
      }
    }
    for (int v = 0; v < q_; ++v) rss_[v] += tail_[v] * tail_[v];
    ++rows_;
  }

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] double rss(int rhs) const { return rss_[rhs]; }
  [[nodiscard]] double projection_norm2(int rhs) const { return z_.col(rhs).squaredNorm(); }
  [[nodiscard]] const Matrix<double>& r() const { return r_; }

 private:
  int m_;
  int q_;
  int rows_ = 0;
  Matrix<double> r_;
  Matrix<double> z_;
  std::vector<double> rss_;
  std::vector<double> row_;
  std::vector<double> tail_;
};

}  // namespace linalg
}  // namespace polybreak
