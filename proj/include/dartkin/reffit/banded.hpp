#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dartkin/error.hpp"

namespace dartkin::reffit {

/// Symmetric positive-definite band matrix with half-bandwidth p, stored as
/// the lower band: entry (i, i-k) for k = 0..p lives at band_(i, k).
class BandMatrix {
 public:
  BandMatrix(int n, int p) : n_(n), p_(p), band_(Eigen::MatrixXd::Zero(n, p + 1)) {}

  int size() const noexcept { return n_; }
  int half_bandwidth() const noexcept { return p_; }

  double operator()(int i, int j) const {
    if (i < j) std::swap(i, j);
    return i - j > p_ ? 0.0 : band_(i, i - j);
  }
  void add(int i, int j, double v) {
    if (i < j) std::swap(i, j);
    band_(i, i - j) += v;
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      y(i) += band_(i, 0) * x(i);
      for (int k = 1; k <= p_ && k <= i; ++k) {
        y(i) += band_(i, k) * x(i - k);
        y(i - k) += band_(i, k) * x(i);
      }
    }
    return y;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k <= p_ && k <= i; ++k) m(i, i - k) = m(i - k, i) = band_(i, k);
    }
    return m;
  }

 private:
  friend class BandCholesky;
  int n_, p_;
  Eigen::MatrixXd band_;
};

/// L L^T factorization in band storage; O(n p^2) to factor, O(n p) per solve.
class BandCholesky {
 public:
  explicit BandCholesky(const BandMatrix& a) : n_(a.n_), p_(a.p_), l_(a.band_) {
    for (int i = 0; i < n_; ++i) {
      for (int k = std::min(p_, i); k >= 1; --k) {
        const int j = i - k;
        double s = l_(i, k);
        for (int m = 1; m <= p_ - k && m <= j; ++m) s -= l_(i, k + m) * l_(j, m);
        l_(i, k) = s / l_(j, 0);
      }
      double d = l_(i, 0);
      for (int k = 1; k <= std::min(p_, i); ++k) d -= l_(i, k) * l_(i, k);
      if (!(d > 0.0)) fail(ErrorCode::Numerical, "band Cholesky: matrix is not positive definite");
      l_(i, 0) = std::sqrt(d);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd y = b;
    for (int i = 0; i < n_; ++i) {
      double s = y(i);
      for (int k = 1; k <= std::min(p_, i); ++k) s -= l_(i, k) * y(i - k);
      y(i) = s / l_(i, 0);
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double s = y(i);
      for (int k = 1; k <= p_ && i + k < n_; ++k) s -= l_(i + k, k) * y(i + k);
      y(i) = s / l_(i, 0);
    }
    return y;
  }

 private:
  int n_, p_;
  Eigen::MatrixXd l_;
};

/// Coefficients of the third forward difference.
inline constexpr double kThirdDifference[4] = {-1.0, 3.0, -3.0, 1.0};

/// I + lambda D3^T D3 for an n-sample signal, half-bandwidth 3.
inline BandMatrix jerk_system(int n, double lambda) {
  if (n < 4) fail(ErrorCode::InvalidArgument, "jerk system: need at least 4 samples");
  BandMatrix a(n, 3);
  for (int i = 0; i < n; ++i) a.add(i, i, 1.0);
  for (int row = 0; row + 3 < n; ++row) {
    for (int u = 0; u < 4; ++u) {
      for (int v = 0; v <= u; ++v) a.add(row + u, row + v, lambda * kThirdDifference[u] * kThirdDifference[v]);
    }
  }
  return a;
}

}  // namespace dartkin::reffit
