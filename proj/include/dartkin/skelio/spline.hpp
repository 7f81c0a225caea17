#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dartkin/error.hpp"

namespace dartkin::skelio {

/// Natural cubic spline. On segment i,
///   S_i(t) = a_i + b_i (t - t_i) + c_i (t - t_i)^2 + d_i (t - t_i)^3,
/// with S'' = 0 at both ends. Evaluation outside [t_0, t_last] clamps to the
/// nearest endpoint value.
class CubicSpline {
 public:
  struct Segment {
    double t0, a, b, c, d;
  };

  CubicSpline(std::span<const double> t, std::span<const double> y) : t_(t.begin(), t.end()), y_(y.begin(), y.end()) {
    if (t.size() != y.size()) fail(ErrorCode::InvalidArgument, "spline: knot abscissae and ordinates differ in length");
    if (t.size() < 3) fail(ErrorCode::InvalidArgument, "spline: need at least 3 knots");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t[i]) || !std::isfinite(y[i])) fail(ErrorCode::InvalidArgument, "spline: non-finite knot");
      if (i > 0 && !(t[i] > t[i - 1])) fail(ErrorCode::InvalidArgument, "spline: knots must be strictly increasing");
    }
    solve();
  }

  std::size_t knot_count() const noexcept { return t_.size(); }
  std::size_t segment_count() const noexcept { return t_.size() - 1; }
  std::span<const double> knots() const noexcept { return t_; }
  std::span<const double> values() const noexcept { return y_; }
  double front() const noexcept { return t_.front(); }
  double back() const noexcept { return t_.back(); }

  Segment segment(std::size_t i) const { return {t_[i], y_[i], b_[i], c_[i], d_[i]}; }

  double operator()(double t) const {
    if (!(t > t_.front())) return y_.front();
    if (!(t < t_.back())) return y_.back();
    const std::size_t i = locate(t);
    const double u = t - t_[i];
    return y_[i] + u * (b_[i] + u * (c_[i] + u * d_[i]));
  }

  /// First (order 1) or second (order 2) derivative; zero outside the span.
  double derivative(double t, int order = 1) const {
    if (t < t_.front() || t > t_.back()) return 0.0;
    const std::size_t i = std::min(locate(t), segment_count() - 1);
    const double u = t - t_[i];
    if (order == 1) return b_[i] + u * (2.0 * c_[i] + 3.0 * u * d_[i]);
    if (order == 2) return 2.0 * c_[i] + 6.0 * d_[i] * u;
    if (order == 3) return 6.0 * d_[i];
    fail(ErrorCode::InvalidArgument, "spline: derivative order must be 1, 2 or 3");
  }

  /// Exact integral of the spline over the knot span.
  double integral() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i) {
      const double h = t_[i + 1] - t_[i];
      sum += h * (y_[i] + h * (b_[i] / 2.0 + h * (c_[i] / 3.0 + h * d_[i] / 4.0)));
    }
    return sum;
  }

  /// Time-average over the knot span.
  double mean() const { return integral() / (t_.back() - t_.front()); }

 private:
  std::size_t locate(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return static_cast<std::size_t>(std::distance(t_.begin(), it)) - 1;
  }

  // Tridiagonal system for the interior second derivatives M_1..M_{n-1},
  // solved by forward elimination and back substitution.
  void solve() {
    const std::size_t n = t_.size() - 1;
    std::vector<double> h(n), slope(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = t_[i + 1] - t_[i];
      slope[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    std::vector<double> m(n + 1, 0.0);
    if (n >= 2) {
      const std::size_t k = n - 1;
      std::vector<double> diag(k), upper(k), rhs(k);
      for (std::size_t r = 0; r < k; ++r) {
        const std::size_t i = r + 1;
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        upper[r] = h[i];
        rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
      }
      for (std::size_t r = 1; r < k; ++r) {
        const double w = h[r] / diag[r - 1];  // sub-diagonal entry of row r is h[r]
        diag[r] -= w * upper[r - 1];
        rhs[r] -= w * rhs[r - 1];
      }
      m[k] = rhs[k - 1] / diag[k - 1];
      for (std::size_t r = k - 1; r-- > 0;) m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    }
    b_.resize(n);
    c_.resize(n);
    d_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      b_[i] = slope[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
      c_[i] = m[i] / 2.0;
      d_[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
    }
  }

  std::vector<double> t_, y_;
  std::vector<double> b_, c_, d_;
};

inline CubicSpline fit_cubic_spline(std::span<const double> t, std::span<const double> y) { return CubicSpline(t, y); }

inline double eval_spline(const CubicSpline& spline, double t) { return spline(t); }

}  // namespace dartkin::skelio
