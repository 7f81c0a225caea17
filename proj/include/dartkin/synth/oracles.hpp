#pragma once

#include <Eigen/Dense>

#include "dartkin/error.hpp"

namespace dartkin::synth {

/// Dense third-difference operator, (n-3) x n.
inline Eigen::MatrixXd third_difference_matrix(int n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 3, n);
  for (int r = 0; r + 3 < n; ++r) {
    d(r, r) = -1.0;
    d(r, r + 1) = 3.0;
    d(r, r + 2) = -3.0;
    d(r, r + 3) = 1.0;
  }
  return d;
}

/// Solves (I + lambda D3^T D3) X = target with a general LU factorization
/// of the full matrix.
inline Eigen::MatrixXd dense_smooth_oracle(const Eigen::MatrixXd& target, double lambda) {
  const int n = static_cast<int>(target.rows());
  if (n < 4 || n > 500) fail(ErrorCode::InvalidArgument, "dense oracle handles 4..500 samples");
  const Eigen::MatrixXd d = third_difference_matrix(n);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + lambda * d.transpose() * d;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (!(std::abs(lu.determinant()) > 0.0)) fail(ErrorCode::Numerical, "dense oracle: singular system");
  return lu.solve(target);
}

/// Plain gradient descent on 1/2 ||X - target||^2 + lambda/2 ||D3 X||^2.
inline Eigen::MatrixXd gradient_descent_smooth(const Eigen::MatrixXd& target, double lambda, long steps) {
  const int n = static_cast<int>(target.rows());
  const Eigen::MatrixXd d = third_difference_matrix(n);
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) + lambda * d.transpose() * d;
  // ||D3^T D3|| <= 64, so 1 / (1 + 64 lambda) is a safe step.
  const double step = 1.0 / (1.0 + 64.0 * lambda);
  Eigen::MatrixXd x = target;
  for (long s = 0; s < steps; ++s) x -= step * (h * x - target);
  return x;
}

}  // namespace dartkin::synth
