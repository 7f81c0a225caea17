#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dartkin/vision/image.hpp"

namespace dartkin::vision {

/// 3x3 projective map with H(2,2) = 1.
struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  static Homography from(const Eigen::Matrix3d& a) {
    if (!a.allFinite()) fail(ErrorCode::Numerical, "homography has non-finite entries");
    if (std::abs(a(2, 2)) < 1e-12) fail(ErrorCode::Numerical, "homography cannot be normalised (H33 = 0)");
    Homography h{a / a(2, 2)};
    if (std::abs(h.m.determinant()) <= 1e-12) fail(ErrorCode::Numerical, "homography is singular");
    return h;
  }

  Point apply(const Point& p) const {
    const Eigen::Vector3d q = m * Eigen::Vector3d(p.x(), p.y(), 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
  }

  Homography inverse() const { return from(m.inverse()); }
  Homography operator*(const Homography& o) const { return from(m * o.m); }
};

namespace detail {

// Similarity taking the points to zero mean and mean distance sqrt(2).
inline Eigen::Matrix3d normalizer(std::span<const Point> pts) {
  Point c(0, 0);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double d = 0;
  for (const auto& p : pts) d += (p - c).norm();
  d /= static_cast<double>(pts.size());
  if (!(d > 0)) fail(ErrorCode::Numerical, "homography points coincide");
  const double s = std::sqrt(2.0) / d;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

}  // namespace detail

struct HomographyFit {
  Homography h;
  double rms = 0.0;  // reprojection error in destination units
};

/// Normalised direct linear transform; least squares for more than four
/// correspondences.
inline HomographyFit solve_homography(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != dst.size()) fail(ErrorCode::InvalidArgument, "homography: point lists differ in length");
  if (src.size() < 4) fail(ErrorCode::InvalidArgument, "homography needs at least 4 correspondences");
  const auto ts = detail::normalizer(src), td = detail::normalizer(dst);
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * Eigen::Vector3d(src[static_cast<std::size_t>(i)].x(), src[static_cast<std::size_t>(i)].y(), 1);
    const Eigen::Vector3d q = td * Eigen::Vector3d(dst[static_cast<std::size_t>(i)].x(), dst[static_cast<std::size_t>(i)].y(), 1);
    a.row(2 * i) << 0, 0, 0, -p.x(), -p.y(), -1, q.y() * p.x(), q.y() * p.y(), q.y();
    a.row(2 * i + 1) << p.x(), p.y(), 1, 0, 0, 0, -q.x() * p.x(), -q.x() * p.y(), -q.x();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // One null direction is expected; a second means the points do not pin H down.
  if (sv(7) <= 1e-9 * sv(0)) fail(ErrorCode::Numerical, "homography: correspondences are rank deficient");
  const Eigen::VectorXd v = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  HomographyFit fit{Homography::from(td.inverse() * hn * ts), 0.0};
  double ss = 0;
  for (std::size_t i = 0; i < src.size(); ++i) ss += (fit.h.apply(src[i]) - dst[i]).squaredNorm();
  fit.rms = std::sqrt(ss / static_cast<double>(src.size()));
  return fit;
}

/// Bilinear sample at a real position; black outside the image.
inline std::array<double, 3> sample_bilinear(const Image& img, double x, double y) {
  std::array<double, 3> out{0, 0, 0};
  if (!(x >= 0 && y >= 0 && x <= img.width - 1 && y <= img.height - 1)) return out;
  const int x0 = std::min(static_cast<int>(x), img.width - 1), y0 = std::min(static_cast<int>(y), img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  for (int c = 0; c < 3; ++c) {
    const double top = img.at(x0, y0, c) * (1 - fx) + img.at(x1, y0, c) * fx;
    const double bot = img.at(x0, y1, c) * (1 - fx) + img.at(x1, y1, c) * fx;
    out[static_cast<std::size_t>(c)] = top * (1 - fy) + bot * fy;
  }
  return out;
}

/// Output pixel p takes the source value at H^-1 p (pixel centres at integers).
inline Image warp_perspective(const Image& src, const Homography& h, int out_width, int out_height) {
  const Homography inv = h.inverse();
  Image out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point s = inv.apply(Point(x, y));
      const auto v = sample_bilinear(src, s.x(), s.y());
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v[static_cast<std::size_t>(c)], 0.0, 255.0)));
    }
  }
  return out;
}

}  // namespace dartkin::vision
