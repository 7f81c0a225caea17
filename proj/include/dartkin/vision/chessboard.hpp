#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dartkin/vision/homography.hpp"
#include "dartkin/vision/image.hpp"

namespace dartkin::vision {

struct CornerOptions {
  double sigma = 2.0;            // Gaussian blur before the Hessian
  int nms_radius = 4;            // local-maximum window half width
  double relative_threshold = 0.5;  // of the strongest response
};

namespace detail {

inline std::vector<double> gaussian_blur(const std::vector<double>& src, int w, int h, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * src[idx(std::clamp(x + i, 0, w - 1), y)];
      tmp[idx(x, y)] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp[idx(x, std::clamp(y + i, 0, h - 1))];
      out[idx(x, y)] = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Saddle response Ixy^2 - Ixx*Iyy of the blurred gray image; large and
/// positive at chessboard X-junctions.
inline std::vector<double> saddle_response(const Image& img, double sigma) {
  const int w = img.width, h = img.height;
  const auto g = detail::gaussian_blur(grayscale(img), w, h, sigma);
  std::vector<double> s(g.size(), 0.0);
  auto at = [&](int x, int y) { return g[static_cast<std::size_t>(y) * w + x]; };
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double ixx = at(x + 1, y) - 2 * at(x, y) + at(x - 1, y);
      const double iyy = at(x, y + 1) - 2 * at(x, y) + at(x, y - 1);
      const double ixy = (at(x + 1, y + 1) - at(x + 1, y - 1) - at(x - 1, y + 1) + at(x - 1, y - 1)) / 4.0;
      s[static_cast<std::size_t>(y) * w + x] = std::max(0.0, ixy * ixy - ixx * iyy);
    }
  }
  return s;
}

/// Inner corners of a rows x cols chessboard in raster order (row by row,
/// left to right as seen in the image).
inline std::vector<Point> find_chessboard_corners(const Image& img, int rows, int cols, const CornerOptions& opt = {}) {
  if (rows < 3 || cols < 3) fail(ErrorCode::InvalidArgument, "chessboard needs at least 3x3 inner corners");
  const int w = img.width, h = img.height;
  const auto s = saddle_response(img, opt.sigma);
  auto at = [&](int x, int y) { return s[static_cast<std::size_t>(y) * w + x]; };
  const double peak = *std::max_element(s.begin(), s.end());
  if (!(peak > 1e-6)) fail(ErrorCode::NoDetection, "no chessboard corners found");

  struct Cand {
    Point p;
    double r;
  };
  std::vector<Cand> cands;
  const int rad = opt.nms_radius;
  for (int y = rad + 1; y + rad + 1 < h; ++y) {
    for (int x = rad + 1; x + rad + 1 < w; ++x) {
      const double v = at(x, y);
      if (v < opt.relative_threshold * peak) continue;
      bool is_max = true;
      for (int dy = -rad; dy <= rad && is_max; ++dy) {
        for (int dx = -rad; dx <= rad; ++dx) {
          const double u = at(x + dx, y + dy);
          // ties go to the first pixel in raster order
          if (u > v || (u == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      // quadratic fit over the 3x3 neighbourhood
      double gx = 0, gy = 0, hxx = 0, hyy = 0;
      for (int k = -1; k <= 1; ++k) {
        gx += (at(x + 1, y + k) - at(x - 1, y + k)) / 6.0;
        gy += (at(x + k, y + 1) - at(x + k, y - 1)) / 6.0;
        hxx += (at(x + 1, y + k) - 2 * at(x, y + k) + at(x - 1, y + k)) / 3.0;
        hyy += (at(x + k, y + 1) - 2 * at(x + k, y) + at(x + k, y - 1)) / 3.0;
      }
      const double hxy = (at(x + 1, y + 1) - at(x + 1, y - 1) - at(x - 1, y + 1) + at(x - 1, y - 1)) / 4.0;
      const double det = hxx * hyy - hxy * hxy;
      Point off(0, 0);
      if (det > 0 && hxx < 0) {
        off = Point(-(hyy * gx - hxy * gy) / det, -(hxx * gy - hxy * gx) / det);
        if (off.cwiseAbs().maxCoeff() > 1.0) off.setZero();
      }
      cands.push_back({Point(x, y) + off, v});
    }
  }
  const auto want = static_cast<std::size_t>(rows * cols);
  if (cands.size() != want) {
    fail(ErrorCode::NoDetection, "chessboard corner count mismatch: found " + std::to_string(cands.size()) + ", expected " + std::to_string(want));
  }

  // Outer grid corners from the extremes of x+y and x-y.
  auto extreme = [&](auto key) {
    return std::max_element(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) { return key(a.p) < key(b.p); })->p;
  };
  const Point tl = extreme([](const Point& p) { return -(p.x() + p.y()); });
  const Point br = extreme([](const Point& p) { return p.x() + p.y(); });
  const Point tr = extreme([](const Point& p) { return p.x() - p.y(); });
  const Point bl = extreme([](const Point& p) { return p.y() - p.x(); });
  const std::vector<Point> quad{tl, tr, br, bl};
  const std::vector<Point> ideal{{0, 0}, {cols - 1.0, 0}, {cols - 1.0, rows - 1.0}, {0, rows - 1.0}};
  Homography to_grid;
  try {
    to_grid = solve_homography(quad, ideal).h;
  } catch (const Error&) {
    fail(ErrorCode::NoDetection, "chessboard corner ordering is ambiguous");
  }
  std::vector<Point> ordered(want);
  std::vector<bool> filled(want, false);
  for (const auto& c : cands) {
    const Point g = to_grid.apply(c.p);
    const long i = std::lround(g.y()), j = std::lround(g.x());
    if (i < 0 || j < 0 || i >= rows || j >= cols || (g - Point(j, i)).norm() > 0.3) {
      fail(ErrorCode::NoDetection, "chessboard corner ordering is ambiguous");
    }
    const auto slot = static_cast<std::size_t>(i * cols + j);
    if (filled[slot]) fail(ErrorCode::NoDetection, "chessboard corner ordering is ambiguous");
    filled[slot] = true;
    ordered[slot] = c.p;
  }
  return ordered;
}

}  // namespace dartkin::vision
