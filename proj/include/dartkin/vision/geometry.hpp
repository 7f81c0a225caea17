#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "dartkin/vision/image.hpp"

namespace dartkin::vision {

struct PixelPos {
  int x = 0, y = 0;
  bool operator==(const PixelPos&) const = default;
};

struct Component {
  std::vector<PixelPos> pixels;  // raster order
  std::size_t area() const { return pixels.size(); }
  Point centroid() const {
    Point c(0, 0);
    for (auto p : pixels) c += Point(p.x, p.y);
    return c / static_cast<double>(pixels.size());
  }
};

inline constexpr std::array<PixelPos, 8> kNeighbors{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

/// 8-connected components, largest first; equal areas keep raster order of
/// their first pixel.
inline std::vector<Component> connected_components(const Mask& m) {
  std::vector<int> label(m.bits.size(), -1);
  std::vector<Component> out;
  std::vector<PixelPos> stack;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const auto idx = static_cast<std::size_t>(y) * m.width + x;
      if (!m.bits[idx] || label[idx] >= 0) continue;
      const int id = static_cast<int>(out.size());
      Component c;
      label[idx] = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        for (auto d : kNeighbors) {
          const int u = p.x + d.x, v = p.y + d.y;
          if (!m.contains(u, v)) continue;
          const auto j = static_cast<std::size_t>(v) * m.width + u;
          if (m.bits[j] && label[j] < 0) {
            label[j] = id;
            stack.push_back({u, v});
          }
        }
      }
      std::sort(c.pixels.begin(), c.pixels.end(), [](PixelPos a, PixelPos b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      out.push_back(std::move(c));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Component& a, const Component& b) { return a.area() > b.area(); });
  return out;
}

inline Mask component_mask(const Component& c, int width, int height) {
  Mask m(width, height);
  for (auto p : c.pixels) m.at(p.x, p.y) = 1;
  return m;
}

/// Outer boundary of the component containing `start`, traced clockwise by
/// Moore-neighbour following. `start` must be the component's first pixel in
/// raster order.
inline std::vector<PixelPos> trace_contour(const Mask& m, PixelPos start) {
  auto inside = [&](PixelPos p) { return m.contains(p.x, p.y) && m.at(p.x, p.y); };
  auto dir_of = [](PixelPos d) {
    for (int i = 0; i < 8; ++i) {
      if (kNeighbors[static_cast<std::size_t>(i)] == d) return i;
    }
    return 0;
  };
  std::vector<PixelPos> contour{start};
  PixelPos cur = start;
  int back = 4;  // west of the first pixel is background
  std::optional<PixelPos> second;
  const std::size_t limit = 4 * m.bits.size() + 8;
  while (contour.size() < limit) {
    int found = -1;
    for (int i = 1; i <= 8; ++i) {
      const int d = (back + i) % 8;
      const auto& n = kNeighbors[static_cast<std::size_t>(d)];
      if (inside({cur.x + n.x, cur.y + n.y})) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const auto& step = kNeighbors[static_cast<std::size_t>(found)];
    const PixelPos next{cur.x + step.x, cur.y + step.y};
    const auto& prev = kNeighbors[static_cast<std::size_t>((found + 7) % 8)];
    back = dir_of({cur.x + prev.x - next.x, cur.y + prev.y - next.y});
    if (cur == start && second && next == *second) break;
    if (!second) second = next;
    cur = next;
    contour.push_back(cur);
  }
  if (contour.size() > 1 && contour.back() == start) contour.pop_back();
  return contour;
}

inline std::vector<PixelPos> trace_contour(const Mask& m, const Component& c) { return trace_contour(m, c.pixels.front()); }

struct Circle {
  Point center{0, 0};
  double radius = 0.0;
  bool contains(const Point& p, double eps = 1e-7) const { return (p - center).norm() <= radius + eps; }
};

namespace detail {

inline Circle circle2(const Point& a, const Point& b) { return {(a + b) / 2.0, (a - b).norm() / 2.0}; }

inline Circle circle3(const Point& a, const Point& b, const Point& c) {
  const Point ab = b - a, ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  if (std::abs(d) < 1e-12) {
    Circle best = circle2(a, b);
    for (const auto& cand : {circle2(a, c), circle2(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double b2 = ab.squaredNorm(), c2 = ac.squaredNorm();
  const Point u((ac.y() * b2 - ab.y() * c2) / d, (ab.x() * c2 - ac.x() * b2) / d);
  return {a + u, u.norm()};
}

}  // namespace detail

/// Smallest circle containing every point (Welzl, randomised incremental
/// form with a fixed shuffle seed).
inline Circle min_enclosing_circle(std::vector<Point> pts) {
  if (pts.empty()) fail(ErrorCode::InvalidArgument, "min_enclosing_circle: no points");
  std::mt19937_64 g(0x5eed);
  std::shuffle(pts.begin(), pts.end(), g);
  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (c.contains(pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (c.contains(pts[j])) continue;
      c = detail::circle2(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!c.contains(pts[k])) c = detail::circle3(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

/// Curvature of the circle through three points; 0 when collinear.
inline double circumscribed_curvature(const Point& a, const Point& b, const Point& c) {
  const double la = (b - c).norm(), lb = (a - c).norm(), lc = (a - b).norm();
  const double denom = la * lb * lc;
  if (denom == 0.0) return 0.0;
  const Point ab = b - a, ac = c - a;
  return 2.0 * (ab.x() * ac.y() - ab.y() * ac.x()) / denom;
}

}  // namespace dartkin::vision
