#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "dartkin/vision/board.hpp"
#include "dartkin/vision/homography.hpp"
#include "dartkin/vision/image.hpp"

namespace dartkin::synth {

using vision::Image;
using vision::Point;

// Palette: every board colour has green = 12 and no channel further than 243
// from the dart colour, so the dart, including where it covers anti-aliased
// edges, reads as one flat level in the difference image.
inline constexpr std::array<std::uint8_t, 3> kPaper{243, 12, 243};
inline constexpr std::array<std::uint8_t, 3> kBoardBlack{12, 12, 40};
inline constexpr std::array<std::uint8_t, 3> kBoardRed{220, 12, 20};
inline constexpr std::array<std::uint8_t, 3> kDart{255, 255, 0};
inline constexpr std::array<std::uint8_t, 3> kChessDark{20, 20, 20};
inline constexpr std::array<std::uint8_t, 3> kChessLight{243, 243, 243};

struct Decoy {
  Point center_mm{0, 0};
  double radius_mm = 30.0;
};

/// Plane coordinates are millimetres with x right and y down; the rectified
/// image maps the plane origin to its centre at `calibration.px_per_mm`.
struct BoardSceneParams {
  int camera_width = 1280;
  int camera_height = 960;
  vision::CalibrationSpec calibration{4, 5, 20.0, 3.0, 780, 780};
  Point board_center_mm{0, 0};
  double board_radius_mm = 100.0;
  double ring_width_mm = 4.0;
  double bull_radius_mm = 6.0;
  bool with_dart = true;
  Point dart_tip_mm{30, -20};
  double dart_angle = 0.6;  // direction from the tip toward the flight, rad
  std::optional<Decoy> decoy;
  vision::Homography camera;  // rectified pixels -> camera pixels
  double noise_std = 0.0;
  int supersample = 2;
  std::uint64_t seed = 1;
};

struct BoardScene {
  Image calibration;  // chessboard in the board plane
  Image pre;
  Image post;
  std::vector<Point> corners_camera;  // true inner corners, raster order
  Point center_rectified{0, 0};
  Point tip_rectified{0, 0};
  double outer_radius_px = 0.0;
};

/// Dart outline with the tip at the origin and the body along +u.
inline const std::vector<Point>& dart_outline_mm() {
  static const std::vector<Point> outline{{0, 0}, {2.5, 2.5}, {45, 2.5}, {48, 7}, {65, 7}, {65, -7}, {48, -7}, {45, -2.5}, {2.5, -2.5}};
  return outline;
}

inline std::vector<Point> dart_polygon_mm(const Point& tip, double angle) {
  const Point u(std::cos(angle), std::sin(angle)), v(-std::sin(angle), std::cos(angle));
  std::vector<Point> out;
  for (const auto& p : dart_outline_mm()) out.push_back(tip + p.x() * u + p.y() * v);
  return out;
}

inline bool inside_polygon(const std::vector<Point>& poly, const Point& p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) in = !in;
  }
  return in;
}

inline Point rectified_from_mm(const BoardSceneParams& s, const Point& mm) {
  return Point((s.calibration.width - 1) / 2.0, (s.calibration.height - 1) / 2.0) + mm * s.calibration.px_per_mm;
}

inline Point mm_from_rectified(const BoardSceneParams& s, const Point& px) {
  return (px - Point((s.calibration.width - 1) / 2.0, (s.calibration.height - 1) / 2.0)) / s.calibration.px_per_mm;
}

namespace detail {

enum class Layer { Chessboard, Board, BoardWithDart };

inline std::array<std::uint8_t, 3> plane_color(const BoardSceneParams& s, Layer layer, const std::vector<Point>& dart, const Point& p) {
  if (layer == Layer::Chessboard) {
    const auto& c = s.calibration;
    const double x0 = -(c.cols + 1) / 2.0 * c.cell_mm, y0 = -(c.rows + 1) / 2.0 * c.cell_mm;
    const double fx = (p.x() - x0) / c.cell_mm, fy = (p.y() - y0) / c.cell_mm;
    if (fx < 0 || fy < 0 || fx >= c.cols + 1 || fy >= c.rows + 1) return kChessLight;
    return ((static_cast<int>(fx) + static_cast<int>(fy)) % 2 == 0) ? kChessDark : kChessLight;
  }
  if (layer == Layer::BoardWithDart && inside_polygon(dart, p)) return kDart;
  if (s.decoy && (p - s.decoy->center_mm).norm() <= s.decoy->radius_mm) return kBoardRed;
  const double d = (p - s.board_center_mm).norm();
  const double r = s.board_radius_mm;
  if (d <= s.bull_radius_mm) return kBoardRed;
  if (d <= r - s.ring_width_mm) {
    if (std::abs(d - 0.3 * r) <= 1.0 || std::abs(d - 0.62 * r) <= 1.0) return kPaper;
    return kBoardBlack;
  }
  if (d <= r) return kBoardRed;
  return kPaper;
}

// Pixels whose four corners share a colour take it directly; the rest are
// averaged over an ss x ss grid of samples.
inline Image render(const BoardSceneParams& s, Layer layer, std::mt19937_64& noise_rng) {
  const auto dart = dart_polygon_mm(s.dart_tip_mm, s.dart_angle);
  const auto to_rect = s.camera.inverse();
  const int ss = std::max(1, s.supersample);
  auto color_at = [&](double x, double y) { return plane_color(s, layer, dart, mm_from_rectified(s, to_rect.apply(Point(x, y)))); };
  Image img(s.camera_width, s.camera_height);
  const auto cw = static_cast<std::size_t>(img.width) + 1;
  std::vector<std::array<std::uint8_t, 3>> above(cw), below(cw);
  for (std::size_t x = 0; x < cw; ++x) above[x] = color_at(x - 0.5, -0.5);
  std::normal_distribution<double> noise(0.0, s.noise_std > 0 ? s.noise_std : 1.0);
  for (int y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < cw; ++x) below[x] = color_at(x - 0.5, y + 0.5);
    for (int x = 0; x < img.width; ++x) {
      const auto ux = static_cast<std::size_t>(x);
      std::array<double, 3> acc{0, 0, 0};
      const auto& c0 = above[ux];
      if (c0 == above[ux + 1] && c0 == below[ux] && c0 == below[ux + 1]) {
        for (int k = 0; k < 3; ++k) acc[static_cast<std::size_t>(k)] = c0[static_cast<std::size_t>(k)];
      } else {
        for (int i = 0; i < ss; ++i) {
          for (int j = 0; j < ss; ++j) {
            const auto c = color_at(x + (j + 0.5) / ss - 0.5, y + (i + 0.5) / ss - 0.5);
            for (int k = 0; k < 3; ++k) acc[static_cast<std::size_t>(k)] += c[static_cast<std::size_t>(k)];
          }
        }
        for (auto& v : acc) v /= ss * ss;
      }
      for (int k = 0; k < 3; ++k) {
        double v = acc[static_cast<std::size_t>(k)];
        if (s.noise_std > 0) v += noise(noise_rng);
        img.at(x, y, k) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
    std::swap(above, below);
  }
  return img;
}

}  // namespace detail

inline BoardScene gen_board_scene(const BoardSceneParams& s) {
  std::mt19937_64 rng(s.seed);
  BoardScene out;
  out.calibration = detail::render(s, detail::Layer::Chessboard, rng);
  out.pre = detail::render(s, detail::Layer::Board, rng);
  out.post = detail::render(s, s.with_dart ? detail::Layer::BoardWithDart : detail::Layer::Board, rng);
  for (int i = 0; i < s.calibration.rows; ++i) {
    for (int j = 0; j < s.calibration.cols; ++j) out.corners_camera.push_back(s.camera.apply(vision::rectified_corner(s.calibration, i, j)));
  }
  out.center_rectified = rectified_from_mm(s, s.board_center_mm);
  out.tip_rectified = rectified_from_mm(s, s.dart_tip_mm);
  out.outer_radius_px = s.board_radius_mm * s.calibration.px_per_mm;
  return out;
}

/// Camera view of the rectified square: its corners land near a centred
/// square in the camera frame, each moved by up to `jitter` pixels.
inline vision::Homography random_camera(std::mt19937_64& g, const BoardSceneParams& s, double jitter = 40.0) {
  const double w = s.calibration.width - 1.0, h = s.calibration.height - 1.0;
  const double side = 0.98 * std::min(s.camera_width, s.camera_height) - 2 * jitter;
  const Point mid((s.camera_width - 1) / 2.0, (s.camera_height - 1) / 2.0);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  const std::vector<Point> src{{0, 0}, {w, 0}, {w, h}, {0, h}};
  std::vector<Point> dst;
  for (const auto& corner : std::vector<Point>{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) dst.push_back(mid + corner * side / 2.0 + Point(u(g), u(g)));
  return vision::solve_homography(src, dst).h;
}

/// A scene with random board offset, dart placement and camera. The whole
/// dart stays inside the rectified frame.
inline BoardSceneParams random_scene(std::uint64_t seed, bool decoy = false) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BoardSceneParams s;
  s.seed = seed;
  s.board_center_mm = Point(-8 + 16 * u(g), -8 + 16 * u(g));
  const double half = (s.calibration.width - 1) / 2.0 / s.calibration.px_per_mm - 6.0;
  for (;;) {
    const double r = 70.0 * std::sqrt(u(g)), phi = 2 * std::numbers::pi * u(g);
    s.dart_tip_mm = s.board_center_mm + r * Point(std::cos(phi), std::sin(phi));
    s.dart_angle = 2 * std::numbers::pi * u(g);
    bool fits = true;
    for (const auto& p : dart_polygon_mm(s.dart_tip_mm, s.dart_angle)) fits = fits && std::abs(p.x()) < half && std::abs(p.y()) < half;
    if (fits) break;
  }
  if (decoy) {
    const double qx = u(g) < 0.5 ? -1 : 1, qy = u(g) < 0.5 ? -1 : 1;
    s.decoy = Decoy{s.board_center_mm + Point(qx * 97.0, qy * 97.0), 30.0};
  }
  s.camera = random_camera(g, s);
  return s;
}

}  // namespace dartkin::synth
