#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dartkin/vision/chessboard.hpp"
#include "dartkin/vision/color.hpp"
#include "dartkin/vision/geometry.hpp"
#include "dartkin/vision/homography.hpp"
#include "dartkin/vision/morphology.hpp"

namespace dartkin::vision {

inline constexpr double kMinBlackFill = 0.35;

struct BullseyeOptions {
  int kernel = 5;          // closing kernel for the color masks
  int iterations = 2;
  double min_fill = kMinBlackFill;
  std::size_t min_area = 20;  // smaller red blobs are not candidates
};

struct BoardCandidate {
  Point center{0, 0};
  double outer_radius = 0.0;
  double black_fill = 0.0;
};

struct BoardDetection {
  Point center{0, 0};
  double outer_radius = 0.0;
  double black_fill = 0.0;
  std::vector<BoardCandidate> rejected;  // tried before the confirmed one
};

/// Fraction of pixels with centres inside the circle that are set.
inline double fill_ratio(const Mask& m, const Circle& c) {
  const int x0 = std::max(0, static_cast<int>(std::floor(c.center.x() - c.radius)));
  const int x1 = std::min(m.width - 1, static_cast<int>(std::ceil(c.center.x() + c.radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.center.y() - c.radius)));
  const int y1 = std::min(m.height - 1, static_cast<int>(std::ceil(c.center.y() + c.radius)));
  std::size_t inside = 0, set = 0;
  const double r2 = c.radius * c.radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if ((Point(x, y) - c.center).squaredNorm() > r2) continue;
      ++inside;
      set += m.at(x, y);
    }
  }
  return inside ? static_cast<double>(set) / static_cast<double>(inside) : 0.0;
}

/// Red components, largest first, are candidate outer rings; a candidate is
/// confirmed when the black mask fills at least `min_fill` of its enclosing
/// circle.
inline BoardDetection detect_bullseye(const Image& rectified, const BullseyeOptions& opt = {}) {
  const auto hsv = rgb_to_hsv(rectified);
  const auto kernel = ellipse_kernel(opt.kernel, opt.kernel);
  const Mask red = morph_close(red_mask(hsv), kernel, opt.iterations);
  const Mask black = morph_close(black_mask(hsv), kernel, opt.iterations);
  BoardDetection out;
  for (const auto& comp : connected_components(red)) {
    if (comp.area() < opt.min_area) break;
    std::vector<Point> pts;
    for (auto p : trace_contour(red, comp)) pts.emplace_back(p.x, p.y);
    const Circle c = min_enclosing_circle(std::move(pts));
    const double tau = fill_ratio(black, c);
    if (tau >= opt.min_fill) {
      out.center = c.center;
      out.outer_radius = c.radius;
      out.black_fill = tau;
      return out;
    }
    out.rejected.push_back({c.center, c.radius, tau});
  }
  fail(ErrorCode::NoDetection, "no board candidate passed the black-fill check");
}

struct DartMaskOptions {
  double threshold = 0.98;  // of the normalised difference range
  int kernel_w = 2;
  int kernel_h = 8;
  int iterations = 10;
};

/// Max-channel absolute difference, min-max normalised, thresholded and closed.
inline Mask dart_mask(const Image& pre, const Image& post, const DartMaskOptions& opt = {}) {
  if (pre.width != post.width || pre.height != post.height) fail(ErrorCode::InvalidArgument, "dart_mask: frame sizes differ");
  const std::size_t n = static_cast<std::size_t>(pre.width) * pre.height;
  std::vector<int> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    int m = 0;
    for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(int{post.pixels[3 * i + c]} - int{pre.pixels[3 * i + c]}));
    d[i] = m;
  }
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  if (*hi == *lo) fail(ErrorCode::NoDetection, "dart_mask: frames do not differ");
  const double range = *hi - *lo;
  Mask m(pre.width, pre.height);
  for (std::size_t i = 0; i < n; ++i) m.bits[i] = (d[i] - *lo) >= opt.threshold * range ? 1 : 0;
  return morph_close(m, ellipse_kernel(opt.kernel_w, opt.kernel_h), opt.iterations);
}

struct TipOptions {
  int neighbor_offset = 5;
  double far_fraction = 0.9;
  std::size_t min_contour = 12;
};

struct TipDetection {
  Point tip{0, 0};
  std::size_t contour_size = 0;
  double peak_curvature = 0.0;
};

/// Of the largest component's boundary points farther than `far_fraction`
/// of the maximum from the centroid, the one with the largest |curvature|.
inline TipDetection locate_tip(const Mask& mask, const TipOptions& opt = {}) {
  const auto comps = connected_components(mask);
  if (comps.empty()) fail(ErrorCode::NoDetection, "locate_tip: empty mask");
  const auto& comp = comps.front();
  const auto contour = trace_contour(mask, comp);
  if (contour.size() < opt.min_contour) fail(ErrorCode::NoDetection, "locate_tip: contour too small");
  const Point centroid = comp.centroid();
  std::vector<double> dist(contour.size());
  double far = 0;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    dist[i] = (Point(contour[i].x, contour[i].y) - centroid).norm();
    far = std::max(far, dist[i]);
  }
  const auto n = static_cast<long>(contour.size());
  const long k = opt.neighbor_offset;
  auto pt = [&](long i) {
    const auto& p = contour[static_cast<std::size_t>(((i % n) + n) % n)];
    return Point(p.x, p.y);
  };
  TipDetection best;
  best.contour_size = contour.size();
  double best_abs = -1;
  for (long i = 0; i < n; ++i) {
    if (dist[static_cast<std::size_t>(i)] <= opt.far_fraction * far) continue;
    const double kappa = circumscribed_curvature(pt(i - k), pt(i), pt(i + k));
    if (std::abs(kappa) > best_abs) {
      best_abs = std::abs(kappa);
      best.tip = pt(i);
      best.peak_curvature = kappa;
    }
  }
  return best;
}

inline Point landing_offset_mm(const Point& tip_px, const Point& center_px, double px_per_mm) {
  if (!(px_per_mm > 0.0)) fail(ErrorCode::InvalidArgument, "px_per_mm must be positive");
  return (tip_px - center_px) / px_per_mm;
}

// ---------------------------------------------------------------------------
// Calibration: camera image -> fronto-parallel board plane

struct CalibrationSpec {
  int rows = 4;  // inner corners
  int cols = 5;
  double cell_mm = 20.0;
  double px_per_mm = 2.0;
  int width = 600;  // rectified image
  int height = 600;
};

struct Calibration {
  Homography h;  // camera pixels -> rectified pixels
  double px_per_mm = 2.0;
  int width = 600;
  int height = 600;
  double reprojection_rms = 0.0;
  std::optional<Point> board_center;
};

/// Rectified position of inner corner (i, j): the chessboard centre sits at
/// the centre of the rectified image.
inline Point rectified_corner(const CalibrationSpec& s, int i, int j) {
  const double pitch = s.cell_mm * s.px_per_mm;
  return {(s.width - 1) / 2.0 + (j - (s.cols - 1) / 2.0) * pitch, (s.height - 1) / 2.0 + (i - (s.rows - 1) / 2.0) * pitch};
}

inline Calibration calibrate(const Image& chessboard, const CalibrationSpec& s, const CornerOptions& opt = {}) {
  if (!(s.px_per_mm > 0) || !(s.cell_mm > 0) || s.width <= 0 || s.height <= 0) fail(ErrorCode::InvalidArgument, "invalid calibration spec");
  const auto corners = find_chessboard_corners(chessboard, s.rows, s.cols, opt);
  std::vector<Point> ideal;
  for (int i = 0; i < s.rows; ++i) {
    for (int j = 0; j < s.cols; ++j) ideal.push_back(rectified_corner(s, i, j));
  }
  const auto fit = solve_homography(corners, ideal);
  return {fit.h, s.px_per_mm, s.width, s.height, fit.rms, std::nullopt};
}

inline Image rectify(const Image& camera, const Calibration& c) { return warp_perspective(camera, c.h, c.width, c.height); }

inline nlohmann::json calibration_json(const Calibration& c) {
  nlohmann::json j;
  std::vector<double> h;
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) h.push_back(c.h.m(r, k));
  }
  j["homography"] = h;
  j["px_per_mm"] = c.px_per_mm;
  j["width"] = c.width;
  j["height"] = c.height;
  j["reprojection_rms"] = c.reprojection_rms;
  if (c.board_center) j["board_center"] = {c.board_center->x(), c.board_center->y()};
  return j;
}

inline Calibration calibration_from_json(const nlohmann::json& j) {
  Calibration c;
  try {
    const auto h = j.at("homography").get<std::vector<double>>();
    if (h.size() != 9) fail(ErrorCode::Parse, "calibration: homography needs 9 values");
    Eigen::Matrix3d m;
    m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
    c.h = Homography::from(m);
    c.px_per_mm = j.at("px_per_mm").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.reprojection_rms = j.value("reprojection_rms", 0.0);
    if (j.contains("board_center")) {
      const auto bc = j.at("board_center").get<std::vector<double>>();
      if (bc.size() != 2) fail(ErrorCode::Parse, "calibration: board_center needs 2 values");
      c.board_center = Point(bc[0], bc[1]);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("calibration record: ") + e.what());
  }
  if (!(c.px_per_mm > 0) || c.width <= 0 || c.height <= 0) fail(ErrorCode::Parse, "calibration: invalid scale or size");
  return c;
}

struct Landing {
  Point offset_mm{0, 0};
  double distance_mm = 0.0;
  double black_fill = 0.0;
  double peak_curvature = 0.0;
  Point center_px{0, 0};
  Point tip_px{0, 0};
};

/// Full chain on camera frames: rectify, find the board centre on the
/// pre-throw frame, mask the dart and locate its tip.
inline Landing score_board(const Image& pre, const Image& post, const Calibration& cal, const BullseyeOptions& bopt = {},
                           const DartMaskOptions& mopt = {}, const TipOptions& topt = {}) {
  const Image a = rectify(pre, cal), b = rectify(post, cal);
  const auto board = detect_bullseye(a, bopt);
  const auto tip = locate_tip(dart_mask(a, b, mopt), topt);
  Landing l;
  l.offset_mm = landing_offset_mm(tip.tip, board.center, cal.px_per_mm);
  l.distance_mm = l.offset_mm.norm();
  l.black_fill = board.black_fill;
  l.peak_curvature = tip.peak_curvature;
  l.center_px = board.center;
  l.tip_px = tip.tip;
  return l;
}

}  // namespace dartkin::vision
