#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dartkin/synth/board_scene.hpp"
#include "dartkin/vision/board.hpp"
#include "dartkin/vision/png_io.hpp"
#include "test_support.hpp"

using namespace dartkin;
using namespace dartkin::vision;

namespace {

Image checkerboard(int squares_x, int squares_y, int cell, int margin) {
  Image img(squares_x * cell + 2 * margin, squares_y * cell + 2 * margin, 230);
  for (int y = 0; y < squares_y * cell; ++y) {
    for (int x = 0; x < squares_x * cell; ++x) {
      if ((x / cell + y / cell) % 2 == 0) img.set(x + margin, y + margin, 25, 25, 25);
    }
  }
  return img;
}

Homography random_homography(std::mt19937_64& g, double w, double h, double jitter) {
  const std::vector<Point> src{{0, 0}, {w, 0}, {w, h}, {0, h}};
  std::vector<Point> dst;
  for (const auto& p : src) dst.push_back(p + Point(gen::uniform(g, -jitter, jitter), gen::uniform(g, -jitter, jitter)));
  return solve_homography(src, dst).h;
}

// Scene drawn straight into the rectified frame.
synth::BoardSceneParams front_view(double px_per_mm = 3.0) {
  synth::BoardSceneParams s;
  s.calibration.px_per_mm = px_per_mm;
  s.calibration.width = s.calibration.height = static_cast<int>(260 * px_per_mm);
  s.camera_width = s.calibration.width;
  s.camera_height = s.calibration.height;
  s.camera = Homography{};
  return s;
}

Mask disc(int w, int h, Point c, double r) {
  Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at(x, y) = (Point(x, y) - c).norm() <= r ? 1 : 0;
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// color

TEST(Hsv, PrimaryColors) {
  const auto red = rgb_to_hsv(255, 0, 0);
  EXPECT_EQ(red.h, 0);
  EXPECT_EQ(red.s, 255);
  EXPECT_EQ(red.v, 255);
  const auto gray = rgb_to_hsv(128, 128, 128);
  EXPECT_EQ(gray.s, 0);
  EXPECT_EQ(gray.v, 128);
  EXPECT_EQ(rgb_to_hsv(0, 0, 255).h, 120);
  EXPECT_EQ(rgb_to_hsv(0, 255, 0).h, 60);
}

TEST(Hsv, MatchesFloatingHexcone) {
  auto g = gen::rng(3);
  for (int i = 0; i < 2000; ++i) {
    const int r = static_cast<int>(g() % 256), gg = static_cast<int>(g() % 256), b = static_cast<int>(g() % 256);
    const auto hsv = rgb_to_hsv(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(gg), static_cast<std::uint8_t>(b));
    const double mx = std::max({r, gg, b}), mn = std::min({r, gg, b});
    EXPECT_EQ(hsv.v, mx);
    if (mx > 0) {
      EXPECT_NEAR(hsv.s, 255.0 * (mx - mn) / mx, 0.5);
    }
    if (mx > mn) {
      // hue via atan2 on the chromaticity plane is a different route to the same angle
      const double alpha = r - 0.5 * (gg + b), beta = std::sqrt(3.0) / 2.0 * (gg - b);
      double deg = std::atan2(beta, alpha) * 180.0 / std::numbers::pi;
      if (deg < 0) deg += 360;
      // hexcone and circular hue agree at the six primaries and differ by < 8.5 deg elsewhere
      EXPECT_LT(std::abs(std::remainder(hsv.h * 2.0 - deg, 360.0)), 9.5);
    }
  }
}

TEST(HsvMask, RedRanges) {
  HsvImage img{3, 1, {rgb_to_hsv(230, 20, 20), Hsv{172, 200, 200}, rgb_to_hsv(0, 255, 0)}};
  const auto m = red_mask(img);
  EXPECT_EQ(m.at(0, 0), 1);
  EXPECT_EQ(m.at(1, 0), 1);
  EXPECT_EQ(m.at(2, 0), 0);
  // second range only
  HsvImage deep{1, 1, {Hsv{172, 200, 200}}};
  const HsvRange low[] = {kRedLow};
  EXPECT_EQ(mask_by_ranges(deep, low).at(0, 0), 0);
}

TEST(HsvMask, BlackRangeAndValidation) {
  HsvImage img{2, 1, {rgb_to_hsv(12, 12, 40), rgb_to_hsv(0, 0, 0)}};
  const auto m = black_mask(img);
  EXPECT_EQ(m.at(0, 0), 1);
  EXPECT_EQ(m.at(1, 0), 0);  // zero saturation falls outside the red band
  EXPECT_EQ(kBlack.h_hi, 180);
  const std::vector<HsvRange> none;
  EXPECT_THROW(mask_by_ranges(img, none), Error);
  const HsvRange bad[] = {HsvRange{20, 10, 0, 255, 0, 255}};
  EXPECT_THROW(mask_by_ranges(img, bad), Error);
}

// ---------------------------------------------------------------------------
// morphology

TEST(Morphology, EllipseKernelShape) {
  const auto k = ellipse_kernel(2, 8);
  EXPECT_EQ(k.offsets.size(), 15u);  // top row holds one cell, the other seven rows two
  for (auto [dx, dy] : k.offsets) {
    EXPECT_GE(dx, -1);
    EXPECT_LE(dx, 0);
    EXPECT_GE(dy, -4);
    EXPECT_LE(dy, 3);
  }
  EXPECT_EQ(ellipse_kernel(1, 1).offsets.size(), 1u);
  EXPECT_THROW(ellipse_kernel(0, 3), Error);
}

TEST(Morphology, SolidRectangleUnchanged) {
  Mask m(40, 40);
  for (int y = 10; y < 30; ++y) {
    for (int x = 8; x < 25; ++x) m.at(x, y) = 1;
  }
  EXPECT_EQ(morph_close(m, 2, 8, 10), m);
  EXPECT_EQ(morph_close(Mask(20, 20), 2, 8, 10).count(), 0u);
}

TEST(Morphology, BridgesGapAlongKernel) {
  Mask m(40, 60);
  for (int x = 15; x < 25; ++x) {
    for (int y = 10; y < 25; ++y) m.at(x, y) = 1;
    for (int y = 29; y < 45; ++y) m.at(x, y) = 1;  // 4-pixel gap
  }
  EXPECT_EQ(connected_components(m).size(), 2u);
  EXPECT_EQ(connected_components(morph_close(m, 2, 8, 10)).size(), 1u);
}

TEST(Morphology, ExtensiveAndIdempotent) {
  auto g = gen::rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Mask m(80, 80);
    for (int i = 0; i < 12; ++i) {
      const Point c(gen::uniform(g, 0, 80), gen::uniform(g, 0, 80));
      const double r = gen::uniform(g, 2, 9);
      for (int y = 0; y < 80; ++y) {
        for (int x = 0; x < 80; ++x) {
          if ((Point(x, y) - c).norm() <= r) m.at(x, y) = 1;
        }
      }
    }
    const auto k = ellipse_kernel(2, 8);
    const auto once = morph_close(m, k, 10);
    for (std::size_t i = 0; i < m.bits.size(); ++i) EXPECT_GE(once.bits[i], m.bits[i]);
    const auto twice = morph_close(once, k, 10);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < once.bits.size(); ++i) changed += once.bits[i] != twice.bits[i];
    EXPECT_LE(changed, once.bits.size() / 1000);
  }
}

// ---------------------------------------------------------------------------
// geometry

TEST(Components, LargestFirstEightConnected) {
  Mask m(10, 10);
  m.at(1, 1) = m.at(2, 2) = 1;  // diagonal neighbours join
  for (int x = 5; x < 9; ++x) m.at(x, 7) = 1;
  const auto comps = connected_components(m);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].area(), 4u);
  EXPECT_EQ(comps[1].area(), 2u);
}

TEST(Contour, RectangleBoundary) {
  Mask m(20, 20);
  for (int y = 3; y < 9; ++y) {
    for (int x = 4; x < 14; ++x) m.at(x, y) = 1;
  }
  const auto c = trace_contour(m, connected_components(m)[0]);
  EXPECT_EQ(c.size(), 2u * (10 + 6) - 4);
  for (auto p : c) EXPECT_TRUE(p.x == 4 || p.x == 13 || p.y == 3 || p.y == 8);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& a = c[i];
    const auto& b = c[(i + 1) % c.size()];
    EXPECT_LE(std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)), 1);
  }
  Mask single(5, 5);
  single.at(2, 2) = 1;
  EXPECT_EQ(trace_contour(single, PixelPos{2, 2}).size(), 1u);
}

TEST(Contour, DiscBoundaryIsComplete) {
  const auto m = disc(60, 60, Point(30, 30), 17.0);
  const auto comp = connected_components(m)[0];
  const auto c = trace_contour(m, comp);
  // every component pixel with a background 4-neighbour is on the contour
  std::size_t border = 0;
  for (auto p : comp.pixels) {
    if (!m.at(p.x + 1, p.y) || !m.at(p.x - 1, p.y) || !m.at(p.x, p.y + 1) || !m.at(p.x, p.y - 1)) {
      ++border;
      EXPECT_NE(std::find(c.begin(), c.end(), p), c.end());
    }
  }
  EXPECT_GE(c.size(), border);
}

TEST(MinCircle, MatchesBruteForce) {
  auto g = gen::rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> pts;
    const int n = 2 + static_cast<int>(g() % 14);
    for (int i = 0; i < n; ++i) pts.emplace_back(gen::uniform(g, -10, 10), gen::uniform(g, -10, 10));
    const auto c = min_enclosing_circle(pts);
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const Circle& cand) {
      for (const auto& p : pts) {
        if (!cand.contains(p, 1e-9)) return;
      }
      best = std::min(best, cand.radius);
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        consider(detail::circle2(pts[i], pts[j]));
        for (std::size_t k = j + 1; k < pts.size(); ++k) consider(detail::circle3(pts[i], pts[j], pts[k]));
      }
    }
    for (const auto& p : pts) EXPECT_TRUE(c.contains(p, 1e-9));
    EXPECT_NEAR(c.radius, best, 1e-9);
  }
  EXPECT_THROW(min_enclosing_circle({}), Error);
}

TEST(Curvature, CircumscribedCircle) {
  const double r = 7.0;
  const Point a(r, 0), b(0, r), c(-r, 0);
  EXPECT_NEAR(std::abs(circumscribed_curvature(a, b, c)), 1.0 / r, 1e-12);
  EXPECT_EQ(circumscribed_curvature(Point(0, 0), Point(1, 1), Point(2, 2)), 0.0);
}

// ---------------------------------------------------------------------------
// homography and warping

TEST(Homography, IdentityAndTranslation) {
  const std::vector<Point> src{{0, 0}, {100, 0}, {100, 80}, {0, 80}, {30, 50}};
  const auto id = solve_homography(src, src);
  EXPECT_LT((id.h.m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  std::vector<Point> dst;
  for (const auto& p : src) dst.push_back(p + Point(5, 7));
  Eigen::Matrix3d t;
  t << 1, 0, 5, 0, 1, 7, 0, 0, 1;
  EXPECT_LT((solve_homography(src, dst).h.m - t).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Homography, NoisyFitReprojects) {
  auto g = gen::rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto truth = random_homography(g, 640, 480, 60);
    std::vector<Point> src, dst;
    for (int i = 0; i < 20; ++i) {
      src.emplace_back(gen::uniform(g, 0, 640), gen::uniform(g, 0, 480));
      dst.push_back(truth.apply(src.back()) + Point(gen::normal(g, 0, 0.3), gen::normal(g, 0, 0.3)));
    }
    const auto fit = solve_homography(src, dst);
    double ss = 0;
    for (const auto& p : src) ss += (fit.h.apply(p) - truth.apply(p)).squaredNorm();
    EXPECT_LT(std::sqrt(ss / 20), 1.0);
    EXPECT_LT(fit.rms, 1.0);
  }
}

TEST(Homography, RoundTrip) {
  auto g = gen::rng(7);
  const auto h = random_homography(g, 500, 500, 80);
  const auto inv = h.inverse();
  for (int i = 0; i < 100; ++i) {
    const Point p(gen::uniform(g, 0, 500), gen::uniform(g, 0, 500));
    EXPECT_LT((inv.apply(h.apply(p)) - p).norm(), 1e-8);
  }
}

TEST(Homography, RankDeficient) {
  const std::vector<Point> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
  EXPECT_THROW(solve_homography(line, line), Error);
  const std::vector<Point> three{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(solve_homography(three, three), Error);
  Eigen::Matrix3d singular = Eigen::Matrix3d::Zero();
  singular(2, 2) = 1;
  EXPECT_THROW(Homography::from(singular), Error);
}

TEST(Warp, IdentityCopies) {
  auto g = gen::rng(8);
  Image img(37, 23);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(g() % 256);
  EXPECT_EQ(warp_perspective(img, Homography{}, 37, 23), img);
}

TEST(Warp, SmoothRoundTrip) {
  Image img(200, 160);
  for (int y = 0; y < 160; ++y) {
    for (int x = 0; x < 200; ++x) {
      img.set(x, y, static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), static_cast<std::uint8_t>((x + y) / 2));
    }
  }
  auto g = gen::rng(9);
  const auto h = random_homography(g, 199, 159, 12);
  const auto back = warp_perspective(warp_perspective(img, h, 200, 160), h.inverse(), 200, 160);
  int worst = 0;
  for (int y = 30; y < 130; ++y) {
    for (int x = 30; x < 170; ++x) {
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(int{back.at(x, y, c)} - int{img.at(x, y, c)}));
    }
  }
  EXPECT_LE(worst, 2);
}

// ---------------------------------------------------------------------------
// chessboard

TEST(Chessboard, FrontoParallelCorners) {
  const auto img = checkerboard(6, 5, 40, 30);  // 5 x 4 inner corners
  const auto corners = find_chessboard_corners(img, 4, 5);
  ASSERT_EQ(corners.size(), 20u);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      // corner between pixels 29+40(j+1) and 30+40(j+1)
      const Point truth(29.5 + 40 * (j + 1), 29.5 + 40 * (i + 1));
      EXPECT_LT((corners[static_cast<std::size_t>(i * 5 + j)] - truth).norm(), 0.5);
    }
  }
}

TEST(Chessboard, WarpedCornersMapBack) {
  auto g = gen::rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    synth::BoardSceneParams s;
    s.camera = synth::random_camera(g, s);
    const auto scene = synth::gen_board_scene(s);
    const auto corners = find_chessboard_corners(scene.calibration, 4, 5);
    const auto inv = s.camera.inverse();
    for (std::size_t k = 0; k < corners.size(); ++k) {
      EXPECT_LT((inv.apply(corners[k]) - inv.apply(scene.corners_camera[k])).norm(), 0.7);
    }
  }
}

TEST(Chessboard, BlankAndTooSmall) {
  EXPECT_THROW(find_chessboard_corners(Image(120, 100, 200), 4, 5), Error);
  EXPECT_THROW(find_chessboard_corners(checkerboard(6, 5, 40, 30), 2, 5), Error);
  EXPECT_THROW(find_chessboard_corners(checkerboard(6, 5, 40, 30), 4, 6), Error);
}

TEST(Calibration, RectifiedGridIsAxisAligned) {
  auto g = gen::rng(11);
  synth::BoardSceneParams s;
  s.camera = synth::random_camera(g, s);
  const auto scene = synth::gen_board_scene(s);
  const auto cal = calibrate(scene.calibration, s.calibration);
  EXPECT_LT(cal.reprojection_rms, 0.3);
  const auto rect = rectify(scene.calibration, cal);
  const auto corners = find_chessboard_corners(rect, 4, 5);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      const auto& c = corners[static_cast<std::size_t>(i * 5 + j)];
      EXPECT_NEAR(c.y(), corners[static_cast<std::size_t>(i * 5)].y(), 1.0);
      EXPECT_NEAR(c.x(), corners[static_cast<std::size_t>(j)].x(), 1.0);
    }
  }
}

TEST(Calibration, JsonRoundTrip) {
  Calibration c;
  c.h = Homography::from((Eigen::Matrix3d() << 1.1, 0.02, 3, -0.01, 0.95, 4, 1e-5, 2e-5, 1).finished());
  c.px_per_mm = 3;
  c.board_center = Point(10.25, 20.5);
  const auto back = calibration_from_json(nlohmann::json::parse(calibration_json(c).dump()));
  EXPECT_LT((back.h.m - c.h.m).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(*back.board_center, *c.board_center);
  EXPECT_THROW(calibration_from_json(nlohmann::json{{"homography", {1, 2}}}), Error);
}

// ---------------------------------------------------------------------------
// bullseye

TEST(Bullseye, FrontViewCenterAndRadius) {
  auto s = front_view();
  s.board_center_mm = Point(7, -4);
  const auto scene = synth::gen_board_scene(s);
  const auto det = detect_bullseye(scene.pre);
  EXPECT_LT((det.center - scene.center_rectified).norm(), 2.0);
  EXPECT_NEAR(det.outer_radius / scene.outer_radius_px, 1.0, 0.03);
  EXPECT_GE(det.black_fill, kMinBlackFill);
  EXPECT_TRUE(det.rejected.empty());
}

TEST(Bullseye, DecoyRejected) {
  auto s = front_view();
  s.decoy = synth::Decoy{Point(-97, 97), 30.0};
  const auto scene = synth::gen_board_scene(s);
  const auto det = detect_bullseye(scene.pre);
  ASSERT_EQ(det.rejected.size(), 1u);  // the sticker is larger, so it is tried first
  EXPECT_LT(det.rejected[0].black_fill, kMinBlackFill);
  EXPECT_LT((det.center - scene.center_rectified).norm(), 2.0);
}

TEST(Bullseye, NothingToFind) {
  try {
    detect_bullseye(Image(200, 200, 255));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDetection);
  }
}

TEST(Bullseye, RotationMovesCenterExactly) {
  auto s = front_view();
  s.board_center_mm = Point(12, 5);
  const auto img = synth::gen_board_scene(s).pre;
  Image rot(img.height, img.width);  // 90 degrees clockwise
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) rot.at(img.height - 1 - y, x, c) = img.at(x, y, c);
    }
  }
  const auto a = detect_bullseye(img).center;
  const auto b = detect_bullseye(rot).center;
  EXPECT_LT((b - Point(img.height - 1 - a.y(), a.x())).norm(), 2.0);
}

// ---------------------------------------------------------------------------
// dart mask and tip

TEST(DartMask, CoversDartNotBackground) {
  auto s = front_view();
  const auto scene = synth::gen_board_scene(s);
  const auto m = dart_mask(scene.pre, scene.post);
  const auto poly = synth::dart_polygon_mm(s.dart_tip_mm, s.dart_angle);
  std::size_t dart = 0, hit = 0, background = 0, false_pos = 0;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const bool in = synth::inside_polygon(poly, synth::mm_from_rectified(s, Point(x, y)));
      (in ? dart : background)++;
      if (in) hit += m.at(x, y);
      if (!in) false_pos += m.at(x, y);
    }
  }
  EXPECT_GE(static_cast<double>(hit), 0.9 * static_cast<double>(dart));
  EXPECT_LE(static_cast<double>(false_pos), 0.01 * static_cast<double>(background));
}

TEST(DartMask, BrightnessShiftAbsorbed) {
  auto s = front_view();
  auto scene = synth::gen_board_scene(s);
  for (auto& p : scene.post.pixels) p = static_cast<std::uint8_t>(std::min(255, p + 3));
  const auto comps = connected_components(dart_mask(scene.pre, scene.post));
  ASSERT_FALSE(comps.empty());
  const Point tip = scene.tip_rectified;
  const auto& c = comps.front();
  const bool near_tip = std::any_of(c.pixels.begin(), c.pixels.end(), [&](PixelPos p) { return (Point(p.x, p.y) - tip).norm() < 5; });
  EXPECT_TRUE(near_tip);
}

TEST(DartMask, Errors) {
  auto s = front_view();
  s.with_dart = false;
  const auto scene = synth::gen_board_scene(s);
  try {
    dart_mask(scene.pre, scene.post);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDetection);
  }
  EXPECT_THROW(dart_mask(Image(10, 10), Image(10, 11)), Error);
}

TEST(Tip, SyntheticDartWithinThreePixels) {
  for (int trial = 0; trial < 10; ++trial) {
    auto s = front_view();
    const auto r = synth::random_scene(500 + static_cast<std::uint64_t>(trial));
    s.dart_tip_mm = r.dart_tip_mm;
    s.dart_angle = r.dart_angle;
    s.board_center_mm = r.board_center_mm;
    const auto scene = synth::gen_board_scene(s);
    const auto tip = locate_tip(dart_mask(scene.pre, scene.post));
    EXPECT_LT((tip.tip - scene.tip_rectified).norm(), 3.0) << trial;
  }
}

TEST(Tip, EllipsePicksMajorAxisEnd) {
  Mask m(120, 80);
  for (int y = 0; y < 80; ++y) {
    for (int x = 0; x < 120; ++x) {
      const double u = (x - 60) / 45.0, v = (y - 40) / 12.0;
      m.at(x, y) = u * u + v * v <= 1.0 ? 1 : 0;
    }
  }
  const auto tip = locate_tip(m);
  EXPECT_NEAR(std::abs(tip.tip.x() - 60), 45, 1.5);
  EXPECT_NEAR(tip.tip.y(), 40, 1.5);
}

TEST(Tip, CircleTerminatesOnContour) {
  const auto m = disc(50, 50, Point(25, 25), 15);
  const auto tip = locate_tip(m);
  const auto contour = trace_contour(m, connected_components(m)[0]);
  EXPECT_NE(std::find(contour.begin(), contour.end(), PixelPos{static_cast<int>(tip.tip.x()), static_cast<int>(tip.tip.y())}), contour.end());
  EXPECT_EQ(tip.contour_size, contour.size());
}

TEST(Tip, SaltAndPepperNoise) {
  auto g = gen::rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    auto s = front_view();
    const auto r = synth::random_scene(700 + static_cast<std::uint64_t>(trial));
    s.dart_tip_mm = r.dart_tip_mm;
    s.dart_angle = r.dart_angle;
    const auto scene = synth::gen_board_scene(s);
    auto m = dart_mask(scene.pre, scene.post);
    for (auto& b : m.bits) {
      if (g() % 1000 < 5) b = static_cast<std::uint8_t>(1 - b);
    }
    EXPECT_LT((locate_tip(m).tip - scene.tip_rectified).norm(), 5.0) << trial;
  }
}

TEST(Tip, TooSmall) {
  Mask m(10, 10);
  m.at(4, 4) = m.at(5, 4) = 1;
  EXPECT_THROW(locate_tip(m), Error);
  EXPECT_THROW(locate_tip(Mask(10, 10)), Error);
}

TEST(Landing, Offsets) {
  EXPECT_EQ(landing_offset_mm(Point(3, 4), Point(3, 4), 2.0), Point(0, 0));
  EXPECT_EQ(landing_offset_mm(Point(140, 100), Point(100, 100), 2.0), Point(20, 0));
  EXPECT_THROW(landing_offset_mm(Point(0, 0), Point(0, 0), 0.0), Error);
}

TEST(Landing, FullChainFiftySevenMillimetres) {
  auto g = gen::rng(14);
  auto s = synth::random_scene(99);
  s.dart_tip_mm = s.board_center_mm + Point(57 * std::cos(1.1), 57 * std::sin(1.1));
  s.dart_angle = 1.1;  // body points away from the centre
  s.camera = synth::random_camera(g, s);
  const auto scene = synth::gen_board_scene(s);
  const auto cal = calibrate(scene.calibration, s.calibration);
  const auto landing = score_board(scene.pre, scene.post, cal);
  EXPECT_NEAR(landing.distance_mm, 57.0, 2.0);
}

// ---------------------------------------------------------------------------
// scenes and files

TEST(Scene, Deterministic) {
  auto s = synth::random_scene(5);
  s.noise_std = 2.0;
  const auto a = synth::gen_board_scene(s), b = synth::gen_board_scene(s);
  EXPECT_EQ(a.pre, b.pre);
  EXPECT_EQ(a.post, b.post);
  EXPECT_EQ(a.calibration, b.calibration);
}

TEST(Png, RoundTrip) {
  auto g = gen::rng(15);
  Image img(31, 17);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(g() % 256);
  const auto path = std::filesystem::temp_directory_path() / "dartkin_png_roundtrip.png";
  write_png(path, img);
  EXPECT_EQ(read_png(path), img);
  std::filesystem::remove(path);
  EXPECT_THROW(read_png(std::filesystem::temp_directory_path() / "dartkin_missing.png"), Error);
}

TEST(Png, RejectsNonPng) {
  const auto path = std::filesystem::temp_directory_path() / "dartkin_not_png.png";
  {
    std::ofstream out(path);
    out << "plain text, not an image";
  }
  try {
    read_png(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
  std::filesystem::remove(path);
}
