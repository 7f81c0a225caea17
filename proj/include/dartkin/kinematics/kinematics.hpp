#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dartkin/error.hpp"
#include "dartkin/skelio/skeleton.hpp"

namespace dartkin::kinematics {

inline constexpr JointId kHandTip = Joint::HandTipRight;
inline constexpr JointId kThumb = Joint::ThumbRight;
inline constexpr int kStabilityHalfWindow = 5;

inline double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double radians(double deg) { return deg * std::numbers::pi / 180.0; }

/// Hand-tip speed in m/s. Element k is the speed between frames k and k+1,
/// i.e. it belongs to frame k+1. Length T-1.
inline std::vector<double> hand_speed_series(const SkeletonSequence& seq) {
  std::vector<double> out(seq.size() - 1);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    out[t - 1] = (seq.position(t, kHandTip) - seq.position(t - 1, kHandTip)).norm() * seq.fps();
  }
  return out;
}

/// Index of the first maximum of `speed`. For a series from
/// hand_speed_series the release frame is this index + 1.
inline std::size_t detect_release(std::span<const double> speed) {
  if (speed.empty()) fail(ErrorCode::InvalidArgument, "detect_release: empty series");
  return static_cast<std::size_t>(std::distance(speed.begin(), std::max_element(speed.begin(), speed.end())));
}

/// Release frame r in [1, T-1]: the frame at which hand-tip speed peaks.
inline std::size_t release_frame(const SkeletonSequence& seq) { return detect_release(hand_speed_series(seq)) + 1; }

/// Hand-tip velocity vector at frame r, m/s.
inline Vec3 hand_velocity(const SkeletonSequence& seq, std::size_t r) {
  if (r < 1 || r >= seq.size()) {
    fail(ErrorCode::InvalidArgument, "release frame " + std::to_string(r) + " outside [1, " + std::to_string(seq.size() - 1) + "]");
  }
  return (seq.position(r, kHandTip) - seq.position(r - 1, kHandTip)) * seq.fps();
}

inline double release_speed(const SkeletonSequence& seq, std::size_t r) { return hand_velocity(seq, r).norm(); }

/// Angle between two vectors in degrees, [0, 180].
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) fail(ErrorCode::InvalidArgument, "angle_between: zero-length vector");
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return degrees(std::acos(c));
}

struct JointAngles {
  double shoulder_pitch = 0.0;
  double elbow_flexion = 0.0;
  double wrist_extension = 0.0;
  double trunk_yaw = 0.0;  // signed, (-180, 180]
};

/// Heading of the shoulder line in the horizontal (x-z) plane against +x,
/// counterclockwise seen from above (+y up).
inline double trunk_yaw(const SkeletonFrame& f) {
  const Vec3 v = f[Joint::ShoulderRight] - f[Joint::ShoulderLeft];
  if (std::hypot(v.x(), v.z()) == 0.0) fail(ErrorCode::InvalidArgument, "trunk_yaw: shoulder line is vertical");
  const double yaw = degrees(std::atan2(-v.z(), v.x()));
  return yaw <= -180.0 ? 180.0 : yaw;
}

inline JointAngles joint_angles(const SkeletonFrame& f) {
  const Vec3& sr = f[Joint::ShoulderRight];
  const Vec3& er = f[Joint::ElbowRight];
  const Vec3& wr = f[Joint::WristRight];
  const Vec3& tip = f[Joint::HandTipRight];
  JointAngles a;
  a.shoulder_pitch = angle_between(er - sr, f[Joint::SpineBase] - f[Joint::SpineShoulder]);
  a.elbow_flexion = angle_between(sr - er, wr - er);
  a.wrist_extension = angle_between(wr - er, tip - wr);
  a.trunk_yaw = trunk_yaw(f);
  return a;
}

/// Angle between the throwing arm (shoulder to hand tip) and the body's
/// upward axis (spine base to spine shoulder). Alternate alignment measure.
inline double arm_elevation_angle(const SkeletonFrame& f) {
  return angle_between(f[Joint::HandTipRight] - f[Joint::ShoulderRight], f[Joint::SpineShoulder] - f[Joint::SpineBase]);
}

/// Clamped window [r-5, r+5] around frame r.
inline std::pair<std::size_t, std::size_t> stability_window(std::size_t frames, std::size_t r) {
  const std::size_t lo = r > kStabilityHalfWindow ? r - kStabilityHalfWindow : 0;
  const std::size_t hi = std::min(frames - 1, r + kStabilityHalfWindow);
  return {lo, hi};
}

/// Mean frame-to-frame displacement of `joint` over the window around r, mm.
inline double stability_index(const SkeletonSequence& seq, JointId joint, std::size_t r) {
  if (r >= seq.size()) fail(ErrorCode::InvalidArgument, "stability_index: frame outside sequence");
  const auto [lo, hi] = stability_window(seq.size(), r);
  if (hi - lo + 1 < 2) fail(ErrorCode::InsufficientData, "stability_index: window shorter than 2 frames");
  double sum = 0.0;
  for (std::size_t t = lo + 1; t <= hi; ++t) sum += (seq.position(t, joint) - seq.position(t - 1, joint)).norm();
  return 1000.0 * sum / static_cast<double>(hi - lo);
}

inline double ankle_stability(const SkeletonSequence& seq, std::size_t r) {
  return stability_index(seq, Joint::AnkleRight, r);
}

struct GripStats {
  double mean_mm = 0.0;
  double std_mm = 0.0;  // population
};

inline GripStats grip_stats(const SkeletonSequence& seq) {
  const double n = static_cast<double>(seq.size());
  std::vector<double> d(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) d[t] = 1000.0 * (seq.position(t, kHandTip) - seq.position(t, kThumb)).norm();
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

inline double release_phase_pct(std::size_t r, std::size_t frames) {
  if (r == 0 || r > frames) fail(ErrorCode::InvalidArgument, "release_phase_pct: need 0 < r <= T");
  return 100.0 * static_cast<double>(r) / static_cast<double>(frames);
}

struct ReleaseInfo {
  std::size_t release_idx = 0;
  double release_speed = 0.0;
  double release_phase_pct = 0.0;
};

inline ReleaseInfo release_info(const SkeletonSequence& seq) {
  const std::size_t r = release_frame(seq);
  return {r, release_speed(seq, r), release_phase_pct(r, seq.size())};
}

}  // namespace dartkin::kinematics
