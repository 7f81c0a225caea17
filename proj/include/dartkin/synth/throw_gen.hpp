#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "dartkin/error.hpp"
#include "dartkin/kinematics/kinematics.hpp"
#include "dartkin/skelio/skeleton.hpp"
#include "dartkin/synth/posed.hpp"

namespace dartkin::synth {

/// Normalized minimum-jerk position profile on [0, 1], clamped outside.
inline double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

inline constexpr double kMinJerkPeakRate = 1.875;  // max of d/dtau min_jerk

struct ThrowParams {
  double duration_s = 40.0 / 30.0;
  double fps = 30.0;
  double release_phase = 0.8;
  double peak_hand_speed = 5.2;  // m/s
  double movement_s = 0.3;       // length of the minimum-jerk stroke
  double alignment_deg = 14.0;   // stroke elevation above the target direction
  Vec3 target_dir = Vec3(0.0, 0.0, -1.0);
  Pose pose;                     // arm configuration at release
  double noise_std = 0.0;        // isotropic per-joint jitter, m
  std::uint64_t seed = 1;
  std::string athlete_id = "synthetic";
  int throw_index = 0;
  std::optional<Vec2> landing_offset_mm;
};

struct ThrowTruth {
  std::size_t release_idx = 0;
  double peak_speed = 0.0;     // analytic profile maximum
  double release_speed = 0.0;  // noise-free frame-difference speed at release
  kinematics::JointAngles angles;
  double alignment_deg = 0.0;
  Vec3 stroke_dir;
  double stroke_length = 0.0;  // m
};

struct GeneratedThrow {
  ThrowRecord record;
  ThrowTruth truth;
};

inline int frame_count(const ThrowParams& p) {
  return static_cast<int>(std::lround(p.duration_s * p.fps));
}

/// Skeleton throw whose distal right-hand joints (hand, hand tip, thumb)
/// follow a minimum-jerk stroke peaking between frames r-1 and r, where
/// r = round(release_phase * T). Everything else is static plus jitter.
inline GeneratedThrow gen_throw(const ThrowParams& p) {
  if (!(p.fps > 0.0) || !std::isfinite(p.fps)) fail(ErrorCode::InvalidArgument, "gen_throw: fps must be positive");
  if (!(p.release_phase > 0.0 && p.release_phase < 1.0)) fail(ErrorCode::InvalidArgument, "gen_throw: release phase outside (0, 1)");
  if (!(p.peak_hand_speed >= 0.0) || !(p.movement_s > 0.0) || !(p.noise_std >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "gen_throw: speed, stroke length and noise must be non-negative");
  }
  const int frames = frame_count(p);
  if (frames < static_cast<int>(SkeletonSequence::kMinFrames)) fail(ErrorCode::InvalidArgument, "gen_throw: fewer than 8 frames");
  const int r = static_cast<int>(std::lround(p.release_phase * frames));
  if (r < 1 || r > frames - 1) fail(ErrorCode::InvalidArgument, "gen_throw: release frame outside [1, T-1]");

  const Vec3 target = p.target_dir.normalized();
  // Tilt the target direction upwards about the horizontal axis orthogonal
  // to it; fall back to the x axis for a vertical target.
  Vec3 axis = target.cross(Vec3::UnitY());
  if (axis.norm() < 1e-12) axis = Vec3::UnitX();
  const Vec3 stroke = Eigen::AngleAxisd(kinematics::radians(p.alignment_deg), axis.normalized()) * target;

  const double length = p.peak_hand_speed * p.movement_s / kMinJerkPeakRate;
  const double t_peak = (r - 0.5) / p.fps;
  const double t_start = t_peak - 0.5 * p.movement_s;
  auto progress = [&](int t) { return min_jerk((t / p.fps - t_start) / p.movement_s); };
  const double at_release = progress(r);

  const SkeletonFrame base = posed_frame(p.pose);
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<SkeletonFrame> out(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    SkeletonFrame f = base;
    f.timestamp = t / p.fps;
    const Vec3 shift = length * (progress(t) - at_release) * stroke;
    f[Joint::HandTipRight] += shift;
    f[Joint::ThumbRight] += shift;
    f[Joint::HandRight] += 0.9 * shift;
    if (p.noise_std > 0.0) {
      for (auto& q : f.joints) {
        const double x = jitter(rng), y = jitter(rng), z = jitter(rng);
        q += p.noise_std * Vec3(x, y, z);
      }
    }
    out[static_cast<std::size_t>(t)] = f;
  }

  GeneratedThrow g{ThrowRecord{p.athlete_id, p.throw_index, SkeletonSequence(p.fps, std::move(out)), p.landing_offset_mm,
                               std::nullopt},
                   {}};
  g.truth.release_idx = static_cast<std::size_t>(r);
  g.truth.peak_speed = p.peak_hand_speed;
  g.truth.release_speed = length * (at_release - progress(r - 1)) * p.fps;
  g.truth.angles = {p.pose.shoulder_pitch, p.pose.elbow_flexion, p.pose.wrist_extension, p.pose.trunk_yaw};
  g.truth.alignment_deg = p.alignment_deg;
  g.truth.stroke_dir = stroke;
  g.truth.stroke_length = length;
  return g;
}

}  // namespace dartkin::synth
