#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dartkin/error.hpp"
#include "dartkin/kinematics/kinematics.hpp"
#include "dartkin/skelio/resample.hpp"
#include "dartkin/skelio/skeleton.hpp"
#include "dartkin/skelio/spline.hpp"
#include "dartkin/skelio/throw_log.hpp"

namespace dartkin::kinematics {

enum class Feature : std::uint8_t {
  ReleaseVelocity,
  ReleaseAlignmentAngle,
  MeanGripDistance,
  GripDistanceVariability,
  HeadStability,
  TrunkStability,
  WristStability,
  ShoulderPitchAtRelease,
  ElbowFlexionAtRelease,
  WristExtensionAtRelease,
  TrunkYawAtRelease,
  ReleasePhasePct,
  MeanHandVelocity,
  MeanTargetAlignmentAngle,
  MeanShoulderPitch,
  MeanElbowFlexion,
  MeanWristExtension,
  MeanTrunkYaw,
};

inline constexpr std::size_t kFeatureCount = 18;
inline constexpr std::size_t kStaticFeatureCount = 12;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "release_velocity",        "release_alignment_angle",  "mean_grip_distance",
    "grip_distance_variability", "head_stability",         "trunk_stability",
    "wrist_stability",         "shoulder_pitch_at_release", "elbow_flexion_at_release",
    "wrist_extension_at_release", "trunk_yaw_at_release",  "release_phase_pct",
    "mean_hand_velocity",      "mean_target_alignment_angle", "mean_shoulder_pitch",
    "mean_elbow_flexion",      "mean_wrist_extension",     "mean_trunk_yaw",
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureUnits = {
    "m/s", "deg", "mm", "mm", "mm", "mm", "mm", "deg", "deg", "deg", "deg", "%", "m/s", "deg", "deg", "deg", "deg", "deg",
};

inline std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

inline std::optional<Feature> feature_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  return std::nullopt;
}

inline bool is_signed_feature(Feature f) { return f == Feature::TrunkYawAtRelease || f == Feature::MeanTrunkYaw; }

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Tab-separated header line of feature names.
inline std::string feature_header() {
  std::string s;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) s += '\t';
    s += kFeatureNames[i];
  }
  return s;
}

inline std::string to_tsv(const FeatureVector& fv) {
  std::string s;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) s += '\t';
    s += skelio::detail::format_double(fv.values[i]);
  }
  return s;
}

inline FeatureVector feature_vector_from_tsv(std::string_view line) {
  const auto parts = skelio::detail::split(line, '\t');
  if (parts.size() != kFeatureCount) fail(ErrorCode::Parse, "feature row: expected 18 fields");
  FeatureVector fv;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto v = skelio::detail::parse_double(parts[i]);
    if (!v) fail(ErrorCode::Parse, "feature row: bad number in field " + std::string(kFeatureNames[i]));
    fv.values[i] = *v;
  }
  return fv;
}

// ---------------------------------------------------------------------------
// Dynamic series

enum class Series : std::uint8_t { HandSpeed, TargetAlignment, ShoulderPitch, ElbowFlexion, WristExtension, TrunkYaw };

inline constexpr std::size_t kSeriesCount = 6;
inline constexpr std::array<std::string_view, kSeriesCount> kSeriesNames = {
    "hand_speed", "target_alignment", "shoulder_pitch", "elbow_flexion", "wrist_extension", "trunk_yaw",
};

inline std::optional<Series> series_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSeriesCount; ++i) {
    if (kSeriesNames[i] == name) return static_cast<Series>(i);
  }
  return std::nullopt;
}

/// Per-frame series: frame position and timestamp of each sample.
struct FrameSeries {
  std::vector<double> frame;
  std::vector<double> time;
  std::vector<double> value;
};

struct RawSeries {
  std::array<FrameSeries, kSeriesCount> series;
  const FrameSeries& operator[](Series s) const { return series[static_cast<std::size_t>(s)]; }
};

inline Vec3 checked_direction(const Vec3& target_dir) {
  const double n = target_dir.norm();
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::InvalidArgument, "target direction must be a finite non-zero vector");
  return target_dir / n;
}

/// All six per-frame curves. Hand speed and target alignment belong to
/// frames 1..T-1; alignment skips frames where the hand tip does not move.
inline RawSeries raw_series(const SkeletonSequence& seq, const Vec3& target_dir) {
  const Vec3 dir = checked_direction(target_dir);
  RawSeries out;
  auto& speed = out.series[static_cast<std::size_t>(Series::HandSpeed)];
  auto& align = out.series[static_cast<std::size_t>(Series::TargetAlignment)];
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const Vec3 v = hand_velocity(seq, t);
    speed.frame.push_back(static_cast<double>(t));
    speed.time.push_back(seq[t].timestamp);
    speed.value.push_back(v.norm());
    if (v.norm() > 1e-9) {
      align.frame.push_back(static_cast<double>(t));
      align.time.push_back(seq[t].timestamp);
      align.value.push_back(angle_between(v, dir));
    }
  }
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto a = joint_angles(seq[t]);
    const double vals[4] = {a.shoulder_pitch, a.elbow_flexion, a.wrist_extension, a.trunk_yaw};
    for (std::size_t k = 0; k < 4; ++k) {
      auto& s = out.series[static_cast<std::size_t>(Series::ShoulderPitch) + k];
      s.frame.push_back(static_cast<double>(t));
      s.time.push_back(seq[t].timestamp);
      s.value.push_back(vals[k]);
    }
  }
  return out;
}

/// Time-average of a per-frame curve over its timestamps: spline mean when
/// at least 3 samples exist, plain mean otherwise.
inline double curve_mean(const FrameSeries& s) {
  if (s.value.empty()) fail(ErrorCode::InsufficientData, "series has no defined samples");
  if (s.value.size() < 3) {
    double m = 0.0;
    for (double v : s.value) m += v;
    return m / static_cast<double>(s.value.size());
  }
  return skelio::CubicSpline(s.time, s.value).mean();
}

/// The six dynamic curves sampled on the release-aligned grid.
struct SeriesBundle {
  std::array<std::vector<double>, kSeriesCount> series;
  int release_sample = 0;

  std::size_t n() const { return series[0].size(); }
  const std::vector<double>& operator[](Series s) const { return series[static_cast<std::size_t>(s)]; }
  std::vector<double>& operator[](Series s) { return series[static_cast<std::size_t>(s)]; }
};

inline std::vector<double> sample_curve(const FrameSeries& s, std::span<const double> grid) {
  if (s.value.empty()) fail(ErrorCode::InsufficientData, "series has no defined samples");
  if (s.value.size() < 3) return std::vector<double>(grid.size(), curve_mean(s));
  return skelio::resample_series(s.frame, s.value, grid);
}

inline SeriesBundle series_bundle(const SkeletonSequence& seq, const Vec3& target_dir, int n = skelio::kDefaultSamples,
                                  std::optional<int> release_sample = std::nullopt) {
  const int frames = static_cast<int>(seq.size());
  const int r = static_cast<int>(release_frame(seq));
  const int m = release_sample.value_or(skelio::default_release_sample(frames, r, n));
  const auto grid = skelio::phase_grid(frames, r, n, m);
  const auto raw = raw_series(seq, target_dir);
  SeriesBundle out;
  out.release_sample = m;
  for (std::size_t k = 0; k < kSeriesCount; ++k) out.series[k] = sample_curve(raw.series[k], grid);
  return out;
}

// ---------------------------------------------------------------------------
// Feature extraction

struct ThrowKinematics {
  ReleaseInfo release;
  FeatureVector features;
};

inline ThrowKinematics analyze(const SkeletonSequence& seq, const Vec3& target_dir) {
  const Vec3 dir = checked_direction(target_dir);
  ThrowKinematics k;
  k.release = release_info(seq);
  const std::size_t r = k.release.release_idx;
  auto& f = k.features;
  f[Feature::ReleaseVelocity] = k.release.release_speed;
  f[Feature::ReleaseAlignmentAngle] = angle_between(hand_velocity(seq, r), dir);
  const auto grip = grip_stats(seq);
  f[Feature::MeanGripDistance] = grip.mean_mm;
  f[Feature::GripDistanceVariability] = grip.std_mm;
  f[Feature::HeadStability] = stability_index(seq, Joint::Head, r);
  f[Feature::TrunkStability] = stability_index(seq, Joint::SpineMid, r);
  f[Feature::WristStability] = stability_index(seq, Joint::WristRight, r);
  const auto at = joint_angles(seq[r]);
  f[Feature::ShoulderPitchAtRelease] = at.shoulder_pitch;
  f[Feature::ElbowFlexionAtRelease] = at.elbow_flexion;
  f[Feature::WristExtensionAtRelease] = at.wrist_extension;
  f[Feature::TrunkYawAtRelease] = at.trunk_yaw;
  f[Feature::ReleasePhasePct] = k.release.release_phase_pct;

  const auto raw = raw_series(seq, dir);
  for (std::size_t s = 0; s < kSeriesCount; ++s) {
    f[kStaticFeatureCount + s] = curve_mean(raw.series[s]);
  }
  return k;
}

inline FeatureVector extract_features(const SkeletonSequence& seq, const Vec3& target_dir) {
  return analyze(seq, target_dir).features;
}

inline FeatureVector extract_features(const ThrowRecord& rec, const Vec3& target_dir) {
  return extract_features(rec.sequence, target_dir);
}

}  // namespace dartkin::kinematics
