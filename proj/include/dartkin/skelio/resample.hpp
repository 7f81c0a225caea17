#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dartkin/error.hpp"
#include "dartkin/skelio/skeleton.hpp"
#include "dartkin/skelio/spline.hpp"

namespace dartkin::skelio {

inline constexpr int kDefaultSamples = 100;

/// Fixed-length, release-aligned samples of a joint set.
struct NormalizedTrajectory {
  std::vector<JointId> joints;
  Eigen::MatrixXd samples;  // rows = samples, cols = 3 * joints.size(), xyz per joint
  double release_phase = 1.0;  // release frame / frame count, in (0, 1]
  int release_sample = 0;      // sample index the release instant maps to
  double duration_s = 0.0;     // time spanned by the samples

  int n() const noexcept { return static_cast<int>(samples.rows()); }
  Vec3 at(int sample, std::size_t joint_slot) const {
    return samples.row(sample).segment<3>(3 * static_cast<Eigen::Index>(joint_slot));
  }
  /// Time step between consecutive samples, in seconds.
  double sample_period() const { return duration_s / (n() - 1); }
};

/// Default sample the release instant lands on: round(n * release_idx / T),
/// kept inside [1, n-1].
inline int default_release_sample(int frames, int release_idx, int n) {
  const int m = static_cast<int>(std::lround(static_cast<double>(n) * release_idx / frames));
  return std::clamp(m, 1, n - 1);
}

/// Fractional frame positions of an n-sample grid, piecewise linear with
/// sample 0 -> frame 0, sample `release_sample` -> frame `release_idx`, and
/// sample n-1 -> frame T-1.
inline std::vector<double> phase_grid(int frames, int release_idx, int n, int release_sample) {
  if (n < 8) fail(ErrorCode::InvalidArgument, "resample: need at least 8 samples");
  if (release_idx <= 0 || release_idx >= frames) fail(ErrorCode::InvalidArgument, "resample: release index outside (0, T)");
  if (release_sample <= 0 || release_sample >= n) fail(ErrorCode::InvalidArgument, "resample: release sample outside (0, n)");
  const double r = release_idx;
  const double m = release_sample;
  const double last = frames - 1;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i <= release_sample) {
      grid[static_cast<std::size_t>(i)] = r * i / m;
    } else if (release_sample == n - 1) {
      grid[static_cast<std::size_t>(i)] = last;
    } else {
      grid[static_cast<std::size_t>(i)] = r + (i - m) * (last - r) / ((n - 1) - m);
    }
  }
  return grid;
}

/// Splines every coordinate of `joints` over frame index and samples it on
/// the release-aligned grid. `release_sample` overrides the default mapping
/// so several throws can share one release index.
inline NormalizedTrajectory resample_trajectory(const SkeletonSequence& seq, std::span<const JointId> joints,
                                                int release_idx, int n = kDefaultSamples,
                                                std::optional<int> release_sample = std::nullopt) {
  const int frames = static_cast<int>(seq.size());
  if (n < 8) fail(ErrorCode::InvalidArgument, "resample: need at least 8 samples");
  if (joints.empty()) fail(ErrorCode::InvalidArgument, "resample: empty joint set");
  const int m = release_sample.value_or(default_release_sample(frames, release_idx, n));
  const auto grid = phase_grid(frames, release_idx, n, m);

  std::vector<double> knots(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) knots[static_cast<std::size_t>(t)] = t;

  NormalizedTrajectory out;
  out.joints.assign(joints.begin(), joints.end());
  out.samples.resize(n, 3 * static_cast<Eigen::Index>(joints.size()));
  out.release_phase = static_cast<double>(release_idx) / frames;
  out.release_sample = m;
  out.duration_s = seq.duration();

  std::vector<double> values(static_cast<std::size_t>(frames));
  for (std::size_t j = 0; j < joints.size(); ++j) {
    for (int c = 0; c < 3; ++c) {
      for (int t = 0; t < frames; ++t) values[static_cast<std::size_t>(t)] = seq.position(static_cast<std::size_t>(t), joints[j])[c];
      const CubicSpline spline(knots, values);
      for (int i = 0; i < n; ++i) {
        out.samples(i, 3 * static_cast<Eigen::Index>(j) + c) = spline(grid[static_cast<std::size_t>(i)]);
      }
    }
  }
  return out;
}

/// Samples a per-frame scalar series (knots at fractional frame positions)
/// on an existing phase grid.
inline std::vector<double> resample_series(std::span<const double> frame_positions, std::span<const double> values,
                                           std::span<const double> grid) {
  const CubicSpline spline(frame_positions, values);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = spline(grid[i]);
  return out;
}

}  // namespace dartkin::skelio
