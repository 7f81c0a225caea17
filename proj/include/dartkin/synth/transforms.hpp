#pragma once

#include <vector>

#include <Eigen/Geometry>

#include "dartkin/skelio/skeleton.hpp"

namespace dartkin::synth {

/// Same rigid motion applied to every joint of every frame.
inline SkeletonSequence rigid_transform(const SkeletonSequence& seq, const Eigen::Matrix3d& rotation, const Vec3& translation) {
  std::vector<SkeletonFrame> out(seq.frames().begin(), seq.frames().end());
  for (auto& f : out) {
    for (auto& q : f.joints) q = rotation * q + translation;
  }
  return SkeletonSequence(seq.fps(), std::move(out));
}

/// Doubles the frame rate by inserting the linear midpoint between every
/// pair of consecutive frames.
inline SkeletonSequence upsample_midpoints(const SkeletonSequence& seq) {
  std::vector<SkeletonFrame> out;
  out.reserve(2 * seq.size() - 1);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (t > 0) {
      SkeletonFrame mid;
      mid.timestamp = 0.5 * (seq[t - 1].timestamp + seq[t].timestamp);
      for (std::size_t j = 0; j < mid.joints.size(); ++j) mid.joints[j] = 0.5 * (seq[t - 1].joints[j] + seq[t].joints[j]);
      out.push_back(mid);
    }
    out.push_back(seq[t]);
  }
  return SkeletonSequence(2.0 * seq.fps(), std::move(out));
}

}  // namespace dartkin::synth
