#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dartkin/error.hpp"

namespace dartkin {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr int kJointCount = 25;

// Kinect v2 body joint map.
enum class Joint : std::uint8_t {
  SpineBase = 0,
  SpineMid = 1,
  Neck = 2,
  Head = 3,
  ShoulderLeft = 4,
  ElbowLeft = 5,
  WristLeft = 6,
  HandLeft = 7,
  ShoulderRight = 8,
  ElbowRight = 9,
  WristRight = 10,
  HandRight = 11,
  HipLeft = 12,
  KneeLeft = 13,
  AnkleLeft = 14,
  FootLeft = 15,
  HipRight = 16,
  KneeRight = 17,
  AnkleRight = 18,
  FootRight = 19,
  SpineShoulder = 20,
  HandTipLeft = 21,
  ThumbLeft = 22,
  HandTipRight = 23,
  ThumbRight = 24,
};

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "SpineBase",     "SpineMid",   "Neck",       "Head",         "ShoulderLeft",
    "ElbowLeft",     "WristLeft",  "HandLeft",   "ShoulderRight", "ElbowRight",
    "WristRight",    "HandRight",  "HipLeft",    "KneeLeft",     "AnkleLeft",
    "FootLeft",      "HipRight",   "KneeRight",  "AnkleRight",   "FootRight",
    "SpineShoulder", "HandTipLeft", "ThumbLeft", "HandTipRight", "ThumbRight",
};

/// Index into the 25-joint skeleton. Construction from a raw integer is
/// bounds-checked; construction from `Joint` cannot fail.
class JointId {
 public:
  constexpr JointId(Joint joint) noexcept : index_(static_cast<int>(joint)) {}  // NOLINT(implicit)

  explicit JointId(int index) : index_(index) {
    if (index < 0 || index >= kJointCount) {
      fail(ErrorCode::InvalidArgument, "joint index " + std::to_string(index) + " outside [0,24]");
    }
  }

  constexpr int index() const noexcept { return index_; }
  constexpr Joint joint() const noexcept { return static_cast<Joint>(index_); }
  constexpr std::string_view name() const noexcept { return kJointNames[static_cast<std::size_t>(index_)]; }

  friend constexpr auto operator<=>(JointId, JointId) = default;

 private:
  int index_;
};

struct SkeletonFrame {
  double timestamp = 0.0;  // seconds
  std::array<Vec3, kJointCount> joints{};  // meters, sensor frame

  const Vec3& operator[](JointId j) const { return joints[static_cast<std::size_t>(j.index())]; }
  Vec3& operator[](JointId j) { return joints[static_cast<std::size_t>(j.index())]; }

  friend bool operator==(const SkeletonFrame& a, const SkeletonFrame& b) {
    if (a.timestamp != b.timestamp) return false;
    for (std::size_t i = 0; i < a.joints.size(); ++i) {
      if (a.joints[i] != b.joints[i]) return false;
    }
    return true;
  }
};

/// Validated, immutable recording of one throw.
///
/// Invariants checked at construction: fps > 0, at least `kMinFrames`
/// frames, finite coordinates, strictly increasing timestamps whose spacing
/// stays within half a frame period of 1/fps.
class SkeletonSequence {
 public:
  static constexpr std::size_t kMinFrames = 8;

  SkeletonSequence(double fps, std::vector<SkeletonFrame> frames) : fps_(fps), frames_(std::move(frames)) {
    validate();
  }

  double fps() const noexcept { return fps_; }
  std::size_t size() const noexcept { return frames_.size(); }
  std::span<const SkeletonFrame> frames() const noexcept { return frames_; }
  const SkeletonFrame& operator[](std::size_t t) const { return frames_[t]; }
  const Vec3& position(std::size_t t, JointId j) const { return frames_[t][j]; }

  /// Duration spanned by the first and last frame, in seconds.
  double duration() const noexcept { return frames_.back().timestamp - frames_.front().timestamp; }

  friend bool operator==(const SkeletonSequence& a, const SkeletonSequence& b) {
    return a.fps_ == b.fps_ && a.frames_ == b.frames_;
  }

 private:
  void validate() const {
    if (!(fps_ > 0.0) || !std::isfinite(fps_)) fail(ErrorCode::InvalidArgument, "fps must be finite and positive");
    if (frames_.size() < kMinFrames) {
      fail(ErrorCode::InvalidArgument,
           "sequence has " + std::to_string(frames_.size()) + " frames, need at least " + std::to_string(kMinFrames));
    }
    const double period = 1.0 / fps_;
    for (std::size_t t = 0; t < frames_.size(); ++t) {
      const auto& f = frames_[t];
      if (!std::isfinite(f.timestamp)) fail(ErrorCode::InvalidArgument, "frame " + std::to_string(t) + ": non-finite timestamp");
      for (int j = 0; j < kJointCount; ++j) {
        const Vec3& p = f.joints[static_cast<std::size_t>(j)];
        for (int c = 0; c < 3; ++c) {
          if (!std::isfinite(p[c])) {
            fail(ErrorCode::InvalidArgument, "frame " + std::to_string(t) + ": non-finite coordinate (joint " +
                                                 std::to_string(j) + " " + "xyz"[c] + ")");
          }
        }
      }
      if (t > 0) {
        const double dt = f.timestamp - frames_[t - 1].timestamp;
        if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "frame " + std::to_string(t) + ": non-monotone timestamp");
        if (std::abs(dt - period) > 0.5 * period) {
          fail(ErrorCode::InvalidArgument, "frame " + std::to_string(t) + ": timestamp spacing inconsistent with fps");
        }
      }
    }
  }

  double fps_;
  std::vector<SkeletonFrame> frames_;
};

struct ThrowRecord {
  std::string athlete_id;
  int throw_index = 0;
  SkeletonSequence sequence;
  std::optional<Vec2> landing_offset_mm;  // from bullseye center
  std::optional<double> board_distance_mm;

  std::optional<double> distance_cm() const {
    if (!landing_offset_mm) return std::nullopt;
    return landing_offset_mm->norm() / 10.0;
  }
};

/// Mirror a left-handed recording into right-handed form: negate lateral x
/// and swap every left/right joint pair.
inline SkeletonSequence mirror_left_handed(const SkeletonSequence& seq) {
  static constexpr std::array<std::pair<Joint, Joint>, 10> kPairs = {{
      {Joint::ShoulderLeft, Joint::ShoulderRight},
      {Joint::ElbowLeft, Joint::ElbowRight},
      {Joint::WristLeft, Joint::WristRight},
      {Joint::HandLeft, Joint::HandRight},
      {Joint::HipLeft, Joint::HipRight},
      {Joint::KneeLeft, Joint::KneeRight},
      {Joint::AnkleLeft, Joint::AnkleRight},
      {Joint::FootLeft, Joint::FootRight},
      {Joint::HandTipLeft, Joint::HandTipRight},
      {Joint::ThumbLeft, Joint::ThumbRight},
  }};
  std::vector<SkeletonFrame> out(seq.frames().begin(), seq.frames().end());
  for (auto& f : out) {
    for (auto& p : f.joints) p.x() = -p.x();
    for (auto [l, r] : kPairs) std::swap(f[l], f[r]);
  }
  return SkeletonSequence(seq.fps(), std::move(out));
}

}  // namespace dartkin
