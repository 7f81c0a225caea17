#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "dartkin/kinematics/kinematics.hpp"
#include "dartkin/skelio/skeleton.hpp"

namespace dartkin::testkit {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dartkin-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

/// Replaces `joint` inside the stability window around release with a base
/// point plus alternating +-step/2 offsets along x, so every frame-to-frame
/// step in the window has length exactly `step_m`.
inline SkeletonSequence inject_jitter(const SkeletonSequence& seq, JointId joint, double step_m) {
  const auto r = kinematics::release_frame(seq);
  const auto [lo, hi] = kinematics::stability_window(seq.size(), r);
  std::vector<SkeletonFrame> frames(seq.frames().begin(), seq.frames().end());
  const Vec3 base = seq.position(lo, joint);
  for (std::size_t t = lo; t <= hi; ++t) {
    const double s = (t - lo) % 2 == 0 ? 0.5 : -0.5;
    frames[t][joint] = base + Vec3(s * step_m, 0.0, 0.0);
  }
  return SkeletonSequence(seq.fps(), std::move(frames));
}

}  // namespace dartkin::testkit
