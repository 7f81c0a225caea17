#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dartkin/skelio/skeleton.hpp"
#include "dartkin/synth/throw_gen.hpp"

namespace dartkin::synth {

/// Population of throws scattered around one nominal technique. Landing
/// offsets grow with the deviation from the nominal speed and alignment.
struct CohortParams {
  std::string athlete_id = "synthetic";
  int count = 200;
  int first_index = 0;
  double speed_mean = 5.2;
  double speed_std = 0.15;
  double alignment_mean = 14.0;
  double alignment_std = 3.0;
  double angle_std = 2.0;           // joint-angle jitter, deg
  double noise_min = 0.0005;        // per-throw jitter range, m
  double noise_max = 0.002;
  double scatter_mm = 8.0;          // landing noise independent of technique
  double mm_per_speed_sd = 15.0;    // vertical miss per speed standard deviation
  double mm_per_alignment_sd = 10.0;
  ThrowParams base;
  std::uint64_t seed = 2024;
};

inline std::vector<GeneratedThrow> gen_cohort(const CohortParams& c) {
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<GeneratedThrow> out;
  out.reserve(static_cast<std::size_t>(c.count));
  for (int i = 0; i < c.count; ++i) {
    ThrowParams p = c.base;
    const double zs = unit(rng), za = unit(rng);
    p.peak_hand_speed = c.speed_mean + c.speed_std * zs;
    p.alignment_deg = c.alignment_mean + c.alignment_std * za;
    p.pose.shoulder_pitch += c.angle_std * unit(rng);
    p.pose.elbow_flexion += c.angle_std * unit(rng);
    p.pose.wrist_extension += c.angle_std * unit(rng);
    p.pose.trunk_yaw += 0.5 * c.angle_std * unit(rng);
    p.noise_std = c.noise_min + (c.noise_max - c.noise_min) * uni(rng);
    p.seed = rng();
    p.athlete_id = c.athlete_id;
    p.throw_index = c.first_index + i;
    const double dx = c.mm_per_alignment_sd * za + c.scatter_mm * unit(rng);
    const double dy = c.mm_per_speed_sd * zs + c.scatter_mm * unit(rng);
    p.landing_offset_mm = Vec2(dx, dy);
    out.push_back(gen_throw(p));
  }
  return out;
}

inline std::vector<ThrowRecord> records_of(const std::vector<GeneratedThrow>& throws) {
  std::vector<ThrowRecord> out;
  out.reserve(throws.size());
  for (const auto& t : throws) out.push_back(t.record);
  return out;
}

}  // namespace dartkin::synth
