#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace dartkin::gen {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline double normal(std::mt19937_64& g, double mean = 0.0, double stddev = 1.0) {
  return std::normal_distribution<double>(mean, stddev)(g);
}

inline Eigen::Vector3d random_unit(std::mt19937_64& g) {
  Eigen::Vector3d v(normal(g), normal(g), normal(g));
  return v.normalized();
}

}  // namespace dartkin::gen
