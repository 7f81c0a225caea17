#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dartkin/error.hpp"
#include "dartkin/kinematics/kinematics.hpp"
#include "dartkin/skelio/skeleton.hpp"
#include "dartkin/skelio/throw_log.hpp"

namespace dartkin::selection {

struct SelectionConfig {
  std::size_t window = 200;
  std::size_t k = 30;
  double a = 0.25;  // per cm
  double b = 1e4;
  bool paper_literal_score = false;  // exp(+a d) instead of exp(-a d)

  void validate() const {
    if (k == 0 || k > window) fail(ErrorCode::ConfigDefect, "selection: need 0 < k <= window");
    if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorCode::ConfigDefect, "selection: a must be positive");
    if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorCode::ConfigDefect, "selection: b must be positive");
  }
};

/// Sum of squared norms of third forward differences. Plain frame
/// differences, no division by the frame period.
inline double jerk_metric(std::span<const Vec3> path) {
  if (path.size() < 4) fail(ErrorCode::InsufficientData, "jerk_metric: need at least 4 samples");
  double sum = 0.0;
  for (std::size_t k = 0; k + 3 < path.size(); ++k) {
    const Vec3 d3 = path[k + 3] - 3.0 * path[k + 2] + 3.0 * path[k + 1] - path[k];
    sum += d3.squaredNorm();
  }
  return sum;
}

inline std::vector<Vec3> hand_tip_path(const SkeletonSequence& seq) {
  std::vector<Vec3> out(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) out[t] = seq.position(t, kinematics::kHandTip);
  return out;
}

inline double jerk_metric(const SkeletonSequence& seq) { return jerk_metric(hand_tip_path(seq)); }

inline double throw_score(double distance_cm, double jerk, const SelectionConfig& cfg) {
  const double sign = cfg.paper_literal_score ? 1.0 : -1.0;
  return std::exp(sign * cfg.a * distance_cm) / std::sqrt(1.0 + cfg.b * jerk);
}

struct ThrowScore {
  std::string athlete_id;
  int throw_index = 0;
  double distance_cm = 0.0;
  double jerk = 0.0;
  double score = 0.0;
  double fps = 0.0;

  friend bool operator==(const ThrowScore&, const ThrowScore&) = default;
};

struct ScoredSet {
  std::vector<ThrowScore> scores;
  std::vector<int> unscored;  // throw indices lacking a landing offset
};

inline ThrowScore score_throw(const ThrowRecord& rec, const SelectionConfig& cfg) {
  const auto d = rec.distance_cm();
  if (!d) fail(ErrorCode::InsufficientData, "throw " + std::to_string(rec.throw_index) + " has no landing offset");
  const double jerk = jerk_metric(rec.sequence);
  return {rec.athlete_id, rec.throw_index, *d, jerk, throw_score(*d, jerk, cfg), rec.sequence.fps()};
}

inline ScoredSet score_records(std::span<const ThrowRecord> records, const SelectionConfig& cfg) {
  ScoredSet out;
  for (const auto& rec : records) {
    if (rec.landing_offset_mm) {
      out.scores.push_back(score_throw(rec, cfg));
    } else {
      out.unscored.push_back(rec.throw_index);
    }
  }
  return out;
}

/// Higher score first; ties by smaller distance, then smaller throw index.
inline bool ranks_before(const ThrowScore& x, const ThrowScore& y) {
  if (x.score != y.score) return x.score > y.score;
  if (x.distance_cm != y.distance_cm) return x.distance_cm < y.distance_cm;
  return x.throw_index < y.throw_index;
}

/// Records with the `window` largest throw indices.
template <class T, class Index>
std::vector<T> most_recent(std::span<const T> items, std::size_t window, Index&& index_of) {
  std::vector<T> out(items.begin(), items.end());
  std::sort(out.begin(), out.end(), [&](const T& x, const T& y) { return index_of(x) > index_of(y); });
  if (out.size() > window) out.resize(window);
  return out;
}

inline std::vector<ThrowScore> select_top_k(std::span<const ThrowScore> scores, const SelectionConfig& cfg) {
  cfg.validate();
  if (scores.empty()) fail(ErrorCode::InsufficientData, "selection: no scoreable throws");
  auto pool = most_recent(scores, cfg.window, [](const ThrowScore& s) { return s.throw_index; });
  const std::size_t keep = std::min(cfg.k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), ranks_before);
  pool.resize(keep);
  return pool;
}

/// Windows the records by throw index, scores those with landing offsets
/// and returns the Top-K.
inline std::vector<ThrowScore> select_records(std::span<const ThrowRecord> records, const SelectionConfig& cfg) {
  cfg.validate();
  std::vector<const ThrowRecord*> ptrs;
  for (const auto& r : records) ptrs.push_back(&r);
  std::sort(ptrs.begin(), ptrs.end(), [](const ThrowRecord* x, const ThrowRecord* y) { return x->throw_index > y->throw_index; });
  if (ptrs.size() > cfg.window) ptrs.resize(cfg.window);
  std::vector<ThrowScore> scores;
  for (const auto* r : ptrs) {
    if (r->landing_offset_mm) scores.push_back(score_throw(*r, cfg));
  }
  return select_top_k(scores, cfg);
}

inline std::string scores_header() { return "athlete_id\tthrow_index\tdistance_cm\tjerk\tscore\tfps"; }

inline std::string to_tsv(const ThrowScore& s) {
  using skelio::detail::format_double;
  return s.athlete_id + '\t' + std::to_string(s.throw_index) + '\t' + format_double(s.distance_cm) + '\t' +
         format_double(s.jerk) + '\t' + format_double(s.score) + '\t' + format_double(s.fps);
}

}  // namespace dartkin::selection
