#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "dartkin/error.hpp"
#include "dartkin/kinematics/kinematics.hpp"
#include "dartkin/reffit/banded.hpp"
#include "dartkin/selection/selection.hpp"
#include "dartkin/skelio/resample.hpp"
#include "dartkin/skelio/skeleton.hpp"
#include "dartkin/skelio/spline.hpp"
#include "dartkin/skelio/throw_log.hpp"

namespace dartkin::reffit {

/// Throwing-arm chain: shoulder, elbow, wrist, hand, hand tip.
inline const std::array<JointId, 5> kReferenceJoints = {
    JointId(Joint::ShoulderRight), JointId(Joint::ElbowRight), JointId(Joint::WristRight),
    JointId(Joint::HandRight),     JointId(Joint::HandTipRight),
};

struct AlignedSet {
  std::vector<JointId> joints;
  std::vector<Eigen::MatrixXd> trajectories;  // n x 3J each, anchor-translated
  std::vector<Vec3> offsets;                  // translation removed from each
  std::vector<double> distance_cm;
  std::vector<double> jerk;
  std::vector<int> throw_ids;
  std::vector<double> times;  // mean sample times over the set, s
  int release_sample = 0;

  std::size_t k() const { return trajectories.size(); }
  int n() const { return trajectories.empty() ? 0 : static_cast<int>(trajectories.front().rows()); }
};

struct AlignInput {
  const SkeletonSequence* sequence = nullptr;
  int throw_id = 0;
  double distance_cm = 0.0;
  double jerk = 0.0;
};

/// Shared release sample for a set of throws: the rounded mean of each
/// throw's own release position on the n-sample grid.
inline int common_release_sample(std::span<const AlignInput> items, int n) {
  double sum = 0.0;
  for (const auto& it : items) {
    const double r = static_cast<double>(kinematics::release_frame(*it.sequence));
    sum += n * r / static_cast<double>(it.sequence->size());
  }
  const int m = static_cast<int>(std::lround(sum / static_cast<double>(items.size())));
  return std::clamp(m, 1, n - 1);
}

/// Resamples every throw onto the release-aligned grid and removes the
/// time-mean position of the right shoulder from each.
inline AlignedSet align_trajectories(std::span<const AlignInput> items, int n = skelio::kDefaultSamples,
                                     std::span<const JointId> joints = kReferenceJoints) {
  if (items.size() < 2) fail(ErrorCode::InsufficientData, "alignment needs at least 2 throws");
  std::size_t anchor = joints.size();
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (joints[j] == JointId(Joint::ShoulderRight)) anchor = j;
  }
  if (anchor == joints.size()) fail(ErrorCode::InvalidArgument, "alignment joint set must contain the right shoulder");

  AlignedSet set;
  set.joints.assign(joints.begin(), joints.end());
  set.release_sample = common_release_sample(items, n);
  set.times.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& it : items) {
    const auto& seq = *it.sequence;
    const int r = static_cast<int>(kinematics::release_frame(seq));
    auto traj = skelio::resample_trajectory(seq, joints, r, n, set.release_sample);
    const auto grid = skelio::phase_grid(static_cast<int>(seq.size()), r, n, set.release_sample);
    for (int i = 0; i < n; ++i) set.times[static_cast<std::size_t>(i)] += grid[static_cast<std::size_t>(i)] / seq.fps();

    bool moving = false;
    for (Eigen::Index c = 0; c < traj.samples.cols() && !moving; ++c) {
      moving = traj.samples.col(c).maxCoeff() > traj.samples.col(c).minCoeff();
    }
    if (!moving) fail(ErrorCode::InvalidArgument, "throw " + std::to_string(it.throw_id) + " is degenerate (no joint moves)");

    const Vec3 offset = traj.samples.middleCols<3>(3 * static_cast<Eigen::Index>(anchor)).colwise().mean().transpose();
    for (std::size_t j = 0; j < joints.size(); ++j) {
      traj.samples.middleCols<3>(3 * static_cast<Eigen::Index>(j)).rowwise() -= offset.transpose();
    }
    set.trajectories.push_back(std::move(traj.samples));
    set.offsets.push_back(offset);
    set.distance_cm.push_back(it.distance_cm);
    set.jerk.push_back(it.jerk);
    set.throw_ids.push_back(it.throw_id);
  }
  for (auto& t : set.times) t /= static_cast<double>(items.size());
  return set;
}

/// Normalized weights exp(-a d_i) / sqrt(1 + b j_i), computed in the log
/// domain so large a cannot underflow every weight at once.
inline std::vector<double> template_weights(std::span<const double> distance_cm, std::span<const double> jerk, double a,
                                            double b) {
  std::vector<double> logw(distance_cm.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logw.size(); ++i) {
    logw[i] = -a * distance_cm[i] - 0.5 * std::log1p(b * jerk[i]);
    top = std::max(top, logw[i]);
  }
  if (!std::isfinite(top)) fail(ErrorCode::Numerical, "template weights are not finite");
  double sum = 0.0;
  for (auto& w : logw) sum += (w = std::exp(w - top));
  for (auto& w : logw) w /= sum;
  return logw;
}

inline Eigen::MatrixXd weighted_template(const AlignedSet& set, double a, double b) {
  if (set.k() < 2) fail(ErrorCode::InsufficientData, "template needs at least 2 trajectories");
  const auto w = template_weights(set.distance_cm, set.jerk, a, b);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(set.trajectories[0].rows(), set.trajectories[0].cols());
  for (std::size_t i = 0; i < set.k(); ++i) q += w[i] * set.trajectories[i];
  return q;
}

/// Mean squared per-joint Euclidean distance between two trajectories.
inline double trajectory_mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return (x - y).squaredNorm() / static_cast<double>(x.rows() * (x.cols() / 3));
}

/// Objective sum_i MSE(Q(a), A_i) evaluated through the Gram matrix of the
/// set, so each evaluation costs O(K^2).
class WeightObjective {
 public:
  WeightObjective(const AlignedSet& set, double b) : set_(&set), b_(b) {
    const auto k = static_cast<Eigen::Index>(set.k());
    gram_.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        gram_(i, j) = gram_(j, i) = (set.trajectories[static_cast<std::size_t>(i)].array() *
                                     set.trajectories[static_cast<std::size_t>(j)].array()).sum();
      }
    }
    scale_ = static_cast<double>(set.n()) * static_cast<double>(set.joints.size());
  }

  double operator()(double a) const {
    const auto wv = template_weights(set_->distance_cm, set_->jerk, a, b_);
    const Eigen::Map<const Eigen::VectorXd> w(wv.data(), static_cast<Eigen::Index>(wv.size()));
    const double k = static_cast<double>(wv.size());
    const double value = (k * w.dot(gram_ * w) - 2.0 * (gram_ * w).sum() + gram_.trace()) / scale_;
    if (!std::isfinite(value)) fail(ErrorCode::Numerical, "weight objective is not finite at a=" + std::to_string(a));
    return std::max(value, 0.0);
  }

 private:
  const AlignedSet* set_;
  double b_;
  double scale_ = 1.0;
  Eigen::MatrixXd gram_;
};

struct SearchResult {
  double a = 0.0;
  double objective = 0.0;
};

namespace detail {

template <class F>
SearchResult golden_section(const F& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? SearchResult{x1, f1} : SearchResult{x2, f2};
}

}  // namespace detail

inline constexpr int kCoarseGrid = 64;

/// Minimizer of the weight objective over [lo, hi]. A 64-point grid is
/// scanned first; golden-section search then runs on the whole interval
/// and on the grid cell pair around the best grid point, and the lowest
/// value seen wins. A flat objective returns the midpoint.
template <class F>
SearchResult minimize_scalar(const F& f, double lo, double hi, double tol) {
  if (!(lo < hi)) fail(ErrorCode::InvalidArgument, "search bounds must satisfy lo < hi");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "search tolerance must be positive");
  std::vector<double> xs(kCoarseGrid), fs(kCoarseGrid);
  std::size_t best = 0;
  for (int i = 0; i < kCoarseGrid; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kCoarseGrid - 1);
    fs[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
    if (fs[static_cast<std::size_t>(i)] < fs[best]) best = static_cast<std::size_t>(i);
  }
  const auto [fmin, fmax] = std::minmax_element(fs.begin(), fs.end());
  if (*fmax - *fmin <= 1e-12 * std::max(1.0, std::abs(*fmax))) {
    const double mid = 0.5 * (lo + hi);
    return {mid, f(mid)};
  }
  SearchResult out{xs[best], fs[best]};
  auto consider = [&](SearchResult r) {
    if (r.objective < out.objective) out = r;
  };
  consider(detail::golden_section(f, lo, hi, tol));
  const double cell_lo = xs[best > 0 ? best - 1 : 0];
  const double cell_hi = xs[std::min<std::size_t>(best + 1, kCoarseGrid - 1)];
  consider(detail::golden_section(f, cell_lo, cell_hi, tol));
  return out;
}

struct WeightSearch {
  double lo = 0.0;
  double hi = 5.0;
  double tol = 1e-4;
};

inline SearchResult optimize_weight_param(const AlignedSet& set, double b, const WeightSearch& search = {}) {
  const WeightObjective f(set, b);
  return minimize_scalar(f, search.lo, search.hi, search.tol);
}

/// Squared Frobenius norm of third differences down every column.
inline double jerk_functional(const Eigen::MatrixXd& x) {
  if (x.rows() < 4) fail(ErrorCode::InsufficientData, "jerk functional needs at least 4 samples");
  const Eigen::Index m = x.rows() - 3;
  const Eigen::MatrixXd d3 = x.bottomRows(m) - 3.0 * x.middleRows(2, m) + 3.0 * x.middleRows(1, m) - x.topRows(m);
  return d3.squaredNorm();
}

/// Objective 1/2 ||A - X||^2 + lambda/2 ||D3 A||^2.
inline double smoothing_objective(const Eigen::MatrixXd& a, const Eigen::MatrixXd& target, double lambda) {
  return 0.5 * (a - target).squaredNorm() + 0.5 * lambda * jerk_functional(a);
}

/// Factorization of I + lambda D3^T D3, reusable across columns.
class JerkSmoother {
 public:
  JerkSmoother(int n, double lambda) : n_(n), lambda_(lambda), system_(jerk_system(n, lambda)), factor_(system_) {
    if (n < 8) fail(ErrorCode::InvalidArgument, "smoothing needs at least 8 samples");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidArgument, "lambda must be finite and >= 0");
  }

  double lambda() const noexcept { return lambda_; }
  const BandMatrix& system() const noexcept { return system_; }

  Eigen::MatrixXd operator()(const Eigen::MatrixXd& target) const {
    if (target.rows() != n_) fail(ErrorCode::InvalidArgument, "smoothing input has the wrong sample count");
    if (!target.allFinite()) fail(ErrorCode::InvalidArgument, "smoothing input is not finite");
    Eigen::MatrixXd out(target.rows(), target.cols());
    for (Eigen::Index c = 0; c < target.cols(); ++c) {
      const Eigen::VectorXd rhs = target.col(c);
      Eigen::VectorXd x = factor_.solve(rhs);
      const double bound = 1e-8 * std::max(rhs.lpNorm<Eigen::Infinity>(), std::numeric_limits<double>::min());
      if ((system_.multiply(x) - rhs).lpNorm<Eigen::Infinity>() > bound) {
        fail(ErrorCode::Numerical, "smoothing residual exceeds bound");
      }
      out.col(c) = x;
    }
    return out;
  }

 private:
  int n_;
  double lambda_;
  BandMatrix system_;
  BandCholesky factor_;
};

inline Eigen::MatrixXd min_jerk_smooth(const Eigen::MatrixXd& target, double lambda) {
  if (lambda == 0.0) {
    if (!target.allFinite()) fail(ErrorCode::InvalidArgument, "smoothing input is not finite");
    return target;
  }
  return JerkSmoother(static_cast<int>(target.rows()), lambda)(target);
}

struct ReferenceTrajectory {
  std::vector<JointId> joints;
  Eigen::MatrixXd samples;  // n x 3J
  std::vector<double> times;
  double lambda = 0.0;
  double a_star = 0.0;
  double objective = 0.0;
  int release_sample = 0;
  std::vector<selection::ThrowScore> sources;  // score-descending

  std::vector<int> source_ids() const {
    std::vector<int> ids;
    for (const auto& s : sources) ids.push_back(s.throw_index);
    return ids;
  }
};

struct FitConfig {
  selection::SelectionConfig selection;
  double lambda = 5.0;
  int n_samples = skelio::kDefaultSamples;
  WeightSearch search;
};

struct ReferenceFit {
  ReferenceTrajectory reference;
  Eigen::MatrixXd template_samples;  // weighted template before smoothing
  AlignedSet aligned;
};

/// Top-K selection, alignment, a* search, weighted template and smoothing.
inline ReferenceFit fit_reference(std::span<const ThrowRecord> records, const FitConfig& cfg) {
  const auto top = selection::select_records(records, cfg.selection);
  if (top.size() < 2) fail(ErrorCode::InsufficientData, "reference needs at least 2 scoreable throws");
  std::vector<AlignInput> inputs;
  for (const auto& s : top) {
    const auto it = std::find_if(records.begin(), records.end(), [&](const ThrowRecord& r) { return r.throw_index == s.throw_index; });
    inputs.push_back({&it->sequence, s.throw_index, s.distance_cm, s.jerk});
  }
  ReferenceFit fit;
  fit.aligned = align_trajectories(inputs, cfg.n_samples);
  const auto best = optimize_weight_param(fit.aligned, cfg.selection.b, cfg.search);
  fit.template_samples = weighted_template(fit.aligned, best.a, cfg.selection.b);
  auto& ref = fit.reference;
  ref.joints = fit.aligned.joints;
  ref.samples = min_jerk_smooth(fit.template_samples, cfg.lambda);
  ref.times = fit.aligned.times;
  ref.lambda = cfg.lambda;
  ref.a_star = best.a;
  ref.objective = best.objective;
  ref.release_sample = fit.aligned.release_sample;
  ref.sources = top;
  return fit;
}

/// Largest instantaneous speed of one joint column, m/s, taken from the
/// derivative of the interpolating cubic spline through the samples.
/// Chords between samples understate the peak by the curvature of the
/// speed profile over one sample spacing.
inline double peak_speed(const Eigen::MatrixXd& samples, std::span<const double> times, std::size_t slot) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n < 2 || times.size() != n) fail(ErrorCode::InvalidArgument, "peak_speed: need matching samples and times");
  std::vector<skelio::CubicSpline> sp;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = samples(static_cast<Eigen::Index>(i), 3 * static_cast<Eigen::Index>(slot) + c);
    sp.emplace_back(times, y);
  }
  const auto speed = [&](double t) { return Vec3(sp[0].derivative(t), sp[1].derivative(t), sp[2].derivative(t)).norm(); };

  constexpr int kPerSegment = 16;
  double best = 0.0, best_t = times[0], step = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = (times[i + 1] - times[i]) / kPerSegment;
    for (int k = 0; k <= kPerSegment; ++k) {
      const double t = times[i] + k * h;
      if (const double v = speed(t); v > best) best = v, best_t = t, step = h;
    }
  }
  // Golden-section polish around the best probe.
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(times[0], best_t - step), hi = std::min(times[n - 1], best_t + step);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo), f1 = speed(x1), f2 = speed(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = speed(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = speed(x2);
    }
  }
  return std::max({best, f1, f2});
}

inline double peak_hand_speed(const ReferenceTrajectory& ref) {
  for (std::size_t j = 0; j < ref.joints.size(); ++j) {
    if (ref.joints[j] == JointId(Joint::HandTipRight)) return peak_speed(ref.samples, ref.times, j);
  }
  fail(ErrorCode::InvalidArgument, "reference has no hand-tip column");
}

inline skelio::TrajectoryLog to_log(const ReferenceTrajectory& ref) {
  skelio::TrajectoryLog log;
  log.reference = true;
  log.joints = ref.joints;
  log.times = ref.times;
  log.samples = ref.samples;
  log.fps = static_cast<double>(ref.samples.rows() - 1) / (ref.times.back() - ref.times.front());
  return log;
}

inline nlohmann::json provenance_json(const ReferenceTrajectory& ref) {
  nlohmann::json j;
  j["a_star"] = ref.a_star;
  j["objective"] = ref.objective;
  j["lambda"] = ref.lambda;
  j["n_samples"] = ref.samples.rows();
  j["release_sample"] = ref.release_sample;
  j["source_throw_ids"] = ref.source_ids();
  auto& scores = j["scores"] = nlohmann::json::array();
  for (const auto& s : ref.sources) {
    scores.push_back({{"throw_index", s.throw_index}, {"distance_cm", s.distance_cm}, {"jerk", s.jerk}, {"score", s.score}});
  }
  return j;
}

}  // namespace dartkin::reffit
