#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "dartkin/selection/selection.hpp"
#include "test_support.hpp"

using namespace dartkin;
using namespace dartkin::selection;

namespace {

std::vector<ThrowScore> random_scores(std::mt19937_64& g, int count, bool coarse) {
  std::vector<ThrowScore> out;
  for (int i = 0; i < count; ++i) {
    ThrowScore s;
    s.athlete_id = "a";
    s.throw_index = i;
    // Coarse values force score and distance ties.
    s.distance_cm = coarse ? static_cast<double>(g() % 4) : gen::uniform(g, 0, 15);
    s.jerk = coarse ? 1e-4 * static_cast<double>(g() % 3) : gen::uniform(g, 0, 1e-3);
    s.score = throw_score(s.distance_cm, s.jerk, SelectionConfig{});
    out.push_back(s);
  }
  std::shuffle(out.begin(), out.end(), g);
  return out;
}

// Full sort of the in-window records by the documented ordering.
std::vector<ThrowScore> sort_oracle(std::vector<ThrowScore> all, std::size_t window, std::size_t k) {
  int max_index = -1;
  for (const auto& s : all) max_index = std::max(max_index, s.throw_index);
  std::vector<ThrowScore> in;
  for (const auto& s : all) {
    if (s.throw_index > max_index - static_cast<int>(window)) in.push_back(s);
  }
  std::sort(in.begin(), in.end(), [](const ThrowScore& x, const ThrowScore& y) {
    return std::tie(y.score, x.distance_cm, x.throw_index) < std::tie(x.score, y.distance_cm, y.throw_index);
  });
  in.resize(std::min(k, in.size()));
  return in;
}

}  // namespace

TEST(Jerk, QuadraticIsAnnihilated) {
  auto g = gen::rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 a(gen::normal(g), gen::normal(g), gen::normal(g));
    const Vec3 b(gen::normal(g), gen::normal(g), gen::normal(g));
    const Vec3 c(gen::normal(g), gen::normal(g), gen::normal(g));
    std::vector<Vec3> path;
    for (int k = 0; k < 40; ++k) path.push_back(a + b * k * 0.01 + c * (k * 0.01) * (k * 0.01));
    EXPECT_LE(jerk_metric(path), 1e-12);
  }
}

TEST(Jerk, UnitStep) {
  const std::vector<Vec3> path{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3(1, 0, 0)};
  EXPECT_EQ(jerk_metric(path), 1.0);
  const std::vector<Vec3> short_path{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  EXPECT_THROW(jerk_metric(short_path), Error);
}

TEST(Jerk, WhiteNoiseVarianceIdentity) {
  // Var(x[k+3] - 3x[k+2] + 3x[k+1] - x[k]) = (1 + 9 + 9 + 1) sigma^2.
  auto g = gen::rng(2);
  const double sigma = 0.001;
  const int n = 10000;
  std::vector<Vec3> path(n);
  for (auto& p : path) p = sigma * Vec3(gen::normal(g), gen::normal(g), gen::normal(g));
  const double oracle = 20.0 * sigma * sigma * (n - 3) * 3;
  EXPECT_NEAR(jerk_metric(path), oracle, 0.05 * oracle);
}

TEST(Jerk, RigidInvariance) {
  auto g = gen::rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> path(30);
    for (auto& p : path) p = Vec3(gen::normal(g), gen::normal(g), gen::normal(g));
    const Eigen::Matrix3d r = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
    const Vec3 t(gen::normal(g, 0, 5), gen::normal(g, 0, 5), gen::normal(g, 0, 5));
    std::vector<Vec3> moved;
    for (const auto& p : path) moved.push_back(r * p + t);
    EXPECT_NEAR(jerk_metric(moved), jerk_metric(path), 1e-9);
  }
}

TEST(Score, KnownValues) {
  const SelectionConfig cfg;
  EXPECT_EQ(throw_score(0, 0, cfg), 1.0);
  EXPECT_NEAR(throw_score(4, 0, cfg), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(throw_score(0, 3e-4, cfg), 0.5, 1e-12);
  SelectionConfig literal;
  literal.paper_literal_score = true;
  EXPECT_NEAR(throw_score(4, 0, literal), std::exp(1.0), 1e-12);
}

TEST(Score, StrictlyDecreasingOnGrid) {
  const SelectionConfig cfg;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double d = 0.3 * i, jerk = 2e-5 * j;
      EXPECT_LT(throw_score(d + 0.3, jerk, cfg), throw_score(d, jerk, cfg));
      EXPECT_LT(throw_score(d, jerk + 2e-5, cfg), throw_score(d, jerk, cfg));
    }
  }
}

TEST(Config, Validation) {
  SelectionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.k = 201;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.a = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.b = -1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Select, SmallSetReturnsAllSorted) {
  auto g = gen::rng(4);
  const auto s = random_scores(g, 5, false);
  SelectionConfig cfg;
  cfg.k = 5;
  const auto out = select_top_k(s, cfg);
  ASSERT_EQ(out.size(), 5u);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i - 1].score, out[i].score);
}

TEST(Select, WindowExcludesOldest) {
  auto g = gen::rng(5);
  const auto s = random_scores(g, 300, false);
  const auto out = select_top_k(s, SelectionConfig{});
  EXPECT_EQ(out.size(), 30u);
  for (const auto& x : out) EXPECT_GE(x.throw_index, 100);
}

TEST(Select, MatchesFullSortOracle) {
  auto g = gen::rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const bool coarse = trial % 2 == 1;
    const auto s = random_scores(g, 150 + static_cast<int>(g() % 150), coarse);
    SelectionConfig cfg;
    cfg.k = 1 + g() % 60;
    EXPECT_EQ(select_top_k(s, cfg), sort_oracle(s, cfg.window, cfg.k));
  }
}

TEST(Select, Dominance) {
  auto g = gen::rng(7);
  const auto s = random_scores(g, 250, false);
  const auto out = select_top_k(s, SelectionConfig{});
  std::set<int> chosen;
  double worst = 1e300;
  for (const auto& x : out) {
    chosen.insert(x.throw_index);
    worst = std::min(worst, x.score);
  }
  for (const auto& x : s) {
    if (x.throw_index >= 50 && !chosen.count(x.throw_index)) {
      EXPECT_LE(x.score, worst);
    }
  }
}

TEST(Select, EmptyIsInsufficient) {
  const std::vector<ThrowScore> none;
  try {
    (void)select_top_k(none, SelectionConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(Select, RecordsWithoutLandingAreFlagged) {
  std::vector<SkeletonFrame> frames(10);
  for (int t = 0; t < 10; ++t) {
    frames[static_cast<std::size_t>(t)].timestamp = t / 30.0;
    frames[static_cast<std::size_t>(t)][Joint::HandTipRight] = Vec3(0.01 * t * t, 0, 0);
  }
  const SkeletonSequence seq(30, frames);
  std::vector<ThrowRecord> recs{{"a", 0, seq, Vec2(30, 40), std::nullopt}, {"a", 1, seq, std::nullopt, std::nullopt}};
  const auto set = score_records(recs, SelectionConfig{});
  ASSERT_EQ(set.scores.size(), 1u);
  EXPECT_EQ(set.unscored, std::vector<int>{1});
  EXPECT_NEAR(set.scores[0].distance_cm, 5.0, 1e-12);
  EXPECT_NEAR(set.scores[0].jerk, 0.0, 1e-20);
  EXPECT_NEAR(set.scores[0].score, std::exp(-1.25), 1e-12);
  EXPECT_EQ(select_records(recs, SelectionConfig{}).size(), 1u);
  EXPECT_THROW(score_throw(recs[1], SelectionConfig{}), Error);
}

TEST(Select, TsvRow) {
  ThrowScore s{"ath", 7, 1.5, 0.25, 0.5, 30};
  EXPECT_EQ(to_tsv(s), "ath\t7\t1.5\t0.25\t0.5\t30");
}
