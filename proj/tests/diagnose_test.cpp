#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dartkin/diagnose/diagnose.hpp"
#include "dartkin/synth/cohort.hpp"
#include "test_support.hpp"

using namespace dartkin;
using namespace dartkin::diagnose;
using kinematics::Feature;
using kinematics::Series;

namespace {

constexpr int kGrid = 100;

BaselineSample random_sample(std::mt19937_64& g, int id) {
  BaselineSample s;
  s.throw_id = id;
  for (std::size_t f = 0; f < kFeatureCount; ++f) s.features.values[f] = 10.0 * static_cast<double>(f + 1) + gen::normal(g);
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    s.series.series[k].resize(kGrid);
    for (int p = 0; p < kGrid; ++p) s.series.series[k][static_cast<std::size_t>(p)] = std::sin(0.1 * p + static_cast<double>(k)) + 0.2 * gen::normal(g);
  }
  s.series.release_sample = 80;
  return s;
}

std::vector<BaselineSample> random_set(std::uint64_t seed, int k) {
  auto g = gen::rng(seed);
  std::vector<BaselineSample> out;
  for (int i = 0; i < k; ++i) out.push_back(random_sample(g, 100 + i));
  return out;
}

RuleTable seed_rules() { return load_rules(DARTKIN_DATA_DIR "/rules.jsonl"); }

// Copy of the baseline means: every z is exactly zero.
BaselineSample at_mean(const Baseline& b) {
  BaselineSample s;
  for (std::size_t f = 0; f < kFeatureCount; ++f) s.features.values[f] = b.features[f].mean;
  for (std::size_t k = 0; k < kSeriesCount; ++k) {
    for (const auto& st : b.series[k]) s.series.series[k].push_back(st.mean);
  }
  s.series.release_sample = b.release_sample;
  return s;
}

}  // namespace

TEST(Tiers, BoundaryTable) {
  const std::vector<std::pair<double, Tier>> table{
      {-2.5, Tier::Significant}, {-2.0, Tier::Slight}, {-1.5, Tier::Slight}, {-1.0, Tier::Acceptable}, {0.0, Tier::Acceptable},
      {1.0, Tier::Acceptable},   {1.5, Tier::Slight},  {2.0, Tier::Slight},  {2.5, Tier::Significant}};
  for (const auto& [z, tier] : table) EXPECT_EQ(assess(z), tier) << z;
}

TEST(Tiers, CustomThresholdsValidated) {
  EXPECT_THROW((TierThresholds{2.0, 1.0}.validate()), Error);
  EXPECT_EQ(assess(1.2, {1.5, 3.0}), Tier::Acceptable);
}

TEST(SampleStat, TwoValues) {
  const std::vector<double> xs{4.0, 6.0};
  const auto s = sample_stat(xs);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.std, std::sqrt(2.0), 1e-15);
  EXPECT_FALSE(s.floored);
}

TEST(SampleStat, ConstantIsFloored) {
  const std::vector<double> xs(5, 250.0);
  const auto s = sample_stat(xs);
  EXPECT_TRUE(s.floored);
  EXPECT_DOUBLE_EQ(s.std, 250e-6);
  const std::vector<double> small(4, 0.01);
  EXPECT_DOUBLE_EQ(sample_stat(small).std, 1e-6);
}

TEST(SampleStat, MatchesNaiveOracle) {
  auto g = gen::rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(g() % 40);
    std::vector<double> xs;
    for (int i = 0; i < k; ++i) xs.push_back(gen::normal(g, gen::uniform(g, -50, 50), gen::uniform(g, 0.1, 5)));
    // sum of squares form, in long double
    long double s = 0, s2 = 0;
    for (double x : xs) {
      s += x;
      s2 += static_cast<long double>(x) * x;
    }
    const long double mean = s / k;
    const double var = static_cast<double>((s2 - k * mean * mean) / (k - 1));
    const auto st = sample_stat(xs);
    EXPECT_NEAR(st.mean, static_cast<double>(mean), 1e-12);
    EXPECT_NEAR(st.std, std::sqrt(var), 1e-9);
  }
}

TEST(Baseline, OrderIndependentBitwise) {
  auto set = random_set(7, 30);
  const auto a = build_baseline(set);
  auto g = gen::rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(set.begin(), set.end(), g);
    const auto b = build_baseline(set);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      EXPECT_EQ(a.features[f].mean, b.features[f].mean);
      EXPECT_EQ(a.features[f].std, b.features[f].std);
    }
    for (std::size_t k = 0; k < kSeriesCount; ++k) {
      for (std::size_t p = 0; p < kGrid; ++p) EXPECT_EQ(a.series[k][p].std, b.series[k][p].std);
    }
    EXPECT_EQ(baseline_json(a).dump(), baseline_json(b).dump());
  }
  EXPECT_TRUE(std::is_sorted(a.throw_ids.begin(), a.throw_ids.end()));
}

TEST(Baseline, RejectsMixedGrids) {
  auto set = random_set(9, 4);
  set[2].series.release_sample = 70;
  EXPECT_THROW(build_baseline(set), Error);
  set = random_set(9, 1);
  EXPECT_THROW(build_baseline(set), Error);
}

TEST(Baseline, JsonRoundTrip) {
  const auto b = build_baseline(random_set(10, 12));
  const auto back = baseline_from_json(nlohmann::json::parse(baseline_json(b).dump()));
  EXPECT_EQ(baseline_json(back).dump(), baseline_json(b).dump());
}

TEST(Diagnose, InjectionReportsK) {
  const auto b = build_baseline(random_set(11, 30));
  const std::vector<std::pair<Feature, double>> inj{{Feature::ReleaseVelocity, 0.5},  {Feature::HeadStability, 1.6},
                                                    {Feature::TrunkStability, 3.0},   {Feature::MeanGripDistance, 6.92},
                                                    {Feature::WristStability, 7.59}, {Feature::ReleasePhasePct, 11.55}};
  auto s = at_mean(b);
  for (const auto& [f, k] : inj) {
    const auto i = static_cast<std::size_t>(f);
    s.features.values[i] = b.features[i].mean + k * b.features[i].std;
  }
  const auto rep = evaluate(s.features, s.series, b);
  for (const auto& [f, k] : inj) {
    const auto it = std::find_if(rep.entries.begin(), rep.entries.end(), [&](const ZEntry& e) { return e.target == kinematics::feature_name(f); });
    ASSERT_NE(it, rep.entries.end());
    EXPECT_NEAR(it->z, k, 1e-9);
  }
  for (std::size_t i = 0; i < inj.size(); ++i) EXPECT_NEAR(rep.entries[i].z, inj[inj.size() - 1 - i].second, 1e-9);
  EXPECT_TRUE(std::is_sorted(rep.entries.begin(), rep.entries.end(), orders_before));
}

TEST(Diagnose, SeriesSpikeLocated) {
  const auto b = build_baseline(random_set(12, 25));
  auto s = at_mean(b);
  auto& hs = s.series.series[static_cast<std::size_t>(Series::HandSpeed)];
  hs[37] += 5.0 * b.series[0][37].std;
  const auto rep = evaluate(s.features, s.series, b);
  EXPECT_EQ(rep.entries.front().target, "hand_speed");
  EXPECT_EQ(rep.entries.front().phase_index, 37u);
  EXPECT_NEAR(rep.entries.front().z, 5.0, 1e-9);
}

TEST(Diagnose, SeriesZMaxNegativeAndTies) {
  const std::vector<Stat> curve(4, Stat{0.0, 2.0, false});
  const std::vector<double> x{1.0, -6.0, 6.0, 0.0};
  const auto m = series_z_max(x, curve);
  EXPECT_EQ(m.index, 1u);
  EXPECT_DOUBLE_EQ(m.z, -3.0);
  const std::vector<double> short_series{1.0};
  EXPECT_THROW(series_z_max(short_series, curve), Error);
}

TEST(Diagnose, GridMismatchRejected) {
  const auto b = build_baseline(random_set(13, 5));
  auto s = at_mean(b);
  s.series.release_sample += 1;
  EXPECT_THROW(evaluate(s.features, s.series, b), Error);
}

TEST(Diagnose, FlooredFeatureLabelledNotRecommended) {
  auto set = random_set(14, 6);
  for (auto& s : set) s.features.values[static_cast<std::size_t>(Feature::WristStability)] = 0.0;
  const auto b = build_baseline(set);
  EXPECT_TRUE(b.features[static_cast<std::size_t>(Feature::WristStability)].floored);
  auto s = at_mean(b);
  s.features.values[static_cast<std::size_t>(Feature::WristStability)] = 1.0;
  const auto rep = evaluate(s.features, s.series, b);
  EXPECT_EQ(rep.entries.front().target, "wrist_stability");
  EXPECT_TRUE(rep.entries.front().insufficient_variability);
  EXPECT_TRUE(generate_recommendations(rep, seed_rules()).empty());
  EXPECT_NE(render_report(rep, {}).find("insufficient variability"), std::string::npos);
}

TEST(Recommend, ThreeDeviationExample) {
  const auto b = build_baseline(random_set(15, 30));
  auto s = at_mean(b);
  auto set_z = [&](Feature f, double z) {
    const auto i = static_cast<std::size_t>(f);
    s.features.values[i] = b.features[i].mean + z * b.features[i].std;
  };
  set_z(Feature::HeadStability, 7.59);
  set_z(Feature::TrunkStability, 6.92);
  const auto ty = static_cast<std::size_t>(Series::TrunkYaw);
  s.series.series[ty][50] = b.series[ty][50].mean + 11.55 * b.series[ty][50].std;
  const auto rep = evaluate(s.features, s.series, b);
  const auto recs = generate_recommendations(rep, seed_rules());
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].target, "trunk_yaw");
  EXPECT_EQ(recs[1].target, "head_stability");
  EXPECT_EQ(recs[2].target, "trunk_stability");
  EXPECT_NE(recs[0].text.find("|z|max = 11.55"), std::string::npos);
  EXPECT_NE(recs[1].text.find("z = 7.59"), std::string::npos);
  EXPECT_NE(recs[2].text.find("z = 6.92"), std::string::npos);
  const auto text = render_report(rep, recs);
  EXPECT_LT(text.find("11.55"), text.find("7.59"));
  EXPECT_LT(text.find("7.59"), text.find("6.92"));
}

TEST(Recommend, SlightSpeedDeviation) {
  const auto b = build_baseline(random_set(16, 30));
  auto s = at_mean(b);
  const auto i = static_cast<std::size_t>(Feature::ReleaseVelocity);
  s.features.values[i] = b.features[i].mean + 1.6 * b.features[i].std;
  const auto recs = generate_recommendations(evaluate(s.features, s.series, b), seed_rules());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].tier, Tier::Slight);
  EXPECT_NE(recs[0].text.find("faster"), std::string::npos);
  EXPECT_NE(recs[0].text.find("z = 1.60"), std::string::npos);
}

TEST(Recommend, MinTierFilters) {
  const auto b = build_baseline(random_set(17, 30));
  auto s = at_mean(b);
  const auto i = static_cast<std::size_t>(Feature::ReleaseVelocity);
  s.features.values[i] = b.features[i].mean - 1.6 * b.features[i].std;
  const auto rep = evaluate(s.features, s.series, b);
  EXPECT_TRUE(generate_recommendations(rep, seed_rules(), Tier::Significant).empty());
  const auto recs = generate_recommendations(rep, seed_rules());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_NE(recs[0].text.find("slower"), std::string::npos);
}

TEST(Rules, UncoveredEntryIsConfigDefect) {
  const auto b = build_baseline(random_set(18, 10));
  auto s = at_mean(b);
  s.features.values[0] = b.features[0].mean + 3.0 * b.features[0].std;
  const auto rep = evaluate(s.features, s.series, b);
  RuleTable only_negative;
  only_negative.rules.push_back({"release_velocity", SignFilter::Negative, Tier::Slight, "x"});
  try {
    generate_recommendations(rep, only_negative);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigDefect);
  }
}

TEST(Rules, ParseAndValidate) {
  std::istringstream missing(R"({"target": "release_velocity", "template": "t"})");
  EXPECT_THROW(parse_rules(missing), Error);
  std::istringstream bad_sign(R"({"target": "release_velocity", "sign": "up", "template": "t"})");
  EXPECT_THROW(parse_rules(bad_sign), Error);
  std::istringstream bad_json("{not json");
  EXPECT_THROW(parse_rules(bad_json), Error);
  const auto rules = seed_rules();
  for (auto name : kinematics::kFeatureNames) EXPECT_TRUE(rules.covers(name)) << name;
  for (auto name : kinematics::kSeriesNames) EXPECT_TRUE(rules.covers(name)) << name;
}

TEST(Rules, TemplateSlots) {
  ZEntry e;
  e.z = -2.345;
  EXPECT_EQ(render_template("{z} {direction} {stat} {other}", e), "-2.35 below z = -2.35 {other}");
  e.kind = EntryKind::Series;
  EXPECT_EQ(render_template("{stat}", e), "|z|max = 2.35");
}

TEST(Report, MachineOutputsStable) {
  const auto b = build_baseline(random_set(19, 20));
  auto s = at_mean(b);
  s.features.values[4] += 3 * b.features[4].std;
  const auto rep = evaluate(s.features, s.series, b);
  const auto recs = generate_recommendations(rep, seed_rules());
  const auto j = report_json(rep, recs);
  EXPECT_EQ(j["z_grid"], "normalized");
  EXPECT_EQ(j["entries"].size(), kFeatureCount + kSeriesCount);
  EXPECT_EQ(report_tsv(rep, recs), report_tsv(evaluate(s.features, s.series, b), recs));
}

TEST(Diagnose, SyntheticCohortNearMeanIsQuiet) {
  synth::CohortParams c;
  c.count = 30;
  const auto cohort = synth::gen_cohort(c);
  const Vec3 target(0, 0, -1);
  std::vector<BaselineSample> set;
  for (int i = 0; i < 29; ++i) {
    const auto& rec = cohort[static_cast<std::size_t>(i)].record;
    set.push_back({i, kinematics::extract_features(rec, target), kinematics::series_bundle(rec.sequence, target, 100, 80)});
  }
  const auto b = build_baseline(set);
  const auto& probe = cohort.back().record;
  const auto rep = evaluate(kinematics::extract_features(probe, target), kinematics::series_bundle(probe.sequence, target, 100, 80), b);
  for (const auto& e : rep.entries) EXPECT_TRUE(std::isfinite(e.z)) << e.target;
}
