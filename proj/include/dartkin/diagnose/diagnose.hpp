#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dartkin/error.hpp"
#include "dartkin/kinematics/features.hpp"

namespace dartkin::diagnose {

using kinematics::FeatureVector;
using kinematics::kFeatureCount;
using kinematics::kSeriesCount;
using kinematics::SeriesBundle;

enum class Tier : std::uint8_t { Acceptable, Slight, Significant };

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::Acceptable: return "acceptable";
    case Tier::Slight: return "slight deviation";
    case Tier::Significant: return "significant deviation";
  }
  return "?";
}

inline std::optional<Tier> tier_from_string(std::string_view s) {
  if (s == "acceptable") return Tier::Acceptable;
  if (s == "slight" || s == "slight deviation") return Tier::Slight;
  if (s == "significant" || s == "significant deviation") return Tier::Significant;
  return std::nullopt;
}

struct TierThresholds {
  double acceptable = 1.0;  // |z| <= acceptable
  double slight = 2.0;      // |z| <= slight

  void validate() const {
    if (!(acceptable > 0.0) || !(slight > acceptable)) fail(ErrorCode::ConfigDefect, "tier thresholds must satisfy 0 < t1 < t2");
  }
};

inline Tier assess(double z, const TierThresholds& t = {}) {
  const double a = std::abs(z);
  if (a <= t.acceptable) return Tier::Acceptable;
  if (a <= t.slight) return Tier::Slight;
  return Tier::Significant;
}

inline double zscore(double x, double mean, double std) { return (x - mean) / std; }

/// std floor: max(std, 1e-6 * max(|mean|, 1)).
inline double std_floor(double mean) { return 1e-6 * std::max(std::abs(mean), 1.0); }

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // after flooring
  bool floored = false;
};

/// Two-pass sample mean and standard deviation (divisor k-1).
inline Stat sample_stat(std::span<const double> xs) {
  const double k = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / k;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double raw = std::sqrt(ss / (k - 1.0));
  const double floor = std_floor(mean);
  return raw < floor ? Stat{mean, floor, true} : Stat{mean, raw, false};
}

struct BaselineSample {
  int throw_id = 0;
  FeatureVector features;
  SeriesBundle series;
};

struct Baseline {
  std::array<Stat, kFeatureCount> features{};
  std::array<std::vector<Stat>, kSeriesCount> series{};
  std::vector<int> throw_ids;  // ascending
  int n = 0;
  int release_sample = 0;
  std::size_t k_used = 0;
  std::string built_at;  // provenance only
};

/// Per-feature and per-grid-point statistics over the Top-K throws. Inputs
/// are summed in throw-id order so the result does not depend on the order
/// they were supplied in.
inline Baseline build_baseline(std::span<const BaselineSample> samples) {
  if (samples.size() < 2) fail(ErrorCode::InsufficientData, "baseline needs at least 2 throws");
  std::vector<const BaselineSample*> order;
  for (const auto& s : samples) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->throw_id < b->throw_id; });

  Baseline out;
  out.k_used = samples.size();
  out.n = static_cast<int>(order.front()->series.n());
  out.release_sample = order.front()->series.release_sample;
  for (const auto* s : order) {
    out.throw_ids.push_back(s->throw_id);
    if (static_cast<int>(s->series.n()) != out.n || s->series.release_sample != out.release_sample) {
      fail(ErrorCode::InvalidArgument, "baseline series are not on one grid");
    }
    for (double v : s->features.values) {
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "baseline feature vector is incomplete");
    }
  }
  std::vector<double> column(order.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < order.size(); ++i) column[i] = order[i]->features.values[f];
    out.features[f] = sample_stat(column);
  }
  for (std::size_t s = 0; s < kSeriesCount; ++s) {
    out.series[s].resize(static_cast<std::size_t>(out.n));
    for (std::size_t p = 0; p < static_cast<std::size_t>(out.n); ++p) {
      for (std::size_t i = 0; i < order.size(); ++i) column[i] = order[i]->series.series[s][p];
      out.series[s][p] = sample_stat(column);
    }
  }
  return out;
}

struct SeriesZ {
  double z = 0.0;  // signed value at the max-|z| point
  std::size_t index = 0;
  bool floored = false;
};

/// Largest |z| along a series and where it occurs; first index wins ties.
inline SeriesZ series_z_max(std::span<const double> series, std::span<const Stat> curve) {
  if (series.size() != curve.size() || series.empty()) fail(ErrorCode::InvalidArgument, "series and baseline grids differ");
  SeriesZ best;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double z = zscore(series[i], curve[i].mean, curve[i].std);
    if (std::abs(z) > best_abs) {
      best_abs = std::abs(z);
      best = {z, i, curve[i].floored};
    }
  }
  return best;
}

enum class EntryKind : std::uint8_t { Feature, Series };

struct ZEntry {
  std::string target;
  EntryKind kind = EntryKind::Feature;
  std::size_t target_id = 0;  // features 0..17, series 18..23
  double value = 0.0;         // observed feature value (series: value at index)
  double z = 0.0;
  std::size_t phase_index = 0;  // series only
  Tier tier = Tier::Acceptable;
  bool insufficient_variability = false;
};

struct ZReport {
  std::vector<ZEntry> entries;  // |z| descending, ties by target id
  TierThresholds thresholds;
};

inline bool orders_before(const ZEntry& a, const ZEntry& b) {
  const double x = std::abs(a.z), y = std::abs(b.z);
  if (x != y) return x > y;
  return a.target_id < b.target_id;
}

inline ZReport evaluate(const FeatureVector& fv, const SeriesBundle& series, const Baseline& base,
                        const TierThresholds& thresholds = {}) {
  thresholds.validate();
  if (static_cast<int>(series.n()) != base.n || series.release_sample != base.release_sample) {
    fail(ErrorCode::InvalidArgument, "throw series are not on the baseline grid");
  }
  ZReport rep;
  rep.thresholds = thresholds;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    ZEntry e;
    e.target = std::string(kinematics::kFeatureNames[f]);
    e.kind = EntryKind::Feature;
    e.target_id = f;
    e.value = fv.values[f];
    e.z = zscore(fv.values[f], base.features[f].mean, base.features[f].std);
    e.tier = assess(e.z, thresholds);
    e.insufficient_variability = base.features[f].floored;
    rep.entries.push_back(e);
  }
  for (std::size_t s = 0; s < kSeriesCount; ++s) {
    const auto m = series_z_max(series.series[s], base.series[s]);
    ZEntry e;
    e.target = std::string(kinematics::kSeriesNames[s]);
    e.kind = EntryKind::Series;
    e.target_id = kFeatureCount + s;
    e.value = series.series[s][m.index];
    e.z = m.z;
    e.phase_index = m.index;
    e.tier = assess(e.z, thresholds);
    e.insufficient_variability = m.floored;
    rep.entries.push_back(e);
  }
  std::stable_sort(rep.entries.begin(), rep.entries.end(), orders_before);
  return rep;
}

// ---------------------------------------------------------------------------
// Rules

enum class SignFilter : std::uint8_t { Any, Positive, Negative };

struct Rule {
  std::string target;
  SignFilter sign = SignFilter::Any;
  Tier tier = Tier::Slight;  // minimum tier the rule applies to
  std::string text;          // template; slots {z}, {stat}, {direction}
};

struct RuleTable {
  std::vector<Rule> rules;

  bool covers(std::string_view target) const {
    return std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.target == target; });
  }

  /// Every feature and series has at least one rule; every template is non-empty.
  void validate() const {
    for (const auto& r : rules) {
      if (r.text.empty()) fail(ErrorCode::ConfigDefect, "rule for " + r.target + " has an empty template");
      if (!kinematics::feature_from_name(r.target) && !kinematics::series_from_name(r.target)) {
        fail(ErrorCode::ConfigDefect, "rule names unknown target " + r.target);
      }
    }
    for (auto name : kinematics::kFeatureNames) {
      if (!covers(name)) fail(ErrorCode::ConfigDefect, "no rule for feature " + std::string(name));
    }
    for (auto name : kinematics::kSeriesNames) {
      if (!covers(name)) fail(ErrorCode::ConfigDefect, "no rule for series " + std::string(name));
    }
  }
};

inline Rule rule_from_json(const nlohmann::json& j) {
  Rule r;
  try {
    r.target = j.at("target").get<std::string>();
    const auto sign = j.value("sign", std::string("any"));
    if (sign == "+" || sign == "positive") {
      r.sign = SignFilter::Positive;
    } else if (sign == "-" || sign == "negative") {
      r.sign = SignFilter::Negative;
    } else if (sign == "any" || sign == "*") {
      r.sign = SignFilter::Any;
    } else {
      fail(ErrorCode::ConfigDefect, "rule sign must be +, - or any");
    }
    const auto tier = tier_from_string(j.value("tier", std::string("slight")));
    if (!tier) fail(ErrorCode::ConfigDefect, "rule tier must be acceptable, slight or significant");
    r.tier = *tier;
    r.text = j.at("template").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigDefect, std::string("rule record: ") + e.what());
  }
  return r;
}

/// One JSON object per line; blank lines and lines starting with '#' are skipped.
inline RuleTable parse_rules(std::istream& in) {
  RuleTable t;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ConfigDefect, "rules line " + std::to_string(number) + ": " + e.what());
    }
    t.rules.push_back(rule_from_json(j));
  }
  t.validate();
  return t;
}

inline RuleTable load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigDefect, "cannot open rule file " + path.string());
  return parse_rules(in);
}

struct Recommendation {
  std::string target;
  EntryKind kind = EntryKind::Feature;
  double z = 0.0;
  Tier tier = Tier::Acceptable;
  std::string text;
};

inline std::string format_fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string stat_label(const ZEntry& e) {
  return e.kind == EntryKind::Series ? "|z|max = " + format_fixed(std::abs(e.z)) : "z = " + format_fixed(e.z);
}

inline std::string render_template(const std::string& tpl, const ZEntry& e) {
  std::string out;
  for (std::size_t i = 0; i < tpl.size();) {
    if (tpl[i] == '{') {
      const auto close = tpl.find('}', i);
      if (close != std::string::npos) {
        const std::string_view key(tpl.data() + i + 1, close - i - 1);
        if (key == "z") {
          out += format_fixed(e.z);
        } else if (key == "stat") {
          out += stat_label(e);
        } else if (key == "direction") {
          out += e.z >= 0 ? "above" : "below";
        } else {
          out.append(tpl, i, close - i + 1);
        }
        i = close + 1;
        continue;
      }
    }
    out += tpl[i++];
  }
  return out;
}

inline bool sign_matches(SignFilter f, double z) {
  return f == SignFilter::Any || (f == SignFilter::Positive && z >= 0) || (f == SignFilter::Negative && z < 0);
}

/// Entries at or above `min_tier`, each rendered with the first rule whose
/// target, sign and tier fit. Entries with floored std are reported but not
/// turned into recommendations.
inline std::vector<Recommendation> generate_recommendations(const ZReport& rep, const RuleTable& rules, Tier min_tier = Tier::Slight) {
  std::vector<Recommendation> out;
  for (const auto& e : rep.entries) {
    if (e.insufficient_variability || e.tier < min_tier) continue;
    const Rule* hit = nullptr;
    for (const auto& r : rules.rules) {
      if (r.target == e.target && sign_matches(r.sign, e.z) && e.tier >= r.tier) {
        hit = &r;
        break;
      }
    }
    if (!hit) fail(ErrorCode::ConfigDefect, "no applicable rule for " + e.target + " at " + std::string(to_string(e.tier)));
    out.push_back({e.target, e.kind, e.z, e.tier, render_template(hit->text, e)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

/// Human-readable block: the recommendation table followed by every entry.
inline std::string render_report(const ZReport& rep, std::span<const Recommendation> recs, std::string_view title = {}) {
  std::string s;
  if (!title.empty()) s += std::string(title) + "\n\n";
  s += "No.  Recommendation\n";
  int no = 1;
  for (const auto& r : recs) s += std::to_string(no++) + "    " + r.text + "\n";
  if (recs.empty()) s += "-    (no deviations at or above the reporting tier)\n";
  s += "\nTarget                          Kind     z        Phase  Tier\n";
  for (const auto& e : rep.entries) {
    std::string line = e.target;
    line.resize(32, ' ');
    line += e.kind == EntryKind::Series ? "series   " : "feature  ";
    std::string z = format_fixed(e.z);
    z.resize(9, ' ');
    line += z;
    std::string phase = e.kind == EntryKind::Series ? std::to_string(e.phase_index) : "-";
    phase.resize(7, ' ');
    line += phase;
    line += e.insufficient_variability ? "insufficient variability" : std::string(to_string(e.tier));
    s += line + "\n";
  }
  s += "\nSeries z values are taken over the normalized phase grid.\n";
  return s;
}

inline nlohmann::json report_json(const ZReport& rep, std::span<const Recommendation> recs) {
  nlohmann::json j;
  j["z_grid"] = "normalized";
  j["thresholds"] = {{"acceptable", rep.thresholds.acceptable}, {"slight", rep.thresholds.slight}};
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : rep.entries) {
    nlohmann::json x{{"target", e.target},
                     {"kind", e.kind == EntryKind::Series ? "series" : "feature"},
                     {"value", e.value},
                     {"z", e.z},
                     {"tier", e.insufficient_variability ? "insufficient variability" : std::string(to_string(e.tier))}};
    if (e.kind == EntryKind::Series) x["phase_index"] = e.phase_index;
    entries.push_back(x);
  }
  auto& out = j["recommendations"] = nlohmann::json::array();
  for (const auto& r : recs) {
    out.push_back({{"target", r.target}, {"z", r.z}, {"tier", std::string(to_string(r.tier))}, {"text", r.text}});
  }
  return j;
}

/// Record stream: target, z, tier, recommendation (empty when none).
inline std::string report_tsv(const ZReport& rep, std::span<const Recommendation> recs) {
  std::string s = "target\tkind\tz\tphase_index\ttier\trecommendation\n";
  for (const auto& e : rep.entries) {
    std::string text;
    for (const auto& r : recs) {
      if (r.target == e.target) text = r.text;
    }
    s += e.target + '\t' + (e.kind == EntryKind::Series ? "series" : "feature") + '\t' + skelio::detail::format_double(e.z) +
         '\t' + (e.kind == EntryKind::Series ? std::to_string(e.phase_index) : "-") + '\t' +
         (e.insufficient_variability ? "insufficient variability" : std::string(to_string(e.tier))) + '\t' + text + '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Baseline persistence

inline nlohmann::json baseline_json(const Baseline& b) {
  nlohmann::json j;
  j["k_used"] = b.k_used;
  j["n"] = b.n;
  j["release_sample"] = b.release_sample;
  j["throw_ids"] = b.throw_ids;
  if (!b.built_at.empty()) j["built_at"] = b.built_at;
  auto& f = j["features"] = nlohmann::json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    f[std::string(kinematics::kFeatureNames[i])] = {{"mean", b.features[i].mean}, {"std", b.features[i].std}, {"floored", b.features[i].floored}};
  }
  auto& s = j["series"] = nlohmann::json::object();
  for (std::size_t i = 0; i < kSeriesCount; ++i) {
    nlohmann::json mean = nlohmann::json::array(), std = nlohmann::json::array(), floored = nlohmann::json::array();
    for (const auto& st : b.series[i]) {
      mean.push_back(st.mean);
      std.push_back(st.std);
      floored.push_back(st.floored);
    }
    s[std::string(kinematics::kSeriesNames[i])] = {{"mean", mean}, {"std", std}, {"floored", floored}};
  }
  return j;
}

inline Baseline baseline_from_json(const nlohmann::json& j) {
  Baseline b;
  try {
    b.k_used = j.at("k_used").get<std::size_t>();
    b.n = j.at("n").get<int>();
    b.release_sample = j.at("release_sample").get<int>();
    b.throw_ids = j.at("throw_ids").get<std::vector<int>>();
    b.built_at = j.value("built_at", std::string());
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto& f = j.at("features").at(std::string(kinematics::kFeatureNames[i]));
      b.features[i] = {f.at("mean").get<double>(), f.at("std").get<double>(), f.at("floored").get<bool>()};
    }
    for (std::size_t i = 0; i < kSeriesCount; ++i) {
      const auto& s = j.at("series").at(std::string(kinematics::kSeriesNames[i]));
      const auto mean = s.at("mean").get<std::vector<double>>();
      const auto std = s.at("std").get<std::vector<double>>();
      const auto floored = s.at("floored").get<std::vector<bool>>();
      if (mean.size() != static_cast<std::size_t>(b.n) || std.size() != mean.size() || floored.size() != mean.size()) {
        fail(ErrorCode::Parse, "baseline series length mismatch");
      }
      for (std::size_t p = 0; p < mean.size(); ++p) b.series[i].push_back({mean[p], std[p], floored[p]});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("baseline record: ") + e.what());
  }
  return b;
}

}  // namespace dartkin::diagnose
