#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dartkin/diagnose/diagnose.hpp"
#include "dartkin/error.hpp"
#include "dartkin/reffit/reference.hpp"
#include "dartkin/selection/selection.hpp"

namespace dartkin::session {

struct Config {
  selection::SelectionConfig selection;
  double lambda = 5.0;
  int n_samples = skelio::kDefaultSamples;
  diagnose::TierThresholds tiers;
  diagnose::Tier min_tier = diagnose::Tier::Slight;
  std::optional<std::filesystem::path> rules;  // built-in table when unset
  Vec3 target_direction = Vec3(0.0, 0.0, -1.0);
  std::optional<std::filesystem::path> calibration;

  void validate() const {
    selection.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::ConfigDefect, "config: lambda must be finite and non-negative");
    if (n_samples < 8) fail(ErrorCode::ConfigDefect, "config: n_samples must be at least 8");
    try {
      tiers.validate();
    } catch (const Error& e) {
      fail(ErrorCode::ConfigDefect, std::string("config: ") + e.what());
    }
    if (!target_direction.allFinite() || target_direction.norm() < 1e-12) {
      fail(ErrorCode::ConfigDefect, "config: target_direction must be a nonzero vector");
    }
  }

  reffit::FitConfig fit_config() const {
    reffit::FitConfig f;
    f.selection = selection;
    f.lambda = lambda;
    f.n_samples = n_samples;
    return f;
  }
};

inline nlohmann::json config_json(const Config& c) {
  nlohmann::json j;
  j["selection"] = {{"window", c.selection.window},
                    {"k", c.selection.k},
                    {"a", c.selection.a},
                    {"b", c.selection.b},
                    {"paper_literal_score", c.selection.paper_literal_score}};
  j["lambda"] = c.lambda;
  j["n_samples"] = c.n_samples;
  j["tiers"] = {{"acceptable", c.tiers.acceptable}, {"slight", c.tiers.slight}};
  j["min_tier"] = std::string(diagnose::to_string(c.min_tier));
  j["rules"] = c.rules ? nlohmann::json(c.rules->string()) : nlohmann::json();
  j["target_direction"] = {c.target_direction.x(), c.target_direction.y(), c.target_direction.z()};
  j["calibration"] = c.calibration ? nlohmann::json(c.calibration->string()) : nlohmann::json();
  return j;
}

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  if (!j.is_object()) fail(ErrorCode::ConfigDefect, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) fail(ErrorCode::ConfigDefect, std::string(where) + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected so typos do
/// not silently fall back.
inline Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  Config c;
  detail::check_keys(j, {"selection", "lambda", "n_samples", "tiers", "min_tier", "rules", "target_direction", "calibration"}, "config");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      detail::check_keys(s, {"window", "k", "a", "b", "paper_literal_score"}, "config.selection");
      c.selection.window = s.value("window", c.selection.window);
      c.selection.k = s.value("k", c.selection.k);
      c.selection.a = s.value("a", c.selection.a);
      c.selection.b = s.value("b", c.selection.b);
      c.selection.paper_literal_score = s.value("paper_literal_score", false);
    }
    c.lambda = j.value("lambda", c.lambda);
    c.n_samples = j.value("n_samples", c.n_samples);
    if (j.contains("tiers")) {
      const auto& t = j["tiers"];
      detail::check_keys(t, {"acceptable", "slight"}, "config.tiers");
      c.tiers.acceptable = t.value("acceptable", c.tiers.acceptable);
      c.tiers.slight = t.value("slight", c.tiers.slight);
    }
    if (j.contains("min_tier")) {
      const auto t = diagnose::tier_from_string(j["min_tier"].get<std::string>());
      if (!t) fail(ErrorCode::ConfigDefect, "config: unknown min_tier");
      c.min_tier = *t;
    }
    if (j.contains("rules") && !j["rules"].is_null()) c.rules = resolve(j["rules"].get<std::string>());
    if (j.contains("target_direction")) {
      const auto v = j["target_direction"].get<std::vector<double>>();
      if (v.size() != 3) fail(ErrorCode::ConfigDefect, "config: target_direction needs 3 values");
      c.target_direction = Vec3(v[0], v[1], v[2]);
    }
    if (j.contains("calibration") && !j["calibration"].is_null()) c.calibration = resolve(j["calibration"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigDefect, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigDefect) throw;
    fail(ErrorCode::ConfigDefect, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigDefect, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ConfigDefect, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace dartkin::session
