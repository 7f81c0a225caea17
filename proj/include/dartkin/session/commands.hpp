#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dartkin/diagnose/diagnose.hpp"
#include "dartkin/kinematics/features.hpp"
#include "dartkin/reffit/reference.hpp"
#include "dartkin/selection/selection.hpp"
#include "dartkin/session/config.hpp"
#include "dartkin/session/default_rules.hpp"
#include "dartkin/session/store.hpp"
#include "dartkin/skelio/throw_log.hpp"
#include "dartkin/synth/board_scene.hpp"
#include "dartkin/synth/cohort.hpp"
#include "dartkin/vision/board.hpp"
#include "dartkin/vision/png_io.hpp"

namespace dartkin::session {

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json load_json(const fs::path& path, ErrorCode on_error = ErrorCode::Parse) {
  const auto text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(on_error, path.string() + ": " + e.what());
  }
}

inline diagnose::RuleTable rule_table(const Config& cfg) {
  diagnose::RuleTable t;
  if (cfg.rules) {
    t = diagnose::load_rules(*cfg.rules);
  } else {
    std::istringstream in{std::string(kDefaultRules)};
    t = diagnose::parse_rules(in);
  }
  t.validate();
  return t;
}

inline vision::Calibration load_calibration(const fs::path& path) { return vision::calibration_from_json(load_json(path)); }

// ---------------------------------------------------------------------------
// ingest

struct IngestItem {
  fs::path log;
  std::optional<fs::path> pre;  // board frames giving the landing offset
  std::optional<fs::path> post;
};

struct IngestFailure {
  fs::path path;
  ErrorCode code = ErrorCode::Parse;
  std::string message;
};

struct IngestResult {
  std::vector<int> ids;
  std::vector<std::pair<fs::path, int>> duplicates;  // file, existing id
  std::vector<IngestFailure> failures;
};

inline nlohmann::json landing_json(const vision::Landing& l) {
  return {{"dx_mm", l.offset_mm.x()},
          {"dy_mm", l.offset_mm.y()},
          {"distance_mm", l.distance_mm},
          {"black_fill", l.black_fill},
          {"peak_curvature", l.peak_curvature},
          {"center_px", {l.center_px.x(), l.center_px.y()}},
          {"tip_px", {l.tip_px.x(), l.tip_px.y()}}};
}

/// Validates and appends each log. A sibling `<stem>.meta.json` supplies a
/// landing offset and board distance; a pre/post image pair overrides the
/// offset. Failures are collected per file.
inline IngestResult cmd_ingest(const fs::path& out, const std::string& athlete, std::span<const IngestItem> items, const Config& cfg) {
  AthleteStore store(out, athlete);
  std::optional<vision::Calibration> cal;
  for (const auto& it : items) {
    if (it.pre.has_value() != it.post.has_value()) fail(ErrorCode::InvalidArgument, "ingest: " + it.log.string() + " needs both pre and post frames");
    if (it.pre && !cal) {
      if (!cfg.calibration) fail(ErrorCode::ConfigDefect, "ingest: image pairs need a board calibration");
      cal = load_calibration(*cfg.calibration);
    }
  }
  const auto guard = store.lock();
  IngestResult res;
  for (const auto& it : items) {
    try {
      const auto bytes = read_file(it.log);
      {
        std::istringstream in(bytes);
        (void)skelio::parse_throw_log(in);
      }
      skelio::ThrowMetadata meta;
      const auto side = skelio::metadata_path_for(it.log);
      if (fs::exists(side)) meta = skelio::load_metadata(side);
      if (it.pre) {
        const auto l = vision::score_board(vision::read_png(*it.pre), vision::read_png(*it.post), *cal);
        meta.landing_offset_mm = l.offset_mm;
      }
      const auto sha = sha256_hex(bytes);
      if (const auto dup = store.find_hash(sha)) {
        res.duplicates.emplace_back(it.log, *dup);
        continue;
      }
      auto source = it.log.filename().string();
      for (char& c : source) {
        if (c == '\t' || c == '\n') c = '_';
      }
      const auto e = store.append(bytes, source, meta);
      res.ids.push_back(e.throw_id);
      store.note("ingest " + std::to_string(e.throw_id) + " " + e.sha256 + " " + source);
    } catch (const Error& e) {
      res.failures.push_back({it.log, e.code(), e.what()});
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// calibrate / score-board

struct CalibrateResult {
  fs::path path;
  vision::Calibration calibration;
};

/// Chessboard frame to calibration record. With a pre-throw board frame the
/// detected bullseye centre is stored as well.
inline CalibrateResult cmd_calibrate(const fs::path& out, const fs::path& chessboard, const vision::CalibrationSpec& spec,
                                     const std::optional<fs::path>& board = std::nullopt) {
  auto cal = vision::calibrate(vision::read_png(chessboard), spec);
  if (board) cal.board_center = vision::detect_bullseye(vision::rectify(vision::read_png(*board), cal)).center;
  const auto path = out / "calibration.json";
  write_file(path, dump_json(vision::calibration_json(cal)));
  return {path, cal};
}

struct ScoreBoardResult {
  fs::path path;
  vision::Landing landing;
};

inline ScoreBoardResult cmd_score_board(const fs::path& out, const fs::path& calibration, const fs::path& pre, const fs::path& post,
                                        const std::string& name = "landing") {
  const auto cal = load_calibration(calibration);
  const auto l = vision::score_board(vision::read_png(pre), vision::read_png(post), cal);
  const auto path = out / (name + ".json");
  write_file(path, dump_json(landing_json(l)));
  return {path, l};
}

// ---------------------------------------------------------------------------
// features

inline fs::path cmd_features(const fs::path& out, const std::string& athlete, const Config& cfg) {
  cfg.validate();
  AthleteStore store(out, athlete);
  const auto index = store.index();
  if (index.empty()) fail(ErrorCode::InsufficientData, "no throws stored for " + athlete);
  std::string text = "throw_id\t" + kinematics::feature_header() + "\n";
  for (const auto& e : index) {
    const auto rec = store.load(e.throw_id);
    text += std::to_string(e.throw_id) + "\t" + kinematics::to_tsv(kinematics::extract_features(rec, cfg.target_direction)) + "\n";
  }
  const auto path = store.dir() / "features.tsv";
  write_file(path, text);
  return path;
}

// ---------------------------------------------------------------------------
// fit

inline diagnose::Baseline build_baseline_for(std::span<const ThrowRecord> records, std::span<const selection::ThrowScore> top, const Config& cfg,
                                             int release_sample) {
  std::vector<diagnose::BaselineSample> samples;
  for (const auto& s : top) {
    const auto it = std::find_if(records.begin(), records.end(), [&](const ThrowRecord& r) { return r.throw_index == s.throw_index; });
    samples.push_back({s.throw_index, kinematics::extract_features(*it, cfg.target_direction),
                       kinematics::series_bundle(it->sequence, cfg.target_direction, cfg.n_samples, release_sample)});
  }
  return diagnose::build_baseline(samples);
}

struct FitResult {
  fs::path reference;
  fs::path provenance;
  fs::path scores;
  fs::path baseline;
  reffit::ReferenceTrajectory trajectory;
  double template_jerk = 0.0;
  double reference_jerk = 0.0;
  double peak_hand_speed = 0.0;
};

inline std::string scores_tsv(std::span<const selection::ThrowScore> scores) {
  std::string s = selection::scores_header() + "\n";
  for (const auto& x : scores) s += selection::to_tsv(x) + "\n";
  return s;
}

/// Top-K selection, reference fit and baseline. Every artifact is a pure
/// function of the store contents and the config.
inline FitResult cmd_fit(const fs::path& out, const std::string& athlete, const Config& cfg) {
  cfg.validate();
  AthleteStore store(out, athlete);
  const auto guard = store.lock();
  const auto records = store.load_all();
  const auto fit = reffit::fit_reference(records, cfg.fit_config());
  const auto& ref = fit.reference;

  FitResult res;
  res.trajectory = ref;
  res.template_jerk = reffit::jerk_functional(fit.template_samples);
  res.reference_jerk = reffit::jerk_functional(ref.samples);
  res.peak_hand_speed = reffit::peak_hand_speed(ref);

  const auto dir = store.reference_dir();
  res.reference = dir / "reference.tlog";
  {
    std::ostringstream os;
    skelio::write_trajectory_log(os, reffit::to_log(ref));
    write_file(res.reference, os.str());
  }
  auto prov = reffit::provenance_json(ref);
  prov["athlete_id"] = athlete;
  prov["index_sha256"] = sha256_hex(read_file(store.index_path()));
  prov["reference_sha256"] = sha256_hex(read_file(res.reference));
  prov["template_jerk"] = res.template_jerk;
  prov["reference_jerk"] = res.reference_jerk;
  prov["peak_hand_speed"] = res.peak_hand_speed;
  prov["config"] = config_json(cfg);
  res.provenance = dir / "provenance.json";
  write_file(res.provenance, dump_json(prov));

  const auto all = selection::score_records(records, cfg.selection);
  auto ranked = all.scores;
  std::sort(ranked.begin(), ranked.end(), selection::ranks_before);
  res.scores = dir / "scores.tsv";
  write_file(res.scores, scores_tsv(ranked));

  const auto base = build_baseline_for(records, ref.sources, cfg, ref.release_sample);
  res.baseline = dir / "baseline.json";
  write_file(res.baseline, dump_json(diagnose::baseline_json(base)));

  std::string ids;
  for (int id : ref.source_ids()) ids += (ids.empty() ? "" : ",") + std::to_string(id);
  store.note("fit reference " + prov["reference_sha256"].get<std::string>() + " from " + ids);
  return res;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseResult {
  fs::path text;
  fs::path json;
  fs::path tsv;
  diagnose::ZReport report;
  std::vector<diagnose::Recommendation> recommendations;
};

/// Stored baseline when a fit exists, otherwise one built from the current
/// Top-K.
inline diagnose::Baseline current_baseline(const AthleteStore& store, std::span<const ThrowRecord> records, const Config& cfg) {
  const auto stored = store.reference_dir() / "baseline.json";
  if (fs::exists(stored)) return diagnose::baseline_from_json(load_json(stored));
  const auto top = selection::select_records(records, cfg.selection);
  if (top.size() < 2) fail(ErrorCode::InsufficientData, "baseline needs at least 2 scoreable throws");
  std::vector<reffit::AlignInput> inputs;
  for (const auto& s : top) {
    const auto it = std::find_if(records.begin(), records.end(), [&](const ThrowRecord& r) { return r.throw_index == s.throw_index; });
    inputs.push_back({&it->sequence, s.throw_index, s.distance_cm, s.jerk});
  }
  return build_baseline_for(records, top, cfg, reffit::common_release_sample(inputs, cfg.n_samples));
}

inline DiagnoseResult cmd_diagnose(const fs::path& out, const std::string& athlete, int throw_id, const Config& cfg) {
  cfg.validate();
  const auto rules = rule_table(cfg);
  AthleteStore store(out, athlete);
  const auto index = store.index();
  if (std::none_of(index.begin(), index.end(), [&](const IndexEntry& e) { return e.throw_id == throw_id; })) {
    fail(ErrorCode::NotFound, "no throw " + std::to_string(throw_id) + " stored for " + athlete);
  }
  const auto records = store.load_all();
  const auto base = current_baseline(store, records, cfg);
  const auto& probe = *std::find_if(records.begin(), records.end(), [&](const ThrowRecord& r) { return r.throw_index == throw_id; });

  DiagnoseResult res;
  res.report = diagnose::evaluate(kinematics::extract_features(probe, cfg.target_direction),
                                  kinematics::series_bundle(probe.sequence, cfg.target_direction, base.n, base.release_sample), base, cfg.tiers);
  res.recommendations = diagnose::generate_recommendations(res.report, rules, cfg.min_tier);

  char stem[32];
  std::snprintf(stem, sizeof stem, "throw_%06d", throw_id);
  const auto dir = store.reports_dir();
  res.text = dir / (std::string(stem) + ".txt");
  res.json = dir / (std::string(stem) + ".json");
  res.tsv = dir / (std::string(stem) + ".tsv");
  auto j = diagnose::report_json(res.report, res.recommendations);
  j["athlete_id"] = athlete;
  j["throw_id"] = throw_id;
  j["baseline_throw_ids"] = base.throw_ids;
  write_file(res.text, diagnose::render_report(res.report, res.recommendations, "Athlete " + athlete + ", throw " + std::to_string(throw_id)));
  write_file(res.json, dump_json(j));
  write_file(res.tsv, diagnose::report_tsv(res.report, res.recommendations));
  return res;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string athlete = "synthetic";
  int count = 40;
  std::uint64_t seed = 2024;
  double speed_mean = 5.2;
  double speed_std = 0.15;
  int scenes = 0;  // rendered board scenes, decoy on odd indices
};

struct SimulateResult {
  std::vector<fs::path> logs;
  std::vector<fs::path> scenes;  // directories holding calibration/pre/post PNGs
  fs::path manifest;
  std::optional<fs::path> scene_manifest;
};

/// Synthetic throw logs with metadata sidecars under `out/simulated/<athlete>`,
/// plus a manifest of their ground truth.
inline SimulateResult cmd_simulate(const fs::path& out, const SimulateOptions& opt) {
  if (opt.count < 0 || opt.scenes < 0) fail(ErrorCode::InvalidArgument, "simulate: counts must be non-negative");
  synth::CohortParams c;
  c.athlete_id = opt.athlete;
  c.count = opt.count;
  c.seed = opt.seed;
  c.speed_mean = opt.speed_mean;
  c.speed_std = opt.speed_std;
  const auto cohort = synth::gen_cohort(c);

  SimulateResult res;
  const auto dir = out / "simulated" / opt.athlete;
  fs::create_directories(dir);
  std::string manifest = "file\tthrow_index\tframes\trelease_idx\tpeak_speed\trelease_speed\talignment_deg\tlanding_dx_mm\tlanding_dy_mm\n";
  for (const auto& t : cohort) {
    char name[32];
    std::snprintf(name, sizeof name, "throw_%04d.tlog", t.record.throw_index);
    const auto path = dir / name;
    skelio::save_throw(path, t.record);
    res.logs.push_back(path);
    const auto f = [](double v) { return skelio::detail::format_double(v); };
    manifest += std::string(name) + "\t" + std::to_string(t.record.throw_index) + "\t" + std::to_string(t.record.sequence.size()) + "\t" +
                std::to_string(t.truth.release_idx) + "\t" + f(t.truth.peak_speed) + "\t" + f(t.truth.release_speed) + "\t" +
                f(t.truth.alignment_deg) + "\t" + f(t.record.landing_offset_mm->x()) + "\t" + f(t.record.landing_offset_mm->y()) + "\n";
  }
  res.manifest = dir / "manifest.tsv";
  write_file(res.manifest, manifest);

  if (opt.scenes > 0) {
    std::string sm = "scene\tseed\tdecoy\tdx_mm\tdy_mm\n";
    for (int i = 0; i < opt.scenes; ++i) {
      const std::uint64_t seed = opt.seed * 1000 + static_cast<std::uint64_t>(i);
      const auto p = synth::random_scene(seed, i % 2 == 1);
      const auto scene = synth::gen_board_scene(p);
      char name[32];
      std::snprintf(name, sizeof name, "scene_%03d", i);
      const auto sdir = dir / "scenes" / name;
      fs::create_directories(sdir);
      vision::write_png(sdir / "calibration.png", scene.calibration);
      vision::write_png(sdir / "pre.png", scene.pre);
      vision::write_png(sdir / "post.png", scene.post);
      res.scenes.push_back(sdir);
      const vision::Point truth = p.dart_tip_mm - p.board_center_mm;
      sm += std::string(name) + "\t" + std::to_string(seed) + "\t" + (p.decoy ? "1" : "0") + "\t" + skelio::detail::format_double(truth.x()) +
            "\t" + skelio::detail::format_double(truth.y()) + "\n";
    }
    res.scene_manifest = dir / "scenes" / "manifest.tsv";
    write_file(*res.scene_manifest, sm);
  }
  return res;
}

// ---------------------------------------------------------------------------
// report

/// Plain-text summary of one athlete's store, Top-K and latest fit.
inline fs::path cmd_report(const fs::path& out, const std::string& athlete, const Config& cfg) {
  cfg.validate();
  AthleteStore store(out, athlete);
  const auto index = store.index();
  if (index.empty()) fail(ErrorCode::InsufficientData, "no throws stored for " + athlete);
  const auto records = store.load_all();
  std::size_t landed = 0;
  for (const auto& e : index) landed += e.landing_offset_mm ? 1 : 0;

  char buf[160];
  std::string s = "Athlete " + athlete + "\n\n";
  std::snprintf(buf, sizeof buf, "Throws stored: %zu\nWith landing offset: %zu\n\n", index.size(), landed);
  s += buf;
  if (landed > 0) {
    const auto top = selection::select_records(records, cfg.selection);
    std::snprintf(buf, sizeof buf, "Top-%zu by score (window %zu)\n", top.size(), cfg.selection.window);
    s += buf;
    s += "Rank  Throw  Distance(cm)        Jerk       Score\n";
    for (std::size_t i = 0; i < top.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%4zu  %5d  %12.2f  %10.4g  %10.4g\n", i + 1, top[i].throw_index, top[i].distance_cm, top[i].jerk, top[i].score);
      s += buf;
    }
    s += "\n";
  }
  const auto prov_path = store.reference_dir() / "provenance.json";
  if (fs::exists(prov_path)) {
    const auto p = load_json(prov_path);
    std::snprintf(buf, sizeof buf, "Reference: a* = %.4f, lambda = %.3g, peak hand speed = %.2f m/s, %zu source throws\n", p.at("a_star").get<double>(),
                  p.at("lambda").get<double>(), p.at("peak_hand_speed").get<double>(), p.at("source_throw_ids").size());
    s += buf;
  } else {
    s += "Reference: not fitted\n";
  }
  if (fs::exists(store.reports_dir())) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(store.reports_dir())) {
      if (e.path().extension() == ".txt") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    s += "Diagnosis reports: " + std::to_string(names.size()) + "\n";
    for (const auto& n : names) s += "  " + n + "\n";
  }
  const auto path = store.dir() / "summary.txt";
  write_file(path, s);
  return path;
}

}  // namespace dartkin::session
