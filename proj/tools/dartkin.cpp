// dartkin: throw logs and board images in, reference trajectories and
// training recommendations out.

#include <array>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dartkin/session/commands.hpp"

namespace {

using namespace dartkin;
namespace fs = std::filesystem;

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kParse = 3,
  kInsufficientData = 4,
  kNoDetection = 5,
  kConfigDefect = 6,
  kPartial = 7,
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotFound: return kUsage;
    case ErrorCode::Parse: return kParse;
    case ErrorCode::InsufficientData: return kInsufficientData;
    case ErrorCode::NoDetection: return kNoDetection;
    case ErrorCode::ConfigDefect: return kConfigDefect;
    case ErrorCode::Numerical:
    case ErrorCode::Io: return kInternal;
  }
  return kInternal;
}

struct ConfigFlags {
  std::optional<fs::path> file;
  std::optional<std::size_t> window, k;
  std::optional<double> a, b, lambda, acceptable, slight;
  std::optional<int> n_samples;
  std::optional<std::string> min_tier;
  std::optional<fs::path> rules, calibration;
  std::optional<std::vector<double>> target;
  bool paper_literal = false;

  void attach(CLI::App& app) {
    app.add_option("--config", file, "JSON config file; flags override it")->check(CLI::ExistingFile);
    app.add_option("--window", window, "selection window (most recent throws)");
    app.add_option("--k", k, "Top-K size");
    app.add_option("--a", a, "distance weight, per cm");
    app.add_option("--b", b, "jerk normaliser");
    app.add_option("--lambda", lambda, "smoothing weight");
    app.add_option("--n-samples", n_samples, "samples on the aligned grid");
    app.add_option("--tier-acceptable", acceptable, "largest |z| counted as acceptable");
    app.add_option("--tier-slight", slight, "largest |z| counted as a slight deviation");
    app.add_option("--min-tier", min_tier, "lowest tier that gets a recommendation");
    app.add_option("--rules", rules, "recommendation rule file (JSONL)");
    app.add_option("--target", target, "target direction x y z")->expected(3);
    app.add_option("--calibration", calibration, "board calibration record");
    app.add_flag("--paper-literal-score", paper_literal, "use exp(+a d) in the throw score");
  }

  session::Config resolve() const {
    auto c = file ? session::load_config(*file) : session::Config{};
    if (window) c.selection.window = *window;
    if (k) c.selection.k = *k;
    if (a) c.selection.a = *a;
    if (b) c.selection.b = *b;
    if (paper_literal) c.selection.paper_literal_score = true;
    if (lambda) c.lambda = *lambda;
    if (n_samples) c.n_samples = *n_samples;
    if (acceptable) c.tiers.acceptable = *acceptable;
    if (slight) c.tiers.slight = *slight;
    if (min_tier) {
      const auto t = diagnose::tier_from_string(*min_tier);
      if (!t) fail(ErrorCode::ConfigDefect, "unknown tier '" + *min_tier + "'");
      c.min_tier = *t;
    }
    if (rules) c.rules = *rules;
    if (target) c.target_direction = Vec3((*target)[0], (*target)[1], (*target)[2]);
    if (calibration) c.calibration = *calibration;
    c.validate();
    return c;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dart-throw kinematics: ingest, fit, diagnose"};
  app.require_subcommand(1);
  app.fallthrough();
  fs::path out;
  app.add_option("--out", out, "output and store directory")->required();
  ConfigFlags flags;
  flags.attach(app);

  std::string athlete = "athlete";
  auto athlete_opt = [&](CLI::App* sub) { sub->add_option("--athlete", athlete, "athlete id"); };

  auto* ingest = app.add_subcommand("ingest", "validate throw logs and append them to the athlete store");
  athlete_opt(ingest);
  std::vector<fs::path> logs, pres, posts;
  ingest->add_option("logs", logs, "throw log files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--pre", pres, "pre-throw board frame per log");
  ingest->add_option("--post", posts, "post-throw board frame per log");

  auto* calibrate = app.add_subcommand("calibrate", "board-plane calibration from a chessboard frame");
  fs::path chess;
  std::optional<fs::path> board;
  vision::CalibrationSpec spec{4, 5, 20.0, 3.0, 780, 780};
  calibrate->add_option("--image", chess, "chessboard frame")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--board", board, "pre-throw board frame, stores the bullseye centre")->check(CLI::ExistingFile);
  calibrate->add_option("--rows", spec.rows, "inner corner rows");
  calibrate->add_option("--cols", spec.cols, "inner corner columns");
  calibrate->add_option("--cell-mm", spec.cell_mm, "chessboard cell size");
  calibrate->add_option("--px-per-mm", spec.px_per_mm, "rectified scale");
  calibrate->add_option("--width", spec.width, "rectified width");
  calibrate->add_option("--height", spec.height, "rectified height");

  auto* score = app.add_subcommand("score-board", "landing offset from a pre/post frame pair");
  fs::path pre, post;
  std::string name = "landing";
  score->add_option("--pre", pre, "pre-throw frame")->required()->check(CLI::ExistingFile);
  score->add_option("--post", post, "post-throw frame")->required()->check(CLI::ExistingFile);
  score->add_option("--name", name, "output record name");

  auto* features = app.add_subcommand("features", "feature table for every stored throw");
  athlete_opt(features);

  auto* fit = app.add_subcommand("fit", "select the Top-K and fit the reference trajectory");
  athlete_opt(fit);

  auto* diag = app.add_subcommand("diagnose", "z-score report and recommendations for one throw");
  athlete_opt(diag);
  int throw_id = 0;
  diag->add_option("--throw", throw_id, "stored throw id")->required();

  auto* simulate = app.add_subcommand("simulate", "synthetic throw logs and board scenes");
  session::SimulateOptions sim;
  simulate->add_option("--athlete", sim.athlete, "athlete id written into the logs");
  simulate->add_option("--count", sim.count, "number of throws");
  simulate->add_option("--seed", sim.seed, "generator seed");
  simulate->add_option("--speed-mean", sim.speed_mean, "mean peak hand speed, m/s");
  simulate->add_option("--speed-std", sim.speed_std, "peak hand speed spread, m/s");
  simulate->add_option("--scenes", sim.scenes, "board scenes to render");

  auto* report = app.add_subcommand("report", "summary of the athlete store");
  athlete_opt(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const auto cfg = flags.resolve();
    if (ingest->parsed()) {
      if ((!pres.empty() || !posts.empty()) && (pres.size() != logs.size() || posts.size() != logs.size())) {
        fail(ErrorCode::InvalidArgument, "--pre and --post must be given once per log");
      }
      std::vector<session::IngestItem> items;
      for (std::size_t i = 0; i < logs.size(); ++i) {
        session::IngestItem it{logs[i], std::nullopt, std::nullopt};
        if (!pres.empty()) {
          it.pre = pres[i];
          it.post = posts[i];
        }
        items.push_back(it);
      }
      const auto res = session::cmd_ingest(out, athlete, items, cfg);
      for (int id : res.ids) std::cout << "stored " << id << "\n";
      for (const auto& [path, id] : res.duplicates) std::cout << "duplicate " << path.string() << " (already stored as " << id << "), skipped\n";
      for (const auto& f : res.failures) std::cerr << "failed " << f.path.string() << ": " << f.message << "\n";
      std::cout << res.ids.size() << " stored, " << res.duplicates.size() << " duplicate, " << res.failures.size() << " failed\n";
      if (res.failures.empty()) return kOk;
      if (!res.ids.empty() || !res.duplicates.empty()) return kPartial;
      return exit_code(res.failures.front().code);
    }
    if (calibrate->parsed()) {
      const auto res = session::cmd_calibrate(out, chess, spec, board);
      std::cout << res.path.string() << "\nreprojection rms " << fmt("%.4f", res.calibration.reprojection_rms) << " px\n";
      return kOk;
    }
    if (score->parsed()) {
      if (!cfg.calibration) fail(ErrorCode::ConfigDefect, "score-board needs --calibration");
      const auto res = session::cmd_score_board(out, *cfg.calibration, pre, post, name);
      const auto& l = res.landing;
      std::cout << "dx_mm\tdy_mm\tdistance_mm\tblack_fill\tpeak_curvature\n"
                << fmt("%.3f", l.offset_mm.x()) << "\t" << fmt("%.3f", l.offset_mm.y()) << "\t" << fmt("%.3f", l.distance_mm) << "\t"
                << fmt("%.3f", l.black_fill) << "\t" << fmt("%.4f", l.peak_curvature) << "\n";
      return kOk;
    }
    if (features->parsed()) {
      std::cout << session::cmd_features(out, athlete, cfg).string() << "\n";
      return kOk;
    }
    if (fit->parsed()) {
      const auto res = session::cmd_fit(out, athlete, cfg);
      std::cout << res.reference.string() << "\n"
                << "a* " << fmt("%.6f", res.trajectory.a_star) << ", peak hand speed " << fmt("%.3f", res.peak_hand_speed) << " m/s, "
                << res.trajectory.sources.size() << " source throws\n";
      return kOk;
    }
    if (diag->parsed()) {
      const auto res = session::cmd_diagnose(out, athlete, throw_id, cfg);
      std::cout << session::read_file(res.text);
      return kOk;
    }
    if (simulate->parsed()) {
      const auto res = session::cmd_simulate(out, sim);
      std::cout << res.logs.size() << " logs, " << res.scenes.size() << " scenes\n" << res.manifest.string() << "\n";
      return kOk;
    }
    if (report->parsed()) {
      std::cout << session::read_file(session::cmd_report(out, athlete, cfg));
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
