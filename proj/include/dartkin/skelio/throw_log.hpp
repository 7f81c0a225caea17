#pragma once

// Throw-log text format.
//
//   fps=<float>[ reference=true][ joints=<i>,<i>,...]
//   t=<seconds>,<x0>,<y0>,<z0>,<x1>,...
//
// One data line per frame. Without a `joints=` key every row carries all 25
// joints in index order (75 values). Numbers are written in shortest
// round-trip form so that load(save(x)) reproduces x bit for bit.
//
// A sibling metadata record `<stem>.meta.json` carries athlete_id,
// throw_index, landing_offset_mm and board_distance_mm.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "dartkin/error.hpp"
#include "dartkin/skelio/skeleton.hpp"

namespace dartkin::skelio {

class ThrowLogError : public Error {
 public:
  enum class Kind { Header, MalformedRow, JointCount, NonFinite, NonMonotone };

  ThrowLogError(Kind kind, std::size_t frame, const std::string& what)
      : Error(ErrorCode::Parse, what), kind_(kind), frame_(frame) {}

  Kind kind() const noexcept { return kind_; }
  /// Zero-based index of the first offending frame (0 for header problems).
  std::size_t frame() const noexcept { return frame_; }

 private:
  Kind kind_;
  std::size_t frame_;
};

/// Format-level content of a log: rows of `3 * joints.size()` coordinates.
struct TrajectoryLog {
  double fps = 0.0;
  bool reference = false;
  std::vector<JointId> joints;  // column order
  std::vector<double> times;
  Eigen::MatrixXd samples;      // rows = frames, cols = 3 * joints.size()
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) fail(ErrorCode::Io, "cannot format number");
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<JointId> all_joints() {
  std::vector<JointId> js;
  for (int j = 0; j < kJointCount; ++j) js.emplace_back(j);
  return js;
}

}  // namespace detail

inline TrajectoryLog parse_trajectory_log(std::istream& in) {
  using Kind = ThrowLogError::Kind;
  TrajectoryLog log;
  std::string line;
  if (!std::getline(in, line)) throw ThrowLogError(Kind::Header, 0, "empty throw log");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  bool have_fps = false;
  std::optional<std::vector<JointId>> joints;
  for (auto token : detail::split(line, ' ')) {
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) throw ThrowLogError(Kind::Header, 0, "header: malformed token");
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "fps") {
      auto v = detail::parse_double(value);
      if (!v || !(*v > 0.0) || !std::isfinite(*v)) throw ThrowLogError(Kind::Header, 0, "header: invalid fps");
      log.fps = *v;
      have_fps = true;
    } else if (key == "reference") {
      log.reference = (value == "true");
    } else if (key == "joints") {
      std::vector<JointId> js;
      for (auto part : detail::split(value, ',')) {
        auto v = detail::parse_double(part);
        if (!v || *v != std::floor(*v) || *v < 0 || *v >= kJointCount) {
          throw ThrowLogError(Kind::Header, 0, "header: invalid joint list");
        }
        js.emplace_back(static_cast<int>(*v));
      }
      joints = std::move(js);
    }
  }
  if (!have_fps) throw ThrowLogError(Kind::Header, 0, "header: missing fps");
  log.joints = joints ? *joints : detail::all_joints();

  const std::size_t width = 3 * log.joints.size();
  std::vector<std::vector<double>> rows;
  std::size_t frame = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string prefix = "frame " + std::to_string(frame) + ": ";
    if (line.rfind("t=", 0) != 0) throw ThrowLogError(Kind::MalformedRow, frame, prefix + "row must start with t=");
    auto fields = detail::split(std::string_view(line).substr(2), ',');
    auto t = detail::parse_double(fields.front());
    if (!t) throw ThrowLogError(Kind::MalformedRow, frame, prefix + "malformed timestamp");
    const std::size_t count = fields.size() - 1;
    if (count != width) {
      if (count % 3 == 0) {
        throw ThrowLogError(Kind::JointCount, frame, prefix + std::to_string(count / 3) + " joints");
      }
      throw ThrowLogError(Kind::MalformedRow, frame, prefix + "malformed row (" + std::to_string(count) + " values)");
    }
    std::vector<double> row;
    row.reserve(width + 1);
    row.push_back(*t);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = detail::parse_double(fields[i]);
      if (!v) throw ThrowLogError(Kind::MalformedRow, frame, prefix + "malformed value in column " + std::to_string(i));
      if (!std::isfinite(*v)) {
        const std::size_t k = i - 1;
        throw ThrowLogError(Kind::NonFinite, frame,
                            prefix + "non-finite coordinate (joint " +
                                std::to_string(log.joints[k / 3].index()) + " " + "xyz"[k % 3] + ")");
      }
      row.push_back(*v);
    }
    if (!std::isfinite(*t)) throw ThrowLogError(Kind::NonFinite, frame, prefix + "non-finite timestamp");
    if (!rows.empty() && !(*t > rows.back().front())) {
      throw ThrowLogError(Kind::NonMonotone, frame, prefix + "non-monotone timestamp");
    }
    rows.push_back(std::move(row));
    ++frame;
  }

  log.times.resize(rows.size());
  log.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    log.times[r] = rows[r][0];
    for (std::size_t c = 0; c < width; ++c) {
      log.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c + 1];
    }
  }
  return log;
}

inline void write_trajectory_log(std::ostream& out, const TrajectoryLog& log) {
  out << "fps=" << detail::format_double(log.fps);
  if (log.reference) out << " reference=true";
  const bool full = log.joints.size() == kJointCount && [&] {
    for (int j = 0; j < kJointCount; ++j) {
      if (log.joints[static_cast<std::size_t>(j)].index() != j) return false;
    }
    return true;
  }();
  if (!full) {
    out << " joints=";
    for (std::size_t i = 0; i < log.joints.size(); ++i) out << (i ? "," : "") << log.joints[i].index();
  }
  out << '\n';
  for (Eigen::Index r = 0; r < log.samples.rows(); ++r) {
    out << "t=" << detail::format_double(log.times[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < log.samples.cols(); ++c) out << ',' << detail::format_double(log.samples(r, c));
    out << '\n';
  }
}

inline SkeletonSequence parse_throw_log(std::istream& in) {
  TrajectoryLog log = parse_trajectory_log(in);
  if (log.joints.size() != kJointCount) {
    throw ThrowLogError(ThrowLogError::Kind::Header, 0, "header: throw log must carry all 25 joints");
  }
  std::vector<SkeletonFrame> frames(log.times.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].timestamp = log.times[t];
    for (int j = 0; j < kJointCount; ++j) {
      frames[t].joints[static_cast<std::size_t>(j)] = log.samples.row(static_cast<Eigen::Index>(t)).segment<3>(3 * j);
    }
  }
  try {
    return SkeletonSequence(log.fps, std::move(frames));
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

inline void write_throw_log(std::ostream& out, const SkeletonSequence& seq) {
  TrajectoryLog log;
  log.fps = seq.fps();
  log.joints = detail::all_joints();
  log.times.reserve(seq.size());
  log.samples.resize(static_cast<Eigen::Index>(seq.size()), 3 * kJointCount);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    log.times.push_back(seq[t].timestamp);
    for (int j = 0; j < kJointCount; ++j) {
      log.samples.row(static_cast<Eigen::Index>(t)).segment<3>(3 * j) = seq[t].joints[static_cast<std::size_t>(j)];
    }
  }
  write_trajectory_log(out, log);
}

inline SkeletonSequence load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return parse_throw_log(in);
}

inline void save_sequence(const std::filesystem::path& path, const SkeletonSequence& seq) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  write_throw_log(out, seq);
}

// ---------------------------------------------------------------------------
// Metadata sidecar

struct ThrowMetadata {
  std::string athlete_id;
  int throw_index = 0;
  std::optional<Vec2> landing_offset_mm;
  std::optional<double> board_distance_mm;
};

inline std::filesystem::path metadata_path_for(const std::filesystem::path& log_path) {
  auto p = log_path;
  p.replace_extension(".meta.json");
  return p;
}

inline nlohmann::json metadata_to_json(const ThrowMetadata& m) {
  nlohmann::json j;
  j["athlete_id"] = m.athlete_id;
  j["throw_index"] = m.throw_index;
  j["landing_offset_mm"] =
      m.landing_offset_mm ? nlohmann::json::array({m.landing_offset_mm->x(), m.landing_offset_mm->y()}) : nlohmann::json();
  j["board_distance_mm"] = m.board_distance_mm ? nlohmann::json(*m.board_distance_mm) : nlohmann::json();
  return j;
}

inline ThrowMetadata metadata_from_json(const nlohmann::json& j) {
  ThrowMetadata m;
  try {
    m.athlete_id = j.at("athlete_id").get<std::string>();
    m.throw_index = j.at("throw_index").get<int>();
    if (j.contains("landing_offset_mm") && !j["landing_offset_mm"].is_null()) {
      const auto& lo = j["landing_offset_mm"];
      if (!lo.is_array() || lo.size() != 2) fail(ErrorCode::Parse, "metadata: landing_offset_mm must be [dx, dy]");
      Vec2 v(lo[0].get<double>(), lo[1].get<double>());
      if (!v.allFinite()) fail(ErrorCode::Parse, "metadata: landing_offset_mm must be finite");
      m.landing_offset_mm = v;
    }
    if (j.contains("board_distance_mm") && !j["board_distance_mm"].is_null()) {
      m.board_distance_mm = j["board_distance_mm"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("metadata: ") + e.what());
  }
  return m;
}

inline ThrowMetadata load_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  try {
    return metadata_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

inline void save_metadata(const std::filesystem::path& path, const ThrowMetadata& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << metadata_to_json(m).dump(2) << '\n';
}

inline ThrowRecord make_record(const ThrowMetadata& m, SkeletonSequence seq) {
  return ThrowRecord{m.athlete_id, m.throw_index, std::move(seq), m.landing_offset_mm, m.board_distance_mm};
}

inline ThrowMetadata metadata_of(const ThrowRecord& r) {
  return ThrowMetadata{r.athlete_id, r.throw_index, r.landing_offset_mm, r.board_distance_mm};
}

/// Loads `<stem>.tlog` together with its `<stem>.meta.json` sidecar.
inline ThrowRecord load_throw(const std::filesystem::path& log_path) {
  return make_record(load_metadata(metadata_path_for(log_path)), load_sequence(log_path));
}

inline void save_throw(const std::filesystem::path& log_path, const ThrowRecord& r) {
  save_sequence(log_path, r.sequence);
  save_metadata(metadata_path_for(log_path), metadata_of(r));
}

}  // namespace dartkin::skelio
