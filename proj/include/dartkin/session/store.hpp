#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "dartkin/error.hpp"
#include "dartkin/skelio/throw_log.hpp"

namespace dartkin::session {

namespace fs = std::filesystem;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) fail(ErrorCode::Numerical, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Exclusive advisory lock held for the lifetime of the object.
class StoreLock {
 public:
  explicit StoreLock(const fs::path& lock_file) {
    fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorCode::Io, "cannot open lock " + lock_file.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      fail(ErrorCode::Io, "cannot lock " + lock_file.string());
    }
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;
  ~StoreLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

struct IndexEntry {
  int throw_id = 0;
  std::string sha256;
  std::string source;  // file name as ingested
  std::optional<Vec2> landing_offset_mm;
};

inline constexpr std::string_view kIndexHeader = "throw_id\tsha256\tsource\tlanding_dx_mm\tlanding_dy_mm";

inline std::string index_line(const IndexEntry& e) {
  std::string s = std::to_string(e.throw_id) + '\t' + e.sha256 + '\t' + e.source + '\t';
  if (e.landing_offset_mm) {
    s += skelio::detail::format_double(e.landing_offset_mm->x()) + '\t' + skelio::detail::format_double(e.landing_offset_mm->y());
  } else {
    s += "-\t-";
  }
  return s;
}

inline IndexEntry parse_index_line(std::string_view line) {
  const auto f = skelio::detail::split(line, '\t');
  if (f.size() != 5) fail(ErrorCode::Parse, "index: expected 5 fields");
  IndexEntry e;
  const auto id = skelio::detail::parse_double(f[0]);
  if (!id || *id != std::floor(*id)) fail(ErrorCode::Parse, "index: bad throw id");
  e.throw_id = static_cast<int>(*id);
  e.sha256 = std::string(f[1]);
  e.source = std::string(f[2]);
  if (f[3] != "-") {
    const auto dx = skelio::detail::parse_double(f[3]), dy = skelio::detail::parse_double(f[4]);
    if (!dx || !dy) fail(ErrorCode::Parse, "index: bad landing offset");
    e.landing_offset_mm = Vec2(*dx, *dy);
  }
  return e;
}

/// One athlete's throws: `throws/<id>.tlog` exactly as ingested, a metadata
/// sidecar per throw, `index.tsv` of content hashes, and `history.log`
/// holding every wall-clock timestamp. Throws are only ever appended.
class AthleteStore {
 public:
  AthleteStore(const fs::path& root, std::string athlete) : athlete_(std::move(athlete)) {
    if (athlete_.empty() || athlete_.find_first_of("/\\\t\n") != std::string::npos || athlete_ == "." || athlete_ == "..") {
      fail(ErrorCode::InvalidArgument, "invalid athlete id '" + athlete_ + "'");
    }
    dir_ = root / "athletes" / athlete_;
  }

  const std::string& athlete() const { return athlete_; }
  const fs::path& dir() const { return dir_; }
  fs::path throws_dir() const { return dir_ / "throws"; }
  fs::path index_path() const { return dir_ / "index.tsv"; }
  fs::path history_path() const { return dir_ / "history.log"; }
  fs::path reference_dir() const { return dir_ / "reference"; }
  fs::path reports_dir() const { return dir_ / "reports"; }
  fs::path log_path(int id) const {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.tlog", id);
    return throws_dir() / name;
  }
  bool exists() const { return fs::exists(index_path()); }

  StoreLock lock() const {
    fs::create_directories(dir_);
    return StoreLock(dir_ / ".lock");
  }

  std::vector<IndexEntry> index() const {
    std::vector<IndexEntry> out;
    std::ifstream in(index_path());
    if (!in) return out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        if (line != kIndexHeader) fail(ErrorCode::Parse, "index: unexpected header in " + index_path().string());
        header = false;
        continue;
      }
      if (!line.empty()) out.push_back(parse_index_line(line));
    }
    return out;
  }

  std::optional<int> find_hash(const std::string& sha) const {
    for (const auto& e : index()) {
      if (e.sha256 == sha) return e.throw_id;
    }
    return std::nullopt;
  }

  /// Appends one validated log. Caller holds the lock.
  IndexEntry append(std::string_view log_bytes, const std::string& source, const skelio::ThrowMetadata& meta_in) {
    auto entries = index();
    IndexEntry e;
    e.throw_id = entries.empty() ? 1 : entries.back().throw_id + 1;
    e.sha256 = sha256_hex(log_bytes);
    e.source = source;
    e.landing_offset_mm = meta_in.landing_offset_mm;
    const auto path = log_path(e.throw_id);
    if (fs::exists(path)) fail(ErrorCode::Io, "refusing to overwrite stored throw " + path.string());
    write_file(path, log_bytes);
    auto meta = meta_in;
    meta.athlete_id = athlete_;
    meta.throw_index = e.throw_id;
    skelio::save_metadata(skelio::metadata_path_for(path), meta);

    const bool fresh = !fs::exists(index_path());
    std::ofstream out(index_path(), std::ios::app);
    if (!out) fail(ErrorCode::Io, "cannot append to " + index_path().string());
    if (fresh) out << kIndexHeader << '\n';
    out << index_line(e) << '\n';
    return e;
  }

  ThrowRecord load(int id) const { return skelio::load_throw(log_path(id)); }

  std::vector<ThrowRecord> load_all() const {
    std::vector<ThrowRecord> out;
    for (const auto& e : index()) out.push_back(load(e.throw_id));
    return out;
  }

  void note(std::string_view event) const {
    fs::create_directories(dir_);
    std::ofstream out(history_path(), std::ios::app);
    if (!out) fail(ErrorCode::Io, "cannot append to " + history_path().string());
    out << utc_timestamp() << '\t' << event << '\n';
  }

 private:
  std::string athlete_;
  fs::path dir_;
};

}  // namespace dartkin::session
