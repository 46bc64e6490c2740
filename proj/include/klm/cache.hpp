#pragma once

// On-disk power-sum records, one JSON file per (p, convention, method).
// The cache is advisory: unreadable or tampered files are dropped with a
// warning. Exact and float records that disagree are a hard error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <zlib.h>

#include "json.hpp"

#include "klm/error.hpp"
#include "klm/moments.hpp"

namespace klm {

inline constexpr const char* kCacheEnvVar = "KLM_CACHE_DIR";
inline constexpr const char* kDefaultCacheDir = ".klm-cache";

/// Flag beats environment beats the project-local default.
inline std::filesystem::path resolve_cache_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kCacheEnvVar); env && *env) return env;
  return kDefaultCacheDir;
}

class PowerSumCache {
 public:
  static constexpr int kSchemaVersion = 1;

  explicit PowerSumCache(std::filesystem::path root, std::ostream* warnings = &std::cerr)
      : root_(std::move(root)), warn_(warnings) {}

  const std::filesystem::path& root() const noexcept { return root_; }

  std::filesystem::path path_for(std::uint64_t p, Convention c, SumMethod m) const {
    return root_ / ("S_p" + std::to_string(p) + "_" + std::string(to_string(c)) + "_" + std::string(to_string(m)) + ".json");
  }

  static std::uint32_t checksum(std::uint64_t p, Convention c, SumMethod m, const std::map<unsigned, BigInt>& values) {
    std::ostringstream os;
    os << p << '|' << to_string(c) << '|' << to_string(m);
    for (const auto& [n, v] : values) os << '|' << n << '=' << v;
    const std::string s = os.str();
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
  }

  static nlohmann::json to_json(const PowerSumTable& t) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["p"] = t.p.value();
    j["convention"] = std::string(to_string(t.convention));
    j["method"] = std::string(to_string(t.method));
    j["precision_bits"] = t.precision_bits;
    j["entries"] = nlohmann::json::array();
    for (const auto& [n, v] : t.values) j["entries"].push_back({{"n", n}, {"value", to_decimal(v)}});
    j["checksum"] = checksum(t.p.value(), t.convention, t.method, t.values);
    return j;
  }

  /// Parses and verifies a record; nullopt (with a warning) for anything suspicious.
  std::optional<PowerSumTable> read(std::uint64_t p, Convention c, SumMethod m) const {
    const auto path = path_for(p, c, m);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
      std::ifstream in(path);
      nlohmann::json j;
      in >> j;
      if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::runtime_error("schema_version mismatch");
      if (j.at("p").get<std::uint64_t>() != p || j.at("convention").get<std::string>() != to_string(c) ||
          j.at("method").get<std::string>() != to_string(m))
        throw std::runtime_error("key fields do not match file name");
      PowerSumTable t{Prime(p), c, m, {}, j.value("precision_bits", 0L)};
      for (const auto& e : j.at("entries")) t.values[e.at("n").get<unsigned>()] = from_decimal(e.at("value").get<std::string>());
      if (j.at("checksum").get<std::uint32_t>() != checksum(p, c, m, t.values)) throw std::runtime_error("checksum mismatch");
      return t;
    } catch (const std::exception& e) {
      warn("discarding corrupt cache entry " + path.string() + ": " + e.what());
      std::filesystem::remove(path, ec);
      return std::nullopt;
    }
  }

  /// Record for (p, method) in its native convention, cross-checked against
  /// the record of the other method when both exist.
  std::optional<PowerSumTable> load(std::uint64_t p, SumMethod m) const {
    auto mine = read(p, native_convention(m), m);
    if (!mine) return std::nullopt;
    const SumMethod other_m = m == SumMethod::ExactCyclotomic ? SumMethod::FloatCongruence : SumMethod::ExactCyclotomic;
    if (auto other = read(p, native_convention(other_m), other_m)) {
      const auto a = mine->converted(Convention::Completed);
      const auto b = other->converted(Convention::Completed);
      for (const auto& [n, v] : a.values)
        if (b.has(n) && b.at(n) != v)
          fail(ErrorCode::CacheCorrupt, "cached exact and float S'_" + std::to_string(n) + " disagree at p = " +
                                            std::to_string(p) + " (" + to_decimal(v) + " vs " + to_decimal(b.at(n)) + ")");
    }
    return mine;
  }

  /// Merges with any existing record and writes via a temporary file plus rename.
  void store(const PowerSumTable& t) const {
    PowerSumTable merged = t;
    if (auto old = read(t.p.value(), t.convention, t.method)) {
      for (const auto& [n, v] : old->values) {
        auto it = merged.values.find(n);
        if (it == merged.values.end())
          merged.values[n] = v;
        else if (it->second != v)
          fail(ErrorCode::CacheCorrupt, "new S_" + std::to_string(n) + " disagrees with cached value at p = " +
                                            std::to_string(t.p.value()));
      }
    }
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    const auto path = path_for(t.p.value(), t.convention, t.method);
    std::ostringstream tag;
    tag << ".tmp." << std::random_device{}() << std::hash<std::thread::id>{}(std::this_thread::get_id());
    const auto tmp = std::filesystem::path(path.string() + tag.str());
    {
      std::ofstream out(tmp);
      if (!out) {
        warn("cannot write cache file " + tmp.string());
        return;
      }
      out << to_json(merged).dump(1) << '\n';
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
      warn("cannot publish cache file " + path.string() + ": " + ec.message());
      std::filesystem::remove(tmp, ec);
    }
  }

  static Convention native_convention(SumMethod m) {
    return m == SumMethod::ExactCyclotomic ? Convention::Restricted : Convention::Completed;
  }

 private:
  void warn(const std::string& msg) const {
    if (warn_) *warn_ << "warning: " << msg << '\n';
  }

  std::filesystem::path root_;
  std::ostream* warn_;
};

}  // namespace klm
