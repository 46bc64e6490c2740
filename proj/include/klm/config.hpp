#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "klm/cache.hpp"
#include "klm/error.hpp"
#include "klm/evans.hpp"
#include "klm/moments.hpp"
#include "klm/parallel.hpp"

namespace klm {

enum class OutputFormat { Text, Csv, Json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "text") return OutputFormat::Text;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  fail(ErrorCode::InvalidInput, "unknown format '" + std::string(s) + "'");
}

struct RunConfig {
  std::uint64_t exact_limit = 257;
  PrecisionPolicy precision{};
  /// Unset: environment variable, then the project-local default.
  std::optional<std::string> cache_dir;
  bool use_cache = true;
  OutputFormat format = OutputFormat::Text;
  unsigned jobs = default_jobs();
  bool deterministic = false;

  void validate() const {
    if (exact_limit < 3) fail(ErrorCode::InvalidInput, "exact_limit must be >= 3");
    if (precision.start_bits < 53) fail(ErrorCode::InvalidInput, "precision start must be >= 53 bits");
    if (precision.start_bits > precision.cap_bits) fail(ErrorCode::InvalidInput, "precision start exceeds cap");
    if (jobs < 1) fail(ErrorCode::InvalidInput, "jobs must be >= 1");
  }

  unsigned effective_jobs() const { return deterministic ? 1 : jobs; }

  std::shared_ptr<const PowerSumCache> make_cache() const {
    if (!use_cache) return nullptr;
    return std::make_shared<PowerSumCache>(resolve_cache_dir(cache_dir));
  }

  ExactOptions exact_options(unsigned inner_jobs) const { return {exact_limit, MulAlgorithm::Auto, inner_jobs}; }

  /// Provider for batch work: parallelism goes to the per-p level.
  std::shared_ptr<MomentProvider> make_provider(unsigned inner_jobs = 1) const {
    validate();
    return std::make_shared<MomentProvider>(MomentProvider::Options{exact_options(inner_jobs), precision, make_cache()});
  }
};

}  // namespace klm
