// klm: command-line front end for Kloosterman moment computations.

#include <cstdint>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "klm/cache.hpp"
#include "klm/config.hpp"
#include "klm/evans.hpp"
#include "klm/invariants.hpp"
#include "klm/modforms.hpp"
#include "klm/moments.hpp"

namespace {

using klm::BigInt;
using nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

klm::Prime checked_prime(std::uint64_t p, const char* flag) {
  if (!klm::is_prime(p)) throw UsageError(std::string(flag) + " must be prime, got " + std::to_string(p));
  return klm::Prime(p);
}

json envelope(const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

void emit_json(const json& j) { std::cout << j.dump(2) << '\n'; }

struct Shared {
  std::string format = "text";
  std::string cache_dir;
  bool no_cache = false;
  unsigned jobs = klm::default_jobs();
  std::uint64_t exact_limit = 257;
  long precision = 64;
  long precision_cap = 4096;
  bool deterministic = false;

  klm::RunConfig config() const {
    klm::RunConfig c;
    c.exact_limit = exact_limit;
    c.precision = {precision, precision_cap};
    if (!cache_dir.empty()) c.cache_dir = cache_dir;
    c.use_cache = !no_cache;
    c.format = klm::parse_format(format);
    c.jobs = jobs;
    c.deterministic = deterministic;
    try {
      c.validate();
    } catch (const klm::Error& e) {
      throw UsageError(e.message());
    }
    return c;
  }
};

// sums

struct SumsArgs {
  std::uint64_t p = 0;
  unsigned nmax = 0;
  std::string method = "auto";
  std::string convention = "restricted";
};

klm::PowerSumTable compute_sums(const klm::RunConfig& cfg, klm::Prime p, unsigned nmax, const std::string& method) {
  auto provider = cfg.make_provider(cfg.effective_jobs());
  if (method == "auto") return provider->native_table(p, nmax);
  const auto cache = cfg.make_cache();
  auto exact = [&] {
    auto t = klm::power_sums_exact(p, nmax, klm::Convention::Restricted, cfg.exact_options(cfg.effective_jobs()));
    if (cache) cache->store(t);
    return t;
  };
  auto flt = [&] {
    auto t = klm::power_sums_float_auto(p, nmax, cfg.precision);
    if (cache) cache->store(t);
    return t;
  };
  if (method == "exact") return exact();
  if (method == "float") return flt();
  // both: compute each way and refuse to print anything if they differ
  const auto a = exact();
  const auto b = flt();
  const auto ac = a.converted(klm::Convention::Completed);
  for (unsigned n = 1; n <= nmax; ++n)
    if (ac.at(n) != b.at(n))
      klm::fail(klm::ErrorCode::AmbiguousRounding, "exact and float S'_" + std::to_string(n) + " disagree: " +
                                                       klm::to_decimal(ac.at(n)) + " vs " + klm::to_decimal(b.at(n)));
  return a;
}

void run_sums(const Shared& sh, const SumsArgs& args) {
  const auto cfg = sh.config();
  const auto p = checked_prime(args.p, "--p");
  if (args.nmax < 1) throw UsageError("--nmax must be >= 1");
  klm::Convention conv;
  try {
    conv = klm::parse_convention(args.convention);
  } catch (const klm::Error& e) {
    throw UsageError(e.message());
  }
  const auto table = compute_sums(cfg, p, args.nmax, args.method).converted(conv);
  const std::string prefix = conv == klm::Convention::Restricted ? "S_" : "S'_";
  switch (cfg.format) {
    case klm::OutputFormat::Text:
      std::cout << "p=" << p.value() << " convention=" << klm::to_string(conv) << " method=" << klm::to_string(table.method)
                << '\n';
      for (const auto& [n, v] : table.values)
        if (n <= args.nmax) std::cout << prefix << n << " = " << v << '\n';
      break;
    case klm::OutputFormat::Csv:
      std::cout << "p,n,value,convention,method\n";
      for (const auto& [n, v] : table.values)
        if (n <= args.nmax)
          std::cout << p.value() << ',' << n << ',' << v << ',' << klm::to_string(conv) << ',' << klm::to_string(table.method)
                    << '\n';
      break;
    case klm::OutputFormat::Json: {
      auto j = envelope("sums");
      j["p"] = p.value();
      j["convention"] = std::string(klm::to_string(conv));
      j["method"] = std::string(klm::to_string(table.method));
      j["entries"] = json::array();
      for (const auto& [n, v] : table.values)
        if (n <= args.nmax) j["entries"].push_back({{"n", n}, {"value", klm::to_decimal(v)}});
      emit_json(j);
      break;
    }
  }
}

// moments

struct MomentsArgs {
  std::uint64_t p = 0;
  unsigned dmax = 8;
  std::string method = "girard";
};

void run_moments(const Shared& sh, const MomentsArgs& args) {
  const auto cfg = sh.config();
  const auto p = checked_prime(args.p, "--p");
  if (args.method != "girard" && args.method != "direct" && args.method != "all")
    throw UsageError("--method must be girard, direct or all");
  const auto provider = cfg.make_provider(cfg.effective_jobs());
  std::vector<BigInt> values;
  std::vector<std::string> sources;
  std::vector<klm::MomentValue> direct;
  if (args.method != "girard") direct = klm::sym_moments_direct(p, args.dmax, cfg.exact_options(cfg.effective_jobs()));
  for (unsigned d = 0; d <= args.dmax; ++d) {
    if (args.method == "direct") {
      values.push_back(direct[d].value);
      sources.emplace_back("direct-recurrence");
      continue;
    }
    const BigInt g = provider->moment(p, d);
    if (args.method == "all") {
      if (g != direct[d].value)
        klm::fail(klm::ErrorCode::InvalidInput, "girard and direct disagree at d = " + std::to_string(d));
      if (d == 8) {
        const auto completed = provider->native_table(p, 8).converted(klm::Convention::Completed);
        if (klm::sym_moment_appendix8(p, completed).value != g)
          klm::fail(klm::ErrorCode::InvalidInput, "appendix8 polynomial disagrees at d = 8");
      }
    }
    values.push_back(g);
    sources.emplace_back(args.method == "all" ? "agreed" : "girard");
  }
  switch (cfg.format) {
    case klm::OutputFormat::Text:
      for (unsigned d = 0; d <= args.dmax; ++d) std::cout << "m^" << d << "(" << p.value() << ") = " << values[d] << '\n';
      break;
    case klm::OutputFormat::Csv:
      std::cout << "p,d,moment,method\n";
      for (unsigned d = 0; d <= args.dmax; ++d) std::cout << p.value() << ',' << d << ',' << values[d] << ',' << sources[d] << '\n';
      break;
    case klm::OutputFormat::Json: {
      auto j = envelope("moments");
      j["p"] = p.value();
      j["entries"] = json::array();
      for (unsigned d = 0; d <= args.dmax; ++d)
        j["entries"].push_back({{"d", d}, {"moment", klm::to_decimal(values[d])}, {"method", sources[d]}});
      emit_json(j);
      break;
    }
  }
}

// evans

struct EvansArgs {
  unsigned d = 8;
  std::uint64_t pmin = 2;
  std::uint64_t pmax = 100;
  unsigned k8 = 3;
  std::string table;
  std::uint64_t hecke_bound = 200;
};

int run_evans(const Shared& sh, const EvansArgs& args) {
  const auto cfg = sh.config();
  if (args.pmin > args.pmax) throw UsageError("--pmin must not exceed --pmax");
  if (args.d < 1) throw UsageError("--d must be >= 1");
  if (args.k8 < 1 || args.k8 > 4) throw UsageError("--k8 must lie in 1..4");
  klm::EvansOptions opt;
  opt.k8 = args.k8;
  opt.hecke_bound = args.hecke_bound;
  if (!args.table.empty()) opt.tables[args.d] = klm::CoefficientTable::load(args.table);
  klm::EvansPipeline pipeline(cfg.make_provider(1), opt);
  const auto report = klm::batch_report(args.d, args.pmin, args.pmax, pipeline, cfg.effective_jobs());
  switch (cfg.format) {
    case klm::OutputFormat::Text: std::cout << report.render_text(); break;
    case klm::OutputFormat::Csv: std::cout << report.render_csv(); break;
    case klm::OutputFormat::Json: {
      auto j = report.to_json();
      j["command"] = "evans";
      emit_json(j);
      break;
    }
  }
  return 0;
}

// trace

struct TraceArgs {
  unsigned d = 3;
  std::vector<std::uint64_t> primes;
};

void run_trace(const Shared& sh, const TraceArgs& args) {
  const auto cfg = sh.config();
  std::vector<klm::Prime> ps;
  for (auto p : args.primes) ps.push_back(checked_prime(p, "--p"));
  auto provider = cfg.make_provider(cfg.effective_jobs());
  std::vector<klm::TraceResult> rows;
  for (auto p : ps) rows.push_back(klm::trace_middle(args.d, p, *provider));
  const std::string bound_unit = args.d % 2 == 0 ? " p^(" + std::to_string(args.d + 1) + "/2)" : "";
  switch (cfg.format) {
    case klm::OutputFormat::Text:
      for (const auto& r : rows)
        std::cout << "d=" << r.d << " p=" << r.p << " m=" << r.moment << (r.d % 2 ? " t=" : " u=") << klm::to_string(r.trace)
                  << " integral=" << (r.divisible ? "yes" : "no") << " |.|<=" << r.bound << bound_unit
                  << " in_range=" << (r.in_range ? "yes" : "no") << '\n';
      break;
    case klm::OutputFormat::Csv:
      std::cout << "d,p,m,trace,integral,bound,in_range\n";
      for (const auto& r : rows)
        std::cout << r.d << ',' << r.p << ',' << r.moment << ',' << klm::to_string(r.trace) << ',' << r.divisible << ','
                  << r.bound << ',' << r.in_range << '\n';
      break;
    case klm::OutputFormat::Json: {
      auto j = envelope("trace");
      j["entries"] = json::array();
      for (const auto& r : rows)
        j["entries"].push_back({{"d", r.d},
                                {"p", r.p},
                                {"moment", klm::to_decimal(r.moment)},
                                {"trace", klm::to_string(r.trace)},
                                {"integral", r.divisible},
                                {"bound", klm::to_decimal(r.bound)},
                                {"in_range", r.in_range}});
      emit_json(j);
      break;
    }
  }
}

// dims

void run_dims(const Shared& sh) {
  const auto cfg = sh.config();
  const auto table = klm::dims_table();
  switch (cfg.format) {
    case klm::OutputFormat::Text: std::cout << table.render_text(); break;
    case klm::OutputFormat::Csv: std::cout << table.render_csv(); break;
    case klm::OutputFormat::Json: {
      auto j = envelope("dims");
      j["degrees"] = table.degrees;
      j["rows"] = json::array();
      for (std::size_t i = 0; i < table.row_labels.size(); ++i)
        j["rows"].push_back({{"label", table.row_labels[i]}, {"cells", table.cells[i]}});
      emit_json(j);
      break;
    }
  }
}

// det

struct DetArgs {
  unsigned d = 7;
  std::vector<std::uint64_t> primes;
};

void run_det(const Shared& sh, const DetArgs& args) {
  const auto cfg = sh.config();
  std::vector<klm::Prime> ps;
  for (auto p : args.primes) {
    auto q = checked_prime(p, "--p");
    if (q.value() == 2) throw UsageError("--p must be odd");
    ps.push_back(q);
  }
  std::vector<int> signs;
  for (auto p : ps) signs.push_back(klm::fuwan_det(args.d, p));
  auto sign_text = [](int s) { return s > 0 ? std::string("+1") : std::string("-1"); };
  switch (cfg.format) {
    case klm::OutputFormat::Text:
      for (std::size_t i = 0; i < ps.size(); ++i)
        std::cout << "d=" << args.d << " p=" << ps[i].value() << " det=" << sign_text(signs[i]) << '\n';
      break;
    case klm::OutputFormat::Csv:
      std::cout << "d,p,det\n";
      for (std::size_t i = 0; i < ps.size(); ++i) std::cout << args.d << ',' << ps[i].value() << ',' << sign_text(signs[i]) << '\n';
      break;
    case klm::OutputFormat::Json: {
      auto j = envelope("det");
      j["d"] = args.d;
      j["entries"] = json::array();
      for (std::size_t i = 0; i < ps.size(); ++i) j["entries"].push_back({{"p", ps[i].value()}, {"det", signs[i]}});
      emit_json(j);
      break;
    }
  }
}

// eta

struct EtaArgs {
  std::string quotient = "1^2,2^2,3^2,6^2";
  std::size_t terms = 20;
  std::uint64_t level = 0;
  std::uint64_t bound = 0;
};

int run_eta(const Shared& sh, const EtaArgs& args) {
  const auto cfg = sh.config();
  klm::EtaQuotient eq;
  try {
    eq = klm::EtaQuotient::parse(args.quotient);
  } catch (const klm::Error& e) {
    throw UsageError(e.message());
  }
  if (args.terms < 1) throw UsageError("--terms must be >= 1");
  const auto s = klm::eta_quotient_series(eq, args.terms);
  std::optional<klm::HeckeReport> hecke;
  if (args.level > 0) {
    if (!eq.integral_weight()) klm::fail(klm::ErrorCode::InvalidInput, "Hecke validation needs integral weight");
    const std::uint64_t bound = args.bound ? args.bound : static_cast<std::uint64_t>(s.truncation() - 1);
    hecke = klm::hecke_validate(s, static_cast<unsigned>(eq.weight()), args.level, bound);
  }
  switch (cfg.format) {
    case klm::OutputFormat::Text:
      std::cout << "eta " << eq.describe() << " weight=" << eq.exponent_sum() << "/2 leading=q^" << s.leading_exponent()
                << '\n';
      for (std::size_t i = 0; i < s.coeffs().size(); ++i)
        std::cout << "q^" << s.leading_exponent() + static_cast<std::int64_t>(i) << ' ' << s.coeffs()[i] << '\n';
      if (hecke) {
        std::cout << "hecke " << (hecke->passed() ? "PASS" : "FAIL") << " relations=" << hecke->relations_checked
                  << " deligne=" << hecke->deligne_checked << '\n';
        for (const auto& f : hecke->failures) std::cout << "  " << f << '\n';
      }
      break;
    case klm::OutputFormat::Csv:
      std::cout << "n,coefficient\n";
      for (std::size_t i = 0; i < s.coeffs().size(); ++i)
        std::cout << s.leading_exponent() + static_cast<std::int64_t>(i) << ',' << s.coeffs()[i] << '\n';
      break;
    case klm::OutputFormat::Json: {
      auto j = envelope("eta");
      j["quotient"] = eq.describe();
      j["leading_exponent"] = s.leading_exponent();
      j["truncation"] = s.truncation();
      j["coefficients"] = json::array();
      for (const auto& c : s.coeffs()) j["coefficients"].push_back(klm::to_decimal(c));
      if (hecke)
        j["hecke"] = {{"pass", hecke->passed()},
                      {"relations_checked", hecke->relations_checked},
                      {"deligne_checked", hecke->deligne_checked},
                      {"failures", hecke->failures}};
      emit_json(j);
      break;
    }
  }
  return hecke && !hecke->passed() ? kExitComputation : 0;
}

// molien

void run_molien(const Shared& sh, unsigned dmax) {
  const auto cfg = sh.config();
  const auto dims = klm::molien_dim_series(dmax);
  const auto frob = klm::molien_frob_series(dmax);
  switch (cfg.format) {
    case klm::OutputFormat::Text:
      for (unsigned d = 0; d <= dmax; ++d) std::cout << "d=" << d << " dim=" << dims[d] << " frob=" << frob[d] << '\n';
      break;
    case klm::OutputFormat::Csv:
      std::cout << "d,dim,frob\n";
      for (unsigned d = 0; d <= dmax; ++d) std::cout << d << ',' << dims[d] << ',' << frob[d] << '\n';
      break;
    case klm::OutputFormat::Json: {
      auto j = envelope("molien");
      j["entries"] = json::array();
      for (unsigned d = 0; d <= dmax; ++d)
        j["entries"].push_back({{"d", d}, {"dim", klm::to_decimal(dims[d])}, {"frob", klm::to_decimal(frob[d])}});
      emit_json(j);
      break;
    }
  }
}

void report_error(const Shared& sh, const std::string& code, const std::string& message) {
  if (sh.format == "json") {
    auto j = envelope("error");
    j["error"] = {{"code", code}, {"message", message}};
    emit_json(j);
  } else {
    std::cerr << "error: " << code << ": " << message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kloosterman moment toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Shared sh;
  app.add_option("--format", sh.format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_option("--cache-dir", sh.cache_dir, std::string("Cache directory (default: $") + klm::kCacheEnvVar + " or " +
                                                 klm::kDefaultCacheDir + ")");
  app.add_flag("--no-cache", sh.no_cache, "Disable the power-sum cache");
  app.add_option("--jobs", sh.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--exact-limit", sh.exact_limit, "Largest p computed on the exact path");
  app.add_option("--precision", sh.precision, "Starting float precision in bits");
  app.add_option("--precision-cap", sh.precision_cap, "Largest float precision in bits");
  app.add_flag("--deterministic", sh.deterministic, "Run sequentially");

  SumsArgs sums;
  auto* c_sums = app.add_subcommand("sums", "Power sums of Kl_2 over a");
  c_sums->add_option("--p", sums.p, "Prime")->required();
  c_sums->add_option("--nmax", sums.nmax, "Largest power")->required();
  c_sums->add_option("--method", sums.method, "exact, float, both or auto")
      ->check(CLI::IsMember({"auto", "exact", "float", "both"}));
  c_sums->add_option("--convention", sums.convention, "restricted or completed")
      ->check(CLI::IsMember({"restricted", "completed"}));

  MomentsArgs moments;
  auto* c_moments = app.add_subcommand("moments", "Symmetric power moments m^d(p)");
  c_moments->add_option("--p", moments.p, "Prime")->required();
  c_moments->add_option("--dmax", moments.dmax, "Largest degree");
  c_moments->add_option("--method", moments.method, "girard, direct or all");

  EvansArgs evans;
  auto* c_evans = app.add_subcommand("evans", "Coefficient identities over a prime range");
  c_evans->add_option("--d", evans.d, "Degree")->required();
  c_evans->add_option("--pmin", evans.pmin, "Smallest p");
  c_evans->add_option("--pmax", evans.pmax, "Largest p");
  c_evans->add_option("--k8", evans.k8, "Weight parameter k for d = 8");
  c_evans->add_option("--table", evans.table, "Coefficient table (JSON)")->check(CLI::ExistingFile);
  c_evans->add_option("--hecke-bound", evans.hecke_bound, "Bound for registry form validation");

  TraceArgs trace;
  auto* c_trace = app.add_subcommand("trace", "Middle trace extracted from m^d(p)");
  c_trace->add_option("--d", trace.d, "Degree")->required();
  c_trace->add_option("--p", trace.primes, "Primes")->required();

  auto* c_dims = app.add_subcommand("dims", "Dimension table for d = 1..13");

  DetArgs det;
  auto* c_det = app.add_subcommand("det", "Determinant sign of Frobenius");
  c_det->add_option("--d", det.d, "Degree")->required();
  c_det->add_option("--p", det.primes, "Primes")->required();

  EtaArgs eta;
  auto* c_eta = app.add_subcommand("eta", "q-expansion of an eta quotient");
  c_eta->add_option("--quotient", eta.quotient, "divisor^exponent list, e.g. 1^2,2^2,3^2,6^2");
  c_eta->add_option("--terms", eta.terms, "Number of coefficients");
  c_eta->add_option("--level", eta.level, "Level for Hecke validation");
  c_eta->add_option("--bound", eta.bound, "Index bound for Hecke validation");

  unsigned molien_dmax = 24;
  auto* c_molien = app.add_subcommand("molien", "Molien series of the binary tetrahedral group");
  c_molien->add_option("--dmax", molien_dmax, "Largest degree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_sums) run_sums(sh, sums);
    else if (*c_moments) run_moments(sh, moments);
    else if (*c_evans) return run_evans(sh, evans);
    else if (*c_trace) run_trace(sh, trace);
    else if (*c_dims) run_dims(sh);
    else if (*c_det) run_det(sh, det);
    else if (*c_eta) return run_eta(sh, eta);
    else if (*c_molien) run_molien(sh, molien_dmax);
  } catch (const UsageError& e) {
    report_error(sh, "UsageError", e.what());
    return kExitUsage;
  } catch (const klm::Error& e) {
    report_error(sh, std::string(klm::to_string(e.code())), e.message());
    return kExitComputation;
  } catch (const std::exception& e) {
    report_error(sh, "InternalError", e.what());
    return kExitComputation;
  }
  return 0;
}
