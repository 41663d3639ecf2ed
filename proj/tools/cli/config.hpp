#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "heattrace/domain.hpp"
#include "heattrace/representation.hpp"
#include "heattrace/traces.hpp"
#include "heattrace/verify.hpp"

namespace heattrace::cli {

inline constexpr const char* kConfigSchema = "heattrace.config/1";

struct DomainConfig {
  std::string kind = "interval";
  double a = 0.0, b = std::numbers::pi, c = 0.0, d = 0.0;
  double epsilon0 = 0.3;
};

struct ScheduleConfig {
  double epsilon_first = 0.3;
  int epsilon_levels = 8;
  double t_first = 0.004;
  int t_levels = 8;
  int extrapolation_levels = 4;
  int bins = 16;
};

struct GridConfig {
  double x_lo = 0.0, x_hi = 0.0;  // 0 / 0 selects the whole interval
  int nx = 64;
  double y_lo = 0.0, y_hi = 0.0;
  int ny = 1;
  double t_lo = 0.01, t_hi = 1.0;
  int nt = 64;
};

struct OracleConfig {
  double h = 1.0 / 256.0;
  double k = 1.0 / 256.0;
  int probes = 20;
  double t_lo = 0.05;
  double t_hi = 1.0;
};

struct RoundtripConfig {
  double mu_relative = 0.02;
  double lambda_absolute = 1e-3;
  double nu_relative = 0.02;
  double leakage = 1e-3;
};

struct RunConfig {
  DomainConfig domain;
  double horizon = 1.0;
  double kernel_tolerance = 1e-10;      // relative, per kernel value
  double quadrature_tolerance = 1e-9;   // absolute, per evaluation of u
  double acceptance_tolerance = 1e-3;   // oracle comparison, relative to max |u|
  double semigroup_tolerance = 1e-8;
  ScheduleConfig schedule;
  GridConfig grid;
  OracleConfig oracle;
  RoundtripConfig roundtrip;
  int kernel_probes = 100;
  std::uint64_t seed = 1;
  /// Product of the scale factors already applied to every tolerance; read
  /// back from a manifest it is informational only.
  double tolerance_scale = 1.0;

  Domain make_domain() const;
  ExtractionSchedule make_schedule() const;
  GridSpec make_grid(const Domain& domain) const;
  RepresentationOptions representation() const;
  TraceOptions traces() const;
  RoundtripOptions roundtrip_options() const;
  OracleOptions oracle_options() const;
  KernelSuiteOptions kernel_suite() const;
};

/// Every positive tolerance below this is unattainable in double precision.
inline constexpr double kToleranceFloor = 64.0 * 2.220446049250313e-16;

struct ConfigWarnings {
  std::vector<std::string> unknown_keys;
};

/// Parses the configuration document. Missing keys keep their defaults;
/// numbers may also be constant expressions such as "pi - 0.05". Throws
/// SchemaError (with the line for syntax errors) on malformed documents,
/// and on unknown keys when `strict`.
RunConfig parse_config(const std::string& text, bool strict, ConfigWarnings* warnings = nullptr);

/// Multiplies every tolerance by `scale` and records it.
void scale_tolerances(RunConfig& config, double scale);

/// Throws SchemaError unless every tolerance and count is positive and the
/// schedule and domain are valid.
void validate(const RunConfig& config);

/// Names of tolerances below kToleranceFloor.
std::vector<std::string> unattainable_tolerances(const RunConfig& config);

/// Canonical JSON text of the effective configuration (sorted keys,
/// shortest round-trip numbers).
std::string canonical_json(const RunConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_label(std::uint64_t hash);

}  // namespace heattrace::cli
