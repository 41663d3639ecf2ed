#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>

#include "heattrace/errors.hpp"
#include "heattrace/expression.hpp"
#include "json.hpp"

namespace heattrace::cli {

namespace {

using json = nlohmann::json;

// Reads one section with a fixed key set; unknown keys are collected or
// rejected.
class Section {
 public:
  Section(const json& node, std::string path, bool strict, ConfigWarnings* warnings,
          std::initializer_list<const char*> keys)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw SchemaError(path_ + ": expected an object");
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }) != keys.end()) continue;
      const std::string where = where_of(it.key());
      if (strict) throw SchemaError(where + ": unknown key");
      if (warnings) warnings->unknown_keys.push_back(where);
    }
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& at(const char* key) const { return node_.at(key); }
  std::string where_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void read(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_string()) {
      try {
        out = Expression::parse(v.get<std::string>())(Variables{});
      } catch (const SchemaError& e) {
        throw SchemaError(where_of(key) + ": " + e.what());
      }
    } else {
      throw SchemaError(where_of(key) + ": expected a number or a constant expression");
    }
    if (!std::isfinite(out)) throw SchemaError(where_of(key) + ": must be finite");
  }

  void read(const char* key, int& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) throw SchemaError(where_of(key) + ": expected an integer");
    const long long n = v.get<long long>();
    if (n < -1000000000LL || n > 1000000000LL) throw SchemaError(where_of(key) + ": out of range");
    out = static_cast<int>(n);
  }

  void read(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned()) throw SchemaError(where_of(key) + ": expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }

  void read(const char* key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) throw SchemaError(where_of(key) + ": expected a string");
    out = at(key).get<std::string>();
  }

 private:
  const json& node_;
  std::string path_;
};

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw SchemaError(what);
}

}  // namespace

RunConfig parse_config(const std::string& text, bool strict, ConfigWarnings* warnings) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what(), line_of(text, e.byte));
  }
  RunConfig c;
  const Section top(root, "", strict, warnings,
                    {"schema", "domain", "horizon", "tolerances", "schedule", "grid", "oracle", "roundtrip",
                     "kernel_check", "seed"});
  if (top.has("schema") && top.at("schema") != kConfigSchema)
    throw SchemaError("schema: unsupported version (expected '" + std::string(kConfigSchema) + "')");
  top.read("horizon", c.horizon);
  top.read("seed", c.seed);
  if (top.has("domain")) {
    const Section s(top.at("domain"), "domain", strict, warnings, {"kind", "a", "b", "c", "d", "epsilon0"});
    s.read("kind", c.domain.kind);
    s.read("a", c.domain.a);
    s.read("b", c.domain.b);
    s.read("c", c.domain.c);
    s.read("d", c.domain.d);
    s.read("epsilon0", c.domain.epsilon0);
  }
  if (top.has("tolerances")) {
    const Section s(top.at("tolerances"), "tolerances", strict, warnings,
                    {"kernel", "quadrature", "acceptance", "semigroup", "scale"});
    s.read("kernel", c.kernel_tolerance);
    s.read("quadrature", c.quadrature_tolerance);
    s.read("acceptance", c.acceptance_tolerance);
    s.read("semigroup", c.semigroup_tolerance);
    s.read("scale", c.tolerance_scale);
  }
  if (top.has("schedule")) {
    const Section s(top.at("schedule"), "schedule", strict, warnings,
                    {"epsilon_first", "epsilon_levels", "t_first", "t_levels", "extrapolation_levels", "bins"});
    s.read("epsilon_first", c.schedule.epsilon_first);
    s.read("epsilon_levels", c.schedule.epsilon_levels);
    s.read("t_first", c.schedule.t_first);
    s.read("t_levels", c.schedule.t_levels);
    s.read("extrapolation_levels", c.schedule.extrapolation_levels);
    s.read("bins", c.schedule.bins);
  }
  if (top.has("grid")) {
    const Section s(top.at("grid"), "grid", strict, warnings,
                    {"x_lo", "x_hi", "nx", "y_lo", "y_hi", "ny", "t_lo", "t_hi", "nt"});
    s.read("x_lo", c.grid.x_lo);
    s.read("x_hi", c.grid.x_hi);
    s.read("nx", c.grid.nx);
    s.read("y_lo", c.grid.y_lo);
    s.read("y_hi", c.grid.y_hi);
    s.read("ny", c.grid.ny);
    s.read("t_lo", c.grid.t_lo);
    s.read("t_hi", c.grid.t_hi);
    s.read("nt", c.grid.nt);
  }
  if (top.has("oracle")) {
    const Section s(top.at("oracle"), "oracle", strict, warnings, {"h", "k", "probes", "t_lo", "t_hi"});
    s.read("h", c.oracle.h);
    s.read("k", c.oracle.k);
    s.read("probes", c.oracle.probes);
    s.read("t_lo", c.oracle.t_lo);
    s.read("t_hi", c.oracle.t_hi);
  }
  if (top.has("roundtrip")) {
    const Section s(top.at("roundtrip"), "roundtrip", strict, warnings,
                    {"mu_relative", "lambda_absolute", "nu_relative", "leakage"});
    s.read("mu_relative", c.roundtrip.mu_relative);
    s.read("lambda_absolute", c.roundtrip.lambda_absolute);
    s.read("nu_relative", c.roundtrip.nu_relative);
    s.read("leakage", c.roundtrip.leakage);
  }
  if (top.has("kernel_check")) {
    const Section s(top.at("kernel_check"), "kernel_check", strict, warnings, {"probes"});
    s.read("probes", c.kernel_probes);
  }
  validate(c);
  return c;
}

void scale_tolerances(RunConfig& c, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw SchemaError("tolerance scale must be positive and finite");
  for (double* t : {&c.kernel_tolerance, &c.quadrature_tolerance, &c.acceptance_tolerance, &c.semigroup_tolerance,
                    &c.roundtrip.mu_relative, &c.roundtrip.lambda_absolute, &c.roundtrip.nu_relative,
                    &c.roundtrip.leakage})
    *t *= scale;
  c.tolerance_scale *= scale;
}

void validate(const RunConfig& c) {
  require(c.domain.kind == "interval" || c.domain.kind == "rectangle", "domain.kind: expected 'interval' or 'rectangle'");
  try {
    (void)c.make_domain();
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  require(c.horizon > 0.0, "horizon: must be positive");
  require(c.tolerance_scale > 0.0, "tolerances.scale: must be positive");
  const std::pair<const char*, double> tolerances[] = {
      {"tolerances.kernel", c.kernel_tolerance},         {"tolerances.quadrature", c.quadrature_tolerance},
      {"tolerances.acceptance", c.acceptance_tolerance}, {"tolerances.semigroup", c.semigroup_tolerance},
      {"roundtrip.mu_relative", c.roundtrip.mu_relative}, {"roundtrip.lambda_absolute", c.roundtrip.lambda_absolute},
      {"roundtrip.nu_relative", c.roundtrip.nu_relative}, {"roundtrip.leakage", c.roundtrip.leakage}};
  for (const auto& [name, value] : tolerances) require(value > 0.0, std::string(name) + ": must be positive");
  require(c.schedule.epsilon_levels >= 2 && c.schedule.t_levels >= 2, "schedule: need at least two levels");
  require(c.schedule.extrapolation_levels >= 1, "schedule.extrapolation_levels: must be at least 1");
  require(c.schedule.bins >= 1, "schedule.bins: must be at least 1");
  require(c.grid.nx >= 1 && c.grid.nt >= 1 && c.grid.ny >= 1, "grid: node counts must be positive");
  require(c.oracle.h > 0.0 && c.oracle.k > 0.0, "oracle: steps must be positive");
  require(c.oracle.probes >= 1, "oracle.probes: must be positive");
  require(0.0 < c.oracle.t_lo && c.oracle.t_lo < c.oracle.t_hi && c.oracle.t_hi <= c.horizon,
          "oracle: need 0 < t_lo < t_hi <= horizon");
  require(c.kernel_probes >= 1, "kernel_check.probes: must be positive");
  try {
    c.make_schedule().validate(c.make_domain(), c.horizon);
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("schedule: ") + e.what());
  }
}

std::vector<std::string> unattainable_tolerances(const RunConfig& c) {
  std::vector<std::string> out;
  const std::pair<const char*, double> tolerances[] = {
      {"tolerances.kernel", c.kernel_tolerance},         {"tolerances.quadrature", c.quadrature_tolerance},
      {"tolerances.acceptance", c.acceptance_tolerance}, {"tolerances.semigroup", c.semigroup_tolerance},
      {"roundtrip.mu_relative", c.roundtrip.mu_relative}, {"roundtrip.lambda_absolute", c.roundtrip.lambda_absolute},
      {"roundtrip.nu_relative", c.roundtrip.nu_relative}, {"roundtrip.leakage", c.roundtrip.leakage}};
  for (const auto& [name, value] : tolerances)
    if (value < kToleranceFloor) out.emplace_back(name);
  return out;
}

Domain RunConfig::make_domain() const {
  if (domain.kind == "rectangle") return Domain::rectangle(domain.a, domain.b, domain.c, domain.d, domain.epsilon0);
  return Domain::interval(domain.a, domain.b, domain.epsilon0);
}

ExtractionSchedule RunConfig::make_schedule() const {
  ExtractionSchedule s =
      ExtractionSchedule::geometric(schedule.epsilon_first, schedule.epsilon_levels, schedule.t_first, schedule.t_levels);
  s.extrapolation_levels = schedule.extrapolation_levels;
  return s;
}

GridSpec RunConfig::make_grid(const Domain& d) const {
  GridSpec g;
  g.nx = grid.nx;
  g.ny = d.kind() == DomainKind::Rectangle ? grid.ny : 1;
  g.nt = grid.nt;
  g.t_lo = grid.t_lo;
  g.t_hi = grid.t_hi;
  if (grid.x_lo == 0.0 && grid.x_hi == 0.0) {
    const double step = d.width() / (grid.nx + 1);
    g.x_lo = d.a() + step;
    g.x_hi = d.b() - step;
  } else {
    g.x_lo = grid.x_lo;
    g.x_hi = grid.x_hi;
  }
  if (d.kind() == DomainKind::Rectangle && grid.y_lo == 0.0 && grid.y_hi == 0.0) {
    const double step = d.height() / (grid.ny + 1);
    g.y_lo = d.c() + step;
    g.y_hi = d.d() - step;
  } else {
    g.y_lo = grid.y_lo;
    g.y_hi = grid.y_hi;
  }
  return g;
}

RepresentationOptions RunConfig::representation() const {
  RepresentationOptions r;
  r.tolerance = quadrature_tolerance;
  return r;
}

TraceOptions RunConfig::traces() const {
  TraceOptions t;
  t.tolerance = quadrature_tolerance;
  t.lateral.tolerance = quadrature_tolerance;
  t.lateral.bins = schedule.bins;
  return t;
}

RoundtripOptions RunConfig::roundtrip_options() const {
  RoundtripOptions r;
  r.schedule = make_schedule();
  r.traces = traces();
  r.mu_relative = roundtrip.mu_relative;
  r.lambda_absolute = roundtrip.lambda_absolute;
  r.nu_relative = roundtrip.nu_relative;
  r.leakage = roundtrip.leakage;
  return r;
}

OracleOptions RunConfig::oracle_options() const {
  OracleOptions o;
  o.fd.h = oracle.h;
  o.fd.k = oracle.k;
  o.probes = oracle.probes;
  o.t_lo = oracle.t_lo;
  o.t_hi = oracle.t_hi;
  o.tolerance = acceptance_tolerance;
  o.atom_tolerance = 10.0 * acceptance_tolerance;
  o.seed = seed;
  o.representation = representation();
  return o;
}

KernelSuiteOptions RunConfig::kernel_suite() const {
  KernelSuiteOptions k;
  k.probes = kernel_probes;
  k.seed = seed;
  k.semigroup_tolerance = semigroup_tolerance;
  return k;
}

std::string canonical_json(const RunConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["domain"] = {{"kind", c.domain.kind}, {"a", c.domain.a}, {"b", c.domain.b}, {"epsilon0", c.domain.epsilon0}};
  if (c.domain.kind == "rectangle") {
    j["domain"]["c"] = c.domain.c;
    j["domain"]["d"] = c.domain.d;
  }
  j["horizon"] = c.horizon;
  j["tolerances"] = {{"kernel", c.kernel_tolerance},
                     {"quadrature", c.quadrature_tolerance},
                     {"acceptance", c.acceptance_tolerance},
                     {"semigroup", c.semigroup_tolerance},
                     {"scale", c.tolerance_scale}};
  j["schedule"] = {{"epsilon_first", c.schedule.epsilon_first},
                   {"epsilon_levels", c.schedule.epsilon_levels},
                   {"t_first", c.schedule.t_first},
                   {"t_levels", c.schedule.t_levels},
                   {"extrapolation_levels", c.schedule.extrapolation_levels},
                   {"bins", c.schedule.bins}};
  j["grid"] = {{"x_lo", c.grid.x_lo}, {"x_hi", c.grid.x_hi}, {"nx", c.grid.nx}, {"y_lo", c.grid.y_lo},
               {"y_hi", c.grid.y_hi}, {"ny", c.grid.ny},     {"t_lo", c.grid.t_lo}, {"t_hi", c.grid.t_hi},
               {"nt", c.grid.nt}};
  j["oracle"] = {{"h", c.oracle.h},
                 {"k", c.oracle.k},
                 {"probes", c.oracle.probes},
                 {"t_lo", c.oracle.t_lo},
                 {"t_hi", c.oracle.t_hi}};
  j["roundtrip"] = {{"mu_relative", c.roundtrip.mu_relative},
                    {"lambda_absolute", c.roundtrip.lambda_absolute},
                    {"nu_relative", c.roundtrip.nu_relative},
                    {"leakage", c.roundtrip.leakage}};
  j["kernel_check"] = {{"probes", c.kernel_probes}};
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_label(std::uint64_t hash) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace heattrace::cli
