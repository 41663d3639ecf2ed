#include "heattrace/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heattrace/errors.hpp"
#include "json.hpp"

namespace heattrace {

using json = nlohmann::ordered_json;

double DensitySegment::operator()(double coordinate, Variables vars) const {
  if (expression) return (*expression)(vars);
  if (samples.empty()) return 0.0;
  if (samples.size() == 1) return samples.front();
  const double u = (coordinate - lo) / (hi - lo) * static_cast<double>(samples.size() - 1);
  const double clamped = std::clamp(u, 0.0, static_cast<double>(samples.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(clamped), samples.size() - 2);
  const double w = clamped - static_cast<double>(i);
  return (1.0 - w) * samples[i] + w * samples[i + 1];
}

bool DensitySegment::operator==(const DensitySegment& other) const {
  return lo == other.lo && hi == other.hi && expression == other.expression && samples == other.samples;
}

double sampled_bound(const DensitySegment& density, double lo, double hi, Variables vars,
                     int samples) {
  double bound = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double c = lo + (i + 0.5) * (hi - lo) / samples;
    Variables v = vars;
    v.t = c;
    v.s = c;
    bound = std::max(bound, std::abs(density(c, v)));
  }
  if (!density.expression)
    for (double v : density.samples) bound = std::max(bound, std::abs(v));
  return bound;
}

namespace {

bool is_interval(const Domain& d) { return d.kind() == DomainKind::Interval; }

Variables interior_vars(const Domain& d, Point p) {
  Variables v;
  v.x = p.x;
  v.y = p.y;
  v.delta = d.delta(p);
  return v;
}

// Integrates f(x) rho(x) over one interval density segment, grading toward
// the ends that touch the boundary when the density blows up there.
QuadratureResult integrate_interval_density(const DensitySegment& seg, const Domain& d,
                                            double alpha, double tol,
                                            const std::function<double(double)>& weight) {
  auto integrand = [&](double x) {
    Variables v;
    v.x = x;
    v.delta = std::min(x - d.a(), d.b() - x);
    return weight(x) * seg(x, v);
  };
  const double touch = 1e-12 * d.width();
  const bool left = seg.lo <= d.a() + touch;
  const bool right = seg.hi >= d.b() - touch;
  if (alpha <= 0.0 || (!left && !right)) return integrate_adaptive(integrand, seg.lo, seg.hi, tol);
  const GradedEnd end = left && right ? GradedEnd::Both : left ? GradedEnd::Left : GradedEnd::Right;
  return integrate_graded(integrand, seg.lo, seg.hi, alpha, tol, end);
}

// Rectangle density: nested adaptive integration, x outer, y inner with
// breakpoints where the distance function changes branch.
QuadratureResult integrate_rectangle_density(const DensitySegment& seg, const Domain& d, double tol,
                                             const PointFunction& weight) {
  std::size_t evaluations = 0;
  double inner_error = 0.0;
  const double width = seg.hi - seg.lo;
  auto outer = [&](double x) {
    const double dx = std::min(x - d.a(), d.b() - x);
    auto inner = [&](double y) {
      const Point p{x, y};
      return weight(p) * seg(x, interior_vars(d, p));
    };
    const double cuts[] = {d.c() + dx, d.d() - dx};
    const QuadratureResult r = integrate_adaptive(inner, d.c(), d.d(), 0.25 * tol / width, cuts);
    evaluations += r.evaluations;
    inner_error = std::max(inner_error, r.error_estimate);
    return r.value;
  };
  const double hx = 0.5 * std::min(d.height(), d.width());
  const double cuts[] = {d.a() + hx, d.b() - hx};
  QuadratureResult r = integrate_adaptive(outer, seg.lo, seg.hi, 0.5 * tol, cuts);
  r.error_estimate += inner_error * width;
  r.evaluations += evaluations;
  r.converged = r.error_estimate <= tol;
  return r;
}

double side_length_of(const Domain& d, Side s) { return d.side_length(s); }

// Integrates over one side density: time segment (lateral) or arclength
// segment (corner); for rectangles the lateral case is nested over arclength.
QuadratureResult integrate_side_density(const SideDensity& sd, const Domain& d, double t_lo,
                                        double t_hi, bool lateral, double tol,
                                        const std::function<double(const BoundaryPoint&, double)>& f) {
  QuadratureResult result;
  if (!(t_hi > t_lo)) return result;
  if (!lateral) {
    auto g = [&](double s) {
      Variables v;
      v.s = s;
      return sd.density(s, v) * f(d.boundary_point(sd.side, s), 0.0);
    };
    return integrate_adaptive(g, t_lo, t_hi, tol);
  }
  if (is_interval(d)) {
    const BoundaryPoint z = d.boundary_point(sd.side, 0.0);
    auto g = [&](double t) {
      Variables v;
      v.t = t;
      return sd.density(t, v) * f(z, t);
    };
    return integrate_adaptive(g, t_lo, t_hi, tol);
  }
  const double len = side_length_of(d, sd.side);
  double inner_error = 0.0;
  std::size_t evaluations = 0;
  auto g = [&](double t) {
    auto h = [&](double s) {
      Variables v;
      v.t = t;
      v.s = s;
      return sd.density(t, v) * f(d.boundary_point(sd.side, s), t);
    };
    const QuadratureResult r = integrate_adaptive(h, 0.0, len, 0.25 * tol / (t_hi - t_lo));
    inner_error = std::max(inner_error, r.error_estimate);
    evaluations += r.evaluations;
    return r.value;
  };
  result = integrate_adaptive(g, t_lo, t_hi, 0.5 * tol);
  result.error_estimate += inner_error * (t_hi - t_lo);
  result.evaluations += evaluations;
  result.converged = result.error_estimate <= tol;
  return result;
}

[[noreturn]] void reject(const std::string& where, const std::string& what) {
  throw AdmissibilityError(where + ": " + what);
}

void check_mass(double m, const std::string& where) {
  if (!std::isfinite(m)) reject(where, "mass must be finite");
  if (m < 0.0) reject(where, "negative mass " + std::to_string(m));
}

void check_density_sign(const DensitySegment& seg, const std::string& where, const Variables& base,
                        bool time_variable, const Domain* domain) {
  if (!(seg.hi > seg.lo)) reject(where, "empty segment");
  if (!seg.expression) {
    if (seg.samples.empty()) reject(where, "density needs an expression or samples");
    for (std::size_t i = 0; i < seg.samples.size(); ++i)
      if (!(seg.samples[i] >= 0.0)) reject(where + ".samples[" + std::to_string(i) + "]", "negative density value");
    return;
  }
  constexpr int kProbes = 257;
  for (int i = 0; i < kProbes; ++i) {
    const double c = seg.lo + (i + 0.5) * (seg.hi - seg.lo) / kProbes;
    Variables v = base;
    if (time_variable) {
      v.t = c;
    } else if (domain != nullptr) {
      v.x = c;
      v.delta = domain->kind() == DomainKind::Interval ? std::min(c - domain->a(), domain->b() - c)
                                                       : domain->delta({c, v.y});
    } else {
      v.s = c;
    }
    const double value = seg(c, v);
    if (std::isnan(value) || value < -1e-14)
      reject(where, "density is negative or undefined at " + std::to_string(c));
  }
}

}  // namespace

void validate(const TraceTriple& triple, const Domain& d) {
  if (!(triple.horizon > 0.0) || !std::isfinite(triple.horizon)) reject("horizon", "must be positive");
  if (triple.nu.horizon != triple.horizon) reject("nu.horizon", "does not match the triple horizon");

  const InteriorMeasure& mu = triple.mu;
  if (!(mu.blowup_exponent >= 0.0) || !(mu.blowup_exponent < 2.0))
    reject("mu.blowup_exponent", "must lie in [0, 2) for finite delta-weighted mass");
  if (!is_interval(d) && mu.blowup_exponent > 0.0)
    reject("mu.blowup_exponent", "boundary blowup is supported on intervals only");
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    const std::string where = "mu.atoms[" + std::to_string(i) + "]";
    check_mass(mu.atoms[i].mass, where + ".mass");
    if (!d.contains(mu.atoms[i].location)) reject(where, "atom must lie inside the domain");
  }
  for (std::size_t i = 0; i < mu.densities.size(); ++i) {
    const DensitySegment& seg = mu.densities[i];
    const std::string where = "mu.densities[" + std::to_string(i) + "]";
    if (seg.lo < d.a() || seg.hi > d.b()) reject(where, "segment leaves the domain");
    Variables base;
    base.y = is_interval(d) ? 0.0 : 0.5 * (d.c() + d.d());
    check_density_sign(seg, where, base, false, &d);
  }

  const CornerMeasure& lambda = triple.lambda;
  for (std::size_t i = 0; i < lambda.atoms.size(); ++i) {
    const std::string where = "lambda.atoms[" + std::to_string(i) + "]";
    check_mass(lambda.atoms[i].mass, where + ".mass");
    const CornerAtom& a = lambda.atoms[i];
    if (is_interval(d) && a.side != Side::Left && a.side != Side::Right) reject(where, "interval ends are left/right");
    if (!is_interval(d) && (a.param < 0.0 || a.param > d.side_length(a.side))) reject(where, "position off the side");
  }
  for (std::size_t i = 0; i < lambda.densities.size(); ++i) {
    const std::string where = "lambda.densities[" + std::to_string(i) + "]";
    if (is_interval(d)) reject(where, "corner measures on an interval are atomic");
    const SideDensity& sd = lambda.densities[i];
    if (sd.density.lo < 0.0 || sd.density.hi > d.side_length(sd.side)) reject(where, "segment leaves the side");
    check_density_sign(sd.density, where, Variables{}, false, nullptr);
  }

  const LateralMeasure& nu = triple.nu;
  for (std::size_t i = 0; i < nu.atoms.size(); ++i) {
    const std::string where = "nu.atoms[" + std::to_string(i) + "]";
    check_mass(nu.atoms[i].mass, where + ".mass");
    const LateralAtom& a = nu.atoms[i];
    if (!(a.time > 0.0 && a.time < triple.horizon)) reject(where, "time must lie in (0, T)");
    if (is_interval(d) && a.side != Side::Left && a.side != Side::Right) reject(where, "interval ends are left/right");
    if (!is_interval(d) && (a.param < 0.0 || a.param > d.side_length(a.side))) reject(where, "position off the side");
  }
  for (std::size_t i = 0; i < nu.densities.size(); ++i) {
    const std::string where = "nu.densities[" + std::to_string(i) + "]";
    const SideDensity& sd = nu.densities[i];
    if (is_interval(d) && sd.side != Side::Left && sd.side != Side::Right) reject(where, "interval ends are left/right");
    if (sd.density.lo < 0.0 || sd.density.hi > triple.horizon) reject(where, "time segment leaves (0, T)");
    Variables base;
    base.s = is_interval(d) ? 0.0 : 0.5 * d.side_length(sd.side);
    check_density_sign(sd.density, where, base, true, nullptr);
  }
}

QuadratureResult weighted_mass(const InteriorMeasure& mu, const Domain& d, MeasureOptions options) {
  if (!(mu.blowup_exponent < 2.0))
    throw AdmissibilityError("weighted_mass: blowup exponent >= 2 gives infinite delta-weighted mass");
  QuadratureResult total;
  for (const InteriorAtom& a : mu.atoms) total.value += a.mass * d.delta(a.location);
  const double tol = options.tolerance / std::max<std::size_t>(1, mu.densities.size());
  for (const DensitySegment& seg : mu.densities) {
    QuadratureResult r;
    if (is_interval(d)) {
      // The weight delta compensates one power of the blowup.
      r = integrate_interval_density(seg, d, std::max(mu.blowup_exponent - 1.0, 0.0), tol,
                                     [&](double x) { return std::min(x - d.a(), d.b() - x); });
      if (r.diverged || !std::isfinite(r.value))
        throw AdmissibilityError("weighted_mass: int delta d mu diverges");
    } else {
      r = integrate_rectangle_density(seg, d, tol, [&](Point p) { return d.delta(p); });
    }
    total += r;
  }
  return total;
}

QuadratureResult lateral_mass(const LateralMeasure& nu, const Domain& d, double t1,
                              MeasureOptions options) {
  if (!(t1 > 0.0 && t1 < nu.horizon)) throw InvalidArgument("lateral_mass: T1 must lie in (0, T)");
  return integrate_against(nu, d, [](const BoundaryPoint&, double) { return 1.0; }, t1, options);
}

QuadratureResult integrate_against(const InteriorMeasure& mu, const Domain& d, const PointFunction& f,
                                   MeasureOptions options) {
  QuadratureResult total;
  for (const InteriorAtom& a : mu.atoms) total.value += a.mass * f(a.location);
  const double tol = options.tolerance / std::max<std::size_t>(1, mu.densities.size());
  for (const DensitySegment& seg : mu.densities) {
    if (is_interval(d))
      total += integrate_interval_density(seg, d, mu.blowup_exponent, tol,
                                          [&](double x) { return f(Point{x, 0.0}); });
    else
      total += integrate_rectangle_density(seg, d, tol, f);
  }
  return total;
}

QuadratureResult integrate_against(const CornerMeasure& lambda, const Domain& d,
                                   const std::function<double(const BoundaryPoint&)>& f,
                                   MeasureOptions options) {
  QuadratureResult total;
  for (const CornerAtom& a : lambda.atoms) total.value += a.mass * f(d.boundary_point(a.side, a.param));
  const double tol = options.tolerance / std::max<std::size_t>(1, lambda.densities.size());
  for (const SideDensity& sd : lambda.densities)
    total += integrate_side_density(sd, d, sd.density.lo, sd.density.hi, false, tol,
                                    [&](const BoundaryPoint& z, double) { return f(z); });
  return total;
}

QuadratureResult integrate_against(const LateralMeasure& nu, const Domain& d, const BoundaryTimeFunction& f,
                                   std::optional<double> t1, MeasureOptions options) {
  const double limit = t1.value_or(nu.horizon);
  QuadratureResult total;
  for (const LateralAtom& a : nu.atoms)
    if (a.time < limit) total.value += a.mass * f(d.boundary_point(a.side, a.param), a.time);
  const double tol = options.tolerance / std::max<std::size_t>(1, nu.densities.size());
  for (const SideDensity& sd : nu.densities)
    total += integrate_side_density(sd, d, sd.density.lo, std::min(sd.density.hi, limit), true, tol, f);
  return total;
}

// ---------------------------------------------------------------------------
// JSON schema

namespace {

constexpr const char* kSchemaTag = "heattrace.triple/1";

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

double number(const json& j, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(where + ": missing field '" + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw SchemaError(where + "." + key + ": expected a number");
  return v.get<double>();
}

const json& array_field(const json& j, const char* key, const std::string& where) {
  static const json empty = json::array();
  if (!j.contains(key)) return empty;
  const json& v = j.at(key);
  if (!v.is_array()) throw SchemaError(where + "." + key + ": expected an array");
  return v;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw SchemaError(where + ": unknown field '" + it.key() + "'");
  }
}

DensitySegment parse_segment(const json& j, const std::string& where) {
  DensitySegment seg;
  if (!j.contains("segment") || !j.at("segment").is_array() || j.at("segment").size() != 2 ||
      !j.at("segment")[0].is_number() || !j.at("segment")[1].is_number())
    throw SchemaError(where + ".segment: expected [lo, hi]");
  seg.lo = j.at("segment")[0].get<double>();
  seg.hi = j.at("segment")[1].get<double>();
  const bool has_expr = j.contains("expression");
  const bool has_samples = j.contains("samples");
  if (has_expr == has_samples) throw SchemaError(where + ": give exactly one of 'expression' or 'samples'");
  if (has_expr) {
    if (!j.at("expression").is_string()) throw SchemaError(where + ".expression: expected a string");
    try {
      seg.expression = Expression::parse(j.at("expression").get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError(where + ".expression: " + e.what());
    }
  } else {
    const json& s = j.at("samples");
    if (!s.is_array() || s.size() < 2) throw SchemaError(where + ".samples: expected at least two numbers");
    for (const json& v : s) {
      if (!v.is_number()) throw SchemaError(where + ".samples: expected numbers");
      seg.samples.push_back(v.get<double>());
    }
  }
  return seg;
}

Side parse_side(const json& j, const std::string& where) {
  if (!j.contains("side") || !j.at("side").is_string()) throw SchemaError(where + ": missing field 'side'");
  try {
    return side_from_string(j.at("side").get<std::string>());
  } catch (const SchemaError& e) {
    throw SchemaError(where + ".side: " + e.what());
  }
}

json segment_json(const DensitySegment& seg) {
  json j;
  j["segment"] = json::array({seg.lo, seg.hi});
  if (seg.expression)
    j["expression"] = seg.expression->text();
  else
    j["samples"] = seg.samples;
  return j;
}

TraceTriple triple_from_json(const json& root) {
  check_keys(root, {"schema", "horizon", "mu", "lambda", "nu"}, "document");
  if (root.contains("schema") && root.at("schema") != kSchemaTag)
    throw SchemaError("schema: unsupported version (expected '" + std::string(kSchemaTag) + "')");
  TraceTriple triple;
  triple.horizon = number(root, "horizon", "document");
  triple.nu.horizon = triple.horizon;

  if (root.contains("mu")) {
    const json& mu = root.at("mu");
    check_keys(mu, {"atoms", "densities", "blowup_exponent"}, "mu");
    triple.mu.blowup_exponent = number(mu, "blowup_exponent", "mu", 0.0);
    const json& atoms = array_field(mu, "atoms", "mu");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string where = "mu.atoms[" + std::to_string(i) + "]";
      check_keys(atoms[i], {"x", "y", "mass"}, where);
      triple.mu.atoms.push_back({{number(atoms[i], "x", where), number(atoms[i], "y", where, 0.0)},
                                 number(atoms[i], "mass", where)});
    }
    const json& dens = array_field(mu, "densities", "mu");
    for (std::size_t i = 0; i < dens.size(); ++i) {
      const std::string where = "mu.densities[" + std::to_string(i) + "]";
      check_keys(dens[i], {"segment", "expression", "samples"}, where);
      triple.mu.densities.push_back(parse_segment(dens[i], where));
    }
  }
  if (root.contains("lambda")) {
    const json& lam = root.at("lambda");
    check_keys(lam, {"atoms", "densities"}, "lambda");
    const json& atoms = array_field(lam, "atoms", "lambda");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string where = "lambda.atoms[" + std::to_string(i) + "]";
      check_keys(atoms[i], {"side", "s", "mass"}, where);
      triple.lambda.atoms.push_back({parse_side(atoms[i], where), number(atoms[i], "s", where, 0.0),
                                     number(atoms[i], "mass", where)});
    }
    const json& dens = array_field(lam, "densities", "lambda");
    for (std::size_t i = 0; i < dens.size(); ++i) {
      const std::string where = "lambda.densities[" + std::to_string(i) + "]";
      check_keys(dens[i], {"side", "segment", "expression", "samples"}, where);
      triple.lambda.densities.push_back({parse_side(dens[i], where), parse_segment(dens[i], where)});
    }
  }
  if (root.contains("nu")) {
    const json& nu = root.at("nu");
    check_keys(nu, {"atoms", "densities"}, "nu");
    const json& atoms = array_field(nu, "atoms", "nu");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string where = "nu.atoms[" + std::to_string(i) + "]";
      check_keys(atoms[i], {"side", "s", "t", "mass"}, where);
      triple.nu.atoms.push_back({parse_side(atoms[i], where), number(atoms[i], "s", where, 0.0),
                                 number(atoms[i], "t", where), number(atoms[i], "mass", where)});
    }
    const json& dens = array_field(nu, "densities", "nu");
    for (std::size_t i = 0; i < dens.size(); ++i) {
      const std::string where = "nu.densities[" + std::to_string(i) + "]";
      check_keys(dens[i], {"side", "segment", "expression", "samples"}, where);
      triple.nu.densities.push_back({parse_side(dens[i], where), parse_segment(dens[i], where)});
    }
  }
  return triple;
}

}  // namespace

TraceTriple parse_triple(const std::string& text, const Domain& domain) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what(), line_of(text, e.byte));
  }
  TraceTriple triple = triple_from_json(root);
  validate(triple, domain);
  return triple;
}

std::string serialize_triple(const TraceTriple& t) {
  json root;
  root["schema"] = kSchemaTag;
  root["horizon"] = t.horizon;
  json mu;
  mu["blowup_exponent"] = t.mu.blowup_exponent;
  mu["atoms"] = json::array();
  for (const InteriorAtom& a : t.mu.atoms) mu["atoms"].push_back({{"x", a.location.x}, {"y", a.location.y}, {"mass", a.mass}});
  mu["densities"] = json::array();
  for (const DensitySegment& s : t.mu.densities) mu["densities"].push_back(segment_json(s));
  root["mu"] = mu;

  json lam;
  lam["atoms"] = json::array();
  for (const CornerAtom& a : t.lambda.atoms)
    lam["atoms"].push_back({{"side", to_string(a.side)}, {"s", a.param}, {"mass", a.mass}});
  lam["densities"] = json::array();
  for (const SideDensity& sd : t.lambda.densities) {
    json j = segment_json(sd.density);
    j["side"] = to_string(sd.side);
    lam["densities"].push_back(j);
  }
  root["lambda"] = lam;

  json nu;
  nu["atoms"] = json::array();
  for (const LateralAtom& a : t.nu.atoms)
    nu["atoms"].push_back({{"side", to_string(a.side)}, {"s", a.param}, {"t", a.time}, {"mass", a.mass}});
  nu["densities"] = json::array();
  for (const SideDensity& sd : t.nu.densities) {
    json j = segment_json(sd.density);
    j["side"] = to_string(sd.side);
    nu["densities"].push_back(j);
  }
  root["nu"] = nu;
  return root.dump(2) + "\n";
}

}  // namespace heattrace
