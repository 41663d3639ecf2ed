#include "heattrace/representation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "heattrace/errors.hpp"
#include "heattrace/parallel.hpp"

namespace heattrace {

SolutionField::SolutionField(Domain domain, double horizon, Evaluator evaluator, std::vector<double> time_hints,
                             double earliest_time)
    : domain_(std::move(domain)),
      horizon_(horizon),
      evaluator_(std::move(evaluator)),
      time_hints_(std::move(time_hints)),
      earliest_time_(earliest_time) {
  std::sort(time_hints_.begin(), time_hints_.end());
  time_hints_.erase(std::unique(time_hints_.begin(), time_hints_.end()), time_hints_.end());
}

SolutionField SolutionField::mutated(std::function<double(Point, double, double)> transform) const {
  Evaluator base = evaluator_;
  return SolutionField(domain_, horizon_,
                       [base, transform](Point x, double t) {
                         FieldValue v = base(x, t);
                         v.value = transform(x, t, v.value);
                         return v;
                       },
                       time_hints_, earliest_time_);
}

namespace {

void check_point_time(const HeatKernel& kernel, Point x, double t) {
  if (!(t > 0.0)) throw InvalidArgument("representation: t must be positive");
  if (!kernel.domain().contains(x)) throw InvalidArgument("representation: x must lie inside the domain");
}

// Breakpoints where the integrand G(x,t;., 0) rho changes scale.
std::vector<double> peak_cuts(double x, double width, double lo, double hi) {
  std::vector<double> cuts;
  for (double c : {x - 6.0 * width, x - 2.0 * width, x, x + 2.0 * width, x + 6.0 * width})
    if (c > lo && c < hi) cuts.push_back(c);
  return cuts;
}

QuadratureResult integrate_segment_with_peak(const std::function<double(double)>& f, double lo, double hi,
                                             double x, double width, double tol, double alpha,
                                             bool touches_left, bool touches_right) {
  if (alpha <= 0.0 || (!touches_left && !touches_right)) {
    const std::vector<double> cuts = peak_cuts(x, width, lo, hi);
    return integrate_adaptive(f, lo, hi, tol, cuts);
  }
  // Split at the peak; grade toward the boundary ends.
  const double mid = std::clamp(x, lo, hi);
  QuadratureResult total;
  if (mid > lo) {
    total += touches_left ? integrate_graded(f, lo, mid, alpha, 0.5 * tol, GradedEnd::Left)
                          : integrate_adaptive(f, lo, mid, 0.5 * tol);
  }
  if (hi > mid) {
    total += touches_right ? integrate_graded(f, mid, hi, alpha, 0.5 * tol, GradedEnd::Right)
                           : integrate_adaptive(f, mid, hi, 0.5 * tol);
  }
  return total;
}

// Largest kernel error and largest |weight| seen by one quadrature; their
// product times the carrier length bounds the kernel contribution to the
// error of int K rho.
struct KernelErrorTracker {
  double kernel = 0.0;
  double weight = 0.0;

  double operator()(const KernelValue& k, double w) {
    kernel = std::max(kernel, k.error);
    weight = std::max(weight, std::abs(w));
    return k.value * w;
  }
  double bound(double length) const { return kernel * weight * length; }
};

// Distance from x to the line carrying the given side.
double distance_to_side(const Domain& d, Point x, Side side) {
  switch (side) {
    case Side::Left: return x.x - d.a();
    case Side::Right: return d.b() - x.x;
    case Side::Bottom: return x.y - d.c();
    case Side::Top: return d.d() - x.y;
  }
  return 0.0;
}

}  // namespace

FieldValue evaluate_bottom_term(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                                RepresentationOptions options) {
  check_point_time(kernel, x, t);
  const Domain& d = kernel.domain();
  const InteriorMeasure& mu = triple.mu;
  FieldValue out;
  if (!mu.atoms.empty() && t < options.atomic_time_floor)
    throw InvalidArgument("evaluate_bottom_term: t is below the floor for atomic initial data");
  for (const InteriorAtom& a : mu.atoms) {
    const KernelValue g = kernel.green_lag(x, a.location, t);
    out.value += a.mass * g.value;
    out.error += a.mass * g.error;
  }
  if (mu.densities.empty()) return out;
  const double tol = 0.5 * options.tolerance / static_cast<double>(mu.densities.size());
  const double width = std::sqrt(2.0 * t);
  for (const DensitySegment& seg : mu.densities) {
    QuadratureResult r;
    if (d.kind() == DomainKind::Interval) {
      const double touch = 1e-12 * d.width();
      const bool left = seg.lo <= d.a() + touch;
      const bool right = seg.hi >= d.b() - touch;
      const bool blowup = mu.blowup_exponent > 0.0 && (left || right);
      KernelErrorTracker tracker;
      auto f = [&](double y) {
        Variables v;
        v.x = y;
        v.delta = std::min(y - d.a(), d.b() - y);
        return tracker(kernel.green_lag(x, {y, 0.0}, t), seg(y, v));
      };
      // G vanishes linearly at the ends, absorbing one power of the blowup.
      r = integrate_segment_with_peak(f, seg.lo, seg.hi, x.x, width, tol, std::max(mu.blowup_exponent - 1.0, 0.0),
                                      left, right);
      if (blowup) {
        // The sine-series tail of G carries a factor |sin ky| <= k delta(y),
        // so its error is bounded by the normal-kernel error times int delta rho.
        InteriorMeasure part;
        part.blowup_exponent = mu.blowup_exponent;
        part.densities.push_back(seg);
        const double weighted = weighted_mass(part, d, {1e-6, 65}).value;
        const double normal_error = kernel.normal_lag(x, d.boundary_point(Side::Left, 0.0), t).error +
                                    kernel.normal_lag(x, d.boundary_point(Side::Right, 0.0), t).error;
        r.error_estimate += normal_error * weighted;
      } else {
        r.error_estimate += tracker.bound(seg.hi - seg.lo);
      }
    } else {
      double inner_error = 0.0;
      KernelErrorTracker tracker;
      auto outer = [&](double xi) {
        auto inner = [&](double eta) {
          Variables v;
          v.x = xi;
          v.y = eta;
          v.delta = d.delta({xi, eta});
          return tracker(kernel.green_lag(x, {xi, eta}, t), seg(xi, v));
        };
        const std::vector<double> cuts = peak_cuts(x.y, width, d.c(), d.d());
        const QuadratureResult q = integrate_adaptive(inner, d.c(), d.d(), 0.25 * tol / (seg.hi - seg.lo), cuts);
        inner_error = std::max(inner_error, q.error_estimate);
        return q.value;
      };
      const std::vector<double> cuts = peak_cuts(x.x, width, seg.lo, seg.hi);
      r = integrate_adaptive(outer, seg.lo, seg.hi, 0.5 * tol, cuts);
      r.error_estimate += inner_error * (seg.hi - seg.lo) + tracker.bound((seg.hi - seg.lo) * d.height());
    }
    out.value += r.value;
    out.error += r.error_estimate;
  }
  return out;
}

FieldValue evaluate_corner_term(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                                RepresentationOptions options) {
  check_point_time(kernel, x, t);
  const Domain& d = kernel.domain();
  FieldValue out;
  for (const CornerAtom& a : triple.lambda.atoms) {
    const KernelValue n = kernel.normal_lag(x, d.boundary_point(a.side, a.param), t);
    out.value += a.mass * n.value;
    out.error += a.mass * n.error;
  }
  if (triple.lambda.densities.empty()) return out;
  const double tol = 0.1 * options.tolerance / static_cast<double>(triple.lambda.densities.size());
  for (const SideDensity& sd : triple.lambda.densities) {
    KernelErrorTracker tracker;
    auto f = [&](double s) {
      Variables v;
      v.s = s;
      return tracker(kernel.normal_lag(x, d.boundary_point(sd.side, s), t), sd.density(s, v));
    };
    const QuadratureResult r = integrate_adaptive(f, sd.density.lo, sd.density.hi, tol);
    out.value += r.value;
    out.error += r.error_estimate + tracker.bound(sd.density.hi - sd.density.lo);
  }
  return out;
}

FieldValue evaluate_lateral_term(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                                 RepresentationOptions options) {
  check_point_time(kernel, x, t);
  const Domain& d = kernel.domain();
  FieldValue out;
  for (const LateralAtom& a : triple.nu.atoms) {
    if (!(a.time < t)) continue;
    const KernelValue n = kernel.normal_lag(x, d.boundary_point(a.side, a.param), t - a.time);
    out.value += a.mass * n.value;
    out.error += a.mass * n.error;
  }
  if (triple.nu.densities.empty()) return out;
  const double tol = 0.4 * options.tolerance / static_cast<double>(triple.nu.densities.size());
  for (const SideDensity& sd : triple.nu.densities) {
    const double lo = std::max(sd.density.lo, 0.0);
    const double hi = std::min(sd.density.hi, t);
    if (!(hi > lo)) continue;
    LateralProfile profile;
    profile.dimension = 1;
    profile.distance = distance_to_side(d, x, sd.side);
    profile.decay = HeatKernel::kEnvelopeDecay;
    Variables base;
    base.s = d.kind() == DomainKind::Interval ? 0.0 : 0.5 * d.side_length(sd.side);
    profile.amplitude = HeatKernel::kEnvelopeAmplitude * 1.5 * sampled_bound(sd.density, lo, hi, base, 129);
    std::vector<double> cuts;
    if (hi < t) cuts.push_back(hi);
    QuadratureResult r;
    KernelErrorTracker tracker;
    if (d.kind() == DomainKind::Interval) {
      const BoundaryPoint z = d.boundary_point(sd.side, 0.0);
      auto f = [&](double sigma) {
        const double tau = t - sigma;
        if (tau < lo || tau > hi) return 0.0;
        Variables v;
        v.t = tau;
        return tracker(kernel.normal_lag(x, z, sigma), sd.density(tau, v));
      };
      r = integrate_lateral_time(f, lo, t, profile, tol, cuts);
    } else {
      const double len = d.side_length(sd.side);
      double inner_error = 0.0;
      auto f = [&](double sigma) {
        const double tau = t - sigma;
        if (tau < lo || tau > hi) return 0.0;
        auto g = [&](double s) {
          Variables v;
          v.t = tau;
          v.s = s;
          return tracker(kernel.normal_lag(x, d.boundary_point(sd.side, s), sigma), sd.density(tau, v));
        };
        const QuadratureResult q = integrate_adaptive(g, 0.0, len, 0.1 * tol / (t - lo));
        inner_error = std::max(inner_error, q.error_estimate);
        return q.value;
      };
      r = integrate_lateral_time(f, lo, t, profile, 0.5 * tol, cuts);
      r.error_estimate += inner_error * (t - lo);
    }
    const double carrier = d.kind() == DomainKind::Interval ? hi - lo : (hi - lo) * d.side_length(sd.side);
    out.value += r.value;
    out.error += r.error_estimate + tracker.bound(carrier);
  }
  return out;
}

FieldValue evaluate_solution(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                             RepresentationOptions options) {
  const FieldValue b = evaluate_bottom_term(triple, kernel, x, t, options);
  const FieldValue c = evaluate_corner_term(triple, kernel, x, t, options);
  const FieldValue l = evaluate_lateral_term(triple, kernel, x, t, options);
  return {b.value + c.value + l.value, b.error + c.error + l.error};
}

SolutionField make_solution_field(const TraceTriple& triple, const HeatKernel& kernel,
                                  RepresentationOptions options) {
  std::vector<double> hints;
  for (const LateralAtom& a : triple.nu.atoms) hints.push_back(a.time);
  for (const SideDensity& sd : triple.nu.densities) {
    hints.push_back(sd.density.lo);
    hints.push_back(sd.density.hi);
  }
  return SolutionField(
      kernel.domain(), triple.horizon,
      [triple, kernel, options](Point x, double t) { return evaluate_solution(triple, kernel, x, t, options); },
      hints, triple.mu.atoms.empty() ? 0.0 : options.atomic_time_floor);
}

InteriorParts interior_representation(const SolutionField& u, const HeatKernel& kernel, double epsilon,
                                      double s, Point x, double t, double tolerance) {
  const Domain& d = kernel.domain();
  if (d.kind() != DomainKind::Interval) throw InvalidArgument("interior_representation: intervals only");
  if (!(epsilon > 0.0) || epsilon > d.epsilon0())
    throw InvalidArgument("interior_representation: epsilon must lie in (0, epsilon0]");
  if (!(s > 0.0 && s < t && t < u.horizon() + 1e-15))
    throw InvalidArgument("interior_representation: need 0 < s < t < T");
  const HeatKernel ke = kernel.shrunken(epsilon);
  const Domain& de = ke.domain();
  if (!de.contains(x)) throw InvalidArgument("interior_representation: x must lie in Omega_eps");

  InteriorParts parts;
  const double lag = t - s;
  KernelErrorTracker bottom_tracker;
  auto bottom = [&](double y) { return bottom_tracker(ke.green_lag(x, {y, 0.0}, lag), u.value({y, 0.0}, s)); };
  const std::vector<double> cuts = peak_cuts(x.x, std::sqrt(2.0 * lag), de.a(), de.b());
  const QuadratureResult qb = integrate_adaptive(bottom, de.a(), de.b(), 0.5 * tolerance, cuts);
  parts.bottom = qb.value;
  parts.bottom_error = qb.error_estimate + bottom_tracker.bound(de.b() - de.a());

  for (Side side : {Side::Left, Side::Right}) {
    const BoundaryPoint z = de.boundary_point(side, 0.0);
    double bound = 0.0;
    for (int i = 0; i <= 32; ++i) bound = std::max(bound, std::abs(u.value(z.location, s + (t - s) * i / 32.0)));
    LateralProfile profile{1, std::abs(x.x - z.location.x), HeatKernel::kEnvelopeAmplitude * 2.0 * bound,
                           HeatKernel::kEnvelopeDecay};
    // After each non-smooth time the data on the shrunken boundary carries a
    // layer of width ~ eps^2.
    std::vector<double> hints;
    for (double h : u.time_hints())
      for (double f : {0.0, 0.0625, 0.25, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0}) {
        const double c = h + f * epsilon * epsilon;
        if (c > s && c < t) hints.push_back(c);
      }
    KernelErrorTracker tracker;
    auto lateral = [&](double sigma) { return tracker(ke.normal_lag(x, z, sigma), u.value(z.location, t - sigma)); };
    const QuadratureResult ql = integrate_lateral_time(lateral, s, t, profile, 0.25 * tolerance, hints);
    parts.lateral += ql.value;
    parts.lateral_error += ql.error_estimate + tracker.bound(t - s);
  }
  return parts;
}

FieldValue propagate(const SolutionField& u, const HeatKernel& kernel, double s, Point x, double t,
                     double tolerance) {
  const Domain& d = kernel.domain();
  if (d.kind() != DomainKind::Interval) throw InvalidArgument("propagate: intervals only");
  if (!(s < t)) throw InvalidArgument("propagate: need s < t");
  const double lag = t - s;
  KernelErrorTracker tracker;
  auto f = [&](double y) { return tracker(kernel.green_lag(x, {y, 0.0}, lag), u.value({y, 0.0}, s)); };
  const std::vector<double> cuts = peak_cuts(x.x, std::sqrt(2.0 * lag), d.a(), d.b());
  const QuadratureResult q = integrate_adaptive(f, d.a(), d.b(), tolerance, cuts);
  return {q.value, q.error_estimate + tracker.bound(d.b() - d.a())};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n <= 0) return v;
  if (n == 1) return {lo};
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v.push_back(i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1));
  return v;
}

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

}  // namespace

std::vector<double> GridSpec::xs() const { return linspace(x_lo, x_hi, nx); }
std::vector<double> GridSpec::ys() const { return linspace(y_lo, y_hi, ny); }
std::vector<double> GridSpec::ts() const { return linspace(t_lo, t_hi, nt); }
std::size_t GridSpec::size() const {
  if (nx <= 0 || nt <= 0 || ny <= 0) return 0;
  return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nt);
}

void validate_grid(const GridSpec& spec, const Domain& d, double horizon) {
  if (spec.nx < 0 || spec.nt < 0 || spec.ny < 0) throw InvalidArgument("grid: negative node counts");
  if (spec.size() == 0) return;
  if (!(spec.t_lo > 0.0) || spec.t_hi > horizon || spec.t_lo > spec.t_hi)
    throw InvalidArgument("grid: times must lie in (0, T]");
  const bool rect = d.kind() == DomainKind::Rectangle;
  for (double x : spec.xs())
    for (double y : rect ? spec.ys() : std::vector<double>{0.0})
      if (!d.contains({x, y})) throw InvalidArgument("grid: nodes must lie inside the domain");
}

GridField evaluate_on_grid(const SolutionField& field, const GridSpec& spec, unsigned threads) {
  validate_grid(spec, field.domain(), field.horizon());
  GridField g;
  g.spec = spec;
  const bool rect = field.domain().kind() == DomainKind::Rectangle;
  const std::vector<double> xs = spec.xs();
  const std::vector<double> ys = rect ? spec.ys() : std::vector<double>{0.0};
  for (double t : spec.ts())
    for (double y : ys)
      for (double x : xs) {
        g.points.push_back({x, y});
        g.times.push_back(t);
      }
  g.values.assign(g.points.size(), 0.0);
  g.errors.assign(g.points.size(), 0.0);
  parallel_for(
      g.points.size(),
      [&](std::size_t i) {
        const FieldValue v = field(g.points[i], g.times[i]);
        g.values[i] = v.value;
        g.errors[i] = v.error;
      },
      threads);
  return g;
}

void write_grid_csv(const GridField& grid, bool with_y, std::ostream& out) {
  out << (with_y ? "x,y,t,u,err\n" : "x,t,u,err\n");
  std::string line;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    line.clear();
    append_number(line, grid.points[i].x);
    line += ',';
    if (with_y) {
      append_number(line, grid.points[i].y);
      line += ',';
    }
    append_number(line, grid.times[i]);
    line += ',';
    append_number(line, grid.values[i]);
    line += ',';
    append_number(line, grid.errors[i]);
    line += '\n';
    out << line;
  }
}

}  // namespace heattrace
