#include "heattrace/traces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "heattrace/errors.hpp"
#include "heattrace/parallel.hpp"
#include "json.hpp"

namespace heattrace {

namespace {

void require_interval(const Domain& d, const char* op) {
  if (d.kind() != DomainKind::Interval) throw InvalidArgument(std::string(op) + ": intervals only");
}

// Cubic bump q^3 on (lo, hi) with q = 4 (v - lo)(hi - v) / (hi - lo)^2, and
// its first two derivatives.
struct Bump {
  double lo = 0.0;
  double hi = 1.0;

  double q(double v) const { return 4.0 * (v - lo) * (hi - v) / ((hi - lo) * (hi - lo)); }
  double dq(double v) const { return 4.0 * (lo + hi - 2.0 * v) / ((hi - lo) * (hi - lo)); }
  double value(double v) const {
    if (v <= lo || v >= hi) return 0.0;
    const double a = q(v);
    return a * a * a;
  }
  double d1(double v) const {
    if (v <= lo || v >= hi) return 0.0;
    const double a = q(v);
    return 3.0 * a * a * dq(v);
  }
  double d2(double v) const {
    if (v <= lo || v >= hi) return 0.0;
    const double a = q(v);
    const double b = dq(v);
    return 6.0 * a * b * b - 24.0 * a * a / ((hi - lo) * (hi - lo));
  }
};

int side_index(Side side) { return static_cast<int>(side); }

// Breakpoints clustering at each non-smooth time of the field: the solution
// near the boundary develops a layer of width ~ eps^2 after such a time.
std::vector<double> layer_breakpoints(const std::vector<double>& hints, double lo, double hi, double eps) {
  std::vector<double> cuts;
  for (double h : hints) {
    if (h >= lo && h < hi) {
      if (h > lo) cuts.push_back(h);
      for (double f = 0.0625; f <= 4096.0; f *= 4.0) {
        const double c = h + f * eps * eps;
        if (c > lo && c < hi) cuts.push_back(c);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Polynomial extrapolation of (x_i, y_i) to x = 0 (Neville).
double neville_at_zero(const std::vector<double>& x, std::vector<double> y) {
  const std::size_t n = x.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = n - 1; i >= k; --i) {
      y[i] = (x[i] * y[i - 1] - x[i - k] * y[i]) / (x[i] - x[i - k]);
      if (i == k) break;
    }
  return y[n - 1];
}

}  // namespace

// ---------------------------------------------------------------------------
// Test functions and schedules

TestFunction TestFunction::sine_mode(const Domain& d, int k) {
  require_interval(d, "TestFunction::sine_mode");
  const double a = d.a();
  const double w = k * std::numbers::pi / d.width();
  TestFunction f;
  f.value = [=](Point p) { return std::sin(w * (p.x - a)); };
  f.gradient = [=](Point p) { return Point{w * std::cos(w * (p.x - a)), 0.0}; };
  f.laplacian = [=](Point p) { return -w * w * std::sin(w * (p.x - a)); };
  f.normal_derivative = [=](const BoundaryPoint& z) {
    return z.side == Side::Left ? w : -w * std::cos(w * (z.location.x - a));
  };
  return f;
}

TestFunction TestFunction::bubble(const Domain& d) {
  require_interval(d, "TestFunction::bubble");
  const double a = d.a(), b = d.b(), len = d.width();
  TestFunction f;
  f.value = [=](Point p) { return (p.x - a) * (b - p.x); };
  f.gradient = [=](Point p) { return Point{a + b - 2.0 * p.x, 0.0}; };
  f.laplacian = [](Point) { return -2.0; };
  f.normal_derivative = [=](const BoundaryPoint&) { return len; };
  return f;
}

BoundaryTestFunction BoundaryTestFunction::time_bump(const Domain& d, double t_lo, double t_hi,
                                                     std::vector<double> amplitudes, double corner_gap) {
  if (!(t_hi > t_lo) || !(t_lo >= 0.0)) throw InvalidArgument("time_bump: need 0 <= t_lo < t_hi");
  const std::size_t sides = d.sides().size();
  if (amplitudes.size() != sides) throw InvalidArgument("time_bump: one amplitude per boundary side");
  std::vector<Bump> along(4);
  if (d.kind() == DomainKind::Rectangle) {
    for (Side s : d.sides()) {
      const double len = d.side_length(s);
      if (!(2.0 * corner_gap < len)) throw InvalidArgument("time_bump: corner gap leaves no support");
      along[side_index(s)] = Bump{corner_gap, len - corner_gap};
    }
  }
  const bool rect = d.kind() == DomainKind::Rectangle;
  const Bump time{t_lo, t_hi};
  BoundaryTestFunction h;
  h.t_lo = t_lo;
  h.t_hi = t_hi;
  h.value = [=](const BoundaryPoint& z, double t) {
    const double amp = amplitudes[side_index(z.side)];
    return amp * time.value(t) * (rect ? along[side_index(z.side)].value(z.param) : 1.0);
  };
  h.time_derivative = [=](const BoundaryPoint& z, double t) {
    const double amp = amplitudes[side_index(z.side)];
    return amp * time.d1(t) * (rect ? along[side_index(z.side)].value(z.param) : 1.0);
  };
  h.tangential_second = [=](const BoundaryPoint& z, double t) {
    if (!rect) return 0.0;
    const double amp = amplitudes[side_index(z.side)];
    return amp * time.value(t) * along[side_index(z.side)].d2(z.param);
  };
  return h;
}

ExtractionSchedule ExtractionSchedule::geometric(double eps_first, int eps_levels, double t_first, int t_levels) {
  ExtractionSchedule s;
  for (int j = 0; j < eps_levels; ++j) s.epsilons.push_back(std::ldexp(eps_first, -j));
  for (int j = 0; j < t_levels; ++j) s.times.push_back(std::ldexp(t_first, -j));
  return s;
}

void ExtractionSchedule::validate(const Domain& d, double horizon) const {
  auto decreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) return false;
      if (i > 0 && !(v[i] < v[i - 1])) return false;
    }
    return true;
  };
  if (!decreasing(epsilons)) throw InvalidArgument("schedule: epsilons must be positive and strictly decreasing");
  if (!decreasing(times)) throw InvalidArgument("schedule: times must be positive and strictly decreasing");
  if (!epsilons.empty() && epsilons.front() > d.epsilon0())
    throw InvalidArgument("schedule: epsilons must not exceed epsilon0");
  if (!times.empty() && !(times.front() < horizon)) throw InvalidArgument("schedule: times must lie in (0, T)");
  if (extrapolation_levels < 1) throw InvalidArgument("schedule: extrapolation needs at least one level");
}

LimitEstimate extrapolate_to_zero(std::vector<double> abscissae, std::vector<double> samples, int levels,
                                  bool richardson, double tolerance) {
  if (abscissae.size() != samples.size() || abscissae.empty())
    throw InvalidArgument("extrapolate_to_zero: need matching, nonempty samples");
  LimitEstimate out;
  out.abscissae = abscissae;
  out.samples = samples;
  const std::size_t n = abscissae.size();
  const std::size_t max_points = richardson ? std::min<std::size_t>(n, static_cast<std::size_t>(std::max(levels, 1))) : 1;
  // Degree p uses the p + 1 finest points; its error estimate is the change
  // when the window moves one level coarser. The degree with the smallest
  // estimate wins, so exponentially flat sequences keep the finest sample.
  auto window = [&](std::size_t points, std::size_t shift) {
    const auto last = static_cast<std::ptrdiff_t>(n - shift);
    const auto first = last - static_cast<std::ptrdiff_t>(points);
    return neville_at_zero(std::vector<double>(abscissae.begin() + first, abscissae.begin() + last),
                           std::vector<double>(samples.begin() + first, samples.begin() + last));
  };
  out.value = samples.back();
  out.residual = n >= 2 ? std::abs(samples[n - 1] - samples[n - 2]) : 0.0;
  out.order = 0;
  for (std::size_t points = 2; points <= max_points && points + 1 <= n; ++points) {
    const double value = window(points, 0);
    const double estimate = std::abs(value - window(points, 1));
    if (estimate < out.residual) {
      out.value = value;
      out.residual = estimate;
      out.order = static_cast<int>(points - 1);
    }
  }
  if (max_points == n && n >= 2 && richardson) {
    // All points in use: compare with one degree less on the finest points.
    const double value = window(n, 0);
    const double estimate = std::abs(value - window(n - 1, 0));
    if (estimate < out.residual) {
      out.value = value;
      out.residual = estimate;
      out.order = static_cast<int>(n - 1);
    }
  }
  out.converged = std::isfinite(out.value) && out.residual <= tolerance * (1.0 + std::abs(out.value));
  return out;
}

// ---------------------------------------------------------------------------
// Initial trace

LimitEstimate pair_initial_trace(const SolutionField& u, const TestFunction& eta, const ExtractionSchedule& schedule,
                                 double tolerance) {
  const Domain& d = u.domain();
  require_interval(d, "pair_initial_trace");
  schedule.validate(d, u.horizon());
  if (schedule.times.empty()) throw InvalidArgument("pair_initial_trace: empty time schedule");
  std::vector<double> cuts;
  for (int i = 1; i < 16; ++i) cuts.push_back(d.a() + d.width() * i / 16.0);
  std::vector<double> values(schedule.times.size());
  parallel_for(values.size(), [&](std::size_t j) {
    const double t = schedule.times[j];
    auto f = [&](double x) { return eta.value({x}) * u.value({x}, t); };
    values[j] = integrate_adaptive(f, d.a(), d.b(), tolerance, cuts).value;
  });
  // Corner mass contributes a sqrt(t) term, so the abscissa is sqrt(t).
  std::vector<double> roots;
  for (double t : schedule.times) roots.push_back(std::sqrt(t));
  LimitEstimate out =
      extrapolate_to_zero(std::move(roots), values, schedule.extrapolation_levels, schedule.richardson, 1e-4);
  out.name = "initial pairing";
  return out;
}

// ---------------------------------------------------------------------------
// Green potential and H

FieldValue green_potential(const SolutionField& u, double t, Point x, double tolerance) {
  const Domain& d = u.domain();
  require_interval(d, "green_potential");
  if (!(t > 0.0 && t < u.horizon() + 1e-15)) throw InvalidArgument("green_potential: t must lie in (0, T)");
  if (!d.contains(x)) throw InvalidArgument("green_potential: x must lie inside the interval");
  const double a = d.a(), b = d.b(), len = d.width();
  auto left = [&](double y) { return (y - a) * u.value({y}, t); };
  auto right = [&](double y) { return (b - y) * u.value({y}, t); };
  const QuadratureResult l = integrate_adaptive(left, a, x.x, 0.5 * tolerance);
  const QuadratureResult r = integrate_adaptive(right, x.x, b, 0.5 * tolerance);
  return {(b - x.x) / len * l.value + (x.x - a) / len * r.value, l.error_estimate + r.error_estimate};
}

std::vector<double> green_potential_grid(const SolutionField& u, double t, int panels, double tolerance) {
  const Domain& d = u.domain();
  require_interval(d, "green_potential_grid");
  if (panels < 2) throw InvalidArgument("green_potential_grid: need at least two panels");
  const double a = d.a(), b = d.b(), len = d.width();
  const std::size_t n = static_cast<std::size_t>(panels);
  std::vector<double> first(n), second(n);  // int (y - a) u and int (b - y) u per panel
  parallel_for(n, [&](std::size_t i) {
    const double lo = a + len * static_cast<double>(i) / panels;
    const double hi = i + 1 == n ? b : a + len * static_cast<double>(i + 1) / panels;
    std::map<double, double> memo;
    auto uval = [&](double y) {
      auto it = memo.find(y);
      if (it != memo.end()) return it->second;
      const double v = u.value({y}, t);
      memo.emplace(y, v);
      return v;
    };
    first[i] = integrate_adaptive([&](double y) { return (y - a) * uval(y); }, lo, hi, tolerance / panels).value;
    second[i] = integrate_adaptive([&](double y) { return (b - y) * uval(y); }, lo, hi, tolerance / panels).value;
  });
  std::vector<double> w(n + 1, 0.0);
  double below = 0.0;
  double above = std::accumulate(second.begin(), second.end(), 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    below += first[i - 1];
    above -= second[i - 1];
    const double x = a + len * static_cast<double>(i) / panels;
    w[i] = (b - x) / len * below + (x - a) / len * above;
  }
  return w;
}

FieldValue H_function(const SolutionField& u, const LateralMeasure& nu, double t1, Point x, double t,
                      double tolerance) {
  const Domain& d = u.domain();
  require_interval(d, "H_function");
  if (!(t < t1 && t1 < u.horizon())) throw InvalidArgument("H_function: need t < T1 < T");
  const FieldValue w = green_potential(u, t, x, tolerance);
  const EllipticGreen elliptic(d);
  MeasureOptions mo;
  mo.tolerance = tolerance;
  // nu(side x (t, T1)) per side.
  double lateral = 0.0;
  double error = 0.0;
  for (Side side : d.sides()) {
    LateralMeasure part;
    part.horizon = nu.horizon;
    for (const LateralAtom& a : nu.atoms)
      if (a.side == side) part.atoms.push_back(a);
    for (const SideDensity& s : nu.densities)
      if (s.side == side) part.densities.push_back(s);
    const QuadratureResult upper = lateral_mass(part, d, t1, mo);
    const QuadratureResult lower = lateral_mass(part, d, t, mo);
    const double martin = elliptic.martin(x, d.boundary_point(side, 0.0));
    lateral += martin * (upper.value - lower.value);
    error += martin * (upper.error_estimate + lower.error_estimate);
  }
  return {w.value + lateral, w.error + error};
}

// ---------------------------------------------------------------------------
// Riesz-Martin decomposition

RieszMartinResult riesz_martin_decompose_1d(const Domain& d, const std::vector<double>& w, RieszMartinOptions options) {
  require_interval(d, "riesz_martin_decompose_1d");
  if (w.size() < 9) throw InvalidArgument("riesz_martin_decompose_1d: need at least 8 panels");
  const std::size_t n = w.size() - 1;
  const double h = d.width() / static_cast<double>(n);
  auto node = [&](std::size_t i) { return d.a() + d.width() * static_cast<double>(i) / static_cast<double>(n); };

  RieszMartinResult out;
  std::vector<double> dens(n + 1, 0.0);
  for (std::size_t i = 2; i + 2 <= n; ++i) dens[i] = -(w[i - 1] - 2.0 * w[i] + w[i + 1]) / (h * h);

  double scale = 1.0;
  for (std::size_t i = 2; i + 2 <= n; ++i) scale = std::max(scale, std::abs(dens[i]));
  out.most_negative = 0.0;
  for (std::size_t i = 2; i + 2 <= n; ++i) out.most_negative = std::min(out.most_negative, dens[i]);
  if (out.most_negative < -options.tolerance * scale)
    throw AdmissibilityError("riesz_martin_decompose_1d: w* is not superharmonic (second-difference density " +
                             std::to_string(out.most_negative) + ")");

  // Atoms: adjacent spikes well above the neighbouring median.
  std::vector<bool> used(n + 1, false);
  for (std::size_t i = 2; i + 2 <= n; ++i) {
    if (used[i]) continue;
    std::vector<double> neighbours;
    for (std::size_t j = (i >= 5 ? i - 4 : 2); j <= std::min(n - 2, i + 5); ++j)
      if (j + 1 < i || j > i + 2) neighbours.push_back(dens[j]);
    const double background = std::max(median(neighbours), 0.0);
    const bool spike = dens[i] > options.spike_ratio * background && (dens[i] - background) * h > options.spike_floor;
    if (!spike) continue;
    const std::size_t last = i + 1 + 2 <= n && dens[i + 1] > options.spike_ratio * background ? i + 1 : i;
    double mass = 0.0, moment = 0.0;
    for (std::size_t j = i; j <= last; ++j) {
      const double excess = (dens[j] - background) * h;
      mass += excess;
      moment += excess * node(j);
      dens[j] = background;
      used[j] = true;
    }
    out.mu.atoms.push_back({{moment / mass}, mass});
  }

  // Ends of the density by linear extrapolation from the interior nodes.
  dens[1] = 2.0 * dens[2] - dens[3];
  dens[0] = 3.0 * dens[2] - 2.0 * dens[3];
  dens[n - 1] = 2.0 * dens[n - 2] - dens[n - 3];
  dens[n] = 3.0 * dens[n - 2] - 2.0 * dens[n - 3];
  out.density = dens;

  DensitySegment seg;
  seg.lo = d.a();
  seg.hi = d.b();
  seg.samples.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) seg.samples[i] = std::max(dens[i], 0.0);
  out.mu.densities.push_back(seg);

  // The potential part vanishes at the boundary, so lambda is the boundary
  // value of w* on each side.
  const int m = std::max(2, options.end_nodes);
  std::vector<double> xl, yl, xr, yr;
  for (int k = m; k >= 1; --k) {
    xl.push_back(k * h);
    yl.push_back(w[static_cast<std::size_t>(k)]);
    xr.push_back(k * h);
    yr.push_back(w[n - static_cast<std::size_t>(k)]);
  }
  out.lambda_left = neville_at_zero(xl, yl);
  out.lambda_right = neville_at_zero(xr, yr);
  if (out.lambda_left > 0.0) out.lambda.atoms.push_back({Side::Left, 0.0, out.lambda_left});
  if (out.lambda_right > 0.0) out.lambda.atoms.push_back({Side::Right, 0.0, out.lambda_right});
  return out;
}

// ---------------------------------------------------------------------------
// Lateral trace

namespace {

Point shrunken_point(const Domain& d, Side side, double eps) {
  return side == Side::Left ? Point{d.a() + eps} : Point{d.b() - eps};
}

double bin_integral(const SolutionField& u, Side side, double eps, double lo, double hi, double tol,
                    const std::function<double(double)>& weight) {
  const Point z = shrunken_point(u.domain(), side, eps);
  const std::vector<double> cuts = layer_breakpoints(u.time_hints(), lo, hi, eps);
  auto f = [&](double tau) { return u.value(z, tau) * weight(tau); };
  return integrate_adaptive(f, lo, hi, tol, cuts).value;
}

}  // namespace

LateralExtraction extract_lateral_shrinking(const SolutionField& u, const ExtractionSchedule& schedule,
                                            LateralExtractionOptions options) {
  const Domain& d = u.domain();
  require_interval(d, "extract_lateral_shrinking");
  schedule.validate(d, u.horizon());
  if (schedule.epsilons.empty()) throw InvalidArgument("extract_lateral_shrinking: empty epsilon schedule");
  if (options.bins < 1) throw InvalidArgument("extract_lateral_shrinking: need at least one bin");
  const double T = u.horizon();
  const double begin = options.t_begin_fraction * T, end = options.t_end_fraction * T;
  if (!(0.0 <= begin && begin < end && end < T)) throw InvalidArgument("extract_lateral_shrinking: bins must lie in (0, T)");

  const std::vector<Side> sides = d.sides();
  const std::size_t nb = static_cast<std::size_t>(options.bins), ne = schedule.epsilons.size();
  auto edge = [&](std::size_t k) { return k == nb ? end : begin + (end - begin) * static_cast<double>(k) / options.bins; };
  std::vector<double> raw(sides.size() * nb * ne);
  parallel_for(raw.size(), [&](std::size_t idx) {
    const std::size_t e = idx % ne, k = (idx / ne) % nb, s = idx / (ne * nb);
    raw[idx] = bin_integral(u, sides[s], schedule.epsilons[e], edge(k), edge(k + 1), options.tolerance,
                            [](double) { return 1.0; });
  });

  LateralExtraction out;
  out.measure.horizon = T;
  for (std::size_t s = 0; s < sides.size(); ++s) {
    std::vector<double> masses(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      LateralBin bin;
      bin.side = sides[s];
      bin.t_lo = edge(k);
      bin.t_hi = edge(k + 1);
      std::vector<double> samples(raw.begin() + static_cast<std::ptrdiff_t>((s * nb + k) * ne),
                                  raw.begin() + static_cast<std::ptrdiff_t>((s * nb + k + 1) * ne));
      bin.mass = extrapolate_to_zero(schedule.epsilons, samples, schedule.extrapolation_levels, schedule.richardson,
                                     1e-3);
      bin.mass.name = "lateral bin " + to_string(sides[s]) + " " + std::to_string(k);
      masses[k] = bin.mass.value;
      out.bins.push_back(bin);
    }
    for (std::size_t k = 0; k < nb; ++k) {
      std::vector<double> neighbours;
      for (std::size_t j = (k >= 3 ? k - 3 : 0); j <= std::min(nb - 1, k + 3); ++j)
        if (j != k) neighbours.push_back(masses[j]);
      const double background = std::max(median(neighbours), 0.0);
      double rate = std::max(masses[k], 0.0) / (edge(k + 1) - edge(k));
      if (nb >= 3 && masses[k] > options.spike_ratio * background && masses[k] - background > 1e-3) {
        out.measure.atoms.push_back({sides[s], 0.0, 0.5 * (edge(k) + edge(k + 1)), masses[k] - background});
        rate = background / (edge(k + 1) - edge(k));
      }
      DensitySegment seg;
      seg.lo = edge(k);
      seg.hi = edge(k + 1);
      seg.samples = {rate, rate};
      out.measure.densities.push_back({sides[s], seg});
    }
  }
  return out;
}

LimitEstimate lateral_pairing_shrinking(const SolutionField& u, const BoundaryTestFunction& h,
                                        const ExtractionSchedule& schedule, double tolerance) {
  const Domain& d = u.domain();
  require_interval(d, "lateral_pairing_shrinking");
  schedule.validate(d, u.horizon());
  if (!(h.t_lo > 0.0 && h.t_hi < u.horizon())) throw InvalidArgument("lateral_pairing_shrinking: h must vanish near 0 and T");
  const std::vector<Side> sides = d.sides();
  std::vector<double> values(schedule.epsilons.size() * sides.size());
  parallel_for(values.size(), [&](std::size_t idx) {
    const Side side = sides[idx % sides.size()];
    const double eps = schedule.epsilons[idx / sides.size()];
    const BoundaryPoint z = d.boundary_point(side, 0.0);
    values[idx] = bin_integral(u, side, eps, h.t_lo, h.t_hi, tolerance, [&](double tau) { return h.value(z, tau); });
  });
  std::vector<double> per_eps(schedule.epsilons.size(), 0.0);
  for (std::size_t idx = 0; idx < values.size(); ++idx) per_eps[idx / sides.size()] += values[idx];
  LimitEstimate out =
      extrapolate_to_zero(schedule.epsilons, per_eps, schedule.extrapolation_levels, schedule.richardson, 1e-3);
  out.name = "lateral pairing (shrinking)";
  return out;
}

FieldValue lateral_identity(const SolutionField& u, const BoundaryTestFunction& h, double tolerance) {
  const Domain& d = u.domain();
  if (!(h.t_lo > 0.0 && h.t_hi < u.horizon())) throw InvalidArgument("lateral_identity: h must vanish near 0 and T");
  const double plateau = d.plateau_distance();
  const bool rect = d.kind() == DomainKind::Rectangle;

  // phi(d) = delta_bar(d) chi(d) and its second derivative, in the distance.
  auto phi = [&](double dist) {
    const Profile db = d.distance_blend(dist);
    const Profile chi = d.normal_cutoff(dist);
    return std::pair{db.value * chi.value, db.d2 * chi.value + 2.0 * db.d1 * chi.d1 + db.value * chi.d2};
  };
  const std::vector<double> dist_cuts{d.epsilon0(), 1.5 * d.epsilon0()};
  std::vector<double> time_cuts;
  for (double hint : u.time_hints())
    if (hint > h.t_lo && hint < h.t_hi) time_cuts.push_back(hint);

  FieldValue total;
  const std::vector<Side> sides = d.sides();
  std::vector<FieldValue> per_side(sides.size());
  parallel_for(sides.size(), [&](std::size_t si) {
    const Side side = sides[si];
    const double len = d.side_length(side);
    if (rect) {
      // h must vanish where the strip meets the neighbouring strips.
      for (int i = 0; i <= 16; ++i)
        for (double tt : {0.25, 0.5, 0.75}) {
          const double t = h.t_lo + tt * (h.t_hi - h.t_lo);
          const double sl = plateau * i / 16.0, sr = len - plateau * i / 16.0;
          if (h.value(d.boundary_point(side, sl), t) != 0.0 || h.value(d.boundary_point(side, sr), t) != 0.0)
            throw InvalidArgument("lateral_identity: h must vanish within plateau_distance of the corners");
        }
    }
    QuadratureResult err_track;
    auto strip = [&](double s, double t) {
      const BoundaryPoint z = d.boundary_point(side, s);
      const double hv = h.value(z, t);
      const double ht = h.time_derivative(z, t) + h.tangential_second(z, t);
      if (hv == 0.0 && ht == 0.0) return 0.0;
      auto f = [&](double dist) {
        const auto [p, p2] = phi(dist);
        const Point x{z.location.x + dist * z.inner_normal.x, z.location.y + dist * z.inner_normal.y};
        return u.value(x, t) * (p * ht + p2 * hv);
      };
      return integrate_adaptive(f, 0.0, plateau, 0.1 * tolerance / (h.t_hi - h.t_lo), dist_cuts).value;
    };
    QuadratureResult r;
    if (!rect) {
      r = integrate_adaptive([&](double t) { return strip(0.0, t); }, h.t_lo, h.t_hi, 0.5 * tolerance / sides.size(),
                             time_cuts);
    } else {
      auto over_s = [&](double t) {
        return integrate_adaptive([&](double s) { return strip(s, t); }, plateau, len - plateau,
                                  0.1 * tolerance / (h.t_hi - h.t_lo))
            .value;
      };
      r = integrate_adaptive(over_s, h.t_lo, h.t_hi, 0.5 * tolerance / sides.size(), time_cuts);
    }
    per_side[si] = {-r.value, r.error_estimate + 0.2 * tolerance / sides.size()};
  });
  for (const FieldValue& v : per_side) {
    total.value += v.value;
    total.error += v.error;
  }
  return total;
}

FieldValue lateral_kernel_pairing(const LateralMeasure& nu, const HeatKernel& kernel, Point x, double s, double t,
                                  double tolerance) {
  if (!(s < t)) throw InvalidArgument("lateral_kernel_pairing: need s < t");
  TraceTriple clipped;
  clipped.horizon = nu.horizon;
  clipped.nu.horizon = nu.horizon;
  for (const LateralAtom& a : nu.atoms)
    if (a.time > s && a.time < t) clipped.nu.atoms.push_back(a);
  for (const SideDensity& sd : nu.densities) {
    SideDensity c = sd;
    c.density.lo = std::max(sd.density.lo, s);
    c.density.hi = std::min(sd.density.hi, t);
    if (c.density.hi > c.density.lo) {
      if (!sd.density.expression) {
        // Resample the clipped piece of a sampled density.
        const std::size_t n = std::max<std::size_t>(sd.density.samples.size(), 2);
        c.density.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double tau = c.density.lo + (c.density.hi - c.density.lo) * static_cast<double>(i) / (n - 1);
          Variables v;
          v.t = tau;
          c.density.samples[i] = sd.density(tau, v);
        }
      }
      clipped.nu.densities.push_back(c);
    }
  }
  RepresentationOptions ro;
  ro.tolerance = tolerance / 0.4;
  return evaluate_lateral_term(clipped, kernel, x, t, ro);
}

ShrinkingTable shrinking_table(const SolutionField& u, const LateralMeasure& nu, const HeatKernel& kernel, Point x,
                           double s, double t, const std::vector<double>& epsilons, double tolerance) {
  require_interval(u.domain(), "shrinking_table");
  ShrinkingTable table;
  table.epsilons = epsilons;
  const FieldValue right = lateral_kernel_pairing(nu, kernel, x, s, t, tolerance);
  table.right_side = right.value;
  table.right_error = right.error;
  table.left_side.resize(epsilons.size());
  parallel_for(epsilons.size(), [&](std::size_t j) {
    table.left_side[j] = interior_representation(u, kernel, epsilons[j], s, x, t, tolerance).lateral;
  });
  for (double v : table.left_side) table.errors.push_back(std::abs(v - table.right_side));
  return table;
}

// ---------------------------------------------------------------------------
// Boundedness monitors

BoundednessTables boundedness_tables(const SolutionField& u, double t1, const ExtractionSchedule& schedule,
                                     double tolerance) {
  const Domain& d = u.domain();
  require_interval(d, "boundedness_tables");
  schedule.validate(d, u.horizon());
  if (!(t1 > 0.0 && t1 < u.horizon())) throw InvalidArgument("boundedness_tables: need 0 < T1 < T");
  const double a = d.a(), b = d.b(), len = d.width();
  const std::size_t nt = schedule.times.size(), ne = schedule.epsilons.size();

  // Geometric cuts toward both ends resolve boundary layers and blowups.
  std::vector<double> cuts;
  for (double f = 0.5; f > 1e-7; f *= 0.25) {
    cuts.push_back(a + f * 0.5 * len);
    cuts.push_back(b - f * 0.5 * len);
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<double> weighted(nt), unweighted(nt);
  parallel_for(nt, [&](std::size_t j) {
    const double t = schedule.times[j];
    weighted[j] = integrate_adaptive([&](double x) { return d.delta({x}) * u.value({x}, t); }, a, b, tolerance, cuts).value;
    unweighted[j] = integrate_adaptive([&](double x) { return u.value({x}, t); }, a, b, tolerance, cuts).value;
  });

  // Lateral flux from the earliest evaluable time: layers there of width eps^2 as well.
  const double start = u.earliest_time();
  std::vector<double> hints = u.time_hints();
  hints.push_back(start);
  const SolutionField with_start(d, u.horizon(), [&u](Point p, double t) { return u(p, t); }, hints, start);
  std::vector<double> flux(ne);
  parallel_for(ne, [&](std::size_t j) {
    double total = 0.0;
    for (Side side : d.sides())
      total += bin_integral(with_start, side, schedule.epsilons[j], start, t1, tolerance, [](double) { return 1.0; });
    flux[j] = total;
  });

  // Space-time mass on Omega_eps x (t_j, T1) through the torsion function
  // phi = (x - a - eps)(b - eps - x) / 2: int int u = c * flux - int phi (u(T1) - u(t_j)).
  const std::size_t nm = std::min(nt, ne);
  std::vector<double> space_time(nm);
  parallel_for(nm, [&](std::size_t j) {
    const double eps = schedule.epsilons[j], t0 = schedule.times[j];
    const double c = 0.5 * (len - 2.0 * eps);
    double lateral = 0.0;
    for (Side side : d.sides())
      lateral += bin_integral(u, side, eps, t0, t1, tolerance, [](double) { return 1.0; });
    auto torsion = [&](double x) { return 0.5 * (x - a - eps) * (b - eps - x); };
    std::vector<double> inner;
    for (double c0 : cuts)
      if (c0 > a + eps && c0 < b - eps) inner.push_back(c0);
    const double change =
        integrate_adaptive([&](double x) { return torsion(x) * (u.value({x}, t1) - u.value({x}, t0)); }, a + eps,
                           b - eps, tolerance, inner)
            .value;
    space_time[j] = c * lateral - change;
  });

  // Atoms on the kink of delta produce sqrt(t) corrections.
  std::vector<double> roots;
  for (double t : schedule.times) roots.push_back(std::sqrt(t));
  BoundednessTables out;
  out.weighted_mass = extrapolate_to_zero(roots, weighted, 3, true, 1e-3);
  out.weighted_mass.name = "delta-weighted mass";
  out.unweighted_mass = extrapolate_to_zero(roots, unweighted, 3, true, 1e-3);
  out.unweighted_mass.name = "unweighted mass";
  out.lateral_flux = extrapolate_to_zero(schedule.epsilons, flux, 2, true, 1e-3);
  out.lateral_flux.name = "lateral flux";
  const std::vector<double> levels(schedule.times.begin(), schedule.times.begin() + static_cast<std::ptrdiff_t>(nm));
  out.space_time_mass = extrapolate_to_zero(levels, space_time, 2, true, 1e-3);
  out.space_time_mass.name = "space-time mass";
  return out;
}

bool sequence_bounded(const LimitEstimate& table, double slack, double max_ratio) {
  const std::vector<double>& v = table.samples;
  for (double x : v)
    if (!std::isfinite(x)) return false;
  if (v.size() < 3) return true;
  const double inc_last = std::abs(v[v.size() - 1] - v[v.size() - 2]);
  const double inc_prev = std::abs(v[v.size() - 2] - v[v.size() - 3]);
  if (inc_last <= slack) return true;
  if (inc_last > max_ratio * inc_prev) return false;
  return std::isfinite(table.value);
}

// ---------------------------------------------------------------------------
// Full extraction and output

TraceReport extract_traces(const SolutionField& u, const ExtractionSchedule& schedule, TraceOptions options) {
  const Domain& d = u.domain();
  require_interval(d, "extract_traces");
  schedule.validate(d, u.horizon());
  if (schedule.times.empty() || schedule.epsilons.empty()) throw InvalidArgument("extract_traces: empty schedule");

  TraceReport report;
  const std::size_t n = static_cast<std::size_t>(options.panels);
  for (std::size_t i = 0; i <= n; ++i) report.grid.push_back(d.a() + d.width() * static_cast<double>(i) / options.panels);

  std::vector<std::vector<double>> levels;
  for (double t : schedule.times) levels.push_back(green_potential_grid(u, t, options.panels, options.tolerance));
  report.w_star.assign(n + 1, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<double> samples;
    for (const auto& level : levels) samples.push_back(level[i]);
    const LimitEstimate e =
        extrapolate_to_zero(schedule.times, samples, schedule.extrapolation_levels, schedule.richardson, 1e-4);
    report.w_star[i] = e.value;
    if (i == n / 2 || i == 1 || i + 1 == n) {
      LimitEstimate named = e;
      named.name = "green potential at x=" + std::to_string(report.grid[i]);
      report.diagnostics.push_back(named);
    }
  }
  const RieszMartinResult rm = riesz_martin_decompose_1d(d, report.w_star, options.riesz);
  report.mu_estimate = rm.mu;
  report.lambda_estimate = rm.lambda;

  const LateralExtraction lat = extract_lateral_shrinking(u, schedule, options.lateral);
  report.nu_estimate = lat.measure;
  report.lateral_bins = lat.bins;
  for (const LateralBin& b : lat.bins) report.diagnostics.push_back(b.mass);
  report.converged = std::all_of(report.diagnostics.begin(), report.diagnostics.end(),
                                 [](const LimitEstimate& e) { return e.converged; });
  return report;
}

std::string serialize_trace_report(const TraceReport& report) {
  using json = nlohmann::ordered_json;
  TraceTriple triple;
  triple.mu = report.mu_estimate;
  triple.lambda = report.lambda_estimate;
  triple.nu = report.nu_estimate;
  triple.horizon = report.nu_estimate.horizon;
  json root = json::parse(serialize_triple(triple));
  json diag = json::object();
  diag["anchor"] = "initial trace through the limit of Green potentials; lateral trace through shrinking boundaries";
  diag["converged"] = report.converged;
  json tables = json::array();
  for (const LimitEstimate& e : report.diagnostics) {
    tables.push_back({{"name", e.name},
                      {"abscissae", e.abscissae},
                      {"samples", e.samples},
                      {"extrapolated", e.value},
                      {"residual", e.residual},
                      {"converged", e.converged}});
  }
  diag["tables"] = tables;
  root["diagnostics"] = diag;
  return root.dump(2) + "\n";
}

std::string trace_diagnostics_csv(const TraceReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "name,level,abscissa,value,extrapolated,residual\n";
  for (const LimitEstimate& e : report.diagnostics)
    for (std::size_t i = 0; i < e.samples.size(); ++i)
      out << '"' << e.name << '"' << ',' << i << ',' << e.abscissae[i] << ',' << e.samples[i] << ',' << e.value << ','
          << e.residual << '\n';
  return out.str();
}

}  // namespace heattrace
