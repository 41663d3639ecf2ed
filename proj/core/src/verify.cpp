#include "heattrace/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "heattrace/errors.hpp"
#include "heattrace/parallel.hpp"

namespace heattrace {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

CheckResult make_check(std::string name, std::string anchor, bool ok, double measured, double tolerance,
                       double runtime, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  c.measured = measured;
  c.tolerance = tolerance;
  c.runtime_seconds = runtime;
  c.detail = std::move(detail);
  return c;
}

SolutionField apply(const std::function<SolutionField(const SolutionField&)>& mutate, SolutionField u) {
  return mutate ? mutate(u) : u;
}

// Exact nu mass of one side on the window (lo, hi).
double window_mass(const LateralMeasure& nu, Side side, double lo, double hi) {
  double mass = 0.0;
  for (const LateralAtom& a : nu.atoms)
    if (a.side == side && a.time > lo && a.time <= hi) mass += a.mass;
  for (const SideDensity& sd : nu.densities) {
    if (sd.side != side) continue;
    const double from = std::max(lo, sd.density.lo), to = std::min(hi, sd.density.hi);
    if (to <= from) continue;
    const DensitySegment& seg = sd.density;
    mass += integrate_adaptive([&](double t) { return seg(t, Variables{0.0, 0.0, t, 0.0, 0.0}); }, from, to, 1e-12)
                .value;
  }
  return mass;
}

}  // namespace

// ---------------------------------------------------------------------------
// Inequalities of the representation

std::vector<BoundProbe> random_bound_probes(const Domain& domain, double horizon, int count, std::uint64_t seed) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("random_bound_probes: intervals only");
  if (count < 1) throw InvalidArgument("random_bound_probes: count must be positive");
  ProbeSampler rng(seed);
  const double levels[] = {0.3, 0.15, 0.05};
  std::vector<BoundProbe> probes;
  for (int i = 0; i < count; ++i) {
    BoundProbe p;
    p.epsilon = std::min(levels[static_cast<std::size_t>(rng.uniform() * 3.0) % 3], domain.epsilon0());
    const double margin = p.epsilon + 0.05 * (domain.width() - 2.0 * p.epsilon);
    p.x = {rng.uniform(domain.a() + margin, domain.b() - margin)};
    p.t = rng.uniform(0.2, 0.95) * horizon;
    p.s = rng.uniform(0.2, 0.8) * p.t;
    probes.push_back(p);
  }
  return probes;
}

SuiteReport check_bounds(const SolutionField& u, const std::vector<BoundProbe>& probes, BoundsOptions options) {
  const HeatKernel kernel{u.domain()};
  struct Row {
    double u, u_err;
    InteriorParts parts;
    FieldValue full;
    double seconds;
  };
  std::vector<Row> rows(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    const Stopwatch watch;
    const BoundProbe& p = probes[i];
    const FieldValue value = u(p.x, p.t);
    rows[i] = {value.value, value.error,
               interior_representation(u, kernel, p.epsilon, p.s, p.x, p.t, options.tolerance),
               propagate(u, kernel, p.s, p.x, p.t, options.tolerance), watch.seconds()};
  });
  double seconds = 0.0;
  for (const Row& r : rows) seconds += r.seconds;

  struct Spec {
    const char* name;
    const char* anchor;
    bool two_sided;
    double (*lhs)(const Row&);
    double (*err)(const Row&);
  };
  const Spec specs[] = {
      {"bounds.shrunken_bottom", "bottom integral over a shrunken cylinder is at most u", false,
       [](const Row& r) { return r.parts.bottom; }, [](const Row& r) { return r.parts.bottom_error; }},
      {"bounds.shrunken_lateral", "lateral integral over a shrunken cylinder is at most u", false,
       [](const Row& r) { return r.parts.lateral; }, [](const Row& r) { return r.parts.lateral_error; }},
      {"bounds.bottom", "int G(x,t;y,s) u(y,s) dy is at most u(x,t)", false,
       [](const Row& r) { return r.full.value; }, [](const Row& r) { return r.full.error; }},
      {"bounds.representation", "u equals its bottom plus lateral integral on shrunken cylinders", true,
       [](const Row& r) { return r.parts.total(); }, [](const Row& r) { return r.parts.error(); }},
  };
  SuiteReport report;
  report.suite = "bounds";
  for (const Spec& spec : specs) {
    double worst_excess = -INFINITY, worst_violation = 0.0, worst_slack = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double diff = spec.lhs(rows[i]) - rows[i].u;
      const double violation = spec.two_sided ? std::abs(diff) : diff;
      const double slack = 2.0 * (spec.err(rows[i]) + rows[i].u_err) + options.floor;
      if (violation - slack > worst_excess) {
        worst_excess = violation - slack;
        worst_violation = violation;
        worst_slack = slack;
        worst = i;
      }
    }
    const BoundProbe& p = probes[worst];
    report.checks.push_back(make_check(spec.name, spec.anchor, worst_excess <= 0.0, worst_violation, worst_slack,
                                       seconds / 4.0,
                                       format("worst probe x=%.6g s=%.6g t=%.6g eps=%.6g", p.x.x, p.s, p.t, p.epsilon)));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Boundedness, shrinking limit, H, lateral uniqueness

SuiteReport check_boundedness(const SolutionField& u, double t1, const ExtractionSchedule& schedule, double slack) {
  const Stopwatch watch;
  const BoundednessTables tables = boundedness_tables(u, t1, schedule);
  const double seconds = watch.seconds();
  // The last increment against the threshold sequence_bounded applies to it.
  auto increments = [slack](const LimitEstimate& e) {
    const auto& v = e.samples;
    if (v.size() < 3) return std::pair{0.0, slack};
    const double prev = std::abs(v[v.size() - 2] - v[v.size() - 3]);
    const double last = std::abs(v.back() - v[v.size() - 2]);
    return std::pair{last, std::max(slack, 0.8 * prev)};
  };
  SuiteReport report;
  report.suite = "boundedness";
  const std::pair<const char*, const LimitEstimate*> monitored[] = {
      {"boundedness.weighted_mass", &tables.weighted_mass},
      {"boundedness.lateral_flux", &tables.lateral_flux},
      {"boundedness.space_time_mass", &tables.space_time_mass},
  };
  const char* anchors[] = {"sup over t of int u(x,t) delta(x) dx is finite",
                           "sup over eps of the lateral flux through shrunken boundaries is finite",
                           "int_0^T1 int u dx dt is finite"};
  for (std::size_t i = 0; i < 3; ++i) {
    const LimitEstimate& e = *monitored[i].second;
    const auto [last, threshold] = increments(e);
    report.checks.push_back(make_check(monitored[i].first, anchors[i], sequence_bounded(e, slack, 0.8), last, threshold,
                                       seconds / 3.0, format("limit %.10g", e.value)));
  }
  const auto [last, threshold] = increments(tables.unweighted_mass);
  CheckResult info = make_check("boundedness.unweighted_mass", "int u(x,t) dx (may grow for blowup data)", true, last,
                                threshold, 0.0,
                                sequence_bounded(tables.unweighted_mass, slack) ? "bounded" : "grows");
  info.status = CheckStatus::Info;
  report.checks.push_back(info);
  return report;
}

SuiteReport check_shrinking_limit(const SolutionField& u, const LateralMeasure& nu, Point x, double s, double t,
                          const std::vector<double>& epsilons, double tolerance, double noise_floor) {
  const Stopwatch watch;
  const ShrinkingTable table = shrinking_table(u, nu, HeatKernel{u.domain()}, x, s, t, epsilons);
  const double seconds = watch.seconds();
  double worst_ratio = 0.0;
  bool monotone = true;
  for (std::size_t j = 1; j < table.errors.size(); ++j) {
    if (table.errors[j] <= noise_floor) continue;
    const double ratio = table.errors[j - 1] > 0.0 ? table.errors[j] / table.errors[j - 1] : INFINITY;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio >= 1.0) monotone = false;
  }
  const double final_error = table.errors.empty() ? INFINITY : table.errors.back();
  SuiteReport report;
  report.suite = "shrinking";
  report.checks.push_back(make_check("shrinking.monotone_decay",
                                     "shrunken lateral integrals converge to the kernel pairing of nu", monotone,
                                     worst_ratio, 1.0, 0.5 * seconds));
  report.checks.push_back(make_check("shrinking.final_error", "limit of shrunken lateral integrals",
                                     final_error <= tolerance, final_error, tolerance, 0.5 * seconds,
                                     format("right side %.12g", table.right_side)));
  return report;
}

SuiteReport check_h_monotone(const SolutionField& u, const LateralMeasure& nu, double t1, const std::vector<double>& xs,
                             const std::vector<double>& times) {
  const Stopwatch watch;
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<FieldValue>> values(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    for (double t : sorted) values[i].push_back(H_function(u, nu, t1, {xs[i]}, t));
  });
  double worst = -INFINITY, worst_slack = 0.0, worst_increase = 0.0;
  for (const auto& row : values)
    for (std::size_t j = 1; j < row.size(); ++j) {
      const double increase = row[j].value - row[j - 1].value;  // H at larger t minus H at smaller t
      const double slack = 2.0 * (row[j].error + row[j - 1].error) + 1e-12;
      if (increase - slack > worst) {
        worst = increase - slack;
        worst_slack = slack;
        worst_increase = increase;
      }
    }
  SuiteReport report;
  report.suite = "h_monotone";
  report.checks.push_back(make_check("h.monotone", "H(x,t) is non-increasing in t", worst <= 0.0, worst_increase,
                                     worst_slack, watch.seconds()));
  return report;
}

std::vector<BoundaryTestFunction> standard_boundary_tests(const Domain& domain, double horizon) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("standard_boundary_tests: intervals only");
  const double T = horizon;
  return {
      BoundaryTestFunction::time_bump(domain, 0.10 * T, 0.90 * T, {1.0, 1.0}),
      BoundaryTestFunction::time_bump(domain, 0.20 * T, 0.60 * T, {1.0, 0.0}),
      BoundaryTestFunction::time_bump(domain, 0.40 * T, 0.95 * T, {0.0, 1.0}),
      BoundaryTestFunction::time_bump(domain, 0.15 * T, 0.50 * T, {1.0, 2.0}),
      BoundaryTestFunction::time_bump(domain, 0.55 * T, 0.90 * T, {0.5, 1.0}),
  };
}

SuiteReport check_lateral_uniqueness(const SolutionField& u, const std::vector<BoundaryTestFunction>& hs,
                                     const ExtractionSchedule& schedule, double relative) {
  SuiteReport report;
  report.suite = "lateral_uniqueness";
  std::vector<CheckResult> checks(hs.size());
  parallel_for(hs.size(), [&](std::size_t i) {
    const Stopwatch watch;
    const FieldValue identity = lateral_identity(u, hs[i]);
    const LimitEstimate shrink = lateral_pairing_shrinking(u, hs[i], schedule);
    const double scale = std::max(std::abs(shrink.value), 1e-12);
    const double gap = std::abs(identity.value - shrink.value) / scale;
    checks[i] = make_check("lateral.identity_vs_shrinking[" + std::to_string(i + 1) + "]",
                           "the lateral trace is determined by the delta_bar identity", gap <= relative, gap, relative,
                           watch.seconds(), format("identity %.10g shrinking %.10g", identity.value, shrink.value));
  });
  report.checks = std::move(checks);
  return report;
}

// ---------------------------------------------------------------------------
// Round trip

SuiteReport roundtrip(const TraceTriple& triple, const Domain& domain, RoundtripOptions options,
                      const std::function<SolutionField(const SolutionField&)>& mutate) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("roundtrip: intervals only");
  validate(triple, domain);
  if (triple.mu.blowup_exponent >= 1.0) throw InvalidArgument("roundtrip: mu must have finite total mass");
  const HeatKernel kernel{domain};
  const Stopwatch watch;
  const SolutionField u = apply(mutate, make_solution_field(triple, kernel));
  const TraceReport tr = extract_traces(u, options.schedule, options.traces);
  const double extract_seconds = watch.seconds();

  SuiteReport report;
  report.suite = "roundtrip";
  const double L = domain.width();

  // mu: relative L1 distance of the densities plus unmatched atom mass.
  {
    const int n = 8192;
    double diff = 0.0, mass = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = domain.a() + L * (i + 0.5) / n;
      const Variables vars{x, 0.0, 0.0, 0.0, domain.delta({x})};
      double exact = 0.0, estimate = 0.0;
      for (const DensitySegment& seg : triple.mu.densities)
        if (x >= seg.lo && x <= seg.hi) exact += seg(x, vars);
      for (const DensitySegment& seg : tr.mu_estimate.densities)
        if (x >= seg.lo && x <= seg.hi) estimate += seg(x, vars);
      diff += std::abs(estimate - exact) * L / n;
      mass += exact * L / n;
    }
    const double cell = L / options.traces.panels;
    std::vector<bool> used(tr.mu_estimate.atoms.size(), false);
    for (const InteriorAtom& a : triple.mu.atoms) {
      mass += a.mass;
      double best = a.mass;
      std::size_t pick = used.size();
      for (std::size_t j = 0; j < tr.mu_estimate.atoms.size(); ++j)
        if (!used[j] && std::abs(tr.mu_estimate.atoms[j].location.x - a.location.x) <= 2.0 * cell &&
            std::abs(tr.mu_estimate.atoms[j].mass - a.mass) < best) {
          best = std::abs(tr.mu_estimate.atoms[j].mass - a.mass);
          pick = j;
        }
      if (pick < used.size()) used[pick] = true;
      diff += best;
    }
    for (std::size_t j = 0; j < used.size(); ++j)
      if (!used[j]) diff += tr.mu_estimate.atoms[j].mass;
    if (triple.mu.empty()) {
      report.checks.push_back(make_check("roundtrip.mu_leakage", "mu-free data has zero bottom trace",
                                         diff <= options.leakage, diff, options.leakage, extract_seconds / 3.0));
    } else {
      const double rel = diff / mass;
      report.checks.push_back(make_check("roundtrip.mu", "the bottom trace of u is mu", rel <= options.mu_relative, rel,
                                         options.mu_relative, extract_seconds / 3.0));
    }
  }

  // lambda: absolute error per end.
  {
    auto corner_mass = [](const CornerMeasure& m, Side side) {
      double total = 0.0;
      for (const CornerAtom& a : m.atoms)
        if (a.side == side) total += a.mass;
      return total;
    };
    const double left = corner_mass(tr.lambda_estimate, Side::Left);
    const double right = corner_mass(tr.lambda_estimate, Side::Right);
    const double err = std::max(std::abs(left - corner_mass(triple.lambda, Side::Left)),
                                std::abs(right - corner_mass(triple.lambda, Side::Right)));
    const bool present = !triple.lambda.empty();
    const double tol = present ? options.lambda_absolute : options.leakage;
    report.checks.push_back(make_check(present ? "roundtrip.lambda" : "roundtrip.lambda_leakage",
                                       present ? "the corner trace of u is lambda" : "lambda-free data has zero corner trace",
                                       err <= tol, err, tol, extract_seconds / 3.0,
                                       format("estimated left %.9g right %.9g", left, right)));
  }

  // nu: every bin within the relative tolerance (absolute leakage for empty bins).
  {
    double worst = 0.0;
    std::string where;
    for (const LateralBin& bin : tr.lateral_bins) {
      const double exact = window_mass(triple.nu, bin.side, bin.t_lo, bin.t_hi);
      const double allowed = std::max(options.nu_relative * exact, options.leakage);
      const double score = std::abs(bin.mass.value - exact) / allowed;
      if (score > worst) {
        worst = score;
        where = format("side %g bin [%.4g, %.4g] estimate %.9g", bin.side == Side::Left ? 0.0 : 1.0, bin.t_lo,
                       bin.t_hi, bin.mass.value) +
                format(" exact %.9g", exact);
      }
    }
    const bool present = !triple.nu.empty();
    report.checks.push_back(make_check(present ? "roundtrip.nu" : "roundtrip.nu_leakage",
                                       present ? "the lateral trace of u is nu" : "nu-free data has zero lateral trace",
                                       worst <= 1.0, worst, 1.0, extract_seconds / 3.0, where));
  }

  // The split u = v1 + v2: v2 (nu only) has zero initial trace, v1 zero lateral trace.
  if (!triple.nu.empty()) {
    const Stopwatch w;
    TraceTriple only_nu;
    only_nu.horizon = triple.horizon;
    only_nu.nu = triple.nu;
    const SolutionField v2 = apply(mutate, make_solution_field(only_nu, kernel));
    const LimitEstimate sine = pair_initial_trace(v2, TestFunction::sine_mode(domain), options.schedule);
    const LimitEstimate bubble = pair_initial_trace(v2, TestFunction::bubble(domain), options.schedule);
    const double worst = std::max(std::abs(sine.value), std::abs(bubble.value));
    report.checks.push_back(make_check("roundtrip.split_initial", "the nu part has initial trace (0, 0)",
                                       worst <= options.leakage, worst, options.leakage, w.seconds()));
  }
  if (!triple.mu.empty() || !triple.lambda.empty()) {
    const Stopwatch w;
    TraceTriple bottom = triple;
    bottom.nu = LateralMeasure{};
    bottom.nu.horizon = triple.horizon;
    const SolutionField v1 = apply(mutate, make_solution_field(bottom, kernel));
    const LateralExtraction ex = extract_lateral_shrinking(v1, options.schedule, options.traces.lateral);
    double worst = 0.0;
    for (const LateralBin& b : ex.bins) worst = std::max(worst, std::abs(b.mass.value));
    report.checks.push_back(make_check("roundtrip.split_lateral", "the (mu, lambda) part has lateral trace 0",
                                       worst <= options.leakage, worst, options.leakage, w.seconds()));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle comparison

SuiteReport oracle_compare(const TraceTriple& triple, const Domain& domain, OracleOptions options,
                           const std::function<SolutionField(const SolutionField&)>& mutate) {
  if (options.probes < 1) throw InvalidArgument("oracle_compare: need at least one probe");
  if (!(0.0 < options.t_lo && options.t_lo < options.t_hi && options.t_hi <= triple.horizon))
    throw InvalidArgument("oracle_compare: need 0 < t_lo < t_hi <= T");
  const Stopwatch fd_watch;
  const FDSolution fd = fd_solve(domain, fd_data(triple, domain), triple.horizon, options.fd);
  const double fd_seconds = fd_watch.seconds();

  const Stopwatch watch;
  const SolutionField u = apply(mutate, make_solution_field(triple, HeatKernel{domain}, options.representation));
  ProbeSampler rng(options.seed);
  std::vector<std::pair<double, double>> probes;
  for (int i = 0; i < options.probes; ++i) {
    const double x = rng.uniform(domain.a() + 0.05 * domain.width(), domain.b() - 0.05 * domain.width());
    probes.emplace_back(x, rng.uniform(options.t_lo, options.t_hi));
  }
  std::vector<double> diff(probes.size()), scale(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    const double rep = u.value({probes[i].first}, probes[i].second);
    diff[i] = std::abs(rep - fd.at(probes[i].first, probes[i].second));
    scale[i] = std::abs(rep);
  });
  const double norm = std::max(*std::max_element(scale.begin(), scale.end()), 1e-300);
  const std::size_t worst = static_cast<std::size_t>(std::max_element(diff.begin(), diff.end()) - diff.begin());
  const double rel = diff[worst] / norm;
  const double tol = triple.mu.atoms.empty() ? options.tolerance : options.atom_tolerance;

  SuiteReport report;
  report.suite = "oracle";
  report.checks.push_back(make_check("oracle.representation_vs_fd",
                                     "the representation formula solves the heat equation with the given data",
                                     rel <= tol, rel, tol, watch.seconds() + fd_seconds,
                                     format("worst probe x=%.6g t=%.6g, max|u| %.6g", probes[worst].first,
                                            probes[worst].second, norm)));
  const double min_fd = fd.min_value();
  report.checks.push_back(make_check("oracle.fd_maximum_principle", "finite-difference values stay nonnegative",
                                     min_fd >= -1e-12, min_fd, -1e-12, 0.0));
  return report;
}

// ---------------------------------------------------------------------------
// Kernel identities

SuiteReport check_kernels(const Domain& domain, KernelSuiteOptions options, const KernelHook& hook) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("check_kernels: intervals only");
  if (options.probes < 1 || !(0.0 < options.min_lag && options.min_lag < options.max_lag))
    throw InvalidArgument("check_kernels: invalid probe settings");
  const IntervalHeatKernel k(domain.a(), domain.b());
  auto G = [&](double x, double y, double lag, Representation rep) {
    KernelValue v = k.green(x, y, lag, rep);
    if (hook) v.value = hook(rep, x, y, lag, v.value);
    return v;
  };
  struct Tuple {
    double x, y, z, lag1, lag2;
  };
  ProbeSampler rng(options.seed);
  std::vector<Tuple> tuples;
  const double lo = domain.a() + 1e-3 * domain.width(), hi = domain.b() - 1e-3 * domain.width();
  const double log_lo = std::log(options.min_lag), log_hi = std::log(options.max_lag);
  for (int i = 0; i < options.probes; ++i) {
    Tuple t;
    t.x = rng.uniform(lo, hi);
    t.y = rng.uniform(lo, hi);
    t.z = rng.uniform(lo, hi);
    t.lag1 = std::exp(rng.uniform(log_lo, log_hi));
    t.lag2 = std::exp(rng.uniform(log_lo, log_hi));
    tuples.push_back(t);
  }

  SuiteReport report;
  report.suite = "kernels";

  {
    const Stopwatch watch;
    std::vector<double> errors(tuples.size());
    parallel_for(tuples.size(), [&](std::size_t i) {
      const Tuple& t = tuples[i];
      const double cuts[] = {std::min(t.x, t.z), std::max(t.x, t.z)};
      const double composed =
          integrate_adaptive(
              [&](double y) { return G(t.x, y, t.lag1, Representation::Auto).value * G(y, t.z, t.lag2, Representation::Auto).value; },
              domain.a(), domain.b(), 1e-11, cuts)
              .value;
      errors[i] = std::abs(composed - G(t.x, t.z, t.lag1 + t.lag2, Representation::Auto).value);
    });
    const double worst = *std::max_element(errors.begin(), errors.end());
    report.checks.push_back(make_check("kernels.semigroup", "int G(x,t;y,s) G(y,s;z,r) dy = G(x,t;z,r)",
                                       worst <= options.semigroup_tolerance, worst, options.semigroup_tolerance,
                                       watch.seconds()));
  }
  {
    const Stopwatch watch;
    double worst = 0.0;
    for (const Tuple& t : tuples)
      worst = std::max(worst, std::abs(G(t.x, t.y, t.lag1, Representation::Auto).value -
                                       G(t.y, t.x, t.lag1, Representation::Auto).value));
    report.checks.push_back(make_check("kernels.symmetry", "G(x,t;y,s) = G(y,t;x,s)", worst == 0.0, worst, 0.0,
                                       watch.seconds()));
  }
  {
    const Stopwatch watch;
    double smallest = INFINITY;
    for (const Tuple& t : tuples) {
      // Positivity is asserted where the value is representable in double.
      const double dist = std::abs(t.x - t.y);
      if (dist * dist / (4.0 * t.lag1) > 650.0) continue;
      smallest = std::min(smallest, G(t.x, t.y, t.lag1, Representation::Auto).value);
    }
    report.checks.push_back(make_check("kernels.positivity", "G > 0 inside the cylinder", smallest > 0.0, smallest, 0.0,
                                       watch.seconds()));
  }
  {
    const Stopwatch watch;
    double worst = 0.0;
    for (const Tuple& t : tuples) {
      const KernelValue s = G(t.x, t.y, t.lag1, Representation::Spectral);
      const KernelValue m = G(t.x, t.y, t.lag1, Representation::Image);
      const double ratio = std::abs(s.value - m.value) / (s.error + m.error);
      worst = std::max(worst, ratio);
      const KernelValue ns = k.normal(t.x, Side::Left, t.lag1, Representation::Spectral);
      const KernelValue ni = k.normal(t.x, Side::Left, t.lag1, Representation::Image);
      worst = std::max(worst, std::abs(ns.value - ni.value) / (ns.error + ni.error));
    }
    report.checks.push_back(make_check("kernels.spectral_vs_image",
                                       "sine series and image sum agree within their certified tails", worst <= 1.0,
                                       worst, 1.0, watch.seconds()));
  }
  return report;
}

}  // namespace heattrace
