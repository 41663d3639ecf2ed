#include <chrono>
#include <cmath>
#include <numbers>

#include "heattrace/errors.hpp"
#include "heattrace/verify.hpp"

namespace heattrace {

namespace {

using std::numbers::pi;

DensitySegment segment(double lo, double hi, const std::string& text) {
  DensitySegment s;
  s.lo = lo;
  s.hi = hi;
  s.expression = Expression::parse(text);
  return s;
}

TraceTriple lateral_on_both(const std::string& g) {
  TraceTriple t;
  t.nu.densities.push_back({Side::Left, segment(0.0, 1.0, g)});
  t.nu.densities.push_back({Side::Right, segment(0.0, 1.0, g)});
  return t;
}

SolutionField transformed(const SolutionField& u, std::function<double(Point, double, double)> f) {
  return u.mutated(std::move(f));
}

}  // namespace

std::vector<NamedTriple> standard_fixtures() {
  std::vector<NamedTriple> out;
  {
    TraceTriple t;
    t.mu.densities.push_back(segment(0.0, pi, "sin(x)"));
    out.push_back({"eigenfunction", t});
  }
  {
    TraceTriple t;
    t.lambda.atoms.push_back({Side::Left, 0.0, 0.3});
    out.push_back({"corner-atom", t});
  }
  out.push_back({"boundary-one", lateral_on_both("1")});
  out.push_back({"lateral-ramp", lateral_on_both("smoothstep(0, 0.05, t)")});
  {
    TraceTriple t;
    t.nu.atoms.push_back({Side::Left, 0.0, 0.45, 1.0});
    out.push_back({"lateral-atom", t});
  }
  {
    TraceTriple t;
    t.mu.atoms.push_back({{pi / 2}, 1.0});
    out.push_back({"interior-atom", t});
  }
  {
    TraceTriple t;
    t.mu.blowup_exponent = 1.0;
    t.mu.densities.push_back(segment(0.0, pi, "delta^(-1)"));
    out.push_back({"blowup", t});
  }
  return out;
}

TraceTriple fixture(const std::string& name) {
  for (NamedTriple& f : standard_fixtures())
    if (f.name == name) return f.triple;
  throw InvalidArgument("fixture: unknown fixture '" + name + "'");
}

namespace mutations {

SolutionField halve_region(const SolutionField& u, double center, double radius, double t_from) {
  return transformed(u, [=](Point p, double t, double v) {
    return std::abs(p.x - center) < radius && t > t_from ? 0.5 * v : v;
  });
}

SolutionField scale(const SolutionField& u, double factor) {
  return transformed(u, [=](Point, double, double v) { return factor * v; });
}

SolutionField time_blowup(const SolutionField& u, double c) {
  return transformed(u, [=](Point, double t, double v) { return v * (1.0 + c / std::sqrt(t)); });
}

SolutionField boundary_blowup(const SolutionField& u, double power) {
  const Domain d = u.domain();
  return transformed(u, [d, power](Point p, double, double v) { return v * std::pow(d.delta(p), -power); });
}

SolutionField layer_oscillation(const SolutionField& u, double amplitude) {
  const Domain d = u.domain();
  return transformed(u, [d, amplitude](Point p, double, double v) {
    return v * (1.0 + amplitude * std::cos(pi * std::log2(d.delta(p) / d.epsilon0())));
  });
}

SolutionField time_growth(const SolutionField& u, double amplitude) {
  return transformed(u, [=](Point, double t, double v) { return v * (1.0 + amplitude * t); });
}

SolutionField interior_band(const SolutionField& u, double amplitude) {
  const Domain d = u.domain();
  return transformed(u, [d, amplitude](Point p, double, double v) {
    const double lo = d.epsilon0(), hi = d.plateau_distance();
    const double dist = d.delta(p);
    if (dist <= lo || dist >= hi) return v;
    const double q = 4.0 * (dist - lo) * (hi - dist) / ((hi - lo) * (hi - lo));
    return v * (1.0 + amplitude * q * q * q);
  });
}

}  // namespace mutations

std::vector<FaultCase> fault_injection(const Domain& domain) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("fault_injection: intervals only");
  const HeatKernel kernel{domain};
  const double T = 1.0;
  std::vector<FaultCase> cases;

  auto status_of = [](const SuiteReport& r, const std::string& name) {
    for (const CheckResult& c : r.checks)
      if (c.name == name) return c.status;
    throw InvalidArgument("fault_injection: missing check '" + name + "'");
  };
  auto run = [&](const std::vector<std::string>& names, const std::string& mutation,
                 const std::function<SuiteReport()>& baseline, const std::function<SuiteReport()>& mutated) {
    const auto start = std::chrono::steady_clock::now();
    const SuiteReport b = baseline();
    const SuiteReport m = mutated();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const std::string& name : names)
      cases.push_back({name, mutation, status_of(b, name) == CheckStatus::Pass, status_of(m, name) == CheckStatus::Fail,
                       seconds / static_cast<double>(names.size())});
  };

  const SolutionField eig = make_solution_field(fixture("eigenfunction"), kernel);
  const TraceTriple one_triple = fixture("boundary-one");
  const SolutionField one = make_solution_field(one_triple, kernel);

  // Inequalities of the representation.
  const std::vector<BoundProbe> probes = random_bound_probes(domain, T, 12, 11);
  run({"bounds.shrunken_bottom", "bounds.shrunken_lateral", "bounds.bottom", "bounds.representation"},
      "halve u on |x - pi/2| < 0.9 for t > 0.4", [&] { return check_bounds(one, probes); },
      [&] { return check_bounds(mutations::halve_region(one, pi / 2, 0.9, 0.4), probes); });

  // Boundedness monitors.
  const ExtractionSchedule monitor = ExtractionSchedule::geometric(0.3, 8, 0.02, 8);
  run({"boundedness.weighted_mass", "boundedness.space_time_mass"}, "u (1 + 0.1 / sqrt(t))",
      [&] { return check_boundedness(eig, 0.9, monitor); },
      [&] { return check_boundedness(mutations::time_blowup(eig, 0.1), 0.9, monitor); });
  run({"boundedness.lateral_flux"}, "u delta^-1.5", [&] { return check_boundedness(eig, 0.9, monitor); },
      [&] { return check_boundedness(mutations::boundary_blowup(eig, 1.5), 0.9, monitor); });

  // Shrinking lateral integrals against the kernel pairing.
  std::vector<double> eps;
  for (int j = 0; j < 8; ++j) eps.push_back(std::ldexp(0.3, -j));
  run({"shrinking.monotone_decay"}, "u (1 + 0.3 cos(pi log2(delta / eps0)))",
      [&] { return check_shrinking_limit(one, one_triple.nu, {pi / 2}, 0.2, 0.7, eps); },
      [&] { return check_shrinking_limit(mutations::layer_oscillation(one, 0.3), one_triple.nu, {pi / 2}, 0.2, 0.7, eps); });
  run({"shrinking.final_error"}, "1.01 u", [&] { return check_shrinking_limit(one, one_triple.nu, {pi / 2}, 0.2, 0.7, eps); },
      [&] { return check_shrinking_limit(mutations::scale(one, 1.01), one_triple.nu, {pi / 2}, 0.2, 0.7, eps); });

  // Monotone H.
  const std::vector<double> xs = {0.3, 1.0, 1.6, 2.2, 2.9};
  const std::vector<double> times = ExtractionSchedule::geometric(0.3, 1, 0.5, 8).times;
  run({"h.monotone"}, "u (1 + 3 t)", [&] { return check_h_monotone(eig, LateralMeasure{}, 0.9, xs, times); },
      [&] { return check_h_monotone(mutations::time_growth(eig, 3.0), LateralMeasure{}, 0.9, xs, times); });

  // Lateral uniqueness.
  const std::vector<BoundaryTestFunction> hs = {standard_boundary_tests(domain, T).front()};
  const ExtractionSchedule sched = ExtractionSchedule::geometric(0.3, 8, 0.004, 8);
  run({"lateral.identity_vs_shrinking[1]"}, "u (1 + 0.5 q(delta)) on epsilon0 < delta < plateau",
      [&] { return check_lateral_uniqueness(one, hs, sched); },
      [&] { return check_lateral_uniqueness(mutations::interior_band(one, 0.5), hs, sched); });

  // Round trip, one component per fixture.
  const std::pair<const char*, const char*> trips[] = {
      {"eigenfunction", "roundtrip.mu"}, {"corner-atom", "roundtrip.lambda"}, {"lateral-ramp", "roundtrip.nu"}};
  for (const auto& [name, check] : trips) {
    const TraceTriple triple = fixture(name);
    run({check}, "1.05 u", [&] { return roundtrip(triple, domain); },
        [&] { return roundtrip(triple, domain, {}, [](const SolutionField& u) { return mutations::scale(u, 1.05); }); });
  }

  // Finite-difference oracle.
  run({"oracle.representation_vs_fd"}, "1.01 u", [&] { return oracle_compare(fixture("eigenfunction"), domain); },
      [&] {
        return oracle_compare(fixture("eigenfunction"), domain, {},
                              [](const SolutionField& u) { return mutations::scale(u, 1.01); });
      });

  // Kernel identities through value hooks.
  const KernelSuiteOptions kopts;
  const std::pair<const char*, KernelHook> hooks[] = {
      {"kernels.semigroup", [](Representation, double, double, double, double v) { return v * (1.0 + 1e-6); }},
      {"kernels.symmetry", [](Representation, double x, double y, double, double v) { return v * (1.0 + 1e-9 * (x - y)); }},
      {"kernels.positivity", [](Representation, double, double, double lag, double v) { return lag > 0.5 ? -v : v; }},
      {"kernels.spectral_vs_image",
       [](Representation r, double, double, double, double v) { return r == Representation::Image ? v * (1.0 + 1e-7) : v; }},
  };
  for (const auto& [check, hook] : hooks) {
    const KernelHook h = hook;
    run({check}, "kernel value hook", [&] { return check_kernels(domain, kopts); },
        [&] { return check_kernels(domain, kopts, h); });
  }
  return cases;
}

}  // namespace heattrace
