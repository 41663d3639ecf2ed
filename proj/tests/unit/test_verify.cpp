#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "heattrace/errors.hpp"
#include "heattrace/verify.hpp"
#include "oracles.hpp"

using namespace heattrace;
using std::numbers::pi;

namespace {

const CheckResult& find(const SuiteReport& r, const std::string& name) {
  for (const CheckResult& c : r.checks)
    if (c.name == name) return c;
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

bool passes(const SuiteReport& r, const std::string& name) { return find(r, name).status == CheckStatus::Pass; }

// Largest nodal error at the final step against an exact solution.
double final_error(const FDSolution& s, double T, double (*exact)(double, double)) {
  double worst = 0.0;
  for (int i = 0; i <= s.panels(); ++i) {
    const double x = s.a() + s.h() * i;
    worst = std::max(worst, std::abs(s.node(i, s.steps()) - exact(x, T)));
  }
  return worst;
}

double eigen_exact(double x, double t) { return std::exp(-t) * std::sin(x); }
double one_exact(double x, double t) { return oracle::boundary_one(x, t); }

FDData boundary_one_data() {
  FDData d;
  d.left = [](double) { return 1.0; };
  d.right = [](double) { return 1.0; };
  return d;
}

}  // namespace

TEST_CASE("fd_solve reproduces the decaying eigenfunction") {
  const Domain d;
  FDData data;
  data.initial = [](double x) { return std::sin(x); };
  const FDSolution s = fd_solve(d, data, 1.0);
  CHECK(s.panels() == 804);
  CHECK(s.steps() == 256);
  for (double x : {0.3, 1.0, pi / 2, 2.5})
    for (double t : {0.1, 0.5, 1.0}) CHECK(std::abs(s.at(x, t) - eigen_exact(x, t)) < 1e-4);
  CHECK(s.min_value() >= 0.0);
}

TEST_CASE("fd_solve with boundary value one matches the odd-mode series") {
  const Domain d;
  const FDSolution s = fd_solve(d, boundary_one_data(), 1.0);
  // Series value at the midpoint: 1 - (4/pi)(e^{-1/2} - e^{-9/2}/3 + ...).
  const double exact = oracle::boundary_one(pi / 2, 0.5);
  CHECK(exact == doctest::Approx(0.232455).epsilon(1e-5));
  CHECK(std::abs(s.at(pi / 2, 0.5) - exact) < 1e-3);
  for (double x : {0.2, 1.1, 2.9}) CHECK(std::abs(s.at(x, 0.8) - oracle::boundary_one(x, 0.8)) < 1e-3);
}

TEST_CASE("fd_solve keeps zero data at zero") {
  const Domain d;
  const FDSolution s = fd_solve(d, FDData{}, 0.5, {1.0 / 32, 1.0 / 32, 2});
  for (int j = 0; j <= s.steps(); ++j)
    for (int i = 0; i <= s.panels(); ++i) CHECK(s.node(i, j) == 0.0);
}

TEST_CASE("fd_solve converges at second order in (h, k)") {
  const Domain d;
  FDData eig;
  eig.initial = [](double x) { return std::sin(x); };
  const double T = 0.5;
  for (const auto& [data, exact] : {std::pair{eig, &eigen_exact}, std::pair{boundary_one_data(), &one_exact}}) {
    double prev = 0.0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
      const double err = final_error(fd_solve(d, data, T, {h, h, 2}), T, exact);
      if (prev > 0.0) {
        const double order = std::log2(prev / err);
        CHECK(order > 1.8);
        CHECK(order < 2.2);
      }
      prev = err;
    }
  }
}

TEST_CASE("mollified atoms keep their discrete mass") {
  const Domain d;
  TraceTriple t;
  t.mu.atoms.push_back({{1.0}, 0.7});
  const FDData data = fd_data(t, d);
  const FDSolution s = fd_solve(d, data, 0.01, {1.0 / 128, 1.0 / 1024, 2});
  double mass = 0.0;
  for (int i = 0; i <= s.panels(); ++i) mass += s.h() * s.node(i, 0);
  CHECK(mass == doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("fd_data rejects data without a Dirichlet counterpart") {
  const Domain d;
  CHECK_THROWS_AS(fd_data(fixture("corner-atom"), d), InvalidArgument);
  CHECK_THROWS_AS(fd_data(fixture("lateral-atom"), d), InvalidArgument);
  CHECK_NOTHROW(fd_data(fixture("lateral-ramp"), d));
  CHECK_THROWS_AS(fd_solve(d, FDData{}, 1.0, {0.0, 0.1, 2}), InvalidArgument);
  CHECK_THROWS_AS(fd_solve(d, FDData{}, 1.0, {0.1, 0.1, -1}), InvalidArgument);
}

TEST_CASE("ProbeSampler is the top 53 bits of mt19937_64") {
  ProbeSampler a(42), b(42);
  std::mt19937_64 ref(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == static_cast<double>(ref() >> 11) * 0x1.0p-53);
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("random bound probes respect their ranges and the seed") {
  const Domain d;
  const std::vector<BoundProbe> p = random_bound_probes(d, 1.0, 200, 5);
  const std::vector<BoundProbe> q = random_bound_probes(d, 1.0, 200, 5);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].x.x == q[i].x.x);
    CHECK(p[i].t >= 0.2);
    CHECK(p[i].t <= 0.95);
    CHECK(p[i].s >= 0.2 * p[i].t);
    CHECK(p[i].s <= 0.8 * p[i].t);
    CHECK(d.delta(p[i].x) > p[i].epsilon);
    const double e = p[i].epsilon;
    CHECK((e == 0.3 || e == 0.15 || e == 0.05));
  }
  CHECK(random_bound_probes(d, 1.0, 1, 6).front().x.x != p.front().x.x);
  CHECK_THROWS_AS(random_bound_probes(d, 1.0, 0, 5), InvalidArgument);
}

TEST_CASE("report serialization is canonical") {
  SuiteReport r;
  r.suite = "demo";
  r.checks.push_back({"b.second", "anchor b", CheckStatus::Fail, 2.0, 1.0, 0.25, "why"});
  r.checks.push_back({"a.first", "anchor a", CheckStatus::Pass, 0.5, 1.0, 0.5, ""});
  r.checks.push_back({"c.info", "anchor c", CheckStatus::Info, 3.0, 0.0, 0.0, ""});
  CHECK_FALSE(r.passed());
  r.sort();
  CHECK(r.checks.front().name == "a.first");

  const std::string json = report_json(r);
  CHECK(json == report_json(r));
  CHECK(json.find("runtime_seconds") == std::string::npos);
  CHECK(report_json(r, true).find("\"runtime_seconds\": 0.25") != std::string::npos);
  CHECK(json.find("\"passed\": false") != std::string::npos);
  CHECK(json.find("\"detail\": \"why\"") != std::string::npos);
  CHECK(json.find("\"status\": \"info\"") != std::string::npos);
  CHECK(json.find("a.first") < json.find("b.second"));

  const std::string table = report_table(r);
  CHECK(table.find("FAIL  demo") != std::string::npos);
  CHECK(table.find("    why") != std::string::npos);

  SuiteReport ok;
  ok.append(SuiteReport{"x", {{"only", "", CheckStatus::Info, 0, 0, 0, ""}}});
  CHECK(ok.passed());
}

TEST_CASE("fixtures") {
  const std::vector<NamedTriple> all = standard_fixtures();
  CHECK(all.size() == 7);
  for (const NamedTriple& f : all) CHECK_NOTHROW(fixture(f.name));
  CHECK_THROWS_AS(fixture("nope"), InvalidArgument);
  CHECK(standard_boundary_tests(Domain{}, 1.0).size() == 5);
}

TEST_CASE("kernel suite passes and catches a sign flip") {
  const Domain d;
  const SuiteReport r = check_kernels(d);
  CHECK(r.passed());
  CHECK(r.checks.size() == 4);
  const SuiteReport bad =
      check_kernels(d, {}, [](Representation, double, double, double lag, double v) { return lag > 0.5 ? -v : v; });
  CHECK_FALSE(passes(bad, "kernels.positivity"));
  CHECK(passes(bad, "kernels.symmetry"));
}

TEST_CASE("representation agrees with the finite-difference oracle") {
  const Domain d;
  for (const char* name : {"eigenfunction", "boundary-one", "lateral-ramp", "interior-atom"}) {
    INFO(name);
    const SuiteReport r = oracle_compare(fixture(name), d);
    CHECK(r.passed());
    CHECK(find(r, "oracle.representation_vs_fd").measured < 1e-3);
  }
  const SuiteReport bad =
      oracle_compare(fixture("eigenfunction"), d, {}, [](const SolutionField& u) { return mutations::scale(u, 1.01); });
  CHECK_FALSE(passes(bad, "oracle.representation_vs_fd"));
}

TEST_CASE("bounds hold on random probes and fail when u is lowered") {
  const Domain d;
  const HeatKernel k{d};
  const std::vector<BoundProbe> probes = random_bound_probes(d, 1.0, 8, 3);
  for (const char* name : {"eigenfunction", "boundary-one", "lateral-atom"}) {
    INFO(name);
    CHECK(check_bounds(make_solution_field(fixture(name), k), probes).passed());
  }
  const SolutionField one = make_solution_field(fixture("boundary-one"), k);
  const SuiteReport bad = check_bounds(mutations::halve_region(one, pi / 2, 0.9, 0.4), random_bound_probes(d, 1.0, 12, 11));
  CHECK_FALSE(passes(bad, "bounds.representation"));
}

TEST_CASE("boundedness monitors") {
  const Domain d;
  const HeatKernel k{d};
  const ExtractionSchedule sched = ExtractionSchedule::geometric(0.3, 8, 0.02, 8);
  const SolutionField eig = make_solution_field(fixture("eigenfunction"), k);
  CHECK(check_boundedness(eig, 0.9, sched).passed());
  const SuiteReport blow = check_boundedness(make_solution_field(fixture("blowup"), k), 0.9, sched);
  CHECK(blow.passed());
  CHECK(find(blow, "boundedness.unweighted_mass").status == CheckStatus::Info);
  CHECK(find(blow, "boundedness.unweighted_mass").detail == "grows");
  const SuiteReport bad = check_boundedness(mutations::time_blowup(eig, 0.1), 0.9, sched);
  CHECK_FALSE(passes(bad, "boundedness.weighted_mass"));
  const CheckResult& w = find(bad, "boundedness.weighted_mass");
  CHECK(w.measured / w.tolerance == doctest::Approx(std::sqrt(2.0) / 0.8).epsilon(1e-2));
}

TEST_CASE("shrinking lateral integrals and the monotone H") {
  const Domain d;
  const HeatKernel k{d};
  const TraceTriple one = fixture("boundary-one");
  const SolutionField u = make_solution_field(one, k);
  std::vector<double> eps;
  for (int j = 0; j < 8; ++j) eps.push_back(std::ldexp(0.3, -j));
  const SuiteReport l = check_shrinking_limit(u, one.nu, {pi / 2}, 0.2, 0.7, eps);
  CHECK(l.passed());
  CHECK_FALSE(check_shrinking_limit(mutations::scale(u, 1.01), one.nu, {pi / 2}, 0.2, 0.7, eps).passed());

  const SolutionField eig = make_solution_field(fixture("eigenfunction"), k);
  const std::vector<double> xs = {0.3, 1.0, 1.6, 2.2, 2.9};
  const std::vector<double> times = ExtractionSchedule::geometric(0.3, 1, 0.5, 8).times;
  CHECK(check_h_monotone(eig, LateralMeasure{}, 0.9, xs, times).passed());
  CHECK_FALSE(check_h_monotone(mutations::time_growth(eig, 3.0), LateralMeasure{}, 0.9, xs, times).passed());
}

TEST_CASE("lateral identity agrees with the shrinking pairing") {
  const Domain d;
  const SolutionField u = make_solution_field(fixture("boundary-one"), HeatKernel{d});
  const std::vector<BoundaryTestFunction> hs = standard_boundary_tests(d, 1.0);
  const ExtractionSchedule sched = ExtractionSchedule::geometric(0.3, 8, 0.004, 8);
  const SuiteReport r = check_lateral_uniqueness(u, {hs[0], hs[3]}, sched);
  CHECK(r.passed());
  CHECK(r.checks.size() == 2);
  CHECK_FALSE(check_lateral_uniqueness(mutations::interior_band(u, 0.5), {hs[0]}, sched).passed());
}

TEST_CASE("round trip recovers each fixture component") {
  const Domain d;
  const std::pair<const char*, const char*> cases[] = {
      {"eigenfunction", "roundtrip.mu"}, {"corner-atom", "roundtrip.lambda"}, {"lateral-ramp", "roundtrip.nu"}};
  for (const auto& [name, check] : cases) {
    INFO(name);
    const SuiteReport r = roundtrip(fixture(name), d);
    CHECK(r.passed());
    CHECK(passes(r, check));
  }
}

TEST_CASE("round trip of mixed data splits into its two parts") {
  const Domain d;
  TraceTriple mixed = fixture("lateral-ramp");
  mixed.mu = fixture("eigenfunction").mu;
  const SuiteReport r = roundtrip(mixed, d);
  CHECK(r.passed());
  CHECK(passes(r, "roundtrip.split_initial"));
  CHECK(passes(r, "roundtrip.split_lateral"));
  const SuiteReport bottom_only = roundtrip(fixture("eigenfunction"), d);
  CHECK(std::none_of(bottom_only.checks.begin(), bottom_only.checks.end(),
                     [](const CheckResult& c) { return c.name == "roundtrip.split_initial"; }));
}
