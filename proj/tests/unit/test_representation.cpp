#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "heattrace/errors.hpp"
#include "heattrace/representation.hpp"
#include "oracles.hpp"

using namespace heattrace;
using std::numbers::pi;

namespace {

DensitySegment expr(double lo, double hi, const std::string& text) {
  DensitySegment s;
  s.lo = lo;
  s.hi = hi;
  s.expression = Expression::parse(text);
  return s;
}

TraceTriple eigen_triple() {
  TraceTriple t;
  t.mu.densities.push_back(expr(0.0, pi, "sin(x)"));
  return t;
}

TraceTriple unit_flux_triple() {
  TraceTriple t;
  t.nu.densities.push_back({Side::Left, expr(0.0, 1.0, "1")});
  t.nu.densities.push_back({Side::Right, expr(0.0, 1.0, "1")});
  return t;
}

SolutionField eigen_field(const Domain& d) {
  return SolutionField(d, 1.0, [](Point x, double t) { return FieldValue{std::exp(-t) * std::sin(x.x), 0.0}; });
}

}  // namespace

TEST_CASE("bottom term: atom, eigenfunction and zero measure") {
  const HeatKernel k{Domain()};
  TraceTriple atom;
  atom.mu.atoms.push_back({{pi / 2}, 1.0});
  const FieldValue a = evaluate_bottom_term(atom, k, {pi / 2}, 1.0);
  CHECK(std::abs(a.value - oracle::green_series(pi / 2, pi / 2, 1.0)) <= a.error + 1e-14);
  CHECK(a.value == doctest::Approx(0.234278).epsilon(2e-6));

  const TraceTriple eig = eigen_triple();
  for (double t : {0.01, 0.3, 1.0})
    for (double x : {0.05, 1.0, pi / 2, 3.0}) {
      const FieldValue v = evaluate_bottom_term(eig, k, {x}, t);
      CHECK(std::abs(v.value - std::exp(-t) * std::sin(x)) <= 1e-9);
      CHECK(v.error <= 1e-9);
    }
  CHECK(evaluate_bottom_term(TraceTriple{}, k, {1.0}, 0.5).value == 0.0);
}

TEST_CASE("bottom term with boundary blowup of the initial density") {
  const HeatKernel k{Domain()};
  TraceTriple t;
  t.mu.blowup_exponent = 1.5;
  t.mu.densities.push_back(expr(0.0, pi, "delta^(-1.5)"));
  // Oracle: sine-series coefficients of delta^{-3/2} paired with G, via the
  // independent series G(x,t;y,0) integrated by a substitution y = v^2.
  auto oracle_value = [&](double x, double time) {
    long double total = 0.0L;
    const int n = 4000;
    for (int side = 0; side < 2; ++side)
      for (int i = 0; i < n; ++i) {
        const long double v = (i + 0.5L) / n * std::sqrt(pi / 2);
        const long double y = v * v;
        const double yy = side == 0 ? static_cast<double>(y) : pi - static_cast<double>(y);
        total += oracle::green_series(x, yy, time) * 2.0L / v / v * (std::sqrt(pi / 2) / n);
      }
    return static_cast<double>(total);
  };
  const FieldValue v = evaluate_bottom_term(t, k, {1.0}, 0.5);
  CHECK(std::isfinite(v.value));
  CHECK(v.value == doctest::Approx(oracle_value(1.0, 0.5)).epsilon(1e-4));
}

TEST_CASE("atomic initial data requires a time floor") {
  const HeatKernel k{Domain()};
  TraceTriple atom;
  atom.mu.atoms.push_back({{1.0}, 1.0});
  CHECK_THROWS_AS((void)evaluate_bottom_term(atom, k, {1.0}, 1e-5), InvalidArgument);
  CHECK_NOTHROW((void)evaluate_bottom_term(atom, k, {1.0}, 1e-3));
  CHECK_THROWS_AS((void)evaluate_solution(atom, k, {1.0}, 0.0), InvalidArgument);
  CHECK_THROWS_AS((void)evaluate_solution(atom, k, {4.0}, 0.5), InvalidArgument);
}

TEST_CASE("corner term equals the normal-derivative series") {
  const HeatKernel k{Domain()};
  TraceTriple t;
  t.lambda.atoms.push_back({Side::Left, 0.0, 1.0});
  const FieldValue v = evaluate_corner_term(t, k, {pi / 2}, 1.0);
  CHECK(std::abs(v.value - oracle::normal_left_series(pi / 2, 1.0)) <= v.error + 1e-14);
  CHECK(v.value == doctest::Approx(0.233964).epsilon(5e-6));
  CHECK(evaluate_corner_term(TraceTriple{}, k, {1.0}, 0.5).value == 0.0);

  TraceTriple right;
  right.lambda.atoms.push_back({Side::Right, 0.0, 2.0});
  CHECK(evaluate_corner_term(right, k, {0.7}, 0.4).value ==
        doctest::Approx(2.0 * oracle::normal_left_series(pi - 0.7, 0.4)).epsilon(1e-10));
}

TEST_CASE("lateral term for unit boundary data matches the classical series") {
  const HeatKernel k{Domain()};
  const TraceTriple t = unit_flux_triple();
  const double oracle_mid = oracle::boundary_one(pi / 2, 0.5);
  CHECK(oracle_mid == doctest::Approx(1.0 - 4.0 / pi * (std::exp(-0.5) - std::exp(-4.5) / 3 + std::exp(-12.5) / 5))
                          .epsilon(1e-9));
  const FieldValue mid = evaluate_solution(t, k, {pi / 2}, 0.5);
  CHECK(std::abs(mid.value - oracle_mid) <= 1e-8);
  CHECK(mid.error <= 1e-8);
  for (double time : {0.02, 0.25, 0.9})
    for (double x : {0.01, 0.4, 2.0, pi - 0.001}) {
      const FieldValue v = evaluate_lateral_term(t, k, {x}, time);
      CHECK(std::abs(v.value - oracle::boundary_one(x, time)) <= 1e-8);
    }
}

TEST_CASE("lateral atoms and causality") {
  const HeatKernel k{Domain()};
  TraceTriple t;
  t.nu.atoms.push_back({Side::Left, 0.0, 0.3, 1.5});
  const double x = 1.2, time = 0.7;
  CHECK(evaluate_lateral_term(t, k, {x}, time).value ==
        doctest::Approx(1.5 * oracle::normal_left_series(x, time - 0.3)).epsilon(1e-10));
  CHECK(evaluate_lateral_term(t, k, {x}, 0.25).value == 0.0);

  TraceTriple late;
  late.nu.densities.push_back({Side::Left, expr(0.6, 1.0, "1")});
  CHECK(evaluate_lateral_term(late, k, {x}, 0.5).value == 0.0);
  CHECK(evaluate_lateral_term(late, k, {x}, 0.6).value == 0.0);
}

TEST_CASE("evaluate_solution sums the three terms") {
  const HeatKernel k{Domain()};
  const FieldValue e = evaluate_solution(eigen_triple(), k, {pi / 2}, 1.0);
  CHECK(e.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  for (double x : {0.3, 1.7})
    for (double time : {0.1, 0.8}) CHECK(evaluate_solution(TraceTriple{}, k, {x}, time).value == 0.0);
}

TEST_CASE("evaluation is nonnegative, additive and positively homogeneous") {
  const HeatKernel k{Domain()};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    TraceTriple a, b, sum, scaled;
    const double c = 0.5 + 2.0 * unit(rng);
    a.mu.atoms.push_back({{0.2 + 2.7 * unit(rng)}, unit(rng)});
    a.nu.densities.push_back({Side::Right, expr(0.0, 1.0, "1 + sin(3*t)")});
    b.lambda.atoms.push_back({Side::Left, 0.0, unit(rng)});
    b.nu.atoms.push_back({Side::Left, 0.0, 0.5 * unit(rng), unit(rng)});
    b.mu.densities.push_back(expr(0.5, 2.5, "x*x"));
    sum.mu.atoms = a.mu.atoms;
    sum.mu.densities = b.mu.densities;
    sum.lambda = b.lambda;
    sum.nu.densities = a.nu.densities;
    sum.nu.atoms = b.nu.atoms;
    scaled = a;
    scaled.mu.atoms[0].mass *= c;
    scaled.nu.densities[0].density.expression = Expression::parse(Expression::constant(c).text() + "*(1 + sin(3*t))");
    for (int probe = 0; probe < 3; ++probe) {
      const Point x{0.05 + 3.0 * unit(rng)};
      const double time = 0.05 + 0.9 * unit(rng);
      const FieldValue va = evaluate_solution(a, k, x, time);
      const FieldValue vb = evaluate_solution(b, k, x, time);
      const FieldValue vs = evaluate_solution(sum, k, x, time);
      const FieldValue vc = evaluate_solution(scaled, k, x, time);
      CHECK(va.value >= -va.error);
      CHECK(vb.value >= -vb.error);
      CHECK(std::abs(vs.value - va.value - vb.value) <= va.error + vb.error + vs.error + 1e-12);
      CHECK(std::abs(vc.value - c * va.value) <= c * va.error + vc.error + 1e-12);
    }
  }
}

TEST_CASE("interior representation reproduces the eigenfunction") {
  const Domain d;
  const HeatKernel k{d};
  const SolutionField u = eigen_field(d);
  const InteriorParts p = interior_representation(u, k, 0.1, 0.2, {pi / 2}, 1.0);
  CHECK(std::abs(p.total() - std::exp(-1.0)) <= 1e-4);
  CHECK(std::abs(p.total() - std::exp(-1.0)) <= p.error() + 1e-9);
  CHECK(p.bottom >= 0.0);
  CHECK(p.lateral >= 0.0);
  CHECK(p.bottom <= std::exp(-1.0) + p.bottom_error);
  CHECK(p.lateral <= std::exp(-1.0) + p.lateral_error);

  const double t = 0.6;
  const InteriorParts close = interior_representation(u, k, 0.1, t - 1e-6, {1.0}, t);
  CHECK(close.bottom == doctest::Approx(u.value({1.0}, t)).epsilon(1e-4));
  CHECK(std::abs(close.lateral) <= 1e-8);

  CHECK_THROWS_AS((void)interior_representation(u, k, 0.1, 0.5, {0.05}, 1.0), InvalidArgument);
  CHECK_THROWS_AS((void)interior_representation(u, k, 0.5, 0.2, {1.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS((void)interior_representation(u, k, 0.1, 0.8, {1.0}, 0.5), InvalidArgument);
}

TEST_CASE("interior representation of a boundary-driven solution") {
  const Domain d;
  const HeatKernel k{d};
  const TraceTriple trip = unit_flux_triple();
  const SolutionField u = make_solution_field(trip, k);
  for (double eps : {0.05, 0.2}) {
    const InteriorParts p = interior_representation(u, k, eps, 0.3, {1.0}, 0.8, 1e-7);
    const double exact = oracle::boundary_one(1.0, 0.8);
    CHECK(std::abs(p.total() - exact) <= 1e-5);
    CHECK(p.bottom >= 0.0);
    CHECK(p.lateral >= 0.0);
  }
}

TEST_CASE("propagating the solution never exceeds it") {
  const Domain d;
  const HeatKernel k{d};
  const SolutionField u = make_solution_field(unit_flux_triple(), k);
  for (double s : {0.1, 0.4})
    for (double x : {0.3, 1.5}) {
      const double t = s + 0.3;
      const FieldValue p = propagate(u, k, s, {x}, t);
      CHECK(p.value <= u.value({x}, t) + p.error);
      CHECK(p.value > 0.0);
    }
  // Equality for a Dirichlet solution.
  const SolutionField e = eigen_field(d);
  CHECK(propagate(e, k, 0.3, {1.1}, 0.9).value == doctest::Approx(e.value({1.1}, 0.9)).epsilon(1e-8));
}

TEST_CASE("grid evaluation") {
  const Domain d;
  const HeatKernel k{d};
  const SolutionField u = make_solution_field(eigen_triple(), k);
  GridSpec spec;
  spec.x_lo = pi / 65;
  spec.x_hi = pi - pi / 65;
  spec.nx = 64;
  spec.t_lo = 1.0 / 64;
  spec.t_hi = 1.0;
  spec.nt = 64;
  const GridField g = evaluate_on_grid(u, spec);
  REQUIRE(g.values.size() == 64u * 64u);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i)
    worst = std::max(worst, std::abs(g.values[i] - std::exp(-g.times[i]) * std::sin(g.points[i].x)));
  CHECK(worst < 1e-8);

  std::ostringstream first, second;
  write_grid_csv(g, false, first);
  write_grid_csv(evaluate_on_grid(u, spec, 3), false, second);
  CHECK(first.str() == second.str());
  CHECK(first.str().rfind("x,t,u,err\n", 0) == 0);

  GridSpec empty;
  CHECK(evaluate_on_grid(u, empty).values.empty());

  GridSpec outside = spec;
  outside.x_lo = 0.0;
  CHECK_THROWS_AS((void)evaluate_on_grid(u, outside), InvalidArgument);
  GridSpec late = spec;
  late.t_hi = 1.5;
  CHECK_THROWS_AS((void)evaluate_on_grid(u, late), InvalidArgument);
}

TEST_CASE("finite-difference heat residual decays at second order") {
  const Domain d;
  const HeatKernel k{d};
  TraceTriple t = unit_flux_triple();
  t.mu.atoms.push_back({{1.0}, 0.5});
  const SolutionField u = make_solution_field(t, k, {1e-11, 1e-4});
  const Point x{1.3};
  const double time = 0.5;
  double previous = 0.0;
  for (int level = 0; level < 3; ++level) {
    const double h = 0.2 / (1 << level);
    const double ut = (u.value(x, time + h * h) - u.value(x, time - h * h)) / (2 * h * h);
    const double uxx = (u.value({x.x + h}, time) - 2 * u.value(x, time) + u.value({x.x - h}, time)) / (h * h);
    const double residual = std::abs(ut - uxx);
    if (level > 0) CHECK(residual < previous / 3.0);
    previous = residual;
  }
}

TEST_CASE("rectangle representation") {
  const Domain r = Domain::rectangle(0.0, pi, 0.0, pi, 0.3);
  const HeatKernel k{r};
  TraceTriple eig;
  eig.mu.densities.push_back(expr(0.0, pi, "sin(x)*sin(y)"));
  const FieldValue v = evaluate_solution(eig, k, {1.0, 2.0}, 0.4, {1e-8, 1e-4});
  CHECK(v.value == doctest::Approx(std::exp(-0.8) * std::sin(1.0) * std::sin(2.0)).epsilon(1e-6));

  // Unit data on the left side only: u = boundary_one-like profile in x, but
  // the bottom and top sides hold 0, so u < 1D value and u > 0.
  TraceTriple side;
  side.nu.densities.push_back({Side::Left, expr(0.0, 1.0, "1")});
  const FieldValue s = evaluate_solution(side, k, {0.5, pi / 2}, 0.5, {1e-6, 1e-4});
  CHECK(s.value > 0.0);
  CHECK(s.value < oracle::boundary_one(0.5, 0.5));
}
