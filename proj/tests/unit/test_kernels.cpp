#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "heattrace/errors.hpp"
#include "heattrace/kernels.hpp"
#include "heattrace/quadrature.hpp"
#include "oracles.hpp"

using namespace heattrace;
using std::numbers::pi;

namespace {

BoundaryPoint end_point(const Domain& d, Side s) { return d.boundary_point(s, 0.0); }

}  // namespace

TEST_CASE("heat_green at the midpoint matches the series oracle") {
  const HeatKernel k{Domain()};
  const double oracle_value = oracle::green_series(pi / 2, pi / 2, 1.0);
  // (2/pi)(e^{-1} + e^{-9} + e^{-25} + ...); the leading terms already fix 6 digits.
  CHECK(oracle_value == doctest::Approx(2.0 / pi * (std::exp(-1.0) + std::exp(-9.0) + std::exp(-25.0))).epsilon(1e-10));
  CHECK(oracle_value == doctest::Approx(0.234278).epsilon(2e-6));
  CHECK(oracle::green_images(pi / 2, pi / 2, 1.0) == doctest::Approx(oracle_value).epsilon(1e-13));
  const KernelValue g = k.green({pi / 2}, 1.0, {pi / 2}, 0.0);
  CHECK(g.representation == Representation::Spectral);
  CHECK(std::abs(g.value - oracle_value) <= g.error + 1e-15);
  CHECK(g.error <= 1e-10 * (1.0 / std::sqrt(4 * pi) + 1 / pi));
}

TEST_CASE("heat_green vanishes on the boundary and is exactly symmetric") {
  const HeatKernel k{Domain()};
  for (double lag : {1e-3, 0.01, 0.3, 2.0}) {
    CHECK(k.green({0.7}, lag, {0.0}, 0.0).value == 0.0);
    CHECK(std::abs(k.green({0.7}, lag, {pi}, 0.0).value) <= 1e-15);
  }
  CHECK(k.green({0.4}, 1.0, {1.3}, 0.0).value == k.green({1.3}, 1.0, {0.4}, 0.0).value);
  CHECK(k.green({0.4}, 0.01, {1.3}, 0.0).value == k.green({1.3}, 0.01, {0.4}, 0.0).value);
  CHECK_THROWS_AS(k.green({0.4}, 1.0, {1.3}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(k.green({4.0}, 1.0, {1.3}, 0.0), InvalidArgument);
}

TEST_CASE("time homogeneity holds exactly") {
  const HeatKernel k{Domain()};
  CHECK(k.green({0.4}, 1.7, {2.1}, 0.2).value == k.green({0.4}, 2.5, {2.1}, 1.0).value);
}

TEST_CASE("heat_green_normal matches the series and stays positive") {
  const Domain d;
  const HeatKernel k{d};
  const double oracle_value = oracle::normal_left_series(pi / 2, 1.0);
  // Sign pattern sin(k pi / 2): (2/pi)(e^{-1} - 3 e^{-9} + 5 e^{-25} - ...).
  CHECK(oracle_value ==
        doctest::Approx(2.0 / pi * (std::exp(-1.0) - 3.0 * std::exp(-9.0) + 5.0 * std::exp(-25.0))).epsilon(1e-10));
  CHECK(oracle_value == doctest::Approx(0.233964).epsilon(2e-6));
  const KernelValue v = k.normal({pi / 2}, 1.0, end_point(d, Side::Left), 0.0);
  CHECK(std::abs(v.value - oracle_value) <= v.error + 1e-15);
  // Right end mirrors the left end.
  CHECK(k.normal({pi - 0.3}, 0.4, end_point(d, Side::Right), 0.0).value ==
        doctest::Approx(k.normal({0.3}, 0.4, end_point(d, Side::Left), 0.0).value).epsilon(1e-13));

  for (double x = 0.1; x <= pi - 0.1 + 1e-9; x += (pi - 0.2) / 30)
    for (double lag : {1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0})
      for (Side s : {Side::Left, Side::Right}) {
        const double value = k.normal({x}, lag, end_point(d, s), 0.0).value;
        CHECK(value >= 0.0);
        // Strict positivity wherever the true value is representable in double.
        const double dist = s == Side::Left ? x : pi - x;
        if (dist * dist / (4.0 * lag) < 650.0) CHECK(value > 0.0);
      }
}

TEST_CASE("spectral and image evaluations agree within their certified tails") {
  const IntervalHeatKernel k(0.0, pi);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, pi);
  for (double lag : {0.005, 0.01, 0.02, 0.05, 0.1, 0.3}) {
    for (int i = 0; i < 20; ++i) {
      const double x = U(rng), y = U(rng);
      const KernelValue s = k.green(x, y, lag, Representation::Spectral);
      const KernelValue m = k.green(x, y, lag, Representation::Image);
      CHECK(std::abs(s.value - m.value) <= s.error + m.error);
      const KernelValue ns = k.normal(x, Side::Left, lag, Representation::Spectral);
      const KernelValue nm = k.normal(x, Side::Left, lag, Representation::Image);
      CHECK(std::abs(ns.value - nm.value) <= ns.error + nm.error);
      // Independent direct image sums.
      CHECK(m.value == doctest::Approx(oracle::green_images(x, y, lag)).epsilon(1e-11).scale(1e-3));
      CHECK(nm.value == doctest::Approx(oracle::normal_left_images(x, lag)).epsilon(1e-11).scale(1e-2));
    }
  }
}

TEST_CASE("small lags switch to images, where the spectral tail is useless") {
  const IntervalHeatKernel k(0.0, pi);
  CHECK(k.choose(1e-4, false) == Representation::Image);
  CHECK(k.choose(1.0, false) == Representation::Spectral);
  CHECK(tail_bound(Representation::Spectral, 1, 1e-6) > 1e-10);
}

TEST_CASE("tail_bound examples") {
  // Integral comparison: sum_{k>10} e^{-k^2} <= int_10^inf e^{-u^2} du.
  const double integral = 0.5 * std::sqrt(pi) * std::erfc(10.0);
  const double b = tail_bound(Representation::Spectral, 10, 1.0);
  CHECK(b <= 2.0 / pi * integral);
  CHECK(b >= 2.0 / pi * std::exp(-121.0));
  CHECK(b <= 2.0 / pi * std::exp(-121.0) * 1.0001);
  const double img = tail_bound(Representation::Image, 3, 1e-3);
  CHECK(img <= std::exp(-pi * pi / 4e-3) / std::sqrt(4 * pi * 1e-3));
  CHECK_THROWS_AS(tail_bound(Representation::Spectral, 0, 1.0), InvalidArgument);
}

TEST_CASE("Chapman-Kolmogorov semigroup identity") {
  const HeatKernel k{Domain()};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.05, pi - 0.05);
  std::uniform_real_distribution<double> T(0.02, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double x = U(rng), z = U(rng);
    const double r = 0.0, s = T(rng), t = s + T(rng);
    auto f = [&](double y) { return k.green({x}, t, {y}, s).value * k.green({y}, s, {z}, r).value; };
    const QuadratureResult q = integrate_adaptive(f, 0.0, pi, 1e-11);
    CHECK(std::abs(q.value - k.green({x}, t, {z}, r).value) <= 1e-8);
  }
}

TEST_CASE("normal derivative is the boundary limit of G / eta") {
  const HeatKernel k{Domain()};
  for (double x : {0.3, 1.2, 2.5})
    for (double lag : {0.02, 0.5}) {
      auto q = [&](double eta) { return k.green({x}, lag, {eta}, 0.0).value / eta; };
      // Richardson on eta, eta/2 (error is O(eta^2) since G is odd in eta).
      const double eta = 1e-3;
      const double rich = (4.0 * q(eta / 2) - q(eta)) / 3.0;
      const KernelValue n = k.normal({x}, lag, Domain().boundary_point(Side::Left, 0.0), 0.0);
      CHECK(std::abs(rich - n.value) <= 10.0 * 1e-10 * (1.0 / lag + 1.0) + 1e-9);
    }
}

TEST_CASE("absorption: mass defect equals the accumulated boundary flux") {
  const Domain d;
  const HeatKernel k{d};
  for (double x : {0.4, pi / 2}) {
    const double t = 0.6;
    auto g = [&](double y) { return k.green({x}, t, {y}, 0.0).value; };
    const double mass = integrate_adaptive(g, 0.0, pi, 1e-12).value;
    CHECK(mass <= 1.0);
    double flux = 0.0;
    for (Side s : {Side::Left, Side::Right}) {
      auto n = [&](double sigma) { return k.normal_lag({x}, d.boundary_point(s, 0.0), sigma).value; };
      LateralProfile prof{1, d.delta({x}), HeatKernel::kEnvelopeAmplitude, HeatKernel::kEnvelopeDecay};
      flux += integrate_lateral_time(n, 0.0, t, prof, 1e-11).value;
    }
    CHECK(std::abs(1.0 - mass - flux) < 1e-9);
  }
}

TEST_CASE("the rigorous envelope dominates the lateral kernel") {
  const Domain d;
  const HeatKernel k{d};
  for (double x = 0.01; x < pi; x += 0.05)
    for (double lag = 1e-4; lag < 5.0; lag *= 1.7) {
      const double env = HeatKernel::kEnvelopeAmplitude / lag *
                         std::exp(-HeatKernel::kEnvelopeDecay * d.delta({x}) * d.delta({x}) / lag);
      for (Side s : {Side::Left, Side::Right})
        CHECK(k.normal_lag({x}, d.boundary_point(s, 0.0), lag).value <= env * (1 + 1e-12) + 1e-300);
    }
  CHECK(HeatKernel::kEnvelopeAmplitude == doctest::Approx(1.0 / std::sqrt(pi * std::exp(1.0))).epsilon(1e-13));
}

TEST_CASE("fitted Gaussian bound holds on a held-out grid") {
  const HeatKernel k{Domain()};
  std::vector<double> fx, fl, hx, hl;
  for (int i = 0; i <= 12; ++i) fx.push_back(0.1 + i * (pi - 0.2) / 12);
  for (int i = 0; i <= 9; ++i) fl.push_back(1e-3 * std::pow(1000.0, i / 9.0));
  for (int i = 0; i <= 40; ++i) hx.push_back(0.1 + i * (pi - 0.2) / 40);
  for (int i = 0; i <= 30; ++i) hl.push_back(1e-3 * std::pow(1000.0, i / 30.0));
  const GaussianBoundFit fit = fit_gaussian_bound(k, fx, fl, hx, hl);
  CHECK(fit.decay > 0.0);
  CHECK(fit.decay < 0.25);
  CHECK(fit.worst_ratio_fit <= 1.0);
  CHECK(fit.holds);
}

TEST_CASE("shrunken kernels: domain monotonicity and Dirichlet condition") {
  const HeatKernel k{Domain()};
  const double full = k.green({pi / 2}, 1.0, {pi / 2}, 0.0).value;
  double prev_gap = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    const HeatKernel ke = k.shrunken(eps);
    const double g = ke.green({pi / 2}, 1.0, {pi / 2}, 0.0).value;
    CHECK(g <= full);
    CHECK(full - g < prev_gap);
    prev_gap = full - g;
  }
  const HeatKernel k1 = k.shrunken(0.1);
  CHECK(std::abs(k1.green({pi / 2}, 1.0, {0.1}, 0.0).value) < 1e-15);
  CHECK_THROWS_AS(k1.green({pi / 2}, 1.0, {0.05}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(k.shrunken(0.5), InvalidArgument);
}

TEST_CASE("rectangle kernels factorize") {
  const Domain r = Domain::rectangle(0.0, pi, 0.0, 2.0, 0.3);
  const HeatKernel k{r};
  const IntervalHeatKernel kx(0.0, pi), ky(0.0, 2.0);
  const KernelValue g = k.green({0.5, 0.7}, 0.3, {1.9, 1.1}, 0.0);
  CHECK(g.value == doctest::Approx(kx.green(0.5, 1.9, 0.3).value * ky.green(0.7, 1.1, 0.3).value).epsilon(1e-14));
  const BoundaryPoint z = r.boundary_point(Side::Bottom, 1.0);
  const KernelValue n = k.normal({0.5, 0.7}, 0.3, z, 0.0);
  CHECK(n.value == doctest::Approx(kx.green(0.5, 1.0, 0.3).value * ky.normal(0.7, Side::Left, 0.3).value).epsilon(1e-14));
  CHECK(n.value > 0.0);
}

TEST_CASE("elliptic Green function and Martin kernel on the interval") {
  const EllipticGreen e{Domain()};
  CHECK(e.green({1.0}, {2.0}) == doctest::Approx((pi - 2.0) / pi).epsilon(1e-15));
  CHECK(e.green({1.0}, {2.0}) == doctest::Approx(0.363380).epsilon(2e-6));
  CHECK(e.green({2.0}, {1.0}) == e.green({1.0}, {2.0}));
  CHECK(e.green({0.0}, {0.0}) == 0.0);
  const Domain d;
  CHECK(e.martin({pi / 2}, d.boundary_point(Side::Left, 0.0)) == doctest::Approx(0.5));
  CHECK(e.martin({1.0}, d.boundary_point(Side::Right, 0.0)) == doctest::Approx(1.0 / pi));
  // G(x,y) <= C delta(y) with C = 1.
  for (double x = 0.05; x < pi; x += 0.1)
    for (double y = 0.05; y < pi; y += 0.1) CHECK(e.green({x}, {y}) <= e.delta_bound_constant() * d.delta({y}) + 1e-15);
}

TEST_CASE("rectangle elliptic Green function is harmonic off the diagonal and symmetric") {
  const Domain r = Domain::rectangle(0.0, pi, 0.0, 2.0, 0.3);
  const EllipticGreen e{r};
  const Point y{1.0, 0.8};
  const double h = 1e-3;
  for (Point x : {Point{2.2, 1.5}, Point{0.4, 1.6}, Point{2.5, 0.3}}) {
    const double lap = (e.green({x.x + h, x.y}, y) + e.green({x.x - h, x.y}, y) + e.green({x.x, x.y + h}, y) +
                        e.green({x.x, x.y - h}, y) - 4.0 * e.green(x, y)) /
                       (h * h);
    CHECK(std::abs(lap) < 1e-4);
    CHECK(e.green(x, y) == doctest::Approx(e.green(y, x)).epsilon(1e-10));
    CHECK(e.green(x, y) > 0.0);
  }
  CHECK(std::abs(e.green({0.0, 1.0}, y)) < 1e-12);
  // Harmonic measure: the Martin kernel integrates to 1 over the boundary.
  const Point x{1.3, 0.9};
  double total = 0.0;
  for (Side s : r.sides()) {
    auto f = [&](double p) { return e.martin(x, r.boundary_point(s, p)); };
    total += integrate_adaptive(f, 0.0, r.side_length(s), 1e-10).value;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}
