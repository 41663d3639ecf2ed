#include <cmath>
#include <numbers>

#include "doctest.h"
#include "heattrace/domain.hpp"
#include "heattrace/errors.hpp"

using namespace heattrace;
using std::numbers::pi;

TEST_CASE("make_domain accepts the canonical instances and rejects bad geometry") {
  const Domain d = Domain::interval(0.0, pi, 0.3);
  CHECK(d.dimension() == 1);
  CHECK(Domain().epsilon0() == doctest::Approx(0.3));
  CHECK(Domain().b() == doctest::Approx(pi));
  CHECK_THROWS_AS(Domain::interval(0.0, 0.0, 0.3), InvalidArgument);
  CHECK_THROWS_AS(Domain::interval(0.0, pi, 1.6), InvalidArgument);
  CHECK_THROWS_AS(Domain::interval(0.0, pi, 0.0), InvalidArgument);
  const Domain r = Domain::rectangle(0.0, pi, 0.0, pi, 0.3);
  CHECK(r.dimension() == 2);
  CHECK_THROWS_AS(Domain::rectangle(0.0, pi, 1.0, 1.0, 0.3), InvalidArgument);
}

TEST_CASE("delta is the distance to the nearest boundary piece") {
  const Domain d;
  CHECK(d.delta({0.2}) == doctest::Approx(0.2));
  CHECK(d.delta({pi / 2}) == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(d.delta({-0.1}), InvalidArgument);
  const Domain r = Domain::rectangle(0.0, pi, 0.0, pi, 0.3);
  CHECK(r.delta({0.1, 1.0}) == doctest::Approx(0.1));
}

TEST_CASE("delta_bar equals delta near the boundary") {
  const Domain d;
  const DeltaBar left = d.delta_bar({0.1});
  CHECK(left.value == doctest::Approx(0.1));
  CHECK(left.gradient.x == doctest::Approx(1.0));
  CHECK(left.laplacian == doctest::Approx(0.0));
  const DeltaBar right = d.delta_bar({pi - 0.05});
  CHECK(right.value == doctest::Approx(0.05));
  CHECK(right.gradient.x == doctest::Approx(-1.0));
  CHECK_THROWS_AS(d.delta_bar({0.0}), InvalidArgument);
}

TEST_CASE("delta_bar blend: derivatives agree with finite differences, value positive") {
  const Domain d;
  const double h = 1e-4;
  for (double x = 0.02; x < pi - 0.02; x += 0.0137) {
    const DeltaBar c = d.delta_bar({x});
    CHECK(c.value > 0.0);
    CHECK(c.value <= 1.5 * d.epsilon0() + 1e-14);
    const double fp = d.delta_bar({x + h}).value;
    const double fm = d.delta_bar({x - h}).value;
    CHECK(c.gradient.x == doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-5));
    const double gp = d.delta_bar({x + h}).gradient.x;
    const double gm = d.delta_bar({x - h}).gradient.x;
    CHECK(c.laplacian == doctest::Approx((gp - gm) / (2 * h)).epsilon(1e-4).scale(1.0));
  }
  // Midpoint sits on the plateau of the documented blend.
  const DeltaBar mid = d.delta_bar({pi / 2});
  CHECK(mid.value == doctest::Approx(0.45));
  CHECK(mid.gradient.x == doctest::Approx(0.0));
}

TEST_CASE("foot points reconstruct x = z + delta N_z within epsilon0") {
  const Domain r = Domain::rectangle(0.0, pi, 0.0, 2.0, 0.3);
  for (double x = 0.01; x < pi; x += 0.173)
    for (double y = 0.01; y < 2.0; y += 0.131) {
      if (r.delta({x, y}) > r.epsilon0()) continue;
      const BoundaryPoint z = r.foot_point({x, y});
      const double dist = r.delta({x, y});
      CHECK(z.location.x + dist * z.inner_normal.x == doctest::Approx(x).epsilon(1e-15));
      CHECK(z.location.y + dist * z.inner_normal.y == doctest::Approx(y).epsilon(1e-15));
      CHECK(std::hypot(z.inner_normal.x, z.inner_normal.y) == 1.0);
    }
}

TEST_CASE("shrunken_boundary nodes, normals and weights") {
  const Domain d;
  const BoundaryQuadrature q = d.shrunken_boundary(0.1);
  REQUIRE(q.nodes.size() == 2);
  CHECK(q.nodes[0].point.location.x == doctest::Approx(0.1));
  CHECK(q.nodes[0].point.inner_normal.x == 1.0);
  CHECK(q.nodes[1].point.location.x == doctest::Approx(pi - 0.1));
  CHECK(q.nodes[1].point.inner_normal.x == -1.0);
  CHECK(q.total_weight() == 2.0);
  CHECK_THROWS_AS(d.shrunken_boundary(0.4), InvalidArgument);

  const Domain r = Domain::rectangle(0.0, pi, 0.0, pi, 0.3);
  for (double eps : {0.01, 0.1, 0.3}) {
    const BoundaryQuadrature qr = r.shrunken_boundary(eps);
    CHECK(qr.total_weight() == doctest::Approx(4.0 * (pi - 2 * eps)).epsilon(1e-13));
  }
}

TEST_CASE("normal_extension is constant along normals near the boundary") {
  const Domain d;
  const BoundaryFunction h = [](const BoundaryPoint& z, double) { return z.side == Side::Left ? 1.0 : 0.0; };
  CHECK(d.normal_extension(h, {0.05}, 0.5) == 1.0);
  CHECK(d.normal_extension(h, {pi - 0.05}, 0.5) == 0.0);
  for (double x = 0.0; x <= d.epsilon0(); x += 0.01) CHECK(d.normal_extension(h, {x}, 0.5) == 1.0);
  const double mid = d.normal_extension(h, {pi / 2}, 0.5);
  CHECK(mid >= 0.0);
  CHECK(mid <= 1.0);
  CHECK(d.normal_extension(h, {0.45}, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("side names round trip") {
  for (Side s : {Side::Left, Side::Right, Side::Bottom, Side::Top}) CHECK(side_from_string(to_string(s)) == s);
}
