#include "heattrace/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heattrace/errors.hpp"
#include "heattrace/quadrature.hpp"

namespace heattrace {

std::string to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "left";
}

Side side_from_string(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  if (name == "bottom") return Side::Bottom;
  if (name == "top") return Side::Top;
  throw SchemaError("unknown boundary side '" + name + "'");
}

double BoundaryQuadrature::total_weight() const {
  double sum = 0.0;
  for (const auto& node : nodes) sum += node.weight;
  return sum;
}

Domain::Domain() : Domain(DomainKind::Interval, 0.0, std::numbers::pi, 0.0, 0.0, 0.3) {}

Domain::Domain(DomainKind kind, double a, double b, double c, double d, double epsilon0)
    : kind_(kind), a_(a), b_(b), c_(c), d_(d), epsilon0_(epsilon0) {
  if (!(b_ - a_ > 0.0) || !std::isfinite(a_) || !std::isfinite(b_))
    throw InvalidArgument("domain: degenerate bounds (need a < b)");
  if (kind_ == DomainKind::Rectangle && (!(d_ - c_ > 0.0) || !std::isfinite(c_) || !std::isfinite(d_)))
    throw InvalidArgument("domain: degenerate bounds (need c < d)");
  if (!(epsilon0_ > 0.0) || !(epsilon0_ < half_min_side()))
    throw InvalidArgument("domain: epsilon0 must lie in (0, half the minimal side)");
  plateau_ = std::min(2.0 * epsilon0_, half_min_side());
}

Domain Domain::interval(double a, double b, double epsilon0) {
  return Domain(DomainKind::Interval, a, b, 0.0, 0.0, epsilon0);
}

Domain Domain::rectangle(double a, double b, double c, double d, double epsilon0) {
  return Domain(DomainKind::Rectangle, a, b, c, d, epsilon0);
}

double Domain::half_min_side() const {
  const double w = 0.5 * (b_ - a_);
  return kind_ == DomainKind::Interval ? w : std::min(w, 0.5 * (d_ - c_));
}

std::vector<Side> Domain::sides() const {
  if (kind_ == DomainKind::Interval) return {Side::Left, Side::Right};
  return {Side::Left, Side::Right, Side::Bottom, Side::Top};
}

double Domain::side_length(Side side) const {
  if (kind_ == DomainKind::Interval) return 1.0;
  return (side == Side::Left || side == Side::Right) ? height() : width();
}

double Domain::surface_measure() const {
  return kind_ == DomainKind::Interval ? 2.0 : 2.0 * (width() + height());
}

bool Domain::contains(Point p) const {
  if (!(p.x > a_ && p.x < b_)) return false;
  return kind_ == DomainKind::Interval || (p.y > c_ && p.y < d_);
}

bool Domain::contains_closure(Point p) const {
  if (!(p.x >= a_ && p.x <= b_)) return false;
  return kind_ == DomainKind::Interval || (p.y >= c_ && p.y <= d_);
}

void Domain::check_inside_closure(Point p, const char* op) const {
  if (!contains_closure(p))
    throw InvalidArgument(std::string(op) + ": point outside the closure of the domain");
}

double Domain::delta(Point p) const {
  check_inside_closure(p, "delta");
  double dist = std::min(p.x - a_, b_ - p.x);
  if (kind_ == DomainKind::Rectangle) dist = std::min({dist, p.y - c_, d_ - p.y});
  return dist;
}

BoundaryPoint Domain::boundary_point(Side side, double param) const {
  BoundaryPoint z;
  z.side = side;
  z.param = param;
  if (kind_ == DomainKind::Interval) {
    if (side != Side::Left && side != Side::Right)
      throw InvalidArgument("boundary_point: an interval has only left and right ends");
    z.param = 0.0;
    z.location = {side == Side::Left ? a_ : b_, 0.0};
    z.inner_normal = {side == Side::Left ? 1.0 : -1.0, 0.0};
    return z;
  }
  if (param < 0.0 || param > side_length(side))
    throw InvalidArgument("boundary_point: arclength parameter outside the side");
  switch (side) {
    case Side::Left:
      z.location = {a_, c_ + param};
      z.inner_normal = {1.0, 0.0};
      break;
    case Side::Right:
      z.location = {b_, c_ + param};
      z.inner_normal = {-1.0, 0.0};
      break;
    case Side::Bottom:
      z.location = {a_ + param, c_};
      z.inner_normal = {0.0, 1.0};
      break;
    case Side::Top:
      z.location = {a_ + param, d_};
      z.inner_normal = {0.0, -1.0};
      break;
  }
  return z;
}

BoundaryPoint Domain::foot_point(Point p) const {
  check_inside_closure(p, "foot_point");
  if (kind_ == DomainKind::Interval)
    return boundary_point(p.x - a_ <= b_ - p.x ? Side::Left : Side::Right, 0.0);
  const double dl = p.x - a_;
  const double dr = b_ - p.x;
  const double db = p.y - c_;
  const double dt = d_ - p.y;
  const double m = std::min({dl, dr, db, dt});
  if (m == dl) return boundary_point(Side::Left, p.y - c_);
  if (m == dr) return boundary_point(Side::Right, p.y - c_);
  if (m == db) return boundary_point(Side::Bottom, p.x - a_);
  return boundary_point(Side::Top, p.x - a_);
}

Profile Domain::distance_blend(double dist) const {
  if (dist <= epsilon0_) return {dist, 1.0, 0.0};
  const double plateau_value = 1.5 * epsilon0_;
  if (dist >= plateau_) return {plateau_value, 0.0, 0.0};
  // Quintic matching value, slope 1 and curvature 0 at epsilon0 to the
  // plateau with zero slope and curvature at plateau_distance.
  const double len = plateau_ - epsilon0_;
  const double s = (dist - epsilon0_) / len;
  const double rise = plateau_value - epsilon0_ - len;
  const double slope_end = -len;
  const double c3 = 10.0 * rise - 4.0 * slope_end;
  const double c4 = 7.0 * slope_end - 15.0 * rise;
  const double c5 = 6.0 * rise - 3.0 * slope_end;
  const double s2 = s * s;
  const double s3 = s2 * s;
  Profile out;
  out.value = epsilon0_ + len * s + c3 * s3 + c4 * s3 * s + c5 * s3 * s2;
  out.d1 = (len + 3.0 * c3 * s2 + 4.0 * c4 * s3 + 5.0 * c5 * s3 * s) / len;
  out.d2 = (6.0 * c3 * s + 12.0 * c4 * s2 + 20.0 * c5 * s3) / (len * len);
  return out;
}

Profile Domain::normal_cutoff(double dist) const {
  if (dist <= epsilon0_) return {1.0, 0.0, 0.0};
  if (dist >= plateau_) return {0.0, 0.0, 0.0};
  const double len = plateau_ - epsilon0_;
  const double s = (dist - epsilon0_) / len;
  const double s2 = s * s;
  Profile out;
  out.value = 1.0 - s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
  out.d1 = -30.0 * s2 * (1.0 - 2.0 * s + s2) / len;
  out.d2 = -60.0 * s * (1.0 - 3.0 * s + 2.0 * s2) / (len * len);
  return out;
}

DeltaBar Domain::delta_bar(Point p) const {
  if (!contains(p)) throw InvalidArgument("delta_bar: point outside the domain");
  const double dist = delta(p);
  const Profile phi = distance_blend(dist);
  const BoundaryPoint z = foot_point(p);
  DeltaBar out;
  out.value = phi.value;
  out.gradient = {phi.d1 * z.inner_normal.x, phi.d1 * z.inner_normal.y};
  // delta is affine on each piece, so only the blend's curvature survives.
  out.laplacian = phi.d2;
  return out;
}

double Domain::normal_extension(const BoundaryFunction& h, Point p, double t) const {
  check_inside_closure(p, "normal_extension");
  const double dist = delta(p);
  const double chi = normal_cutoff(dist).value;
  if (chi == 0.0) return 0.0;
  return chi * h(foot_point(p), t);
}

BoundaryQuadrature Domain::shrunken_boundary(double epsilon, int nodes_per_side) const {
  if (!(epsilon > 0.0) || epsilon > epsilon0_)
    throw InvalidArgument("shrunken_boundary: epsilon must lie in (0, epsilon0]");
  BoundaryQuadrature q;
  q.epsilon = epsilon;
  if (kind_ == DomainKind::Interval) {
    BoundaryPoint left = boundary_point(Side::Left, 0.0);
    left.location.x = a_ + epsilon;
    BoundaryPoint right = boundary_point(Side::Right, 0.0);
    right.location.x = b_ - epsilon;
    q.nodes.push_back({left, 1.0});
    q.nodes.push_back({right, 1.0});
    return q;
  }
  const GaussRule rule = gauss_legendre(nodes_per_side);
  for (Side side : sides()) {
    const bool vertical = side == Side::Left || side == Side::Right;
    const double len = (vertical ? height() : width()) - 2.0 * epsilon;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double param = 0.5 * len * (1.0 + rule.nodes[i]);
      BoundaryPoint z;
      z.side = side;
      z.param = param;
      switch (side) {
        case Side::Left:
          z.location = {a_ + epsilon, c_ + epsilon + param};
          z.inner_normal = {1.0, 0.0};
          break;
        case Side::Right:
          z.location = {b_ - epsilon, c_ + epsilon + param};
          z.inner_normal = {-1.0, 0.0};
          break;
        case Side::Bottom:
          z.location = {a_ + epsilon + param, c_ + epsilon};
          z.inner_normal = {0.0, 1.0};
          break;
        case Side::Top:
          z.location = {a_ + epsilon + param, d_ - epsilon};
          z.inner_normal = {0.0, -1.0};
          break;
      }
      q.nodes.push_back({z, 0.5 * len * rule.weights[i]});
    }
  }
  return q;
}

Domain Domain::shrunken(double epsilon) const {
  if (kind_ != DomainKind::Interval) throw InvalidArgument("shrunken: intervals only");
  if (!(epsilon > 0.0) || epsilon > epsilon0_)
    throw InvalidArgument("shrunken: epsilon must lie in (0, epsilon0]");
  const double half = 0.5 * (width() - 2.0 * epsilon);
  return interval(a_ + epsilon, b_ - epsilon, std::min(epsilon0_, 0.45 * half));
}

}  // namespace heattrace
