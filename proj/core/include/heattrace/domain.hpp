#pragma once

#include <functional>
#include <string>
#include <vector>

namespace heattrace {

enum class DomainKind { Interval, Rectangle };

/// Boundary components. An interval uses Left/Right only; a rectangle uses
/// all four sides (Left: x = a, Right: x = b, Bottom: y = c, Top: y = d).
enum class Side { Left, Right, Bottom, Top };

std::string to_string(Side side);
Side side_from_string(const std::string& name);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct BoundaryPoint {
  Side side = Side::Left;
  double param = 0.0;  // arclength from the side's start (always 0 on an interval)
  Point location;
  Point inner_normal;
};

struct BoundaryNode {
  BoundaryPoint point;
  double weight = 0.0;
};

/// Quadrature over the boundary of the shrunken domain {delta > epsilon}.
struct BoundaryQuadrature {
  double epsilon = 0.0;
  std::vector<BoundaryNode> nodes;
  double total_weight() const;
};

/// Value with first and second derivative of a radial profile in the
/// distance variable.
struct Profile {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct DeltaBar {
  double value = 0.0;
  Point gradient;
  double laplacian = 0.0;
};

/// h(z, t) on the lateral boundary.
using BoundaryFunction = std::function<double(const BoundaryPoint&, double)>;

class Domain {
 public:
  /// Canonical instance: the interval (0, pi) with epsilon0 = 0.3.
  Domain();

  static Domain interval(double a, double b, double epsilon0);
  static Domain rectangle(double a, double b, double c, double d, double epsilon0);

  DomainKind kind() const { return kind_; }
  int dimension() const { return kind_ == DomainKind::Interval ? 1 : 2; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }
  double epsilon0() const { return epsilon0_; }
  double width() const { return b_ - a_; }
  double height() const { return d_ - c_; }
  double half_min_side() const;
  /// Distance at which the smooth distance blend reaches its plateau:
  /// min(2 epsilon0, half the minimal side).
  double plateau_distance() const { return plateau_; }

  std::vector<Side> sides() const;
  /// Side length of the boundary component (1 for the interval end points,
  /// so that counting measure and arclength agree).
  double side_length(Side side) const;
  double surface_measure() const;

  bool contains(Point p) const;         // open domain
  bool contains_closure(Point p) const;

  /// Euclidean distance to the boundary; throws outside the closure.
  double delta(Point p) const;
  /// Smooth positive extension of delta: equals delta within epsilon0 of the
  /// boundary, quintic blend to a plateau of 1.5 epsilon0 in the interior.
  DeltaBar delta_bar(Point p) const;
  /// Nearest boundary point z(x) with x = z + delta(x) N_z.
  BoundaryPoint foot_point(Point p) const;
  BoundaryPoint boundary_point(Side side, double param) const;

  BoundaryQuadrature shrunken_boundary(double epsilon, int nodes_per_side = 16) const;

  /// Blend phi(dist) used by delta_bar, as a function of the distance.
  Profile distance_blend(double dist) const;
  /// Cutoff chi(dist): 1 for dist <= epsilon0, 0 for dist >= plateau_distance,
  /// C2 quintic smoothstep between.
  Profile normal_cutoff(double dist) const;
  /// chi(delta(x)) * h(z(x), t): constant along inner normals within
  /// epsilon0 of the boundary, zero from plateau_distance inward.
  double normal_extension(const BoundaryFunction& h, Point p, double t) const;

  /// The shrunken interval (a + eps, b - eps); only for intervals.
  Domain shrunken(double epsilon) const;

 private:
  Domain(DomainKind kind, double a, double b, double c, double d, double epsilon0);
  void check_inside_closure(Point p, const char* op) const;

  DomainKind kind_ = DomainKind::Interval;
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
  double d_ = 0.0;
  double epsilon0_ = 0.0;
  double plateau_ = 0.0;
};

}  // namespace heattrace
