#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "heattrace/domain.hpp"
#include "heattrace/kernels.hpp"
#include "heattrace/measures.hpp"

namespace heattrace {

struct FieldValue {
  double value = 0.0;
  double error = 0.0;
};

/// A solution u(x, t) on Q_T given by a callable. `time_hints` lists times
/// where u is not smooth in t along the boundary (atom times, density
/// breakpoints) so that time quadratures can split there.
class SolutionField {
 public:
  using Evaluator = std::function<FieldValue(Point, double)>;

  SolutionField(Domain domain, double horizon, Evaluator evaluator, std::vector<double> time_hints = {},
                double earliest_time = 0.0);

  FieldValue operator()(Point x, double t) const { return evaluator_(x, t); }
  double value(Point x, double t) const { return evaluator_(x, t).value; }

  const Domain& domain() const { return domain_; }
  double horizon() const { return horizon_; }
  const std::vector<double>& time_hints() const { return time_hints_; }
  /// Smallest time at which the evaluator may be called (positive for atomic mu).
  double earliest_time() const { return earliest_time_; }

  /// Same field with every value passed through `transform(x, t, value)`;
  /// used to build deliberately broken fields for fault injection.
  SolutionField mutated(std::function<double(Point, double, double)> transform) const;

 private:
  Domain domain_;
  double horizon_;
  Evaluator evaluator_;
  std::vector<double> time_hints_;
  double earliest_time_ = 0.0;
};

struct RepresentationOptions {
  /// Absolute tolerance for one evaluation of u, split 50% bottom term,
  /// 10% corner term, 40% lateral term.
  double tolerance = 1e-9;
  /// Smallest t at which atoms of mu may be evaluated.
  double atomic_time_floor = 1e-4;
};

/// int G(x,t;y,0) d mu(y).
FieldValue evaluate_bottom_term(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                                RepresentationOptions options = {});
/// int dG/dN_y(x,t;y,0) d lambda(y).
FieldValue evaluate_corner_term(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                                RepresentationOptions options = {});
/// iint_{boundary x (0,t)} dG/dN_y(x,t;y,s) d nu(y,s).
FieldValue evaluate_lateral_term(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                                 RepresentationOptions options = {});
/// Sum of the three terms; the error estimate is the sum of theirs.
FieldValue evaluate_solution(const TraceTriple& triple, const HeatKernel& kernel, Point x, double t,
                             RepresentationOptions options = {});

/// The field x, t -> evaluate_solution(triple, ...) (captures copies).
SolutionField make_solution_field(const TraceTriple& triple, const HeatKernel& kernel,
                                  RepresentationOptions options = {});

struct InteriorParts {
  double bottom = 0.0;   // int_{Omega_eps} G_eps(x,t;y,s) u(y,s) dy
  double lateral = 0.0;  // int_s^t int_{boundary Omega_eps} dG_eps/dN u dsigma dtau
  double bottom_error = 0.0;
  double lateral_error = 0.0;

  double total() const { return bottom + lateral; }
  double error() const { return bottom_error + lateral_error; }
};

/// Interior representation of u on the shrunken cylinder Omega_eps x (s, t)
/// (intervals only).
InteriorParts interior_representation(const SolutionField& u, const HeatKernel& kernel, double epsilon,
                                      double s, Point x, double t, double tolerance = 1e-8);

/// int_Omega G(x,t;y,s) u(y,s) dy (intervals only).
FieldValue propagate(const SolutionField& u, const HeatKernel& kernel, double s, Point x, double t,
                     double tolerance = 1e-8);

/// Uniform tensor grid, end points included. y fields are used on rectangles.
struct GridSpec {
  double x_lo = 0.0, x_hi = 0.0;
  int nx = 0;
  double y_lo = 0.0, y_hi = 0.0;
  int ny = 1;
  double t_lo = 0.0, t_hi = 0.0;
  int nt = 0;

  std::vector<double> xs() const;
  std::vector<double> ys() const;
  std::vector<double> ts() const;
  std::size_t size() const;
};

/// Cached samples, ordered t-major then y then x.
struct GridField {
  GridSpec spec;
  std::vector<Point> points;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> errors;
};

/// Rejects grids leaving the open domain or (0, T].
void validate_grid(const GridSpec& spec, const Domain& domain, double horizon);
GridField evaluate_on_grid(const SolutionField& field, const GridSpec& spec, unsigned threads = 0);
/// CSV with columns x[,y],t,u,err; numbers in shortest round-trip form.
void write_grid_csv(const GridField& grid, bool with_y, std::ostream& out);

}  // namespace heattrace
