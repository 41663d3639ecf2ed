#pragma once

#include <functional>
#include <string>
#include <vector>

#include "heattrace/domain.hpp"
#include "heattrace/kernels.hpp"
#include "heattrace/measures.hpp"
#include "heattrace/representation.hpp"

namespace heattrace {

/// eta in C_0^infty of the closure, vanishing on the boundary, with the
/// derivatives the pairings need. `normal_derivative` is along the inner normal.
struct TestFunction {
  std::function<double(Point)> value;
  std::function<Point(Point)> gradient;
  std::function<double(Point)> laplacian;
  std::function<double(const BoundaryPoint&)> normal_derivative;

  /// sin(k pi (x - a) / L) on an interval.
  static TestFunction sine_mode(const Domain& domain, int k = 1);
  /// (x - a)(b - x) on an interval; inner normal derivative L at both ends.
  static TestFunction bubble(const Domain& domain);
};

/// h(z, t) on the lateral boundary, compactly supported in (t_lo, t_hi), with
/// the derivatives used by the identity for the lateral trace.
struct BoundaryTestFunction {
  std::function<double(const BoundaryPoint&, double)> value;
  std::function<double(const BoundaryPoint&, double)> time_derivative;
  /// Second derivative along the side (zero on intervals).
  std::function<double(const BoundaryPoint&, double)> tangential_second;
  double t_lo = 0.0;
  double t_hi = 0.0;

  /// amplitude(side) * q(t)^3 with q = 4 (t - t_lo)(t_hi - t) / (t_hi - t_lo)^2.
  /// On rectangles the same cubic bump in the arclength, supported away from
  /// the corners by `corner_gap`, multiplies it.
  static BoundaryTestFunction time_bump(const Domain& domain, double t_lo, double t_hi,
                                        std::vector<double> side_amplitudes, double corner_gap = 0.0);
};

/// Geometric schedules for the limits eps -> 0 and t -> 0.
struct ExtractionSchedule {
  std::vector<double> epsilons;
  std::vector<double> times;
  bool richardson = true;
  /// Number of finest levels used by the extrapolation.
  int extrapolation_levels = 4;

  /// eps_j = eps_first 2^{-j}, t_j = t_first 2^{-j}.
  static ExtractionSchedule geometric(double eps_first, int eps_levels, double t_first, int t_levels);
  /// Throws InvalidArgument unless both sequences are strictly decreasing and positive.
  void validate(const Domain& domain, double horizon) const;
};

/// A limit h -> 0 estimated from samples at decreasing h.
struct LimitEstimate {
  std::vector<double> abscissae;
  std::vector<double> samples;
  double value = 0.0;
  double residual = 0.0;  // change of the chosen extrapolant under a one-level shift
  int order = 0;          // polynomial degree of the chosen extrapolant
  bool converged = true;
  std::string name;
};

/// Neville extrapolation to h = 0 with polynomials in h of degree below
/// `levels` through the smallest abscissae, the degree chosen by the smallest
/// shift estimate; with richardson = false the finest sample.
LimitEstimate extrapolate_to_zero(std::vector<double> abscissae, std::vector<double> samples, int levels,
                                  bool richardson = true, double tolerance = 1e-6);

/// lim_{t -> 0} int eta u(., t) dx (intervals).
LimitEstimate pair_initial_trace(const SolutionField& u, const TestFunction& eta,
                                 const ExtractionSchedule& schedule, double tolerance = 1e-9);

/// w(x, t) = int G(x, y) u(y, t) dy with the elliptic Green function (interval).
FieldValue green_potential(const SolutionField& u, double t, Point x, double tolerance = 1e-10);
/// w(., t) at every node of a uniform grid with n panels on the interval
/// (end points included, where w = 0).
std::vector<double> green_potential_grid(const SolutionField& u, double t, int panels,
                                         double tolerance = 1e-10);

/// H(x, t) = w(x, t) + iint_{boundary x (t, T1)} M(x, y) d nu with the
/// elliptic Martin kernel M (interval).
FieldValue H_function(const SolutionField& u, const LateralMeasure& nu, double t1, Point x, double t,
                      double tolerance = 1e-10);

struct RieszMartinOptions {
  /// Relative noise allowed in the superharmonicity test.
  double tolerance = 1e-6;
  /// Atom threshold: second-difference spike over the neighbouring median.
  double spike_ratio = 3.0;
  /// Absolute floor below which spikes are treated as noise (mass units).
  double spike_floor = 1e-3;
  /// Nodes used to extrapolate w* to each end.
  int end_nodes = 4;
};

struct RieszMartinResult {
  InteriorMeasure mu;
  CornerMeasure lambda;
  double lambda_left = 0.0;
  double lambda_right = 0.0;
  std::vector<double> density;  // -D2 w* at the grid nodes (ends extrapolated)
  double most_negative = 0.0;   // smallest second-difference density seen
};

/// Decomposes w* (samples at a + i L / n, i = 0..n; the end samples are
/// ignored) into a Green potential of mu and the Martin integral of lambda.
/// Throws AdmissibilityError when -D2 w* is negative beyond the noise.
RieszMartinResult riesz_martin_decompose_1d(const Domain& domain, const std::vector<double>& w_star,
                                            RieszMartinOptions options = {});

struct LateralExtractionOptions {
  int bins = 16;
  double t_begin_fraction = 0.05;
  double t_end_fraction = 0.95;
  double tolerance = 1e-9;
  /// Spike threshold for atomic nu (bin mass over the neighbouring median).
  double spike_ratio = 3.0;
};

struct LateralBin {
  Side side = Side::Left;
  double t_lo = 0.0;
  double t_hi = 0.0;
  LimitEstimate mass;
};

struct LateralExtraction {
  std::vector<LateralBin> bins;
  LateralMeasure measure;  // histogram densities plus detected atoms
};

/// Shrinking-boundary extraction of nu on uniform time bins (intervals):
/// int_bin u(z_eps, tau) dtau at every schedule epsilon, extrapolated to 0.
LateralExtraction extract_lateral_shrinking(const SolutionField& u, const ExtractionSchedule& schedule,
                                            LateralExtractionOptions options = {});

/// lim_{eps -> 0} int_0^T sum_{sides} u(z_eps, tau) h(z, tau) dtau (intervals).
LimitEstimate lateral_pairing_shrinking(const SolutionField& u, const BoundaryTestFunction& h,
                                        const ExtractionSchedule& schedule, double tolerance = 1e-9);

/// iint h d nu = -iint u (psi_t + Laplace psi) with psi = delta_bar * h_bar,
/// where h_bar is the normal extension of h. On rectangles h must vanish
/// within plateau_distance of the corners.
FieldValue lateral_identity(const SolutionField& u, const BoundaryTestFunction& h, double tolerance = 1e-8);

/// iint_{boundary x (s, t)} dG/dN_y(x, t; y, tau) d nu(y, tau) (exact pairing).
FieldValue lateral_kernel_pairing(const LateralMeasure& nu, const HeatKernel& kernel, Point x, double s,
                                  double t, double tolerance = 1e-10);

struct ShrinkingTable {
  std::vector<double> epsilons;
  std::vector<double> left_side;  // int_s^t int_{boundary Omega_eps} dG_eps/dN u
  std::vector<double> errors;     // |left_side - right_side|
  double right_side = 0.0;
  double right_error = 0.0;
};

ShrinkingTable shrinking_table(const SolutionField& u, const LateralMeasure& nu, const HeatKernel& kernel,
                           Point x, double s, double t, const std::vector<double>& epsilons,
                           double tolerance = 1e-9);

struct BoundednessTables {
  LimitEstimate weighted_mass;    // int u(., t) delta dx along the times
  LimitEstimate unweighted_mass;  // int u(., t) dx along the times
  LimitEstimate lateral_flux;     // int_0^T1 sum u(z_eps, tau) dtau along the epsilons
  LimitEstimate space_time_mass;  // int_{t_j}^{T1} int_{Omega_eps_j} u along both schedules
};

/// The three monitored quantities of the boundedness estimates (intervals). The
/// space-time mass uses the torsion function of the shrunken interval.
BoundednessTables boundedness_tables(const SolutionField& u, double t1, const ExtractionSchedule& schedule,
                                     double tolerance = 1e-8);

/// True when the samples are finite and their increments either fall below
/// `slack` or shrink geometrically (last over previous at most `max_ratio`).
bool sequence_bounded(const LimitEstimate& table, double slack, double max_ratio = 0.8);

struct TraceReport {
  InteriorMeasure mu_estimate;
  CornerMeasure lambda_estimate;
  LateralMeasure nu_estimate;
  std::vector<double> grid;            // nodes used for w*
  std::vector<double> w_star;          // extrapolated Green potential
  std::vector<LimitEstimate> diagnostics;
  std::vector<LateralBin> lateral_bins;
  bool converged = true;
};

struct TraceOptions {
  int panels = 64;
  double tolerance = 1e-9;
  RieszMartinOptions riesz;
  LateralExtractionOptions lateral;
};

/// Full extraction of the trace triple (intervals): mu and lambda through
/// w* = lim_{t -> 0} w(., t) and its Riesz-Martin decomposition, nu through
/// shrinking boundaries.
TraceReport extract_traces(const SolutionField& u, const ExtractionSchedule& schedule, TraceOptions options = {});

/// Measure document of the estimates plus a "diagnostics" section with the
/// convergence tables.
std::string serialize_trace_report(const TraceReport& report);
/// CSV convergence tables: name,level,abscissa,value,extrapolated,residual.
std::string trace_diagnostics_csv(const TraceReport& report);

}  // namespace heattrace
