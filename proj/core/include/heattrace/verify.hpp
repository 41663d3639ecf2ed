#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "heattrace/domain.hpp"
#include "heattrace/kernels.hpp"
#include "heattrace/measures.hpp"
#include "heattrace/representation.hpp"
#include "heattrace/traces.hpp"

namespace heattrace {

// ---------------------------------------------------------------------------
// Finite-difference oracle

/// Crank-Nicolson for u_t = u_xx on an interval with Dirichlet data. The first
/// `rannacher_steps` steps are each replaced by two implicit Euler half steps,
/// which damps the modes excited by incompatible or measure-valued data.
struct FDOptions {
  double h = 1.0 / 256.0;  // target space step; the grid uses round(L / h) panels
  double k = 1.0 / 256.0;  // target time step; the grid uses ceil(T / k) steps
  int rannacher_steps = 2;
};

/// Initial density, interior atoms (mollified on the grid) and boundary values.
struct FDData {
  std::function<double(double)> initial;
  std::vector<InteriorAtom> atoms;
  std::function<double(double)> left;
  std::function<double(double)> right;
};

/// FD data of a triple on an interval: mu densities as initial data, mu atoms
/// as hats of half-width 2h rescaled to the exact discrete mass, nu densities
/// as boundary values. Throws InvalidArgument for lambda or atoms of nu,
/// which have no Dirichlet-data counterpart.
FDData fd_data(const TraceTriple& triple, const Domain& domain);

class FDSolution {
 public:
  FDSolution(double a, double h, int panels, double k, int steps, std::vector<double> values);

  double a() const { return a_; }
  double h() const { return h_; }
  double k() const { return k_; }
  int panels() const { return panels_; }
  int steps() const { return steps_; }
  /// Node value at space index i and time index j.
  double node(int i, int j) const { return values_[static_cast<std::size_t>(j) * (panels_ + 1) + i]; }
  double min_value() const;
  /// Bilinear interpolation in (x, t).
  double at(double x, double t) const;
  /// The interpolant as a field with zero error estimate.
  SolutionField field(const Domain& domain, double horizon) const;

 private:
  double a_, h_, k_;
  int panels_, steps_;
  std::vector<double> values_;
};

/// Throws NumericalFailure when the solution stops being finite or exceeds the
/// maximum principle bound of the data.
FDSolution fd_solve(const Domain& domain, const FDData& data, double horizon, FDOptions options = {});

// ---------------------------------------------------------------------------
// Suite reports

enum class CheckStatus { Pass, Fail, Info };

struct CheckResult {
  std::string name;
  std::string anchor;  // the statement the check exercises
  CheckStatus status = CheckStatus::Pass;
  double measured = 0.0;
  double tolerance = 0.0;
  double runtime_seconds = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
  void append(const SuiteReport& other);
  /// Canonical order: by name, stable for equal names.
  void sort();
};

/// JSON document; timings are omitted unless requested so that reports are
/// reproducible byte for byte.
std::string report_json(const SuiteReport& report, bool with_timing = false);
/// Fixed-width table with one line per check, timings included.
std::string report_table(const SuiteReport& report);

/// Deterministic uniform numbers in [0, 1) from a 64-bit seed.
class ProbeSampler {
 public:
  explicit ProbeSampler(std::uint64_t seed);
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Checks

struct BoundProbe {
  Point x;
  double s = 0.0;
  double t = 0.0;
  double epsilon = 0.0;
};

/// `count` probes with t in [0.2 T, 0.95 T], s in [0.2 t, 0.8 t], epsilon
/// drawn from {0.3, 0.15, 0.05} capped by epsilon0, and x inside Omega_eps.
std::vector<BoundProbe> random_bound_probes(const Domain& domain, double horizon, int count, std::uint64_t seed);

struct BoundsOptions {
  double tolerance = 1e-8;  // quadrature tolerance per integral
  /// Absolute slack added to the certified errors (doubled per the safety factor).
  double floor = 1e-10;
};

/// At every probe: the shrunken bottom integral and the shrunken lateral
/// integral are each at most u(x, t); their sum reproduces u(x, t); the full
/// bottom integral from time s is at most u(x, t). All up to twice the summed
/// error estimates.
SuiteReport check_bounds(const SolutionField& u, const std::vector<BoundProbe>& probes, BoundsOptions options = {});

/// The three monitored quantities along the schedules, each required to be
/// bounded (sequence_bounded); the unweighted mass is reported as information.
/// Each entry reports the last increment against max(slack, 0.8 times the
/// previous increment).
SuiteReport check_boundedness(const SolutionField& u, double t1, const ExtractionSchedule& schedule,
                              double slack = 1e-6);

/// Shrinking-boundary lateral integral against the exact kernel pairing of nu:
/// monotone error decay down to `noise_floor` and final error within `tolerance`.
SuiteReport check_shrinking_limit(const SolutionField& u, const LateralMeasure& nu, Point x, double s, double t,
                          const std::vector<double>& epsilons, double tolerance = 1e-3,
                          double noise_floor = 1e-9);

/// H(x, .) is non-increasing along the schedule times at every probe point;
/// each increase must stay within the reported quadrature errors.
SuiteReport check_h_monotone(const SolutionField& u, const LateralMeasure& nu, double t1,
                             const std::vector<double>& xs, const std::vector<double>& times);

/// Five cubic time bumps with different supports and side weights (intervals).
std::vector<BoundaryTestFunction> standard_boundary_tests(const Domain& domain, double horizon);

/// Shrinking-boundary pairing and the delta_bar identity agree within
/// `relative` for every h.
SuiteReport check_lateral_uniqueness(const SolutionField& u, const std::vector<BoundaryTestFunction>& hs,
                                     const ExtractionSchedule& schedule, double relative = 0.01);

struct RoundtripOptions {
  ExtractionSchedule schedule = ExtractionSchedule::geometric(0.3, 8, 0.004, 8);
  TraceOptions traces;
  double mu_relative = 0.02;
  double lambda_absolute = 1e-3;
  double nu_relative = 0.02;
  double leakage = 1e-3;
};

/// Builds u from the triple, optionally passes it through `mutate`, extracts
/// the traces and compares them with the triple. Also checks that the
/// nu-only part has zero initial trace and the (mu, lambda)-only part has
/// zero lateral trace.
SuiteReport roundtrip(const TraceTriple& triple, const Domain& domain, RoundtripOptions options = {},
                      const std::function<SolutionField(const SolutionField&)>& mutate = {});

struct OracleOptions {
  FDOptions fd;
  int probes = 20;
  double t_lo = 0.05;
  double t_hi = 1.0;
  /// Error relative to the largest |u| over the probes.
  double tolerance = 1e-3;
  /// Tolerance used when atoms of mu are mollified.
  double atom_tolerance = 1e-2;
  std::uint64_t seed = 1;
  RepresentationOptions representation;
};

/// Representation formula against the finite-difference oracle at random
/// interior probes.
SuiteReport oracle_compare(const TraceTriple& triple, const Domain& domain, OracleOptions options = {},
                           const std::function<SolutionField(const SolutionField&)>& mutate = {});

/// Optional perturbation of kernel values seen by the kernel suite:
/// (representation, x, y, lag, value) -> value.
using KernelHook = std::function<double(Representation, double, double, double, double)>;

struct KernelSuiteOptions {
  int probes = 100;
  std::uint64_t seed = 7;
  double semigroup_tolerance = 1e-8;
  double min_lag = 0.01;
  double max_lag = 1.0;
};

/// Semigroup, symmetry, positivity and spectral-versus-image agreement of the
/// interval kernel on random probe tuples.
SuiteReport check_kernels(const Domain& domain, KernelSuiteOptions options = {}, const KernelHook& hook = {});

// ---------------------------------------------------------------------------
// Fixtures and fault injection

struct NamedTriple {
  std::string name;
  TraceTriple triple;
};

/// eigenfunction (sin dy, 0, 0); corner-atom (0, 0.3 at the left end, 0);
/// boundary-one (0, 0, 1 dt on both ends); lateral-ramp (0, 0, smoothstep in
/// t on both ends); lateral-atom (0, 0, atom 1 at (left, 0.45)); interior-atom
/// (atom 1 at pi/2); blowup (delta^-1 dy). All on (0, pi) with T = 1.
std::vector<NamedTriple> standard_fixtures();
TraceTriple fixture(const std::string& name);

/// Field transforms used to show that each check can fail.
namespace mutations {
/// u halved where |x - center| < radius and t > t_from.
SolutionField halve_region(const SolutionField& u, double center, double radius, double t_from);
SolutionField scale(const SolutionField& u, double factor);
/// u (1 + c / sqrt(t)): the masses blow up as t -> 0 while staying
/// integrable in time.
SolutionField time_blowup(const SolutionField& u, double c);
/// u delta(x)^-power: for power in (1, 2) the lateral flux of a field
/// vanishing linearly at the boundary blows up as eps -> 0.
SolutionField boundary_blowup(const SolutionField& u, double power);
/// u (1 + a cos(pi log2(delta / eps0))): alternating errors along halving eps.
SolutionField layer_oscillation(const SolutionField& u, double amplitude);
/// u (1 + a t): w grows in t, so H increases.
SolutionField time_growth(const SolutionField& u, double amplitude);
/// u (1 + a q(delta)) with a bump q supported on epsilon0 < delta < plateau:
/// changes the identity integral but not the shrinking limit.
SolutionField interior_band(const SolutionField& u, double amplitude);
}  // namespace mutations

struct FaultCase {
  std::string check;
  std::string mutation;
  bool baseline_passed = false;  // the unmutated check passes
  bool caught = false;           // the mutated check fails
  double runtime_seconds = 0.0;
};

/// Runs every check on a fixture it passes and again under its targeted
/// mutation.
std::vector<FaultCase> fault_injection(const Domain& domain);

}  // namespace heattrace
