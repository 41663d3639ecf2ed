#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "heattrace/function_ref.hpp"

namespace heattrace {

using Integrand = FunctionRef<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  // converged implies error_estimate <= requested tolerance.
  bool converged = true;
  // Set by integrate_graded when panel contributions stop decaying.
  bool diverged = false;
  // Set by integrate_lateral_time when the envelope alone certifies the result.
  bool early_exit = false;

  QuadratureResult& operator+=(const QuadratureResult& other);
};

struct AdaptiveOptions {
  std::size_t max_subdivisions = 2000;
};

/// Globally adaptive bisection with the 7/15 Gauss-Kronrod pair. Error per
/// panel is |K15 - G7| floored at a roundoff estimate, so the reported error
/// is conservative for smooth integrands. `tol` is absolute.
QuadratureResult integrate_adaptive(Integrand f, double a, double b, double tol,
                                    AdaptiveOptions options = {});

/// Same as integrate_adaptive but splits [a,b] at the given interior points
/// first (points outside (a,b) are ignored).
QuadratureResult integrate_adaptive(Integrand f, double a, double b, double tol,
                                    std::span<const double> breakpoints,
                                    AdaptiveOptions options = {});

/// One non-adaptive 15-point Kronrod panel with its |K15 - G7| estimate.
QuadratureResult gauss_kronrod_panel(Integrand f, double a, double b);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

/// Fixed composite Gauss-Legendre: `panels` equal panels, `n` points each.
double integrate_gauss_legendre(Integrand f, double a, double b, int n, int panels = 1);

/// Envelope C1 * sigma^{-(n+1)/2} * exp(-C2 * d^2 / sigma), sigma = t - tau,
/// dominating a lateral-kernel integrand on (s, t).
struct LateralProfile {
  int dimension = 1;      // n, 1 or 2
  double distance = 0.0;  // d > 0
  double amplitude = 1.0; // C1
  double decay = 0.25;    // C2

  double envelope(double sigma) const;
  /// Closed form of the envelope integrated over sigma in (0, span).
  double envelope_integral(double span) const;
};

/// Integrates f(tau) over (s, t) when f carries the singular-decay layer
/// (t - tau)^{-(n+1)/2} exp(-c/(t - tau)) at tau = t. Uses v = 1/(t - tau),
/// integrated on a logarithmic v scale, truncated where the envelope tail
/// drops below tol/4. Returns early with value 0 when the whole envelope
/// integral is below tol/2. `breakpoints` are tau values where f is not smooth.
QuadratureResult integrate_lateral_time(Integrand f, double s, double t,
                                        const LateralProfile& profile, double tol,
                                        std::span<const double> breakpoints = {});

enum class GradedEnd { Left, Right, Both };

/// Integrates f over [a, b] when f blows up like dist^{-alpha} at the graded
/// end(s). Uses a geometric panel mesh with ratio 2^{-(1 + alpha/2)} toward
/// the end and a geometric tail estimate; reports diverged when panel
/// contributions stop decaying.
QuadratureResult integrate_graded(Integrand f, double a, double b, double alpha, double tol,
                                  GradedEnd end = GradedEnd::Left);

/// E_1(x) = int_x^inf e^{-v}/v dv, x > 0.
double exponential_integral_e1(double x);

}  // namespace heattrace
