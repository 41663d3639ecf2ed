#pragma once

#include <span>
#include <vector>

#include "heattrace/domain.hpp"

namespace heattrace {

enum class Representation { Auto, Spectral, Image };

struct KernelOptions {
  /// Relative accuracy target; the absolute target is tolerance times the
  /// kernel's natural scale at the given lag.
  double tolerance = 1e-10;
  int series_cap = 2000;
  /// Dimensionless lag pi^2 (t - s) / L^2 at or above which the sine series is used.
  double switch_threshold = 0.05;
};

struct KernelValue {
  double value = 0.0;
  double error = 0.0;  // truncation tail + rounding estimate
  int terms = 0;
  Representation representation = Representation::Auto;
};

/// Rigorous truncation bound for the canonical interval (0, pi) kernel G.
/// Spectral: (2/pi) sum_{k > N} e^{-k^2 lag}, bounded by a geometric series.
/// Image: `terms_used` = image terms per family (2M + 1), Gaussian tail.
double tail_bound(Representation representation, int terms_used, double lag);

/// Dirichlet heat kernel of the interval (a, b), as a function of the lag t - s.
class IntervalHeatKernel {
 public:
  IntervalHeatKernel(double a, double b, KernelOptions options = {});

  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return length_; }
  const KernelOptions& options() const { return options_; }

  KernelValue green(double x, double y, double lag,
                    Representation representation = Representation::Auto) const;
  /// Inner-normal derivative in y at the end point `end` (Left: y = a, Right: y = b).
  KernelValue normal(double x, Side end, double lag,
                     Representation representation = Representation::Auto) const;

  /// Number of sine terms needed for G (normal = false) or dG/dN at this lag.
  int spectral_terms(double lag, bool normal) const;
  /// Image pairs M needed on each side at this lag.
  int image_pairs(double lag, bool normal) const;
  Representation choose(double lag, bool normal) const;

 private:
  KernelValue green_spectral(double x, double y, double lag) const;
  KernelValue green_image(double x, double y, double lag) const;
  KernelValue normal_left_spectral(double x, double lag) const;
  KernelValue normal_left_image(double x, double lag) const;
  double green_scale(double lag) const;
  double normal_scale(double lag) const;

  double a_;
  double b_;
  double length_;
  KernelOptions options_;
};

/// Heat Green kernel G(x,t;y,s) of Omega x R for an interval or a rectangle
/// (tensor product of interval kernels). Immutable; all methods are pure.
class HeatKernel {
 public:
  explicit HeatKernel(Domain domain, KernelOptions options = {});

  const Domain& domain() const { return domain_; }
  const KernelOptions& options() const { return options_; }

  /// G(x,t;y,s); requires x, y in the closure and s < t.
  KernelValue green(Point x, double t, Point y, double s,
                    Representation representation = Representation::Auto) const;
  /// dG/dN_y(x,t;z,s) for z on the boundary, x in the domain, s < t.
  KernelValue normal(Point x, double t, const BoundaryPoint& z, double s,
                     Representation representation = Representation::Auto) const;

  /// Lag forms used in quadrature loops (argument checks skipped).
  KernelValue green_lag(Point x, Point y, double lag,
                        Representation representation = Representation::Auto) const;
  KernelValue normal_lag(Point x, const BoundaryPoint& z, double lag,
                         Representation representation = Representation::Auto) const;

  /// Kernel G_eps of the shrunken domain Omega_eps (0 < eps <= epsilon0).
  HeatKernel shrunken(double epsilon) const;
  double shrink() const { return shrink_; }

  /// Rigorous envelope dG/dN_y(x, lag; z) <= C1 lag^{-(n+1)/2} exp(-C2 delta(x)^2 / lag)
  /// from domain monotonicity against the half line (interval only):
  /// C1 = (pi e)^{-1/2}, C2 = 1/8.
  static constexpr double kEnvelopeAmplitude = 0.34219828031221655;
  static constexpr double kEnvelopeDecay = 0.125;

 private:
  HeatKernel(Domain domain, KernelOptions options, double shrink);
  void check_time(double t, double s) const;
  void check_point(Point p, const char* op) const;

  Domain domain_;
  KernelOptions options_;
  double shrink_ = 0.0;
  IntervalHeatKernel kx_;
  IntervalHeatKernel ky_;
};

/// Green function of -Laplace with Dirichlet data and its Martin kernel.
class EllipticGreen {
 public:
  explicit EllipticGreen(Domain domain, double tolerance = 1e-10, int series_cap = 4000);

  const Domain& domain() const { return domain_; }

  /// G(x,y); interval: min(X,Y)(L - max(X,Y))/L; rectangle: sine series in the
  /// direction of larger separation with hyperbolic profiles in the other.
  double green(Point x, Point y) const;
  /// Martin kernel dG/dN_y(x, z): interval left (b - x)/L, right (x - a)/L.
  double martin(Point x, const BoundaryPoint& z) const;
  /// Constant C with G(x,y) <= C delta(y) (interval: C = 1).
  double delta_bound_constant() const;

 private:
  Domain domain_;
  double tolerance_;
  int series_cap_;
};

/// Fitted constants of dG/dN_y <= C1 lag^{-(n+1)/2} exp(-C2 delta^2 / lag).
struct GaussianBoundFit {
  double amplitude = 0.0;  // C1
  double decay = 0.0;      // C2
  double worst_ratio_fit = 0.0;      // max value / bound on the fit grid (<= 1)
  double worst_ratio_holdout = 0.0;  // same on the held-out grid
  bool holds = false;
};

/// Fits C2 from the small-lag decay of log(value * lag^{(n+1)/2}) against
/// delta^2 / lag (then shrinks it by 20%), fits C1 as 1.05 times the maximum
/// ratio on the fit grid, and verifies on the held-out grid.
GaussianBoundFit fit_gaussian_bound(const HeatKernel& kernel, std::span<const double> fit_x,
                                    std::span<const double> fit_lags,
                                    std::span<const double> holdout_x,
                                    std::span<const double> holdout_lags);

}  // namespace heattrace
