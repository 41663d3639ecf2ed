#include "heattrace/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "heattrace/errors.hpp"

namespace heattrace {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double gaussian(double r, double lag) {
  return std::exp(-r * r / (4.0 * lag)) / std::sqrt(4.0 * kPi * lag);
}

// Geometric bound on sum_{k > n} k^p e^{-k^2 c} for p in {0, 1}.
double spectral_tail(int n, double c, int power) {
  const double k1 = n + 1.0;
  const double first = (power == 1 ? k1 : 1.0) * std::exp(-k1 * k1 * c);
  double ratio = std::exp(-(2.0 * n + 3.0) * c);
  if (power == 1) ratio *= (n + 2.0) / (n + 1.0);
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return first / (1.0 - ratio);
}

// Bound on the omitted image terms of G with pairs |m| <= M.
double image_tail_green(int m, double length, double lag) {
  const double r = 2.0 * m * length;
  const double ratio = std::exp(-2.0 * m * length * length / lag);
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return 4.0 * gaussian(r, lag) / (1.0 - ratio);
}

// Bound on omitted pairs m > M of the normal-derivative image sum.
double image_tail_normal(int m, double length, double lag) {
  const double r = 2.0 * (m + 1.0) * length;
  if (r * r < 2.0 * lag) return std::numeric_limits<double>::infinity();
  const double ratio = std::exp(-r * length / lag) * (r + 2.0 * length) / r;
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * (r / lag) * gaussian(r, lag) / (1.0 - ratio);
}

}  // namespace

double tail_bound(Representation representation, int terms_used, double lag) {
  if (terms_used < 1 || !(lag > 0.0)) throw InvalidArgument("tail_bound: need terms >= 1, lag > 0");
  if (representation == Representation::Image) {
    const int pairs = std::max(1, (terms_used - 1) / 2);
    return image_tail_green(pairs, kPi, lag);
  }
  return (2.0 / kPi) * spectral_tail(terms_used, lag, 0);
}

// ---------------------------------------------------------------------------
// IntervalHeatKernel

IntervalHeatKernel::IntervalHeatKernel(double a, double b, KernelOptions options)
    : a_(a), b_(b), length_(b - a), options_(options) {
  if (!(length_ > 0.0)) throw InvalidArgument("IntervalHeatKernel: need a < b");
  if (!(options_.tolerance > 0.0)) throw InvalidArgument("IntervalHeatKernel: tolerance must be positive");
}

double IntervalHeatKernel::green_scale(double lag) const {
  return 1.0 / std::sqrt(4.0 * kPi * lag) + 1.0 / length_;
}

double IntervalHeatKernel::normal_scale(double lag) const {
  return 1.0 / lag + 1.0 / (length_ * length_);
}

int IntervalHeatKernel::spectral_terms(double lag, bool normal) const {
  const double c = kPi * kPi * lag / (length_ * length_);
  const double prefactor = normal ? (2.0 / length_) * (kPi / length_) : 2.0 / length_;
  const double target = 0.5 * options_.tolerance * (normal ? normal_scale(lag) : green_scale(lag));
  // The tail is at least its first term, so no n with (n + 1)^2 c below
  // log(prefactor / target) can pass; start the scan just under that bound.
  int first = 1;
  if (target < prefactor) {
    const double bound = std::sqrt(std::log(prefactor / target) / c) - 2.0;
    if (bound > 1.0) first = static_cast<int>(std::min(bound, static_cast<double>(options_.series_cap)));
  }
  for (int n = first; n <= options_.series_cap; ++n)
    if (prefactor * spectral_tail(n, c, normal ? 1 : 0) <= target) return n;
  return options_.series_cap + 1;
}

int IntervalHeatKernel::image_pairs(double lag, bool normal) const {
  const double target = 0.5 * options_.tolerance * (normal ? normal_scale(lag) : green_scale(lag));
  for (int m = 1; m <= 64; ++m) {
    const double tail = normal ? image_tail_normal(m, length_, lag) : image_tail_green(m, length_, lag);
    if (tail <= target) return m;
  }
  return 64;
}

Representation IntervalHeatKernel::choose(double lag, bool normal) const {
  const double scaled = kPi * kPi * lag / (length_ * length_);
  if (scaled >= options_.switch_threshold && spectral_terms(lag, normal) <= options_.series_cap)
    return Representation::Spectral;
  return Representation::Image;
}

KernelValue IntervalHeatKernel::green(double x, double y, double lag,
                                      Representation representation) const {
  if (!(lag > 0.0)) throw InvalidArgument("heat_green: need s < t");
  // Canonical argument order makes symmetry exact.
  if (y < x) std::swap(x, y);
  if (x <= a_ || y >= b_) {
    KernelValue zero;
    zero.representation = representation == Representation::Auto ? choose(lag, false) : representation;
    return zero;
  }
  if (representation != Representation::Auto)
    return representation == Representation::Spectral ? green_spectral(x, y, lag) : green_image(x, y, lag);
  if (choose(lag, false) == Representation::Image) return green_image(x, y, lag);
  // A sine sum only resolves values above its absolute error; the image sum
  // keeps the sign and relative accuracy of exponentially small values.
  const KernelValue spectral = green_spectral(x, y, lag);
  return std::abs(spectral.value) > 4.0 * spectral.error ? spectral : green_image(x, y, lag);
}

KernelValue IntervalHeatKernel::green_spectral(double x, double y, double lag) const {
  const int n = spectral_terms(lag, false);
  if (n > options_.series_cap)
    throw ToleranceUnachievable("heat_green: spectral series exceeds series_cap at this lag");
  const double c = kPi * kPi * lag / (length_ * length_);
  const double tx = kPi * (x - a_) / length_;
  const double ty = kPi * (y - a_) / length_;
  const double cx = std::cos(tx), sx = std::sin(tx);
  const double cy = std::cos(ty), sy = std::sin(ty);
  double skx = sx, ckx = cx, sky = sy, cky = cy;
  double decay = std::exp(-c);
  double step = std::exp(-3.0 * c);
  const double step_ratio = std::exp(-2.0 * c);
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double term = decay * skx * sky;
    sum += term;
    abs_sum += std::abs(term);
    const double nskx = skx * cx + ckx * sx;
    ckx = ckx * cx - skx * sx;
    skx = nskx;
    const double nsky = sky * cy + cky * sy;
    cky = cky * cy - sky * sy;
    sky = nsky;
    decay *= step;
    step *= step_ratio;
  }
  const double pref = 2.0 / length_;
  KernelValue out;
  out.value = pref * sum;
  out.error = pref * (spectral_tail(n, c, 0) + 4.0 * (n + 2) * kEps * abs_sum);
  out.terms = n;
  out.representation = Representation::Spectral;
  return out;
}

KernelValue IntervalHeatKernel::green_image(double x, double y, double lag) const {
  const int pairs = image_pairs(lag, false);
  const double X = x - a_;
  const double Y = y - a_;
  const double L = length_;
  double sum = 0.0;
  double abs_sum = 0.0;
  // pair_m = phi(A - Y) - phi(A + Y), A = X + 2 m L.
  for (int m = -pairs; m <= pairs; ++m) {
    const double A = X + 2.0 * m * L;
    double term;
    if (A >= 0.0)
      term = gaussian(A - Y, lag) * (-std::expm1(-A * Y / lag));
    else
      term = gaussian(A - Y, lag) - gaussian(A + Y, lag);
    sum += term;
    abs_sum += std::abs(term);
  }
  KernelValue out;
  out.value = sum;
  out.error = image_tail_green(pairs, L, lag) + 8.0 * kEps * abs_sum;
  out.terms = 2 * pairs + 1;
  out.representation = Representation::Image;
  return out;
}

KernelValue IntervalHeatKernel::normal(double x, Side end, double lag,
                                       Representation representation) const {
  if (!(lag > 0.0)) throw InvalidArgument("heat_green_normal: need s < t");
  if (end != Side::Left && end != Side::Right)
    throw InvalidArgument("heat_green_normal: interval ends are left/right");
  // The right end is the mirror image of the left end.
  const double xr = end == Side::Left ? x : a_ + (b_ - x);
  if (representation != Representation::Auto)
    return representation == Representation::Spectral ? normal_left_spectral(xr, lag) : normal_left_image(xr, lag);
  if (choose(lag, true) == Representation::Image) return normal_left_image(xr, lag);
  const KernelValue spectral = normal_left_spectral(xr, lag);
  return std::abs(spectral.value) > 4.0 * spectral.error ? spectral : normal_left_image(xr, lag);
}

KernelValue IntervalHeatKernel::normal_left_spectral(double x, double lag) const {
  const int n = spectral_terms(lag, true);
  if (n > options_.series_cap)
    throw ToleranceUnachievable("heat_green_normal: spectral series exceeds series_cap at this lag");
  const double c = kPi * kPi * lag / (length_ * length_);
  const double tx = kPi * (x - a_) / length_;
  const double cx = std::cos(tx), sx = std::sin(tx);
  double skx = sx, ckx = cx;
  double decay = std::exp(-c);
  double step = std::exp(-3.0 * c);
  const double step_ratio = std::exp(-2.0 * c);
  double sum = 0.0;
  double abs_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double term = k * decay * skx;
    sum += term;
    abs_sum += std::abs(term);
    const double nskx = skx * cx + ckx * sx;
    ckx = ckx * cx - skx * sx;
    skx = nskx;
    decay *= step;
    step *= step_ratio;
  }
  const double pref = (2.0 / length_) * (kPi / length_);
  KernelValue out;
  out.value = pref * sum;
  out.error = pref * (spectral_tail(n, c, 1) + 4.0 * (n + 2) * kEps * abs_sum);
  out.terms = n;
  out.representation = Representation::Spectral;
  return out;
}

KernelValue IntervalHeatKernel::normal_left_image(double x, double lag) const {
  const int pairs = image_pairs(lag, true);
  const double X = x - a_;
  const double L = length_;
  double sum = 0.0;
  double abs_sum = 0.0;
  // Pairs the images at X + 2mL and X - 2(m+1)L; written so that the
  // cancellation near X = L (the far end, where the kernel vanishes) is benign.
  for (int m = pairs; m >= 0; --m) {
    const double r1 = X + 2.0 * m * L;
    const double r2 = 2.0 * (m + 1.0) * L - X;
    const double D = (L - X) * (2.0 * m + 1.0) * L / lag;
    const double term = gaussian(r1, lag) / lag * (r2 * (-std::expm1(-D)) - 2.0 * (L - X));
    sum += term;
    abs_sum += std::abs(term) + gaussian(r1, lag) / lag * r2;
  }
  KernelValue out;
  out.value = sum;
  out.error = image_tail_normal(pairs, L, lag) + 8.0 * kEps * abs_sum;
  out.terms = 2 * pairs + 2;
  out.representation = Representation::Image;
  return out;
}

// ---------------------------------------------------------------------------
// HeatKernel

namespace {

Domain shrink_domain(const Domain& d, double eps) {
  if (eps == 0.0) return d;
  if (d.kind() == DomainKind::Interval) return d.shrunken(eps);
  const double w = d.width() - 2.0 * eps;
  const double h = d.height() - 2.0 * eps;
  return Domain::rectangle(d.a() + eps, d.b() - eps, d.c() + eps, d.d() - eps,
                           std::min(d.epsilon0(), 0.45 * 0.5 * std::min(w, h)));
}

}  // namespace

HeatKernel::HeatKernel(Domain domain, KernelOptions options) : HeatKernel(domain, options, 0.0) {}

HeatKernel::HeatKernel(Domain domain, KernelOptions options, double shrink)
    : domain_(std::move(domain)),
      options_(options),
      shrink_(shrink),
      kx_(domain_.a(), domain_.b(), options),
      ky_(domain_.kind() == DomainKind::Rectangle ? domain_.c() : 0.0,
          domain_.kind() == DomainKind::Rectangle ? domain_.d() : 1.0, options) {}

HeatKernel HeatKernel::shrunken(double epsilon) const {
  if (!(epsilon > 0.0) || epsilon > domain_.epsilon0())
    throw InvalidArgument("heat_green_shrunken: epsilon must lie in (0, epsilon0]");
  return HeatKernel(shrink_domain(domain_, epsilon), options_, shrink_ + epsilon);
}

void HeatKernel::check_time(double t, double s) const {
  if (!(s < t)) throw InvalidArgument("heat kernel: need s < t");
}

void HeatKernel::check_point(Point p, const char* op) const {
  if (!domain_.contains_closure(p))
    throw InvalidArgument(std::string(op) + ": point outside the closure of the domain");
}

KernelValue HeatKernel::green(Point x, double t, Point y, double s,
                              Representation representation) const {
  check_time(t, s);
  check_point(x, "heat_green");
  check_point(y, "heat_green");
  return green_lag(x, y, t - s, representation);
}

KernelValue HeatKernel::normal(Point x, double t, const BoundaryPoint& z, double s,
                               Representation representation) const {
  check_time(t, s);
  check_point(x, "heat_green_normal");
  check_point(z.location, "heat_green_normal");
  if (domain_.delta(z.location) > 1e-12 * (1.0 + std::abs(domain_.width())))
    throw InvalidArgument("heat_green_normal: z is not on the boundary");
  return normal_lag(x, z, t - s, representation);
}

KernelValue HeatKernel::green_lag(Point x, Point y, double lag, Representation representation) const {
  const KernelValue gx = kx_.green(x.x, y.x, lag, representation);
  if (domain_.kind() == DomainKind::Interval) return gx;
  const KernelValue gy = ky_.green(x.y, y.y, lag, representation);
  KernelValue out;
  out.value = gx.value * gy.value;
  out.error = gx.error * std::abs(gy.value) + gy.error * std::abs(gx.value) + gx.error * gy.error;
  out.terms = gx.terms + gy.terms;
  out.representation = gx.representation;
  return out;
}

KernelValue HeatKernel::normal_lag(Point x, const BoundaryPoint& z, double lag,
                                   Representation representation) const {
  if (domain_.kind() == DomainKind::Interval) return kx_.normal(x.x, z.side, lag, representation);
  KernelValue across;
  KernelValue along;
  switch (z.side) {
    case Side::Left:
    case Side::Right:
      across = kx_.normal(x.x, z.side, lag, representation);
      along = ky_.green(x.y, z.location.y, lag, representation);
      break;
    case Side::Bottom:
      across = ky_.normal(x.y, Side::Left, lag, representation);
      along = kx_.green(x.x, z.location.x, lag, representation);
      break;
    case Side::Top:
      across = ky_.normal(x.y, Side::Right, lag, representation);
      along = kx_.green(x.x, z.location.x, lag, representation);
      break;
  }
  KernelValue out;
  out.value = across.value * along.value;
  out.error = across.error * std::abs(along.value) + along.error * std::abs(across.value) +
              across.error * along.error;
  out.terms = across.terms + along.terms;
  out.representation = across.representation;
  return out;
}

// ---------------------------------------------------------------------------
// EllipticGreen

EllipticGreen::EllipticGreen(Domain domain, double tolerance, int series_cap)
    : domain_(std::move(domain)), tolerance_(tolerance), series_cap_(series_cap) {}

double EllipticGreen::delta_bound_constant() const {
  return domain_.kind() == DomainKind::Interval ? 1.0 : std::numeric_limits<double>::quiet_NaN();
}

namespace {

// 1D Green function of -d^2/dx^2 + k^2 on (0, len), written with decaying
// exponentials only.
double hyperbolic_green(double k, double u, double v, double len) {
  const double lo = std::min(u, v);
  const double hi = std::max(u, v);
  const double num = std::exp(-k * (hi - lo)) - std::exp(-k * (2.0 * len - lo - hi)) -
                     std::exp(-k * (lo + hi)) + std::exp(-k * (2.0 * len - hi + lo));
  return num / (2.0 * k * (1.0 - std::exp(-2.0 * k * len)));
}

// Normal derivative at u' = 0 of the same Green function: sinh(k(len-u))/sinh(k len).
double hyperbolic_martin(double k, double u, double len) {
  return (std::exp(-k * u) - std::exp(-k * (2.0 * len - u))) / (1.0 - std::exp(-2.0 * k * len));
}

}  // namespace

double EllipticGreen::green(Point x, Point y) const {
  if (!domain_.contains_closure(x) || !domain_.contains_closure(y))
    throw InvalidArgument("elliptic_green: point outside the closure of the domain");
  if (domain_.kind() == DomainKind::Interval) {
    const double X = x.x - domain_.a();
    const double Y = y.x - domain_.a();
    const double L = domain_.width();
    return std::min(X, Y) * (L - std::max(X, Y)) / L;
  }
  const double A = domain_.width();
  const double B = domain_.height();
  double X = x.x - domain_.a(), Xi = y.x - domain_.a();
  double Y = x.y - domain_.c(), Eta = y.y - domain_.c();
  if (X == Xi && Y == Eta) return std::numeric_limits<double>::infinity();
  // Expand in the sine modes of the direction with the smaller relative separation.
  double side_len = B, across_len = A;
  double sep = std::abs(X - Xi);
  if (std::abs(X - Xi) / A < std::abs(Y - Eta) / B) {
    std::swap(X, Y);
    std::swap(Xi, Eta);
    std::swap(side_len, across_len);
    sep = std::abs(X - Xi);
  }
  // Modes in (Y, Eta) along side_len, hyperbolic profile in (X, Xi) across across_len.
  double sum = 0.0;
  for (int n = 1; n <= series_cap_; ++n) {
    const double k = n * kPi / side_len;
    const double term = (2.0 / side_len) * std::sin(k * Y) * std::sin(k * Eta) *
                        hyperbolic_green(k, X, Xi, across_len);
    sum += term;
    if ((2.0 / side_len) * std::exp(-k * sep) / k < tolerance_ * 1e-2 && n > 2) break;
  }
  return sum;
}

double EllipticGreen::martin(Point x, const BoundaryPoint& z) const {
  if (!domain_.contains_closure(x)) throw InvalidArgument("elliptic_green_normal: point outside the domain");
  if (domain_.kind() == DomainKind::Interval) {
    const double L = domain_.width();
    if (z.side == Side::Left) return (domain_.b() - x.x) / L;
    if (z.side == Side::Right) return (x.x - domain_.a()) / L;
    throw InvalidArgument("elliptic_green_normal: interval ends are left/right");
  }
  const double A = domain_.width();
  const double B = domain_.height();
  const double X = x.x - domain_.a();
  const double Y = x.y - domain_.c();
  double across = 0.0, along = 0.0, zeta = 0.0, side_len = 0.0, across_len = 0.0;
  switch (z.side) {
    case Side::Left: across = X; along = Y; zeta = z.location.y - domain_.c(); side_len = B; across_len = A; break;
    case Side::Right: across = A - X; along = Y; zeta = z.location.y - domain_.c(); side_len = B; across_len = A; break;
    case Side::Bottom: across = Y; along = X; zeta = z.location.x - domain_.a(); side_len = A; across_len = B; break;
    case Side::Top: across = B - Y; along = X; zeta = z.location.x - domain_.a(); side_len = A; across_len = B; break;
  }
  if (across <= 0.0) return 0.0;
  double sum = 0.0;
  for (int n = 1; n <= series_cap_; ++n) {
    const double k = n * kPi / side_len;
    sum += (2.0 / side_len) * std::sin(k * along) * std::sin(k * zeta) *
           hyperbolic_martin(k, across, across_len);
    if ((2.0 / side_len) * std::exp(-k * across) < tolerance_ * 1e-2 && n > 2) break;
  }
  return sum;
}

// ---------------------------------------------------------------------------

GaussianBoundFit fit_gaussian_bound(const HeatKernel& kernel, std::span<const double> fit_x,
                                    std::span<const double> fit_lags,
                                    std::span<const double> holdout_x,
                                    std::span<const double> holdout_lags) {
  const Domain& dom = kernel.domain();
  const double power = 0.5 * (dom.dimension() + 1);
  const double mid_y = dom.kind() == DomainKind::Rectangle ? 0.5 * (dom.c() + dom.d()) : 0.0;
  auto worst_value = [&](double x, double lag) {
    const Point p{x, mid_y};
    double v = 0.0;
    for (Side side : {Side::Left, Side::Right}) {
      BoundaryPoint z = dom.boundary_point(side, dom.kind() == DomainKind::Rectangle ? 0.5 * dom.height() : 0.0);
      v = std::max(v, kernel.normal_lag(p, z, lag).value);
    }
    return v;
  };

  // Least-squares slope of log(value * lag^p) against delta^2 / lag.
  double sz = 0.0, sy = 0.0, szz = 0.0, szy = 0.0;
  int count = 0;
  const double max_lag = *std::max_element(fit_lags.begin(), fit_lags.end());
  for (double lag : fit_lags) {
    if (lag > 0.1 * max_lag) continue;
    for (double x : fit_x) {
      const double v = worst_value(x, lag);
      const double dist = dom.delta({x, mid_y});
      const double z = dist * dist / lag;
      if (!(v > 1e-250) || z < 1.0) continue;
      const double y = std::log(v * std::pow(lag, power));
      sz += z; sy += y; szz += z * z; szy += z * y;
      ++count;
    }
  }
  GaussianBoundFit fit;
  double slope = -0.25;
  if (count >= 3) {
    const double denom = count * szz - sz * sz;
    if (denom > 0.0) slope = (count * szy - sz * sy) / denom;
  }
  fit.decay = std::max(0.8 * (-slope), 1e-3);

  auto ratio_max = [&](std::span<const double> xs, std::span<const double> lags, double amplitude) {
    double worst = 0.0;
    for (double lag : lags)
      for (double x : xs) {
        const double dist = dom.delta({x, mid_y});
        const double bound = amplitude * std::pow(lag, -power) * std::exp(-fit.decay * dist * dist / lag);
        const double v = worst_value(x, lag);
        if (bound > 0.0) worst = std::max(worst, v / bound);
      }
    return worst;
  };
  fit.amplitude = 1.05 * ratio_max(fit_x, fit_lags, 1.0);
  fit.worst_ratio_fit = ratio_max(fit_x, fit_lags, fit.amplitude);
  fit.worst_ratio_holdout = ratio_max(holdout_x, holdout_lags, fit.amplitude);
  fit.holds = fit.worst_ratio_holdout <= 1.0;
  return fit;
}

}  // namespace heattrace
