#pragma once

// Independent reference evaluations used by the tests. They are deliberately
// naive (direct long-double sums with generous term counts) so they share no
// code path with the library's recurrences, tail bounds or image pairings.

#include <cmath>
#include <numbers>

namespace oracle {

inline constexpr long double kPi = std::numbers::pi_v<long double>;

/// (2/pi) sum_k e^{-k^2 lag} sin(kx) sin(ky) on (0, pi).
inline double green_series(double x, double y, double lag, int terms = 400) {
  long double sum = 0.0L;
  for (int k = 1; k <= terms; ++k)
    sum += std::exp(-static_cast<long double>(k) * k * lag) * std::sin(k * static_cast<long double>(x)) *
           std::sin(k * static_cast<long double>(y));
  return static_cast<double>(2.0L / kPi * sum);
}

/// Inner-normal derivative at the left end: (2/pi) sum_k k e^{-k^2 lag} sin(kx).
inline double normal_left_series(double x, double lag, int terms = 400) {
  long double sum = 0.0L;
  for (int k = 1; k <= terms; ++k)
    sum += k * std::exp(-static_cast<long double>(k) * k * lag) * std::sin(k * static_cast<long double>(x));
  return static_cast<double>(2.0L / kPi * sum);
}

/// Free-space image sum for (0, pi): sum_m [phi(x - y + 2 m pi) - phi(x + y + 2 m pi)].
inline double green_images(double x, double y, double lag, int images = 40) {
  long double sum = 0.0L;
  const long double norm = 1.0L / std::sqrt(4.0L * kPi * lag);
  for (int m = -images; m <= images; ++m) {
    const long double r1 = x - y + 2.0L * m * kPi;
    const long double r2 = x + y + 2.0L * m * kPi;
    sum += norm * (std::exp(-r1 * r1 / (4.0L * lag)) - std::exp(-r2 * r2 / (4.0L * lag)));
  }
  return static_cast<double>(sum);
}

/// Left-end normal derivative from differentiated images: sum_m (r/lag) phi(r), r = x + 2 m pi.
inline double normal_left_images(double x, double lag, int images = 40) {
  long double sum = 0.0L;
  const long double norm = 1.0L / std::sqrt(4.0L * kPi * lag);
  for (int m = -images; m <= images; ++m) {
    const long double r = x + 2.0L * m * kPi;
    sum += r / lag * norm * std::exp(-r * r / (4.0L * lag));
  }
  return static_cast<double>(sum);
}

/// Solution with boundary value 1 at both ends and zero initial data:
/// 1 - (4/pi) sum_{k odd} e^{-k^2 t} sin(kx)/k.
inline double boundary_one(double x, double t, int terms = 20001) {
  long double sum = 0.0L;
  for (int k = 1; k <= terms; k += 2)
    sum += std::exp(-static_cast<long double>(k) * k * t) * std::sin(k * static_cast<long double>(x)) / k;
  return static_cast<double>(1.0L - 4.0L / kPi * sum);
}

/// E1(x) by its convergent power series -gamma - ln x - sum (-x)^k/(k k!).
inline double e1_series(double x) {
  long double sum = 0.0L, term = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -static_cast<long double>(x) / k;
    sum += term / k;
  }
  return static_cast<double>(-0.57721566490153286060651209L - std::log(static_cast<long double>(x)) - sum);
}

}  // namespace oracle
