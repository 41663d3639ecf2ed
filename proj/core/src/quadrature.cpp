#include "heattrace/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "heattrace/errors.hpp"

namespace heattrace {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

Panel kronrod(Integrand f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod_sum = fc * kKronrodWeights[7];
  double gauss_sum = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod_sum);
  std::array<std::array<double, 2>, 7> fvals{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    // On panels a few ulps wide the outer nodes can round onto the ends.
    const double f1 = f(std::clamp(center - dx, std::nextafter(a, b), center));
    const double f2 = f(std::clamp(center + dx, center, std::nextafter(b, a)));
    fvals[j][0] = f1;
    fvals[j][1] = f2;
    kronrod_sum += kKronrodWeights[j] * (f1 + f2);
    abs_sum += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss_sum += kGaussWeights[j / 2] * (f1 + f2);
  }
  const double value = kronrod_sum * half;
  // Spread of f about its panel mean, as in QUADPACK's resasc.
  const double mean = 0.5 * kronrod_sum;
  double spread = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) spread += kKronrodWeights[j] * (std::abs(fvals[j][0] - mean) + std::abs(fvals[j][1] - mean));
  spread *= std::abs(half);
  const double diff = std::abs((kronrod_sum - gauss_sum) * half);
  double scaled = diff;
  if (spread > 0.0) scaled = spread * std::min(1.0, std::pow(200.0 * diff / spread, 1.5));
  const double roundoff = 50.0 * kEps * abs_sum * std::abs(half);
  const double error = std::max({diff, scaled, roundoff});
  return {a, b, value, error};
}

struct ByError {
  bool operator()(const Panel& lhs, const Panel& rhs) const { return lhs.error < rhs.error; }
};

}  // namespace

QuadratureResult& QuadratureResult::operator+=(const QuadratureResult& other) {
  value += other.value;
  error_estimate += other.error_estimate;
  evaluations += other.evaluations;
  converged = converged && other.converged;
  diverged = diverged || other.diverged;
  return *this;
}

QuadratureResult gauss_kronrod_panel(Integrand f, double a, double b) {
  const Panel p = kronrod(f, a, b);
  return {p.value, p.error, 15, true, false, false};
}

QuadratureResult integrate_adaptive(Integrand f, double a, double b, double tol,
                                    AdaptiveOptions options) {
  return integrate_adaptive(f, a, b, tol, std::span<const double>{}, options);
}

QuadratureResult integrate_adaptive(Integrand f, double a, double b, double tol,
                                    std::span<const double> breakpoints,
                                    AdaptiveOptions options) {
  if (!(tol > 0.0)) throw InvalidArgument("integrate_adaptive: tolerance must be positive");
  QuadratureResult result;
  if (a == b) return result;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel, std::vector<Panel>, ByError> queue;
  std::vector<Panel> finished;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = kronrod(f, cuts[i], cuts[i + 1]);
    result.evaluations += 15;
    total_error += p.error;
    queue.push(p);
  }

  std::size_t subdivisions = queue.size();
  while (total_error > tol && !queue.empty()) {
    if (subdivisions >= options.max_subdivisions) break;
    Panel worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 4.0 * kEps * std::max(std::abs(worst.a), std::abs(worst.b))) {
      // Cannot refine further; freeze this panel and keep going on the rest.
      queue.pop();
      finished.push_back(worst);
      continue;
    }
    queue.pop();
    Panel left = kronrod(f, worst.a, mid);
    Panel right = kronrod(f, mid, worst.b);
    result.evaluations += 30;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++subdivisions;
  }

  while (!queue.empty()) {
    finished.push_back(queue.top());
    queue.pop();
  }
  // Deterministic summation order: by panel position.
  std::sort(finished.begin(), finished.end(),
            [](const Panel& l, const Panel& r) { return l.a < r.a; });
  double value = 0.0;
  double error = 0.0;
  for (const Panel& p : finished) {
    value += p.value;
    error += p.error;
  }
  result.value = sign * value;
  result.error_estimate = error;
  result.converged = error <= tol;
  return result;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = (n == 1) ? 2.0 : 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double integrate_gauss_legendre(Integrand f, double a, double b, int n, int panels) {
  const GaussRule rule = gauss_legendre(n);
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double c = lo + 0.5 * width;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      sum += rule.weights[i] * f(c + 0.5 * width * rule.nodes[i]);
    total += 0.5 * width * sum;
  }
  return total;
}

double exponential_integral_e1(double x) {
  if (!(x > 0.0)) throw InvalidArgument("exponential_integral_e1: x must be positive");
  return -std::expint(-x);
}

double LateralProfile::envelope(double sigma) const {
  if (sigma <= 0.0) return 0.0;
  const double a = decay * distance * distance;
  return amplitude * std::pow(sigma, -0.5 * (dimension + 1)) * std::exp(-a / sigma);
}

double LateralProfile::envelope_integral(double span) const {
  if (span <= 0.0) return 0.0;
  const double a = decay * distance * distance;
  if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
  const double z = a / span;
  if (dimension == 1) {
    if (z > 700.0) return 0.0;
    return amplitude * exponential_integral_e1(z);
  }
  if (dimension == 2) return amplitude * std::sqrt(std::numbers::pi / a) * std::erfc(std::sqrt(z));
  throw InvalidArgument("LateralProfile: dimension must be 1 or 2");
}

QuadratureResult integrate_lateral_time(Integrand f, double s, double t,
                                        const LateralProfile& profile, double tol,
                                        std::span<const double> breakpoints) {
  if (!(t > s)) throw InvalidArgument("integrate_lateral_time: need s < t");
  if (!(tol > 0.0)) throw InvalidArgument("integrate_lateral_time: tolerance must be positive");
  if (!(profile.distance > 0.0) || !(profile.decay > 0.0) || !(profile.amplitude >= 0.0))
    throw InvalidArgument("integrate_lateral_time: profile needs distance > 0, decay > 0");

  const double span = t - s;
  const double envelope_total = profile.envelope_integral(span);
  if (envelope_total <= 0.5 * tol) {
    QuadratureResult r;
    r.error_estimate = envelope_total;
    r.early_exit = true;
    return r;
  }

  // Smallest lag kept: the envelope mass below it is at most tol/4.
  double lo = std::log(span) - 80.0;
  double hi = std::log(span);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (profile.envelope_integral(std::exp(mid)) <= 0.25 * tol)
      lo = mid;
    else
      hi = mid;
  }
  const double sigma_min = std::exp(lo);
  const double tail = profile.envelope_integral(sigma_min);

  // w = ln v = -ln(t - tau); the integrand is written in the lag sigma.
  const double w0 = -std::log(span);
  const double w1 = -std::log(sigma_min);
  auto in_w = [&](double w) {
    const double sigma = std::exp(-w);
    return f(sigma) * sigma;
  };
  std::vector<double> wcuts;
  for (double tau : breakpoints) {
    const double sigma = t - tau;
    if (sigma > sigma_min && sigma < span) wcuts.push_back(-std::log(sigma));
  }
  QuadratureResult r = integrate_adaptive(in_w, w0, w1, 0.5 * tol, wcuts);
  r.error_estimate += tail;
  r.converged = r.error_estimate <= tol;
  return r;
}

QuadratureResult integrate_graded(Integrand f, double a, double b, double alpha, double tol,
                                  GradedEnd end) {
  if (!(b > a)) throw InvalidArgument("integrate_graded: need a < b");
  if (!(alpha >= 0.0)) throw InvalidArgument("integrate_graded: alpha must be >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("integrate_graded: tolerance must be positive");

  if (end == GradedEnd::Both) {
    const double mid = 0.5 * (a + b);
    QuadratureResult left = integrate_graded(f, a, mid, alpha, 0.5 * tol, GradedEnd::Left);
    left += integrate_graded(f, mid, b, alpha, 0.5 * tol, GradedEnd::Right);
    return left;
  }

  const double width = b - a;
  const double ratio = std::pow(2.0, -(1.0 + 0.5 * alpha));
  constexpr int kMaxPanels = 400;
  constexpr double kStall = 0.97;

  QuadratureResult result;
  std::vector<double> panel_values;
  std::vector<double> ratios;
  double outer = width;  // distance of the current panel's far edge from the graded end
  // Below this distance from the graded end, b - inner is no longer
  // representable apart from b; the rest is left to the tail estimate.
  const double resolution = 64.0 * kEps * std::abs(end == GradedEnd::Left ? a : b);
  for (int k = 0; k < kMaxPanels; ++k) {
    const double inner = outer * ratio;
    const double panel_tol = std::max(tol * std::pow(0.5, k + 2), tol * 1e-3);
    QuadratureResult r;
    if (end == GradedEnd::Left)
      r = integrate_adaptive(f, a + inner, a + outer, panel_tol);
    else
      r = integrate_adaptive(f, b - outer, b - inner, panel_tol);
    result.value += r.value;
    result.error_estimate += r.error_estimate;
    result.evaluations += r.evaluations;
    result.converged = result.converged && r.converged;
    if (!panel_values.empty()) {
      const double prev = std::abs(panel_values.back());
      ratios.push_back(prev > 0.0 ? std::abs(r.value) / prev : 0.0);
    }
    panel_values.push_back(r.value);
    outer = inner;

    if (ratios.size() >= 3) {
      const double rho = *std::max_element(ratios.end() - 3, ratios.end());
      if (rho < kStall) {
        const double tail = r.value * rho / (1.0 - rho);
        if (std::abs(tail) <= 0.25 * tol || outer < resolution) {
          result.value += tail;
          result.error_estimate += std::abs(tail);
          result.converged = result.converged && result.error_estimate <= tol;
          return result;
        }
      } else if (ratios.size() >= 8 &&
                 std::all_of(ratios.end() - 6, ratios.end(),
                             [](double q) { return q >= kStall; })) {
        result.diverged = true;
        result.converged = false;
        return result;
      }
    }
  }
  result.converged = false;
  result.diverged = !ratios.empty() && ratios.back() >= kStall;
  return result;
}

}  // namespace heattrace
