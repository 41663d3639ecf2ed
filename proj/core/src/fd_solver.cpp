#include <algorithm>
#include <cmath>
#include <limits>

#include "heattrace/errors.hpp"
#include "heattrace/verify.hpp"

namespace heattrace {

namespace {

// Solves (1 + 2r) v_i - r (v_{i-1} + v_{i+1}) = rhs_i for the interior nodes,
// with the end values already folded into rhs (Thomas algorithm).
void solve_implicit(double r, std::vector<double>& rhs, std::vector<double>& scratch) {
  const std::size_t m = rhs.size();
  const double diag = 1.0 + 2.0 * r;
  scratch.resize(m);
  double denom = diag;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < m; ++i) {
    scratch[i] = -r / denom;
    denom = diag + r * scratch[i];
    rhs[i] = (rhs[i] + r * rhs[i - 1]) / denom;
  }
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

// One theta-step from `u` (all nodes) to time t_new, with theta = 1 (implicit
// Euler) or 1/2 (Crank-Nicolson).
void step(std::vector<double>& u, double dt, double h, double theta, double left_new, double right_new,
          std::vector<double>& rhs, std::vector<double>& scratch) {
  const std::size_t n = u.size() - 1;
  const double r_impl = theta * dt / (h * h);
  const double r_expl = (1.0 - theta) * dt / (h * h);
  rhs.resize(n - 1);
  for (std::size_t i = 1; i < n; ++i) rhs[i - 1] = u[i] + r_expl * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
  rhs.front() += r_impl * left_new;
  rhs.back() += r_impl * right_new;
  solve_implicit(r_impl, rhs, scratch);
  u[0] = left_new;
  u[n] = right_new;
  std::copy(rhs.begin(), rhs.end(), u.begin() + 1);
}

}  // namespace

FDData fd_data(const TraceTriple& triple, const Domain& domain) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("fd_data: intervals only");
  if (!triple.lambda.empty()) throw InvalidArgument("fd_data: corner measures have no Dirichlet counterpart");
  if (!triple.nu.atoms.empty()) throw InvalidArgument("fd_data: lateral atoms have no Dirichlet counterpart");
  FDData data;
  const InteriorMeasure mu = triple.mu;
  data.initial = [mu, domain](double x) {
    double sum = 0.0;
    const Variables vars{x, 0.0, 0.0, 0.0, domain.delta({x})};
    for (const DensitySegment& seg : mu.densities)
      if (x >= seg.lo && x <= seg.hi) sum += seg(x, vars);
    return sum;
  };
  data.atoms = mu.atoms;
  auto boundary = [&triple](Side side) {
    std::vector<DensitySegment> segments;
    for (const SideDensity& sd : triple.nu.densities)
      if (sd.side == side) segments.push_back(sd.density);
    return [segments](double t) {
      double sum = 0.0;
      for (const DensitySegment& seg : segments)
        if (t >= seg.lo && t <= seg.hi) sum += seg(t, Variables{0.0, 0.0, t, 0.0, 0.0});
      return sum;
    };
  };
  data.left = boundary(Side::Left);
  data.right = boundary(Side::Right);
  return data;
}

FDSolution::FDSolution(double a, double h, int panels, double k, int steps, std::vector<double> values)
    : a_(a), h_(h), k_(k), panels_(panels), steps_(steps), values_(std::move(values)) {}

double FDSolution::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double FDSolution::at(double x, double t) const {
  const double xi = std::clamp((x - a_) / h_, 0.0, static_cast<double>(panels_));
  const double tj = std::clamp(t / k_, 0.0, static_cast<double>(steps_));
  const int i = std::min(static_cast<int>(xi), panels_ - 1);
  const int j = std::min(static_cast<int>(tj), steps_ - 1);
  const double fx = xi - i, ft = tj - j;
  const double lower = (1.0 - fx) * node(i, j) + fx * node(i + 1, j);
  const double upper = (1.0 - fx) * node(i, j + 1) + fx * node(i + 1, j + 1);
  return (1.0 - ft) * lower + ft * upper;
}

SolutionField FDSolution::field(const Domain& domain, double horizon) const {
  const FDSolution copy = *this;
  return SolutionField(domain, horizon, [copy](Point p, double t) { return FieldValue{copy.at(p.x, t), 0.0}; });
}

FDSolution fd_solve(const Domain& domain, const FDData& data, double horizon, FDOptions options) {
  if (domain.kind() != DomainKind::Interval) throw InvalidArgument("fd_solve: intervals only");
  if (!(options.h > 0.0 && options.k > 0.0 && horizon > 0.0))
    throw InvalidArgument("fd_solve: need h > 0, k > 0 and T > 0");
  if (options.rannacher_steps < 0) throw InvalidArgument("fd_solve: rannacher_steps must be >= 0");
  const double a = domain.a(), len = domain.width();
  const int panels = std::max(4, static_cast<int>(std::lround(len / options.h)));
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / options.k - 1e-9)));
  const double h = len / panels, k = horizon / steps;
  const std::size_t nodes = static_cast<std::size_t>(panels) + 1;

  auto left = [&](double t) { return data.left ? data.left(t) : 0.0; };
  auto right = [&](double t) { return data.right ? data.right(t) : 0.0; };

  std::vector<double> u(nodes, 0.0);
  for (std::size_t i = 1; i < nodes - 1; ++i) u[i] = data.initial ? data.initial(a + h * static_cast<double>(i)) : 0.0;
  for (const InteriorAtom& atom : data.atoms) {
    if (!(atom.mass >= 0.0)) throw InvalidArgument("fd_solve: atom masses must be nonnegative");
    const double width = 2.0 * h;
    std::vector<double> hat(nodes, 0.0);
    double discrete = 0.0;
    for (std::size_t i = 1; i < nodes - 1; ++i) {
      const double x = a + h * static_cast<double>(i);
      hat[i] = std::max(0.0, 1.0 - std::abs(x - atom.location.x) / width) / width;
      discrete += h * hat[i];
    }
    if (discrete <= 0.0) throw InvalidArgument("fd_solve: atom too close to the boundary for the grid");
    for (std::size_t i = 1; i < nodes - 1; ++i) u[i] += atom.mass * hat[i] / discrete;
  }
  u[0] = left(0.0);
  u[nodes - 1] = right(0.0);

  double bound = 0.0;
  for (double v : u) bound = std::max(bound, std::abs(v));
  for (int j = 0; j <= steps; ++j) {
    bound = std::max({bound, std::abs(left(j * k)), std::abs(right(j * k))});
  }
  const double limit = bound * (1.0 + 1e-9) + 1e-12;

  std::vector<double> values;
  values.reserve(nodes * (static_cast<std::size_t>(steps) + 1));
  values.insert(values.end(), u.begin(), u.end());
  std::vector<double> rhs, scratch;
  for (int j = 1; j <= steps; ++j) {
    const double t_new = j * k;
    if (j <= options.rannacher_steps) {
      step(u, 0.5 * k, h, 1.0, left(t_new - 0.5 * k), right(t_new - 0.5 * k), rhs, scratch);
      step(u, 0.5 * k, h, 1.0, left(t_new), right(t_new), rhs, scratch);
    } else {
      step(u, k, h, 0.5, left(t_new), right(t_new), rhs, scratch);
    }
    for (double v : u)
      if (!std::isfinite(v) || std::abs(v) > limit)
        throw NumericalFailure("fd_solve: solution left the maximum-principle bound at step " + std::to_string(j));
    values.insert(values.end(), u.begin(), u.end());
  }
  return FDSolution(a, h, panels, k, steps, std::move(values));
}

}  // namespace heattrace
