#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heattrace/domain.hpp"
#include "heattrace/expression.hpp"
#include "heattrace/quadrature.hpp"

namespace heattrace {

/// A nonnegative function on a segment [lo, hi], given either by an
/// expression or by uniformly spaced samples (linear interpolation).
struct DensitySegment {
  double lo = 0.0;
  double hi = 0.0;
  std::optional<Expression> expression;
  std::vector<double> samples;

  /// `coordinate` is the segment variable; `vars` supplies the others.
  double operator()(double coordinate, Variables vars) const;
  bool operator==(const DensitySegment& other) const;
};

struct InteriorAtom {
  Point location;
  double mass = 0.0;
  bool operator==(const InteriorAtom&) const = default;
};

/// mu in M(Omega, delta): atoms plus densities in x (interval) or in (x, y)
/// over the whole rectangle (the segment then spans x and y ranges from
/// the domain). The density may blow up like delta^{-alpha}, alpha < 2.
struct InteriorMeasure {
  std::vector<InteriorAtom> atoms;
  std::vector<DensitySegment> densities;
  double blowup_exponent = 0.0;

  bool empty() const { return atoms.empty() && densities.empty(); }
  bool operator==(const InteriorMeasure&) const = default;
};

struct CornerAtom {
  Side side = Side::Left;
  double param = 0.0;  // arclength along the side (0 on an interval)
  double mass = 0.0;
  bool operator==(const CornerAtom&) const = default;
};

struct SideDensity {
  Side side = Side::Left;
  DensitySegment density;  // in arclength for corner densities, in t for lateral ones
  bool operator==(const SideDensity&) const = default;
};

/// lambda in M(boundary): atoms plus (rectangle only) side densities in s.
struct CornerMeasure {
  std::vector<CornerAtom> atoms;
  std::vector<SideDensity> densities;

  bool empty() const { return atoms.empty() && densities.empty(); }
  bool operator==(const CornerMeasure&) const = default;
};

struct LateralAtom {
  Side side = Side::Left;
  double param = 0.0;
  double time = 0.0;
  double mass = 0.0;
  bool operator==(const LateralAtom&) const = default;
};

/// nu in M_s(boundary x (0, T)): atoms plus densities g(s, t) per side,
/// piecewise in t (the segment is the time range; s is the arclength).
struct LateralMeasure {
  std::vector<LateralAtom> atoms;
  std::vector<SideDensity> densities;
  double horizon = 1.0;

  bool empty() const { return atoms.empty() && densities.empty(); }
  bool operator==(const LateralMeasure&) const = default;
};

struct TraceTriple {
  InteriorMeasure mu;
  CornerMeasure lambda;
  LateralMeasure nu;
  double horizon = 1.0;

  bool operator==(const TraceTriple&) const = default;
};

struct MeasureOptions {
  double tolerance = 1e-6;
  /// Number of samples used to bound a density over a segment.
  int probe_samples = 257;
};

/// Checks the admissibility conditions (nonnegative masses and sampled
/// density values, carriers inside the domain, blowup exponent below 2,
/// agreeing horizons). Throws AdmissibilityError naming the entry.
void validate(const TraceTriple& triple, const Domain& domain);

/// int delta d mu; throws AdmissibilityError when it diverges.
QuadratureResult weighted_mass(const InteriorMeasure& mu, const Domain& domain,
                               MeasureOptions options = {});
/// nu(boundary x (0, T1)) for 0 < T1 < horizon.
QuadratureResult lateral_mass(const LateralMeasure& nu, const Domain& domain, double t1,
                              MeasureOptions options = {});

using PointFunction = std::function<double(Point)>;
using BoundaryTimeFunction = std::function<double(const BoundaryPoint&, double)>;

QuadratureResult integrate_against(const InteriorMeasure& mu, const Domain& domain,
                                   const PointFunction& f, MeasureOptions options = {});
QuadratureResult integrate_against(const CornerMeasure& lambda, const Domain& domain,
                                   const std::function<double(const BoundaryPoint&)>& f,
                                   MeasureOptions options = {});
/// Pairing over boundary x (0, t1); t1 defaults to the horizon.
QuadratureResult integrate_against(const LateralMeasure& nu, const Domain& domain,
                                   const BoundaryTimeFunction& f, std::optional<double> t1 = {},
                                   MeasureOptions options = {});

/// Upper bound of |density| sampled on [lo, hi] (used for envelope certificates).
double sampled_bound(const DensitySegment& density, double lo, double hi, Variables vars,
                     int samples);

/// Parses the JSON measure document. Syntax errors carry the line number;
/// semantic errors name the offending entry (for example "mu.atoms[1].mass").
TraceTriple parse_triple(const std::string& text, const Domain& domain);
/// Canonical JSON text (stable key order, shortest round-trip numbers).
std::string serialize_triple(const TraceTriple& triple);

}  // namespace heattrace
