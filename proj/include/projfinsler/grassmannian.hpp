#pragma once

#include "projfinsler/metric_core.hpp"
#include "projfinsler/quadrature.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace projfinsler {

using HyperplaneDensityFn = std::function<double(const Vec& u, double p)>;

/// Smooth density m(u, p) on the double cover S^{n-1} x R of the space of
/// affine hyperplanes {x : u . x = p}.
class HyperplaneMeasure {
 public:
  HyperplaneMeasure(int dim, HyperplaneDensityFn density, bool symmetric = true,
                    std::optional<Lattice> invariance_lattice = std::nullopt);

  int dim() const { return dim_; }
  double density(const Vec& u, double p) const { return density_(u, p); }
  const HyperplaneDensityFn& density_function() const { return density_; }
  bool symmetric() const { return symmetric_; }
  const std::optional<Lattice>& invariance_lattice() const { return lattice_; }

  /// Largest |m(-u,-p) - m(u,p)| over `samples` seeded draws with |p| <= p_range.
  double symmetry_defect(Rng& rng, int samples, double p_range = 2.0) const;

 private:
  int dim_;
  HyperplaneDensityFn density_;
  bool symmetric_;
  std::optional<Lattice> lattice_;
};

struct CroftonOptions {
  SphereResolution resolution{0, 0};  ///< zero means SphereResolution::defaults(dim)
  double simpson_tol = 1e-13;
  /// Segment measures whose half-resolution error estimate exceeds this are rejected.
  double max_error = 1e-6;

  SphereResolution resolved(int dim) const {
    return resolution.primary > 0 ? resolution : SphereResolution::defaults(dim);
  }
};

struct SegmentMeasureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Measure of the hyperplanes meeting the segment xy:
///   1/2 int_{S^{n-1}} int_{[u.x, u.y]} m(u, p) dp dsigma(u).
/// Throws NumericalError when the error estimate exceeds options.max_error.
SegmentMeasureResult segment_measure(const HyperplaneMeasure& mu, const Vec& x, const Vec& y,
                                     const CroftonOptions& options = {});

/// Distance handle d_mu(x, y) built on segment_measure.
DistanceFn crofton_distance(const HyperplaneMeasure& mu, const CroftonOptions& options = {});

/// F(x, v) = 1/2 int |u . v| m(u, u . x) dsigma(u), the infinitesimal form of d_mu.
/// Unless skip_checks, the measure's symmetry and quasipositivity are sampled first.
FinslerMetric crofton_finsler(const HyperplaneMeasure& mu, const CroftonOptions& options = {}, bool skip_checks = false);

struct QuasipositivityReport {
  std::size_t n_triples = 0;
  double min_measure = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> measures;
  double tol = 0.0;
  bool pass() const { return min_measure >= tol && tol > 0.0; }
};

/// Measure of hyperplanes separating x from the segment yz.
double separating_measure(const HyperplaneMeasure& mu, const Vec& x, const Vec& y, const Vec& z,
                          SphereResolution res = {0, 0});

/// Minimum separating measure over the sampled triples (x not on [y, z]).
QuasipositivityReport quasipositivity_check(const HyperplaneMeasure& mu, const std::vector<PointTriple>& triples,
                                            double tol, SphereResolution res = {0, 0});

/// Density of T^{-1}_# mu, so that segment_measure(pushforward, x, y) =
/// segment_measure(mu, T x, T y).
HyperplaneMeasure measure_pushforward(const HyperplaneMeasure& mu, const AffineMap& T);

struct OrbitNetReport {
  double largest_gap = 0.0;
  std::size_t points_in_unit_interval = 0;
  std::size_t enumerated = 0;
  bool dense = false;  ///< largest_gap <= eps
};

/// Enumerates {u . m : m in Z^n, |m_i| <= bound} and reports the largest gap
/// of the orbit within [0, 1] (endpoints included as sentinels).
OrbitNetReport lattice_orbit_net(const Vec& u, int bound, double eps, std::size_t budget = 20'000'000);

struct InvarianceGapReport {
  double precondition_defect = 0.0;  ///< max |g(u, p + u.m) - g(u, p)| over lattice vectors m
  double gap = 0.0;                  ///< max |g(u, p + u.t) - g(u, p)| over real translations t
  std::size_t samples = 0;
  double tol = 0.0;
  bool pass() const { return gap <= tol; }
};

struct InvarianceSampling {
  std::uint64_t seed = 1;
  int samples = 10'000;
  double p_range = 1.0;
  int lattice_radius = 2;  ///< lattice vectors with |m_i| <= radius used by the precondition
};

/// Numerical witness that a lattice-invariant continuous function on the
/// space of hyperplanes is invariant under all translations. Throws
/// PreconditionError when the sampled lattice invariance exceeds tol.
InvarianceGapReport invariance_gap(const HyperplaneDensityFn& g, const Lattice& lattice,
                                   const InvarianceSampling& sampling, double tol);

}  // namespace projfinsler
