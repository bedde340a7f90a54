#pragma once

#include "projfinsler/metric_core.hpp"

#include <functional>
#include <vector>

namespace projfinsler {

/// Ordered points in R^n, at least two, consecutive points distinct.
class Polyline {
 public:
  explicit Polyline(std::vector<Vec> points);
  static Polyline segment(const Vec& a, const Vec& b) { return Polyline({a, b}); }

  const std::vector<Vec>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  /// Same trace with every segment split into `parts` equal pieces.
  Polyline refined(int parts) const;

 private:
  std::vector<Vec> points_;
};

/// Sum over segments of int_0^1 F(a + s (b - a), b - a) ds (Gauss-Legendre per segment).
double curve_length(const OneDensity& F, const Polyline& curve, int gl_points = 20);

/// Length of a smooth curve gamma : [t0, t1] -> R^n with derivative dgamma.
double curve_length(const OneDensity& F, const std::function<Vec(double)>& gamma,
                    const std::function<Vec(double)>& dgamma, double t0, double t1, int panels = 32);

struct DistanceOptions {
  int interior_points = 8;
  int iterations = 200;
  double gradient_tol = 1e-12;
};

struct DistanceResult {
  double distance = 0.0;
  double initial_length = 0.0;  ///< length of the straight segment
  int iterations = 0;
  Polyline path{{Vec::Zero(1), Vec::Ones(1)}};
};

/// Polyline descent from the straight segment. Returns the closed form when
/// F provides one. Throws NumericalError if the descent produces non-finite lengths.
DistanceResult induced_distance_detail(const OneDensity& F, const Vec& x, const Vec& y, const DistanceOptions& options = {});

double induced_distance(const OneDensity& F, const Vec& x, const Vec& y, const DistanceOptions& options = {});

DistanceFn induced_distance_fn(const OneDensity& F, const DistanceOptions& options = {});

struct GeodesicSample {
  double t = 0.0;
  Vec x;
  Vec v;
};

/// Integrates the extremals of the energy F^2 / 2 with classical RK4.
/// Throws NumericalError when the v-Hessian of F^2 is not invertible.
std::vector<GeodesicSample> geodesic_shoot(const OneDensity& F, const Vec& x0, const Vec& v0, double T, int steps);

/// Max distance of the samples from the line through the first and last sample.
double chord_deviation(const std::vector<GeodesicSample>& trace);

}  // namespace projfinsler
