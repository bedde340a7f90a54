#pragma once

#include "projfinsler/metric_core.hpp"

#include <string>
#include <vector>

namespace projfinsler {

/// R(i, j) = d^2 L / dx_i dv_j - d^2 L / dx_j dv_i. Zero iff L is projective at (x, v).
Mat hamel_residual(const OneDensity& L, const Vec& x, const Vec& v);

/// Base points and directions at which the Hamel system is evaluated.
struct ResidualGrid {
  std::vector<Vec> points;
  std::vector<Vec> directions;

  std::size_t size() const { return points.size() * directions.size(); }
};

/// Regular grid over the lattice cell of L (unit box when L has no lattice)
/// with `per_axis` points per axis, times `n_dirs` sphere directions.
ResidualGrid make_residual_grid(const OneDensity& L, int per_axis, int n_dirs);

struct ResidualSample {
  Vec x;
  Vec v;
  double residual = 0.0;
};

struct HamelReport {
  std::string grid_description;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  Vec worst_x;
  Vec worst_v;
  int worst_i = 0;
  int worst_j = 0;
  /// Largest change of the residual when the difference step is doubled,
  /// an empirical estimate of the discretization noise at this grid.
  double noise_floor = 0.0;
  double tol = 0.0;
  std::vector<ResidualSample> samples;

  bool pass() const { return max_residual <= tol; }
};

/// Max |R_ij| over the grid; passes iff <= tol. C0 inputs are rejected with
/// PreconditionError.
HamelReport projectivity_report(const OneDensity& L, const ResidualGrid& grid, double tol);

/// d/dt dL/dv - dL/dx sampled along t -> x + t v at the given times.
/// Throws NumericalError if L is not finite along the line.
std::vector<Vec> euler_lagrange_residual(const OneDensity& L, const Vec& x, const Vec& v, const std::vector<double>& times);

struct HilbertFormSample {
  Vec alpha;      ///< dL/dv_i, coefficients of dx_i
  Mat omega_xx;   ///< antisymmetric dx_i ^ dx_j block, equal to hamel_residual
  Mat omega_vx;   ///< d^2 L / dv_i dv_j, coefficients of dv_i ^ dx_j
};

HilbertFormSample hilbert_forms(const OneDensity& L, const Vec& x, const Vec& v);

}  // namespace projfinsler
