#pragma once

#include "projfinsler/metric_core.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace projfinsler {

/// Periodic cubic spline through uniformly spaced samples.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<double> values, double start, double period);

  double operator()(double t) const;
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
  std::vector<double> second_;
  double start_ = 0.0;
  double period_ = 1.0;
  double step_ = 1.0;
};

/// Sampling of S^{n-1}: equiangular in 2D; in 3D a product grid with
/// azimuths phi_i = 2 pi i / n_phi and polar angles theta_j = (j + 1/2) pi / n_theta.
class SphereGrid {
 public:
  static SphereGrid circle(int n);
  static SphereGrid sphere(int n_phi, int n_theta);
  /// 256 directions in 2D, 64 x 32 in 3D.
  static SphereGrid defaults(int dim);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(directions_.size()); }
  int n_phi() const { return n_phi_; }
  int n_theta() const { return n_theta_; }
  const Vec& direction(int k) const { return directions_[k]; }
  const std::vector<Vec>& directions() const { return directions_; }
  /// Angular spacing of the grid (azimuthal in 3D).
  double spacing() const;

  bool operator==(const SphereGrid& other) const {
    return dim_ == other.dim_ && n_phi_ == other.n_phi_ && n_theta_ == other.n_theta_;
  }

 private:
  SphereGrid(int dim, int n_phi, int n_theta);
  int dim_;
  int n_phi_;
  int n_theta_;
  std::vector<Vec> directions_;
};

/// Convex body represented by its support function sampled on a sphere grid
/// and interpolated in between (cubic splines; in 3D the polar direction is
/// continued across the poles).
class ConvexBody {
 public:
  ConvexBody(SphereGrid grid, std::vector<double> support);
  static ConvexBody from_support(const SphereGrid& grid, const std::function<double(const Vec&)>& h);
  static ConvexBody ball(const SphereGrid& grid, double radius);
  /// {v : v^T A v <= 1}, support sqrt(u^T A^{-1} u).
  static ConvexBody ellipsoid(const SphereGrid& grid, const Mat& A);

  int dim() const { return grid_.dim(); }
  const SphereGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  /// Interpolated support function, extended 1-homogeneously to all of R^n.
  double support(const Vec& u) const;
  double min_support() const;
  bool origin_interior() const { return min_support() > 0.0; }

  ConvexBody translated(const Vec& t) const;

 private:
  double support_unit(const Vec& u) const;

  SphereGrid grid_;
  std::vector<double> values_;
  std::vector<PeriodicSpline> rows_;  // one per polar row (a single row in 2D)
};

/// Orthonormal basis of a k-dimensional subspace of R^n (stored as columns).
class LinearSubspace {
 public:
  /// Orthonormalizes the spanning columns; throws PreconditionError when they are dependent.
  explicit LinearSubspace(const Mat& spanning);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }

 private:
  Mat basis_;
};

/// Unit ball {v : N(x, v) <= 1} of the norm N(x, .) as a support-function body
/// (its support function is the dual norm).
ConvexBody body_from_norm(const OneDensity& N, const Vec& x, const SphereGrid& grid);

/// Support function of P* = {xi : xi(v) <= 1 for v in P}. Requires the origin in the interior.
ConvexBody polar_dual(const ConvexBody& P);

/// P intersected with Y, as a body in the coordinates of Y's basis (ambient 3, Y of dim 2).
ConvexBody section(const ConvexBody& P, const LinearSubspace& Y, int circle_points = 256);

/// i_Y^*(P^*): the restriction of the functionals in P^* to Y, in Y's dual coordinates.
ConvexBody dual_restriction(const ConvexBody& P, const LinearSubspace& Y, int circle_points = 256);

struct TranslateFit {
  Vec translation;
  double max_residual = 0.0;
};

/// Least-squares t with h_Q(u) - h_P(u) ~ u . t over the grid. Throws on grid mismatch.
TranslateFit fit_translation(const ConvexBody& P, const ConvexBody& Q);

/// The translation Q = P + t when the fit residual is within tol.
std::optional<Vec> are_translates(const ConvexBody& P, const ConvexBody& Q, double tol);

/// Smallest sampled h + h'' along great circles; positive values certify a
/// boundary without corners, i.e. a strictly convex polar body.
double min_curvature_radius(const ConvexBody& P);

/// Sampled check that P* is strictly convex.
bool dual_strictly_convex(const ConvexBody& P, double margin = 1e-6);

struct GroemerPlane {
  Vec normal;            ///< normal of the hyperplane Y (Y contains W)
  double residual = 0.0;  ///< translate residual of (P cap Y)*, (Q cap Y)*
  Vec translation;
};

struct GroemerReport {
  std::vector<GroemerPlane> planes;
  double max_plane_residual = 0.0;
  bool hypotheses_hold = false;
  double global_residual = 0.0;
  Vec global_translation;
  bool conclusion_holds = false;
  double tol = 0.0;

  /// Hypotheses imply conclusion on the sample.
  bool consistent() const { return !hypotheses_hold || conclusion_holds; }
  /// Hypotheses and conclusion both hold.
  bool pass() const { return hypotheses_hold && conclusion_holds; }
};

/// Samples n_planes hyperplanes through the line W, tests whether the duals of
/// the sections of P and Q are translates, then tests P* against Q*.
/// Throws PreconditionError unless P* is strictly convex on samples.
GroemerReport groemer_experiment(const ConvexBody& P, const ConvexBody& Q, const LinearSubspace& W, int n_planes,
                                 double tol, double convexity_margin = 1e-6);

/// Columnar text: a header line, then one line per grid direction "u_1 .. u_n h".
void write_body(std::ostream& out, const ConvexBody& P);
ConvexBody read_body(std::istream& in);

}  // namespace projfinsler
