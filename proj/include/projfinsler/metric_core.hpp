#pragma once

#include "projfinsler/potential.hpp"
#include "projfinsler/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace projfinsler {

enum class Smoothness { C0, C2 };

/// Translation lattice of a periodic Lagrangian. Columns of the basis are the
/// generators; crystallographic symmetry is reduced to this lattice up front.
class Lattice {
 public:
  explicit Lattice(Mat basis);
  static Lattice integer(int dim);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  const Mat& inverse() const { return inverse_; }
  Vec generator(int k) const { return basis_.col(k); }

  /// Coordinates of x in the generator basis.
  Vec to_cell_coords(const Vec& x) const { return inverse_ * x; }
  Vec from_cell_coords(const Vec& s) const { return basis_ * s; }
  /// Representative of x in the fundamental cell {B s : s in [0,1)^n}.
  Vec reduce(const Vec& x) const;

 private:
  Mat basis_;
  Mat inverse_;
};

/// Invertible affine map x -> linear * x + offset.
class AffineMap {
 public:
  AffineMap(Mat linear, Vec offset);
  static AffineMap identity(int dim);
  static AffineMap translation(const Vec& t);
  static AffineMap linear_map(const Mat& m);

  int dim() const { return static_cast<int>(linear_.rows()); }
  const Mat& linear() const { return linear_; }
  const Vec& offset() const { return offset_; }

  Vec apply(const Vec& x) const { return linear_ * x + offset_; }
  Vec apply_linear(const Vec& v) const { return linear_ * v; }
  /// (*this) o other.
  AffineMap compose(const AffineMap& other) const;
  AffineMap inverse() const;

 private:
  Mat linear_;
  Vec offset_;
};

using LagrangianFn = std::function<double(const Vec& x, const Vec& v)>;
using DistanceFn = std::function<double(const Vec& x, const Vec& y)>;

struct DensityTraits {
  Smoothness smoothness = Smoothness::C2;
  std::optional<Lattice> lattice;
  /// Relative central-difference step.
  double fd_step = 1e-4;
  /// Declared symmetry L(x,-v) = L(x,v).
  bool reversible = false;
  /// Declared independence of x.
  bool translation_invariant = false;
  std::string label;
};

/// A Lagrangian L(x, v), positively homogeneous of degree one in v.
class OneDensity {
 public:
  OneDensity(int dim, LagrangianFn fn, DensityTraits traits = {});

  double operator()(const Vec& x, const Vec& v) const { return fn_(x, v); }

  int dim() const { return dim_; }
  const DensityTraits& traits() const { return traits_; }
  Smoothness smoothness() const { return traits_.smoothness; }
  const std::optional<Lattice>& lattice() const { return traits_.lattice; }
  bool reversible() const { return traits_.reversible; }
  bool translation_invariant() const { return traits_.translation_invariant; }
  double fd_step() const { return traits_.fd_step; }
  const std::string& label() const { return traits_.label; }
  const LagrangianFn& function() const { return fn_; }

  /// Closed-form distance, present for entries that are only continuous.
  const std::optional<DistanceFn>& closed_form_distance() const { return distance_; }

  OneDensity with_traits(DensityTraits traits) const;
  OneDensity with_distance(DistanceFn d) const;

 private:
  int dim_;
  LagrangianFn fn_;
  DensityTraits traits_;
  std::optional<DistanceFn> distance_;
};

/// A one-density admitted as a Finsler metric (positive, strongly convex in v).
class FinslerMetric : public OneDensity {
 public:
  /// Trusts the caller; use admit() to verify on samples.
  explicit FinslerMetric(OneDensity base) : OneDensity(std::move(base)) {}

  /// Samples positivity and convexity at the given points over `n_dirs`
  /// directions and throws PreconditionError on failure.
  static FinslerMetric admit(const OneDensity& L, const std::vector<Vec>& points, int n_dirs = 32);
};

OneDensity operator+(const OneDensity& a, const OneDensity& b);
OneDensity operator-(const OneDensity& a, const OneDensity& b);
OneDensity scaled(const OneDensity& a, double factor);

// ---------------------------------------------------------------------------
// Catalog

/// Parameters of a catalog entry: named scalars and matrices.
struct Params {
  std::map<std::string, double> scalars;
  std::map<std::string, Mat> matrices;

  double scalar(const std::string& key, double fallback) const;
  Mat matrix(const std::string& key, const Mat& fallback) const;
};

struct CatalogInfo {
  std::string name;
  bool finsler = true;
  bool projective = true;
  bool reversible = false;
  bool periodic = false;
  Smoothness smoothness = Smoothness::C2;
};

std::vector<CatalogInfo> catalog_entries();
/// Throws PreconditionError for unknown names.
CatalogInfo catalog_info(const std::string& name);

/// Builds a cataloged metric or density. Throws PreconditionError on unknown
/// name or invalid parameters.
OneDensity catalog_metric(const std::string& name, int dim, const Params& params = {});

/// Closed-form Busemann distance
/// |x - y| + |7 x2 + sin(2 pi x2) - 7 y2 - sin(2 pi y2)|.
double busemann_distance(const Vec& x, const Vec& y);

/// sqrt(v^T A v) + grad f(x) . v, periodic with the potential's lattice.
OneDensity randers_metric(const Mat& A, const TrigPotential& f, const std::string& label = "randers");

// ---------------------------------------------------------------------------
// Derivatives

enum DerivMask : unsigned {
  kDx = 1u,
  kDv = 2u,
  kDxDv = 4u,
  kDvDv = 8u,
  kAllDerivs = 15u,
};

/// Central-difference partial derivatives of L at (x, v).
/// dxdv(i, j) = d^2 L / dx_i dv_j.
struct Partials {
  Vec dx;
  Vec dv;
  Mat dxdv;
  Mat dvdv;
};

inline constexpr double kMinSpeed = 1e-3;

/// v is normalized to the unit sphere before differencing; results are
/// rescaled by homogeneity. Throws PreconditionError when |v| < min_speed and
/// NumericalError when the step underflows against x.
Partials partials(const OneDensity& L, const Vec& x, const Vec& v, unsigned which = kAllDerivs,
                  double min_speed = kMinSpeed);

/// Same with an explicit relative step, overriding L.fd_step().
Partials partials_with_step(const OneDensity& L, const Vec& x, const Vec& v, double step, unsigned which,
                            double min_speed = kMinSpeed);

// ---------------------------------------------------------------------------
// Transformations

/// G(s, w) = F(p + s1 e1 + s2 e2, w1 e1 + w2 e2).
OneDensity restrict_to_plane(const OneDensity& F, const Vec& base, const Vec& e1, const Vec& e2);

/// (T^* L)(x, v) = L(T x, DT v).
OneDensity affine_pullback(const OneDensity& L, const AffineMap& T);

struct EvenOddParts {
  OneDensity even;
  OneDensity odd;
};

EvenOddParts even_odd_split(const OneDensity& F);

struct FinslerSampling {
  std::vector<Vec> points;
  int n_dirs = 32;
  double convexity_margin = 1e-9;
};

/// Sample points for FinslerSampling: a regular grid over the lattice cell
/// (or the unit box) with `per_axis` points per axis.
std::vector<Vec> cell_sample_points(int dim, const std::optional<Lattice>& lattice, int per_axis);

/// Deterministic, roughly uniform unit directions: equiangular in 2D,
/// a Fibonacci lattice in 3D, seeded Gaussian samples otherwise.
std::vector<Vec> sphere_directions(int dim, int count);

/// Positivity and convexity of F on the sampled sphere bundle.
struct FinslerCheck {
  double min_value = 0.0;
  double min_hessian_eigenvalue = 0.0;
  bool positive = false;
  bool convex = false;
  bool ok() const { return positive && convex; }
};

FinslerCheck check_finsler(const OneDensity& F, const FinslerSampling& sampling);

/// Largest eps in the grid for which F + eps L passes check_finsler; 0 when none does.
double perturb_to_finsler(const OneDensity& F, const OneDensity& L, const std::vector<double>& eps_grid,
                          const FinslerSampling& sampling);

// ---------------------------------------------------------------------------
// Metric axioms

/// (x, y, z) plus the parameter t in [0,1] of the point w = x + t (z - x)
/// used for the additivity check.
struct PointTriple {
  Vec x, y, z;
  double t = 0.5;
};

std::vector<PointTriple> sample_triples(Rng& rng, int dim, int count, double box = 1.0);

struct AxiomReport {
  std::size_t n_triples = 0;
  double nonnegativity = 0.0;    ///< max of -d(a,b)
  double identity = 0.0;         ///< max |d(x,x)|
  double min_separation = 0.0;   ///< min d(x,y) / |x-y| over distinct pairs
  double triangle = 0.0;         ///< max of d(x,z) - d(x,y) - d(y,z)
  double additivity = 0.0;       ///< max |d(x,w) + d(w,z) - d(x,z)|
  double tol = 0.0;
  bool pass() const {
    return nonnegativity <= tol && identity <= tol && min_separation > 0.0 && triangle <= tol &&
           additivity <= tol;
  }
};

AxiomReport metric_axioms_check(const DistanceFn& d, const std::vector<PointTriple>& triples, double tol);

}  // namespace projfinsler
