#pragma once

#include "projfinsler/convex_core.hpp"
#include "projfinsler/hamel.hpp"
#include "projfinsler/metric_core.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace projfinsler {

/// Raised when a pipeline stage rejects its input; stage() names the stage
/// ("projectivity", "linearity", "closedness", "path_independence",
/// "reversibility", "support", "norm_part").
class DecompositionError : public Error {
 public:
  DecompositionError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Regular grid x = origin + B s over a parallelepiped cell. Periodic grids
/// use s_i = k / N (k < N); closed grids include both faces, s_i = k / (N - 1).
class CellGrid {
 public:
  static CellGrid periodic(const Lattice& lattice, int per_axis, const Vec& origin);
  static CellGrid periodic(const Lattice& lattice, int per_axis);
  static CellGrid box(const Vec& lo, const Vec& hi, int per_axis);

  int dim() const { return static_cast<int>(basis_.rows()); }
  int per_axis() const { return per_axis_; }
  bool is_periodic() const { return periodic_; }
  const Mat& basis() const { return basis_; }
  const Vec& origin() const { return origin_; }
  std::size_t size() const { return size_; }
  /// Spacing in cell coordinates.
  double step() const { return periodic_ ? 1.0 / per_axis_ : 1.0 / (per_axis_ - 1); }

  std::vector<int> unravel(std::size_t index) const;
  std::size_t index(const std::vector<int>& multi) const;
  Vec point(std::size_t index) const;

 private:
  CellGrid(Mat basis, Vec origin, int per_axis, bool periodic);
  Mat basis_;
  Vec origin_;
  int per_axis_;
  bool periodic_;
  std::size_t size_;
};

/// Covectors beta(x) at every grid node (ambient coordinates).
struct OneFormField {
  CellGrid grid;
  std::vector<Vec> beta;
};

struct OneFormExtraction {
  OneFormField field;
  double linearity_defect = 0.0;
  double closedness_defect = 0.0;
};

/// F_0(x, v) = F(0, v).
FinslerMetric translation_invariant_part(const OneDensity& F);

/// beta(x) = v-gradient of L averaged over the 2n axis directions. The
/// linearity defect is max |L(x,v) - beta(x) . v| over axis and diagonal
/// directions; the closedness defect is the largest discrete curl entry.
/// Throws DecompositionError("linearity") when the linearity defect exceeds tol.
OneFormExtraction extract_one_form(const OneDensity& L, const CellGrid& grid, double tol);

struct PotentialResult {
  std::vector<double> f;  ///< per grid node, f = 0 at the base node
  double path_independence_defect = 0.0;
};

/// Trapezoidal line integrals (with endpoint derivative correction) along
/// axis-ordered staircase paths from the base node. f comes from the order
/// 1, 2, ..., n; the defect is the largest disagreement with any other order.
/// Throws DecompositionError("path_independence") when the defect exceeds tol.
PotentialResult integrate_potential(const OneFormField& field, const std::vector<int>& base_node, double tol);
PotentialResult integrate_potential(const OneFormField& field, double tol);

struct DecompositionDiagnostics {
  double hamel_residual = 0.0;
  double linearity_defect = 0.0;
  double closedness_defect = 0.0;
  double path_independence_defect = 0.0;
  double reconstruction_defect = 0.0;
  double max_beta = 0.0;
};

struct DecompositionResult {
  FinslerMetric norm_part;
  OneFormField one_form;
  std::vector<double> potential;
  DecompositionDiagnostics diagnostics;
  double tol = 0.0;
};

struct DecompositionOptions {
  /// Grid points per axis; 0 picks 64 in 2D and 32 in 3D.
  int per_axis = 0;
  /// Points per axis and directions of the projectivity gate.
  int gate_per_axis = 0;
  int gate_dirs = 16;
};

/// F = F_0 + beta with beta = df. F must be C2 and periodic (translation
/// invariant inputs use the integer lattice). Reversible inputs additionally
/// require max |beta| <= tol.
DecompositionResult decompose_periodic_projective(const OneDensity& F, double tol, const DecompositionOptions& options = {});

/// L with support inside the box [lo, hi]: periodized over the box scaled by
/// 1.5 about its center, decomposed with base point at the corner of the
/// scaled box, so that f vanishes outside the support. Default grid: 128^2 in 2D, 32^3 in 3D.
DecompositionResult decompose_compact_support(const OneDensity& L, const Vec& lo, const Vec& hi, double tol,
                                              const DecompositionOptions& options = {});

/// Potential at an arbitrary point of the grid cell (multilinear interpolation).
double potential_at(const DecompositionResult& result, const Vec& x);

struct RandersPair {
  Vec x;
  Vec y;
  double residual = 0.0;
  Vec translation;  ///< translation of the co-disc at y relative to the one at x
};

struct RandersReport {
  std::vector<RandersPair> pairs;
  double max_residual = 0.0;
  double tol = 0.0;
  Vec base;
  std::vector<Vec> points;
  /// beta(x_k) - beta(base), the co-disc translations relative to the base point.
  std::vector<Vec> beta;
  std::optional<FinslerMetric> norm;  ///< F(base, .) when the test passes

  bool pass() const { return max_residual <= tol; }
};

/// Co-discs at the base point and at each sample point (unit ball from the norm,
/// then polar dual), tested for translates on the pairs (base, x_k) and (x_k, x_{k+1}).
/// Throws PreconditionError when a co-disc cannot be built.
RandersReport randers_test(const OneDensity& F, const Vec& base, const std::vector<Vec>& points, double tol,
                           int grid_points = 0);

struct PlaneVerdict {
  Vec base;
  Vec e1;
  Vec e2;
  double residual = 0.0;
  bool pass = false;
};

struct DensePlanesReport {
  std::vector<PlaneVerdict> planes;
  double pass_fraction = 0.0;
  double tol = 0.0;
};

/// Random 2-planes base + s m1 + t m2 with integer directions (entries in
/// [-2, 2], all nonzero), each tested with randers_test on the restriction.
DensePlanesReport dense_planes_test(const OneDensity& F, int n_planes, double tol, std::uint64_t seed,
                                    int points_per_plane = 4);

/// Directory bundle: norm.txt (u..., F0), one_form.txt (x..., beta...),
/// potential.txt (x..., f), diagnostics.txt (key = value).
void write_decomposition(const std::filesystem::path& dir, const DecompositionResult& result);

}  // namespace projfinsler
