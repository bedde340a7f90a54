#pragma once

#include "projfinsler/types.hpp"

#include <functional>
#include <vector>

namespace projfinsler {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre: `panels` equal panels of `order` points on [a, b].
QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b);

struct SphereNode {
  Vec direction;
  double weight;
};

/// Resolution of a sphere rule: in 2D `primary` is the total number of circle
/// nodes; in 3D `primary` counts Gauss-Legendre nodes in cos(polar angle) and
/// `secondary` uniform azimuthal nodes.
struct SphereResolution {
  int primary = 512;
  int secondary = 128;

  static SphereResolution defaults(int dim) { return dim == 2 ? SphereResolution{512, 1} : SphereResolution{64, 128}; }
  SphereResolution halved() const { return {primary / 2, secondary > 1 ? secondary / 2 : 1}; }
};

/// Quadrature rule on S^{n-1} (n = 2, 3) whose nodes are split at the great
/// circle orthogonal to `pole`, so integrands with a |u . pole| kink are
/// integrated as smooth functions on each half.
std::vector<SphereNode> sphere_rule(const Vec& pole, SphereResolution res);

/// Total surface measure of S^{n-1}.
double sphere_area(int dim);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
/// Sets `converged` to false when the depth limit is hit.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        bool* converged = nullptr, int max_depth = 40);

}  // namespace projfinsler
