#include "projfinsler/hamel.hpp"

#include <cmath>
#include <sstream>

namespace projfinsler {

namespace {

void require_c2(const OneDensity& L, const char* op) {
  if (L.smoothness() != Smoothness::C2) {
    throw PreconditionError(std::string(op) + ": C0 densities are not supported (Hamel's system needs C2)");
  }
}

Mat antisymmetric_part(const Mat& dxdv) { return dxdv - dxdv.transpose(); }

}  // namespace

Mat hamel_residual(const OneDensity& L, const Vec& x, const Vec& v) {
  require_c2(L, "hamel_residual");
  return antisymmetric_part(partials(L, x, v, kDxDv).dxdv);
}

ResidualGrid make_residual_grid(const OneDensity& L, int per_axis, int n_dirs) {
  ResidualGrid g;
  g.points = cell_sample_points(L.dim(), L.lattice(), per_axis);
  // Shift off the lattice nodes so that symmetric points (e.g. x = 0) do not dominate.
  const Mat B = L.lattice() ? L.lattice()->basis() : Mat::Identity(L.dim(), L.dim());
  const Vec shift = B * Vec::Constant(L.dim(), 0.37 / per_axis);
  for (auto& p : g.points) p += shift;
  g.directions = sphere_directions(L.dim(), n_dirs);
  return g;
}

HamelReport projectivity_report(const OneDensity& L, const ResidualGrid& grid, double tol) {
  require_c2(L, "projectivity_report");
  if (grid.points.empty() || grid.directions.empty()) throw PreconditionError("projectivity_report: empty grid");
  HamelReport r;
  r.tol = tol;
  std::ostringstream desc;
  desc << grid.points.size() << " points x " << grid.directions.size() << " directions";
  r.grid_description = desc.str();

  double sum = 0.0;
  std::size_t count = 0;
  for (const Vec& x : grid.points) {
    for (const Vec& v : grid.directions) {
      const Mat R = hamel_residual(L, x, v);
      Eigen::Index i = 0, j = 0;
      const double worst = R.cwiseAbs().maxCoeff(&i, &j);
      r.samples.push_back({x, v, worst});
      sum += worst;
      ++count;
      if (worst > r.max_residual || count == 1) {
        r.max_residual = worst;
        r.worst_x = x;
        r.worst_v = v;
        r.worst_i = static_cast<int>(i);
        r.worst_j = static_cast<int>(j);
      }
    }
  }
  r.mean_residual = sum / static_cast<double>(count);

  // Noise floor: compare against a doubled step on a subsample.
  const std::size_t stride = std::max<std::size_t>(1, r.samples.size() / 64);
  for (std::size_t k = 0; k < r.samples.size(); k += stride) {
    const auto& s = r.samples[k];
    const Mat coarse = antisymmetric_part(partials_with_step(L, s.x, s.v, 2.0 * L.fd_step(), kDxDv).dxdv);
    r.noise_floor = std::max(r.noise_floor, std::abs(coarse.cwiseAbs().maxCoeff() - s.residual));
  }
  return r;
}

std::vector<Vec> euler_lagrange_residual(const OneDensity& L, const Vec& x, const Vec& v, const std::vector<double>& times) {
  require_c2(L, "euler_lagrange_residual");
  std::vector<Vec> out;
  out.reserve(times.size());
  for (double t : times) {
    const Vec xt = x + t * v;
    if (!std::isfinite(L(xt, v))) throw NumericalError("euler_lagrange_residual: line leaves the evaluation domain");
    const Partials d = partials(L, xt, v, kDx | kDxDv);
    // d/dt (dL/dv_i) along the line = sum_j d^2 L / dx_j dv_i * v_j
    out.push_back(d.dxdv.transpose() * v - d.dx);
  }
  return out;
}

HilbertFormSample hilbert_forms(const OneDensity& L, const Vec& x, const Vec& v) {
  require_c2(L, "hilbert_forms");
  const Partials d = partials(L, x, v, kDv | kDxDv | kDvDv);
  return {d.dv, antisymmetric_part(d.dxdv), d.dvdv};
}

}  // namespace projfinsler
