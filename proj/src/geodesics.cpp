#include "projfinsler/geodesics.hpp"

#include "projfinsler/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace projfinsler {

Polyline::Polyline(std::vector<Vec> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw PreconditionError("Polyline: need at least two points");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].size() != points_[0].size()) throw PreconditionError("Polyline: dimension mismatch");
    if ((points_[i] - points_[i - 1]).norm() == 0.0) throw PreconditionError("Polyline: degenerate segment");
  }
}

Polyline Polyline::refined(int parts) const {
  if (parts < 1) throw PreconditionError("Polyline::refined: parts must be positive");
  std::vector<Vec> out{points_.front()};
  for (std::size_t i = 1; i < points_.size(); ++i) {
    for (int k = 1; k <= parts; ++k) {
      out.push_back(points_[i - 1] + (points_[i] - points_[i - 1]) * (static_cast<double>(k) / parts));
    }
  }
  return Polyline(std::move(out));
}

namespace {

double segment_length(const OneDensity& F, const Vec& a, const Vec& b, const QuadratureRule& rule) {
  const Vec d = b - a;
  if (F.translation_invariant()) return F(a, d);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) total += rule.weights[i] * F(a + rule.nodes[i] * d, d);
  return total;
}

double polyline_length(const OneDensity& F, const std::vector<Vec>& pts, const QuadratureRule& rule) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += segment_length(F, pts[i - 1], pts[i], rule);
  return total;
}

}  // namespace

double curve_length(const OneDensity& F, const Polyline& curve, int gl_points) {
  const QuadratureRule rule = gauss_legendre(gl_points, 0.0, 1.0);
  return polyline_length(F, curve.points(), rule);
}

double curve_length(const OneDensity& F, const std::function<Vec(double)>& gamma, const std::function<Vec(double)>& dgamma,
                    double t0, double t1, int panels) {
  const QuadratureRule rule = composite_gauss_legendre(panels, 8, t0, t1);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    total += rule.weights[i] * F(gamma(rule.nodes[i]), dgamma(rule.nodes[i]));
  }
  return total;
}

DistanceResult induced_distance_detail(const OneDensity& F, const Vec& x, const Vec& y, const DistanceOptions& options) {
  if (x.size() != F.dim() || y.size() != F.dim()) throw PreconditionError("induced_distance: dimension mismatch");
  DistanceResult r;
  if (F.closed_form_distance()) {
    r.distance = r.initial_length = (*F.closed_form_distance())(x, y);
    return r;
  }
  if ((x - y).norm() == 0.0) return r;

  const int k = std::max(0, options.interior_points);
  const int n = F.dim();
  std::vector<Vec> pts;
  for (int i = 0; i <= k + 1; ++i) pts.push_back(x + (y - x) * (static_cast<double>(i) / (k + 1)));
  const QuadratureRule rule = gauss_legendre(20, 0.0, 1.0);
  double length = polyline_length(F, pts, rule);
  r.initial_length = length;
  if (!std::isfinite(length)) throw NumericalError("induced_distance: non-finite length on the initial segment");

  const double scale = (y - x).norm();
  const double h = 1e-6 * std::max(1.0, scale);
  double step = 0.1 * scale / (k + 1);
  for (int it = 0; it < options.iterations && k > 0; ++it) {
    // Gradient on interior points, projected orthogonally to the local chord.
    std::vector<Vec> grad(k + 2, Vec::Zero(n));
    double gnorm2 = 0.0;
    for (int i = 1; i <= k; ++i) {
      for (int c = 0; c < n; ++c) {
        const double keep = pts[i][c];
        pts[i][c] = keep + h;
        const double lp = segment_length(F, pts[i - 1], pts[i], rule) + segment_length(F, pts[i], pts[i + 1], rule);
        pts[i][c] = keep - h;
        const double lm = segment_length(F, pts[i - 1], pts[i], rule) + segment_length(F, pts[i], pts[i + 1], rule);
        pts[i][c] = keep;
        grad[i][c] = (lp - lm) / (2.0 * h);
      }
      Vec tangent = pts[i + 1] - pts[i - 1];
      tangent.normalize();
      grad[i] -= grad[i].dot(tangent) * tangent;
      gnorm2 += grad[i].squaredNorm();
    }
    r.iterations = it + 1;
    if (std::sqrt(gnorm2) < options.gradient_tol) break;
    // Backtracking: accept only decreases.
    bool accepted = false;
    while (step > 1e-14 * scale) {
      std::vector<Vec> trial = pts;
      for (int i = 1; i <= k; ++i) trial[i] -= step * grad[i] / std::sqrt(gnorm2);
      const double trial_length = polyline_length(F, trial, rule);
      if (!std::isfinite(trial_length)) throw NumericalError("induced_distance: descent diverged");
      if (trial_length < length) {
        pts = std::move(trial);
        length = trial_length;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  r.distance = length;
  r.path = Polyline(pts);
  return r;
}

double induced_distance(const OneDensity& F, const Vec& x, const Vec& y, const DistanceOptions& options) {
  return induced_distance_detail(F, x, y, options).distance;
}

DistanceFn induced_distance_fn(const OneDensity& F, const DistanceOptions& options) {
  return [F, options](const Vec& x, const Vec& y) { return induced_distance(F, x, y, options); };
}

namespace {

struct State {
  Vec x;
  Vec v;
};

// Acceleration of the energy extremal: E_vv a = E_x - E_vx v with E = F^2 / 2.
Vec acceleration(const OneDensity& F, const Vec& x, const Vec& v) {
  const double value = F(x, v);
  const Partials d = partials(F, x, v, kAllDerivs);
  const Mat e_vv = d.dv * d.dv.transpose() + value * d.dvdv;
  const Vec e_x = value * d.dx;
  // E_{v_i x_j} = F_{v_i} F_{x_j} + F F_{x_j v_i}
  const Mat e_vx = d.dv * d.dx.transpose() + value * d.dxdv.transpose();
  Eigen::LDLT<Mat> ldlt(e_vv);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
    throw NumericalError("geodesic_shoot: Hessian of F^2 is not invertible along the solution");
  }
  return ldlt.solve(e_x - e_vx * v);
}

}  // namespace

std::vector<GeodesicSample> geodesic_shoot(const OneDensity& F, const Vec& x0, const Vec& v0, double T, int steps) {
  if (F.smoothness() != Smoothness::C2) throw PreconditionError("geodesic_shoot: needs a C2 metric");
  if (steps < 1 || !(T > 0.0)) throw PreconditionError("geodesic_shoot: need positive T and steps");
  if (v0.norm() < kMinSpeed) throw PreconditionError("geodesic_shoot: initial velocity too small");
  const double dt = T / steps;
  std::vector<GeodesicSample> out;
  out.reserve(steps + 1);
  State s{x0, v0};
  out.push_back({0.0, s.x, s.v});
  auto deriv = [&](const State& st) { return State{st.v, acceleration(F, st.x, st.v)}; };
  for (int i = 0; i < steps; ++i) {
    const State k1 = deriv(s);
    const State k2 = deriv({s.x + 0.5 * dt * k1.x, s.v + 0.5 * dt * k1.v});
    const State k3 = deriv({s.x + 0.5 * dt * k2.x, s.v + 0.5 * dt * k2.v});
    const State k4 = deriv({s.x + dt * k3.x, s.v + dt * k3.v});
    s.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    if (!s.x.allFinite() || !s.v.allFinite()) throw NumericalError("geodesic_shoot: step rejected (non-finite state)");
    out.push_back({(i + 1) * dt, s.x, s.v});
  }
  return out;
}

double chord_deviation(const std::vector<GeodesicSample>& trace) {
  if (trace.size() < 2) return 0.0;
  const Vec a = trace.front().x;
  Vec dir = trace.back().x - a;
  if (dir.norm() == 0.0) return 0.0;
  dir.normalize();
  double worst = 0.0;
  for (const auto& s : trace) {
    const Vec d = s.x - a;
    worst = std::max(worst, (d - d.dot(dir) * dir).norm());
  }
  return worst;
}

}  // namespace projfinsler
