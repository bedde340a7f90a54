#include "projfinsler/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace projfinsler {

namespace {

QuadratureRule reference_gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  if (n == 1) {
    rule.weights[0] = 2.0;
  }
  // Legendre P_n and its derivative at z via the three-term recurrence.
  auto legendre = [n](double z, double& dp) {
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    return p1;
  };
  for (int i = 0; n > 1 && i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double dz = legendre(z, dp) / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    legendre(z, dp);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  cache.emplace(n, rule);
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw PreconditionError("gauss_legendre: need at least one node");
  QuadratureRule ref = reference_gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    ref.nodes[i] = mid + half * ref.nodes[i];
    ref.weights[i] *= half;
  }
  return ref;
}

QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
  if (panels < 1) throw PreconditionError("composite_gauss_legendre: need at least one panel");
  QuadratureRule out;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const QuadratureRule r = gauss_legendre(order, a + p * width, a + (p + 1) * width);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

double sphere_area(int dim) {
  if (dim == 2) return 2.0 * kPi;
  if (dim == 3) return 4.0 * kPi;
  return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

std::vector<SphereNode> sphere_rule(const Vec& pole, SphereResolution res) {
  const int dim = static_cast<int>(pole.size());
  const double pn = pole.norm();
  if (!(pn > 0.0)) throw PreconditionError("sphere_rule: zero pole");
  const Vec w = pole / pn;
  std::vector<SphereNode> out;

  if (dim == 2) {
    if (res.primary < 4) throw PreconditionError("sphere_rule: too few circle nodes");
    const Vec perp = (Vec(2) << -w[1], w[0]).finished();
    // Each half circle gets res.primary / 2 nodes as 16-point panels where possible.
    const int half = res.primary / 2;
    const int order = half % 16 == 0 ? 16 : (half % 8 == 0 ? 8 : half);
    const int panels = half / order;
    for (int side = 0; side < 2; ++side) {
      const double a = -0.5 * kPi + side * kPi;
      const QuadratureRule r = composite_gauss_legendre(panels, order, a, a + kPi);
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        out.push_back({std::cos(r.nodes[i]) * w + std::sin(r.nodes[i]) * perp, r.weights[i]});
      }
    }
    return out;
  }

  if (dim == 3) {
    if (res.primary < 2 || res.secondary < 3) throw PreconditionError("sphere_rule: too few nodes");
    // Orthonormal frame (w, e1, e2).
    Vec a = Vec::Zero(3);
    int least = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(w[i]) < std::abs(w[least])) least = i;
    }
    a[least] = 1.0;
    Vec e1 = a - a.dot(w) * w;
    e1.normalize();
    const Eigen::Vector3d w3 = w, e13 = e1;
    const Vec e2 = w3.cross(e13);
    const int half = res.primary / 2;
    const QuadratureRule lower = gauss_legendre(half, -1.0, 0.0);
    const QuadratureRule upper = gauss_legendre(half, 0.0, 1.0);
    const double dpsi = 2.0 * kPi / res.secondary;
    for (const QuadratureRule* r : {&lower, &upper}) {
      for (std::size_t i = 0; i < r->nodes.size(); ++i) {
        const double t = r->nodes[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
        for (int j = 0; j < res.secondary; ++j) {
          const double psi = (j + 0.5) * dpsi;
          out.push_back({t * w + s * (std::cos(psi) * e1 + std::sin(psi) * e2), r->weights[i] * dpsi});
        }
      }
    }
    return out;
  }
  throw PreconditionError("sphere_rule: only dimensions 2 and 3 are supported");
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth, bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    converged = false;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, bool* converged,
                        int max_depth) {
  bool ok = true;
  if (a == b) {
    if (converged) *converged = true;
    return 0.0;
  }
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  // One forced subdivision so that a lucky first estimate cannot stop early.
  const double m = 0.5 * (a + b);
  const double fl = f(0.5 * (a + m));
  const double fr = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
  const double result = simpson_step(f, a, m, fa, fl, fm, left, 0.5 * tol, max_depth, ok) +
                        simpson_step(f, m, b, fm, fr, fb, right, 0.5 * tol, max_depth, ok);
  if (converged) *converged = ok;
  return result;
}

}  // namespace projfinsler
