#include "projfinsler/grassmannian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace projfinsler {

HyperplaneMeasure::HyperplaneMeasure(int dim, HyperplaneDensityFn density, bool symmetric,
                                     std::optional<Lattice> invariance_lattice)
    : dim_(dim), density_(std::move(density)), symmetric_(symmetric), lattice_(std::move(invariance_lattice)) {
  if (dim_ != 2 && dim_ != 3) throw PreconditionError("HyperplaneMeasure: only n = 2, 3 are supported");
  if (!density_) throw PreconditionError("HyperplaneMeasure: empty density");
  if (lattice_ && lattice_->dim() != dim_) throw PreconditionError("HyperplaneMeasure: lattice dimension mismatch");
}

double HyperplaneMeasure::symmetry_defect(Rng& rng, int samples, double p_range) const {
  std::uniform_real_distribution<double> pd(-p_range, p_range);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec u = random_unit_vector(rng, dim_);
    const double p = pd(rng);
    worst = std::max(worst, std::abs(density_(-u, -p) - density_(u, p)));
  }
  return worst;
}

namespace {

// Sign-canonical pole so that w and -w yield the same node set.
Vec canonical_pole(const Vec& w) {
  int big = 0;
  for (int i = 1; i < w.size(); ++i) {
    if (std::abs(w[i]) > std::abs(w[big])) big = i;
  }
  return w[big] < 0.0 ? Vec(-w) : w;
}

double slab_integral(const HyperplaneMeasure& mu, const Vec& u, double a, double b, double tol, bool& ok) {
  if (a == b) return 0.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  bool converged = true;
  const double value = adaptive_simpson([&](double p) { return mu.density(u, p); }, lo, hi,
                                        tol * std::max(1.0, hi - lo), &converged);
  ok = ok && converged;
  return value;
}

double segment_measure_at(const HyperplaneMeasure& mu, const Vec& x, const Vec& y, SphereResolution res,
                          double simpson_tol, bool& ok) {
  const auto nodes = sphere_rule(canonical_pole(y - x), res);
  double total = 0.0;
  for (const auto& node : nodes) {
    total += node.weight * slab_integral(mu, node.direction, node.direction.dot(x), node.direction.dot(y), simpson_tol, ok);
  }
  return 0.5 * total;
}

}  // namespace

SegmentMeasureResult segment_measure(const HyperplaneMeasure& mu, const Vec& x, const Vec& y,
                                     const CroftonOptions& options) {
  if (x.size() != mu.dim() || y.size() != mu.dim()) throw PreconditionError("segment_measure: dimension mismatch");
  if ((x - y).norm() == 0.0) return {0.0, 0.0};
  const SphereResolution res = options.resolved(mu.dim());
  bool ok = true;
  const double full = segment_measure_at(mu, x, y, res, options.simpson_tol, ok);
  const double half = segment_measure_at(mu, x, y, res.halved(), options.simpson_tol, ok);
  SegmentMeasureResult r{full, std::abs(full - half)};
  if (!std::isfinite(full) || !ok || r.error_estimate > options.max_error * std::max(1.0, std::abs(full))) {
    throw NumericalError("segment_measure: quadrature did not converge (error estimate " +
                         std::to_string(r.error_estimate) + ")");
  }
  return r;
}

DistanceFn crofton_distance(const HyperplaneMeasure& mu, const CroftonOptions& options) {
  return [mu, options](const Vec& x, const Vec& y) { return segment_measure(mu, x, y, options).value; };
}

FinslerMetric crofton_finsler(const HyperplaneMeasure& mu, const CroftonOptions& options, bool skip_checks) {
  const int n = mu.dim();
  if (!skip_checks) {
    if (!mu.symmetric()) throw PreconditionError("crofton_finsler: measure must be symmetric");
    Rng rng(0xc0ffee);
    if (mu.symmetry_defect(rng, 200) > 1e-12) {
      throw PreconditionError("crofton_finsler: density violates m(-u,-p) = m(u,p)");
    }
    const auto triples = sample_triples(rng, n, 20, 1.0);
    const auto q = quasipositivity_check(mu, triples, 1e-12, n == 2 ? SphereResolution{512, 1} : SphereResolution{32, 64});
    if (!q.pass()) {
      throw PreconditionError("crofton_finsler: quasipositivity sampling failed (min separating measure " +
                              std::to_string(q.min_measure) + ")");
    }
  }
  const SphereResolution res = options.resolved(n);
  auto density = mu.density_function();
  DensityTraits t;
  t.reversible = true;
  t.label = "crofton";
  if (mu.invariance_lattice()) t.lattice = mu.invariance_lattice();
  return FinslerMetric(OneDensity(
      n,
      [density, res](const Vec& x, const Vec& v) {
        const double speed = v.norm();
        if (speed == 0.0) return 0.0;
        const auto nodes = sphere_rule(canonical_pole(v), res);
        double total = 0.0;
        for (const auto& node : nodes) {
          const Vec& u = node.direction;
          total += node.weight * std::abs(u.dot(v)) * density(u, u.dot(x));
        }
        return 0.5 * total;
      },
      t));
}

double separating_measure(const HyperplaneMeasure& mu, const Vec& x, const Vec& y, const Vec& z, SphereResolution res) {
  const int n = mu.dim();
  if (res.primary == 0) res = n == 2 ? SphereResolution{2048, 1} : SphereResolution{64, 128};
  Vec pole = z - y;
  if (pole.norm() == 0.0) pole = x - y;
  const auto nodes = sphere_rule(canonical_pole(pole), res);
  double total = 0.0;
  bool ok = true;
  for (const auto& node : nodes) {
    const Vec& u = node.direction;
    const double px = u.dot(x);
    const double a = std::min(u.dot(y), u.dot(z));
    const double b = std::max(u.dot(y), u.dot(z));
    if (px < a) {
      total += node.weight * slab_integral(mu, u, px, a, 1e-10, ok);
    } else if (px > b) {
      total += node.weight * slab_integral(mu, u, b, px, 1e-10, ok);
    }
  }
  return 0.5 * total;
}

QuasipositivityReport quasipositivity_check(const HyperplaneMeasure& mu, const std::vector<PointTriple>& triples,
                                            double tol, SphereResolution res) {
  if (triples.empty()) throw PreconditionError("quasipositivity_check: empty sampler");
  QuasipositivityReport r;
  r.tol = tol;
  r.min_measure = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    // Skip x on the segment [y, z].
    const Vec yz = t.z - t.y;
    const double len2 = yz.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((t.x - t.y).dot(yz) / len2, 0.0, 1.0) : 0.0;
    if ((t.x - (t.y + s * yz)).norm() < 1e-12) continue;
    const double m = separating_measure(mu, t.x, t.y, t.z, res);
    r.measures.push_back(m);
    if (m < r.min_measure) {
      r.min_measure = m;
      r.worst_index = i;
    }
  }
  r.n_triples = r.measures.size();
  if (r.n_triples == 0) throw PreconditionError("quasipositivity_check: all triples degenerate");
  return r;
}

HyperplaneMeasure measure_pushforward(const HyperplaneMeasure& mu, const AffineMap& T) {
  const int n = mu.dim();
  if (T.dim() != n) throw PreconditionError("measure_pushforward: dimension mismatch");
  const Mat inv_t = T.linear().inverse().transpose();
  const double det = std::abs(T.linear().determinant());
  const Vec b = T.offset();
  auto density = mu.density_function();
  std::optional<Lattice> lattice;
  if (mu.invariance_lattice()) lattice = Lattice(T.linear().inverse() * mu.invariance_lattice()->basis());
  return HyperplaneMeasure(
      n,
      [density, inv_t, det, b, n](const Vec& u_new, double p_new) {
        const Vec q = inv_t * u_new;
        const double nq = q.norm();
        const Vec u = q / nq;
        const double p = p_new / nq + u.dot(b);
        return density(u, p) / (det * std::pow(nq, n + 1));
      },
      mu.symmetric(), lattice);
}

OrbitNetReport lattice_orbit_net(const Vec& u, int bound, double eps, std::size_t budget) {
  if (bound < 1) throw PreconditionError("lattice_orbit_net: bound must be >= 1");
  if (!(eps > 0.0)) throw PreconditionError("lattice_orbit_net: eps must be positive");
  const int n = static_cast<int>(u.size());
  const double count = std::pow(2.0 * bound + 1.0, n);
  if (count > static_cast<double>(budget)) {
    throw PreconditionError("lattice_orbit_net: enumeration exceeds the configured budget");
  }
  std::vector<double> values{0.0, 1.0};
  Eigen::VectorXi m = Eigen::VectorXi::Constant(n, -bound);
  OrbitNetReport r;
  while (true) {
    ++r.enumerated;
    const double s = u.dot(m.cast<double>());
    if (s >= 0.0 && s <= 1.0) {
      values.push_back(s);
      ++r.points_in_unit_interval;
    }
    int a = 0;
    while (a < n && ++m[a] > bound) m[a++] = -bound;
    if (a == n) break;
  }
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i) r.largest_gap = std::max(r.largest_gap, values[i] - values[i - 1]);
  r.dense = r.largest_gap <= eps;
  return r;
}

InvarianceGapReport invariance_gap(const HyperplaneDensityFn& g, const Lattice& lattice,
                                   const InvarianceSampling& sampling, double tol) {
  const int n = lattice.dim();
  if (sampling.samples < 1) throw PreconditionError("invariance_gap: empty sampler");
  Rng rng(sampling.seed);
  std::uniform_real_distribution<double> pd(-sampling.p_range, sampling.p_range);
  std::uniform_real_distribution<double> cell(0.0, 1.0);

  // Lattice vectors used for the precondition.
  std::vector<Vec> shifts;
  Eigen::VectorXi m = Eigen::VectorXi::Constant(n, -sampling.lattice_radius);
  while (true) {
    if (m.cwiseAbs().sum() != 0) shifts.push_back(lattice.basis() * m.cast<double>());
    int a = 0;
    while (a < n && ++m[a] > sampling.lattice_radius) m[a++] = -sampling.lattice_radius;
    if (a == n) break;
  }

  InvarianceGapReport r;
  r.tol = tol;
  r.samples = static_cast<std::size_t>(sampling.samples);
  const int precondition_samples = std::min(sampling.samples, 200);
  for (int i = 0; i < sampling.samples; ++i) {
    const Vec u = random_unit_vector(rng, n);
    const double p = pd(rng);
    Vec s(n);
    for (int k = 0; k < n; ++k) s[k] = 2.0 * cell(rng) - 1.0;
    const Vec t = lattice.basis() * s;
    const double base = g(u, p);
    if (i < precondition_samples) {
      for (const Vec& shift : shifts) {
        r.precondition_defect = std::max(r.precondition_defect, std::abs(g(u, p + u.dot(shift)) - base));
      }
    }
    r.gap = std::max(r.gap, std::abs(g(u, p + u.dot(t)) - base));
  }
  if (r.precondition_defect > tol) {
    throw PreconditionError("invariance_gap: function is not lattice invariant on samples (defect " +
                            std::to_string(r.precondition_defect) + ")");
  }
  return r;
}

}  // namespace projfinsler
