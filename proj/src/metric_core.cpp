#include "projfinsler/metric_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace projfinsler {

// ---------------------------------------------------------------------------
// Lattice / AffineMap

Lattice::Lattice(Mat basis) : basis_(std::move(basis)) {
  if (basis_.rows() != basis_.cols() || basis_.rows() == 0) {
    throw PreconditionError("Lattice: basis must be a nonempty square matrix");
  }
  if (std::abs(basis_.determinant()) < 1e-12) throw PreconditionError("Lattice: basis is singular");
  inverse_ = basis_.inverse();
}

Lattice Lattice::integer(int dim) { return Lattice(Mat::Identity(dim, dim)); }

Vec Lattice::reduce(const Vec& x) const {
  Vec s = inverse_ * x;
  for (int i = 0; i < s.size(); ++i) s[i] -= std::floor(s[i]);
  return basis_ * s;
}

AffineMap::AffineMap(Mat linear, Vec offset) : linear_(std::move(linear)), offset_(std::move(offset)) {
  if (linear_.rows() != linear_.cols() || linear_.rows() != offset_.size()) {
    throw PreconditionError("AffineMap: dimension mismatch");
  }
  if (std::abs(linear_.determinant()) < 1e-12) throw PreconditionError("AffineMap: linear part is not invertible");
}

AffineMap AffineMap::identity(int dim) { return AffineMap(Mat::Identity(dim, dim), Vec::Zero(dim)); }
AffineMap AffineMap::translation(const Vec& t) {
  return AffineMap(Mat::Identity(t.size(), t.size()), t);
}
AffineMap AffineMap::linear_map(const Mat& m) { return AffineMap(m, Vec::Zero(m.rows())); }

AffineMap AffineMap::compose(const AffineMap& other) const {
  return AffineMap(linear_ * other.linear_, linear_ * other.offset_ + offset_);
}

AffineMap AffineMap::inverse() const {
  Mat inv = linear_.inverse();
  return AffineMap(inv, -inv * offset_);
}

// ---------------------------------------------------------------------------
// OneDensity

OneDensity::OneDensity(int dim, LagrangianFn fn, DensityTraits traits)
    : dim_(dim), fn_(std::move(fn)), traits_(std::move(traits)) {
  if (dim_ < 1) throw PreconditionError("OneDensity: dimension must be positive");
  if (!fn_) throw PreconditionError("OneDensity: empty evaluation function");
  if (traits_.lattice && traits_.lattice->dim() != dim_) {
    throw PreconditionError("OneDensity: lattice dimension mismatch");
  }
  if (!(traits_.fd_step > 0.0)) throw PreconditionError("OneDensity: fd_step must be positive");
}

OneDensity OneDensity::with_traits(DensityTraits traits) const {
  OneDensity out(dim_, fn_, std::move(traits));
  out.distance_ = distance_;
  return out;
}

OneDensity OneDensity::with_distance(DistanceFn d) const {
  OneDensity out = *this;
  out.distance_ = std::move(d);
  return out;
}

namespace {

std::optional<Lattice> common_lattice(const OneDensity& a, const OneDensity& b) {
  if (a.translation_invariant()) return b.lattice();
  if (b.translation_invariant()) return a.lattice();
  if (a.lattice() && b.lattice() && a.lattice()->basis().isApprox(b.lattice()->basis())) return a.lattice();
  return std::nullopt;
}

DensityTraits combined_traits(const OneDensity& a, const OneDensity& b, const std::string& label) {
  DensityTraits t;
  t.smoothness = (a.smoothness() == Smoothness::C2 && b.smoothness() == Smoothness::C2) ? Smoothness::C2
                                                                                          : Smoothness::C0;
  t.lattice = common_lattice(a, b);
  t.fd_step = std::min(a.fd_step(), b.fd_step());
  t.reversible = a.reversible() && b.reversible();
  t.translation_invariant = a.translation_invariant() && b.translation_invariant();
  t.label = label;
  return t;
}

void check_same_dim(const OneDensity& a, const OneDensity& b) {
  if (a.dim() != b.dim()) throw PreconditionError("OneDensity: dimension mismatch");
}

}  // namespace

OneDensity operator+(const OneDensity& a, const OneDensity& b) {
  check_same_dim(a, b);
  auto fa = a.function();
  auto fb = b.function();
  return OneDensity(
      a.dim(), [fa, fb](const Vec& x, const Vec& v) { return fa(x, v) + fb(x, v); },
      combined_traits(a, b, a.label() + "+" + b.label()));
}

OneDensity operator-(const OneDensity& a, const OneDensity& b) {
  check_same_dim(a, b);
  auto fa = a.function();
  auto fb = b.function();
  return OneDensity(
      a.dim(), [fa, fb](const Vec& x, const Vec& v) { return fa(x, v) - fb(x, v); },
      combined_traits(a, b, a.label() + "-" + b.label()));
}

OneDensity scaled(const OneDensity& a, double factor) {
  auto fa = a.function();
  DensityTraits t = a.traits();
  t.label = std::to_string(factor) + "*" + a.label();
  return OneDensity(a.dim(), [fa, factor](const Vec& x, const Vec& v) { return factor * fa(x, v); }, t);
}

FinslerMetric FinslerMetric::admit(const OneDensity& L, const std::vector<Vec>& points, int n_dirs) {
  FinslerSampling s{points, n_dirs};
  const FinslerCheck c = check_finsler(L, s);
  if (!c.positive) throw PreconditionError("FinslerMetric: not positive on sampled directions");
  if (!c.convex) throw PreconditionError("FinslerMetric: Hessian of F^2 not positive definite on samples");
  return FinslerMetric(L);
}

// ---------------------------------------------------------------------------
// Catalog

double Params::scalar(const std::string& key, double fallback) const {
  auto it = scalars.find(key);
  return it == scalars.end() ? fallback : it->second;
}

Mat Params::matrix(const std::string& key, const Mat& fallback) const {
  auto it = matrices.find(key);
  return it == matrices.end() ? fallback : it->second;
}

std::vector<CatalogInfo> catalog_entries() {
  return {
      {"euclidean", true, true, true, true, Smoothness::C2},
      {"ellipse_norm", true, true, true, true, Smoothness::C2},
      {"randers_exact", true, true, false, true, Smoothness::C2},
      {"busemann_example_density", false, true, true, true, Smoothness::C0},
      {"conformal_nonprojective", true, false, true, true, Smoothness::C2},
      {"pnorm_smooth", true, true, true, true, Smoothness::C2},
  };
}

namespace {

std::string canonical_name(const std::string& name) {
  if (name == "conformal_noneprojective") return "conformal_nonprojective";
  if (name == "busemann_example") return "busemann_example_density";
  return name;
}

Mat default_diagonal(int dim) {
  Mat A = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) A(i, i) = i + 1.0;
  return A;
}

Mat checked_spd(const Mat& A, int dim, const std::string& entry) {
  if (A.rows() != dim || A.cols() != dim) {
    throw PreconditionError(entry + ": matrix A must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (!A.isApprox(A.transpose(), 1e-12)) throw PreconditionError(entry + ": matrix A must be symmetric");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw PreconditionError(entry + ": matrix A must be positive definite");
  return A;
}

DensityTraits norm_traits(int dim, const std::string& label, bool reversible) {
  DensityTraits t;
  t.lattice = Lattice::integer(dim);
  t.reversible = reversible;
  t.translation_invariant = true;
  t.label = label;
  return t;
}

}  // namespace

CatalogInfo catalog_info(const std::string& name) {
  const std::string key = canonical_name(name);
  for (const auto& e : catalog_entries()) {
    if (e.name == key) return e;
  }
  throw PreconditionError("catalog: unknown metric '" + name + "'");
}

double busemann_distance(const Vec& x, const Vec& y) {
  if (x.size() != 2 || y.size() != 2) throw PreconditionError("busemann distance is defined on the plane");
  auto g = [](double t) { return 7.0 * t + std::sin(2.0 * kPi * t); };
  return (x - y).norm() + std::abs(g(x[1]) - g(y[1]));
}

OneDensity randers_metric(const Mat& A, const TrigPotential& f, const std::string& label) {
  const int dim = static_cast<int>(A.rows());
  checked_spd(A, dim, label);
  if (f.dim() != dim) throw PreconditionError(label + ": potential dimension mismatch");
  const double dual_bound = f.gradient_bound() * std::sqrt(A.inverse().eigenvalues().real().maxCoeff());
  if (dual_bound >= 1.0) {
    throw PreconditionError(label + ": potential too large, |df|* must stay below 1 for positivity");
  }
  DensityTraits t;
  t.lattice = Lattice(f.basis());
  t.label = label;
  return OneDensity(
      dim, [A, f](const Vec& x, const Vec& v) { return std::sqrt(v.dot(A * v)) + f.gradient(x).dot(v); }, t);
}

OneDensity catalog_metric(const std::string& name, int dim, const Params& params) {
  const std::string key = canonical_name(name);
  if (dim < 2) throw PreconditionError("catalog: dimension must be at least 2");

  if (key == "euclidean") {
    return OneDensity(dim, [](const Vec&, const Vec& v) { return v.norm(); }, norm_traits(dim, key, true));
  }
  if (key == "ellipse_norm") {
    const Mat A = checked_spd(params.matrix("A", default_diagonal(dim)), dim, key);
    return OneDensity(
        dim, [A](const Vec&, const Vec& v) { return std::sqrt(v.dot(A * v)); }, norm_traits(dim, key, true));
  }
  if (key == "randers_exact") {
    const Mat A = params.matrix("A", default_diagonal(dim));
    const double amplitude = params.scalar("amplitude", 0.05);
    return randers_metric(A, TrigPotential::sine_product(dim, amplitude), key);
  }
  if (key == "busemann_example_density") {
    if (dim != 2) throw PreconditionError("busemann_example_density is only defined for n = 2");
    DensityTraits t;
    t.smoothness = Smoothness::C0;
    t.lattice = Lattice::integer(2);
    t.reversible = true;
    t.label = key;
    OneDensity d(
        2,
        [](const Vec& x, const Vec& v) {
          return v.norm() + (7.0 + 2.0 * kPi * std::cos(2.0 * kPi * x[1])) * std::abs(v[1]);
        },
        t);
    return d.with_distance(busemann_distance);
  }
  if (key == "conformal_nonprojective") {
    const double a = params.scalar("amplitude", 1.0);
    if (a <= -1.0) throw PreconditionError("conformal_nonprojective: amplitude must exceed -1");
    DensityTraits t;
    t.lattice = Lattice::integer(dim);
    t.reversible = true;
    t.label = key;
    return OneDensity(
        dim,
        [a](const Vec& x, const Vec& v) {
          const double s = std::sin(2.0 * kPi * x[1]);
          return (1.0 + a * s * s) * v.norm();
        },
        t);
  }
  if (key == "pnorm_smooth") {
    const double p = params.scalar("p", 4.0);
    const double eps = params.scalar("eps", 0.1);
    if (p < 2.0 || std::fmod(p, 2.0) != 0.0) throw PreconditionError("pnorm_smooth: p must be an even integer >= 2");
    if (eps <= 0.0) throw PreconditionError("pnorm_smooth: eps must be positive");
    return OneDensity(
        dim,
        [p, eps](const Vec&, const Vec& v) {
          const double scale = v.cwiseAbs().maxCoeff();
          if (scale == 0.0) return 0.0;
          double s = 0.0;
          for (int i = 0; i < v.size(); ++i) s += std::pow(v[i] / scale, p);
          return scale * std::pow(s, 1.0 / p) + eps * v.norm();
        },
        norm_traits(dim, key, true));
  }
  throw PreconditionError("catalog: unknown metric '" + name + "'");
}

// ---------------------------------------------------------------------------
// Partials

Partials partials(const OneDensity& L, const Vec& x, const Vec& v, unsigned which, double min_speed) {
  return partials_with_step(L, x, v, L.fd_step(), which, min_speed);
}

Partials partials_with_step(const OneDensity& L, const Vec& x, const Vec& v, double step, unsigned which,
                            double min_speed) {
  const int n = L.dim();
  if (x.size() != n || v.size() != n) throw PreconditionError("partials: dimension mismatch");
  const double speed = v.norm();
  if (!(speed >= min_speed)) throw PreconditionError("partials: velocity too close to the zero section");
  const Vec u = v / speed;
  const double h = step * std::max(1.0, x.cwiseAbs().maxCoeff());
  const double k = step;
  for (int i = 0; i < n; ++i) {
    if (x[i] + h == x[i] || !(h > 0.0)) throw NumericalError("partials: finite-difference step underflow");
  }

  Partials out;
  Vec xp = x, xm = x, up = u, um = u;

  if (which & kDx) {
    out.dx.resize(n);
    for (int i = 0; i < n; ++i) {
      xp[i] += h;
      xm[i] -= h;
      out.dx[i] = speed * (L(xp, u) - L(xm, u)) / (2.0 * h);
      xp[i] = xm[i] = x[i];
    }
  }
  if (which & kDv) {
    out.dv.resize(n);
    for (int j = 0; j < n; ++j) {
      up[j] += k;
      um[j] -= k;
      out.dv[j] = (L(x, up) - L(x, um)) / (2.0 * k);
      up[j] = um[j] = u[j];
    }
  }
  if (which & kDxDv) {
    out.dxdv.resize(n, n);
    for (int i = 0; i < n; ++i) {
      xp[i] += h;
      xm[i] -= h;
      for (int j = 0; j < n; ++j) {
        up[j] += k;
        um[j] -= k;
        out.dxdv(i, j) = (L(xp, up) - L(xp, um) - L(xm, up) + L(xm, um)) / (4.0 * h * k);
        up[j] = um[j] = u[j];
      }
      xp[i] = xm[i] = x[i];
    }
  }
  if (which & kDvDv) {
    out.dvdv.resize(n, n);
    const double center = L(x, u);
    for (int i = 0; i < n; ++i) {
      up[i] += k;
      um[i] -= k;
      out.dvdv(i, i) = (L(x, up) - 2.0 * center + L(x, um)) / (k * k * speed);
      up[i] = um[i] = u[i];
      for (int j = i + 1; j < n; ++j) {
        Vec pp = u, pm = u, mp = u, mm = u;
        pp[i] += k, pp[j] += k;
        pm[i] += k, pm[j] -= k;
        mp[i] -= k, mp[j] += k;
        mm[i] -= k, mm[j] -= k;
        const double value = (L(x, pp) - L(x, pm) - L(x, mp) + L(x, mm)) / (4.0 * k * k * speed);
        out.dvdv(i, j) = out.dvdv(j, i) = value;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transformations

OneDensity restrict_to_plane(const OneDensity& F, const Vec& base, const Vec& e1, const Vec& e2) {
  const int n = F.dim();
  if (base.size() != n || e1.size() != n || e2.size() != n) {
    throw PreconditionError("restrict_to_plane: dimension mismatch");
  }
  const double gram = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
  if (!(gram > 1e-20 * e1.squaredNorm() * e2.squaredNorm()) || e1.norm() == 0.0 || e2.norm() == 0.0) {
    throw PreconditionError("restrict_to_plane: degenerate basis");
  }
  Mat E(n, 2);
  E.col(0) = e1;
  E.col(1) = e2;

  DensityTraits t = F.traits();
  t.lattice.reset();
  t.label = F.label() + "|plane";
  if (F.translation_invariant()) {
    t.lattice = Lattice::integer(2);
  } else if (F.lattice()) {
    // Periodic in the plane coordinates when both generators are lattice vectors.
    const Mat s = F.lattice()->inverse() * E;
    if ((s - s.array().round().matrix()).cwiseAbs().maxCoeff() < 1e-12) t.lattice = Lattice::integer(2);
  }
  auto fn = F.function();
  return OneDensity(
      2, [fn, base, E](const Vec& s, const Vec& w) { return fn(base + E * s, E * w); }, t);
}

OneDensity affine_pullback(const OneDensity& L, const AffineMap& T) {
  if (T.dim() != L.dim()) throw PreconditionError("affine_pullback: dimension mismatch");
  DensityTraits t = L.traits();
  t.label = "pullback(" + L.label() + ")";
  if (L.lattice()) t.lattice = Lattice(T.linear().inverse() * L.lattice()->basis());
  auto fn = L.function();
  OneDensity out(
      L.dim(), [fn, T](const Vec& x, const Vec& v) { return fn(T.apply(x), T.apply_linear(v)); }, t);
  if (L.closed_form_distance()) {
    auto d = *L.closed_form_distance();
    out = out.with_distance([d, T](const Vec& x, const Vec& y) { return d(T.apply(x), T.apply(y)); });
  }
  return out;
}

EvenOddParts even_odd_split(const OneDensity& F) {
  auto fn = F.function();
  DensityTraits even_t = F.traits();
  even_t.reversible = true;
  even_t.label = "even(" + F.label() + ")";
  DensityTraits odd_t = F.traits();
  odd_t.reversible = false;
  odd_t.label = "odd(" + F.label() + ")";
  return {
      OneDensity(F.dim(), [fn](const Vec& x, const Vec& v) { return 0.5 * (fn(x, v) + fn(x, -v)); }, even_t),
      OneDensity(F.dim(), [fn](const Vec& x, const Vec& v) { return 0.5 * (fn(x, v) - fn(x, -v)); }, odd_t),
  };
}

std::vector<Vec> cell_sample_points(int dim, const std::optional<Lattice>& lattice, int per_axis) {
  if (per_axis < 1) throw PreconditionError("cell_sample_points: per_axis must be positive");
  const Mat B = lattice ? lattice->basis() : Mat::Identity(dim, dim);
  std::vector<Vec> pts;
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(dim);
  while (true) {
    pts.push_back(B * (idx.cast<double>() / per_axis));
    int a = 0;
    while (a < dim && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == dim) break;
  }
  return pts;
}

std::vector<Vec> sphere_directions(int dim, int count) {
  if (count < 1) throw PreconditionError("sphere_directions: count must be positive");
  std::vector<Vec> dirs;
  dirs.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * kPi * k / count;
      dirs.push_back((Vec(2) << std::cos(a), std::sin(a)).finished());
    }
  } else if (dim == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.push_back((Vec(3) << r * std::cos(golden * k), r * std::sin(golden * k), z).finished());
    }
  } else {
    Rng rng(0x5eed + dim);
    for (int k = 0; k < count; ++k) dirs.push_back(random_unit_vector(rng, dim));
  }
  return dirs;
}

FinslerCheck check_finsler(const OneDensity& F, const FinslerSampling& sampling) {
  if (sampling.points.empty()) throw PreconditionError("check_finsler: no sample points");
  FinslerCheck c;
  c.min_value = std::numeric_limits<double>::infinity();
  c.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();
  const auto dirs = sphere_directions(F.dim(), sampling.n_dirs);
  for (const Vec& x : sampling.points) {
    for (const Vec& u : dirs) {
      const double value = F(x, u);
      c.min_value = std::min(c.min_value, value);
      if (F.smoothness() == Smoothness::C2 && value > 0.0) {
        const Partials d = partials(F, x, u, kDv | kDvDv);
        const Mat hess = 2.0 * (d.dv * d.dv.transpose() + value * d.dvdv);
        Eigen::SelfAdjointEigenSolver<Mat> es(hess, Eigen::EigenvaluesOnly);
        c.min_hessian_eigenvalue = std::min(c.min_hessian_eigenvalue, es.eigenvalues().minCoeff());
      }
    }
  }
  c.positive = c.min_value > 0.0;
  c.convex = c.positive && F.smoothness() == Smoothness::C2 && c.min_hessian_eigenvalue > sampling.convexity_margin;
  return c;
}

double perturb_to_finsler(const OneDensity& F, const OneDensity& L, const std::vector<double>& eps_grid,
                          const FinslerSampling& sampling) {
  if (eps_grid.empty()) throw PreconditionError("perturb_to_finsler: empty eps grid");
  double best = 0.0;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw PreconditionError("perturb_to_finsler: eps grid must be positive");
    if (eps <= best) continue;
    if (check_finsler(F + scaled(L, eps), sampling).ok()) best = eps;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Metric axioms

std::vector<PointTriple> sample_triples(Rng& rng, int dim, int count, double box) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec lo = Vec::Constant(dim, -box);
  const Vec hi = Vec::Constant(dim, box);
  std::vector<PointTriple> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    PointTriple t{random_in_box(rng, lo, hi), random_in_box(rng, lo, hi), random_in_box(rng, lo, hi), unit(rng)};
    out.push_back(std::move(t));
  }
  return out;
}

AxiomReport metric_axioms_check(const DistanceFn& d, const std::vector<PointTriple>& triples, double tol) {
  if (triples.empty()) throw PreconditionError("metric_axioms_check: empty sampler");
  AxiomReport r;
  r.n_triples = triples.size();
  r.tol = tol;
  r.min_separation = std::numeric_limits<double>::infinity();
  for (const auto& tr : triples) {
    const double dxy = d(tr.x, tr.y);
    const double dyz = d(tr.y, tr.z);
    const double dxz = d(tr.x, tr.z);
    r.nonnegativity = std::max({r.nonnegativity, -dxy, -dyz, -dxz});
    r.identity = std::max(r.identity, std::abs(d(tr.x, tr.x)));
    if ((tr.x - tr.y).norm() > 0.0) r.min_separation = std::min(r.min_separation, dxy / (tr.x - tr.y).norm());
    r.triangle = std::max(r.triangle, dxz - dxy - dyz);
    const Vec w = tr.x + tr.t * (tr.z - tr.x);
    r.additivity = std::max(r.additivity, std::abs(d(tr.x, w) + d(w, tr.z) - dxz));
  }
  return r;
}

}  // namespace projfinsler
