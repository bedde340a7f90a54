#include "projfinsler/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace projfinsler {

CellGrid::CellGrid(Mat basis, Vec origin, int per_axis, bool periodic)
    : basis_(std::move(basis)), origin_(std::move(origin)), per_axis_(per_axis), periodic_(periodic) {
  if (basis_.rows() != basis_.cols() || origin_.size() != basis_.rows()) throw PreconditionError("CellGrid: dimension mismatch");
  if (per_axis_ < (periodic_ ? 4 : 3)) throw PreconditionError("CellGrid: too few points per axis");
  size_ = 1;
  for (int i = 0; i < dim(); ++i) size_ *= static_cast<std::size_t>(per_axis_);
}

CellGrid CellGrid::periodic(const Lattice& lattice, int per_axis, const Vec& origin) {
  return CellGrid(lattice.basis(), origin, per_axis, true);
}

CellGrid CellGrid::periodic(const Lattice& lattice, int per_axis) {
  return periodic(lattice, per_axis, Vec::Zero(lattice.dim()));
}

CellGrid CellGrid::box(const Vec& lo, const Vec& hi, int per_axis) {
  if (lo.size() != hi.size() || ((hi - lo).array() <= 0.0).any()) throw PreconditionError("CellGrid::box: need lo < hi");
  return CellGrid(Mat((hi - lo).asDiagonal()), lo, per_axis, false);
}

std::vector<int> CellGrid::unravel(std::size_t index) const {
  std::vector<int> m(dim());
  for (int i = 0; i < dim(); ++i) {
    m[i] = static_cast<int>(index % per_axis_);
    index /= per_axis_;
  }
  return m;
}

std::size_t CellGrid::index(const std::vector<int>& multi) const {
  std::size_t idx = 0;
  for (int i = dim() - 1; i >= 0; --i) idx = idx * per_axis_ + static_cast<std::size_t>(multi[i]);
  return idx;
}

Vec CellGrid::point(std::size_t index) const {
  const std::vector<int> m = unravel(index);
  Vec s(dim());
  for (int i = 0; i < dim(); ++i) s(i) = m[i] * step();
  return origin_ + basis_ * s;
}

namespace {

// Derivative of g along one axis at index m: fourth-order central differences,
// wrapped on periodic grids, lower order near the faces of closed grids.
template <class G>
double axis_derivative(const G& g, int m, int n, double h, bool periodic) {
  if (periodic) {
    auto at = [&](int k) { return g(((k % n) + n) % n); };
    return (-at(m + 2) + 8.0 * at(m + 1) - 8.0 * at(m - 1) + at(m - 2)) / (12.0 * h);
  }
  if (m >= 2 && m <= n - 3) return (-g(m + 2) + 8.0 * g(m + 1) - 8.0 * g(m - 1) + g(m - 2)) / (12.0 * h);
  if (m >= 1 && m <= n - 2) return (g(m + 1) - g(m - 1)) / (2.0 * h);
  if (m == 0) return (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h);
  return (3.0 * g(n - 1) - 4.0 * g(n - 2) + g(n - 3)) / (2.0 * h);
}

std::vector<Vec> axis_directions(int dim) {
  std::vector<Vec> dirs;
  for (int i = 0; i < dim; ++i) {
    dirs.push_back(Vec::Unit(dim, i));
    dirs.push_back(-Vec::Unit(dim, i));
  }
  return dirs;
}

// Axis directions plus all sign diagonals.
std::vector<Vec> test_directions(int dim) {
  std::vector<Vec> dirs = axis_directions(dim);
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (mask >> i) & 1 ? -1.0 : 1.0;
    dirs.push_back(v / std::sqrt(static_cast<double>(dim)));
  }
  return dirs;
}

FinslerMetric frozen_at(const OneDensity& F, const Vec& base, const std::string& label) {
  DensityTraits t = F.traits();
  t.translation_invariant = true;
  t.lattice = Lattice::integer(F.dim());
  t.label = label;
  return FinslerMetric(OneDensity(F.dim(), [F, base](const Vec&, const Vec& v) { return F(base, v); }, t));
}

std::string describe(const Vec& x) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ')';
  return os.str();
}

}  // namespace

FinslerMetric translation_invariant_part(const OneDensity& F) {
  return frozen_at(F, Vec::Zero(F.dim()), F.label().empty() ? "norm_part" : F.label() + "_0");
}

OneFormExtraction extract_one_form(const OneDensity& L, const CellGrid& grid, double tol) {
  if (L.dim() != grid.dim()) throw PreconditionError("extract_one_form: dimension mismatch");
  const int n = grid.dim();
  const std::vector<Vec> axes = axis_directions(n);
  const std::vector<Vec> tests = test_directions(n);
  OneFormExtraction out{OneFormField{grid, {}}, 0.0, 0.0};
  auto& beta = out.field.beta;
  beta.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec x = grid.point(k);
    Vec b = Vec::Zero(n);
    for (const Vec& v : axes) b += partials(L, x, v, kDv).dv;
    b /= static_cast<double>(axes.size());
    for (const Vec& v : tests) out.linearity_defect = std::max(out.linearity_defect, std::abs(L(x, v) - b.dot(v)));
    beta.push_back(std::move(b));
  }

  // Discrete curl in ambient coordinates: d beta / dx = (d beta / ds) B^{-1}.
  const Mat Binv = grid.basis().inverse();
  const int N = grid.per_axis();
  const double h = grid.step();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<int> m = grid.unravel(k);
    Mat Js(n, n);
    for (int a = 0; a < n; ++a) {
      std::vector<int> probe = m;
      for (int c = 0; c < n; ++c) {
        auto g = [&](int idx) {
          probe[a] = idx;
          return beta[grid.index(probe)](c);
        };
        Js(c, a) = axis_derivative(g, m[a], N, h, grid.is_periodic());
      }
    }
    const Mat Jx = Js * Binv;
    out.closedness_defect = std::max(out.closedness_defect, (Jx - Jx.transpose()).cwiseAbs().maxCoeff());
  }
  if (out.linearity_defect > tol) {
    std::ostringstream os;
    os << "linearity defect " << out.linearity_defect << " exceeds tol " << tol << " (input is not a 1-form)";
    throw DecompositionError("linearity", os.str());
  }
  return out;
}

PotentialResult integrate_potential(const OneFormField& field, const std::vector<int>& base_node, double tol) {
  const CellGrid& grid = field.grid;
  const int n = grid.dim();
  const int N = grid.per_axis();
  const double h = grid.step();
  if (static_cast<int>(base_node.size()) != n || field.beta.size() != grid.size()) {
    throw PreconditionError("integrate_potential: field does not match its grid");
  }
  // gamma[a][node]: component of beta along the a-th cell generator.
  std::vector<std::vector<double>> gamma(n, std::vector<double>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec g = grid.basis().transpose() * field.beta[k];
    for (int a = 0; a < n; ++a) gamma[a][k] = g(a);
  }

  // Integral of gamma_a along axis a from index `from` to `to`, other indices as in `node`.
  auto line = [&](int a, std::vector<int> node, int from, int to) {
    if (from == to) return 0.0;
    const int lo = std::min(from, to), hi = std::max(from, to);
    auto g = [&](int idx) {
      node[a] = idx;
      return gamma[a][grid.index(node)];
    };
    double s = 0.5 * (g(lo) + g(hi));
    for (int m = lo + 1; m < hi; ++m) s += g(m);
    s *= h;
    s -= h * h / 12.0 * (axis_derivative(g, hi, N, h, grid.is_periodic()) - axis_derivative(g, lo, N, h, grid.is_periodic()));
    return to > from ? s : -s;
  };

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> orders;
  do orders.push_back(order);
  while (std::next_permutation(order.begin(), order.end()));

  PotentialResult out;
  out.f.assign(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::vector<int> target = grid.unravel(k);
    for (std::size_t o = 0; o < orders.size(); ++o) {
      std::vector<int> cur = base_node;
      double f = 0.0;
      for (int a : orders[o]) {
        f += line(a, cur, cur[a], target[a]);
        cur[a] = target[a];
      }
      if (o == 0) {
        out.f[k] = f;
      } else {
        out.path_independence_defect = std::max(out.path_independence_defect, std::abs(f - out.f[k]));
      }
    }
  }
  if (out.path_independence_defect > tol) {
    std::ostringstream os;
    os << "path-independence defect " << out.path_independence_defect << " exceeds tol " << tol
       << " (one-form not closed at grid resolution)";
    throw DecompositionError("path_independence", os.str());
  }
  return out;
}

PotentialResult integrate_potential(const OneFormField& field, double tol) {
  return integrate_potential(field, std::vector<int>(field.grid.dim(), 0), tol);
}

namespace {

int default_per_axis(int dim) { return dim == 2 ? 64 : 32; }

void projectivity_gate(const OneDensity& F, const DecompositionOptions& options, double tol, DecompositionDiagnostics& diag) {
  const int per_axis = options.gate_per_axis > 0 ? options.gate_per_axis : (F.dim() == 2 ? 8 : 4);
  const HamelReport report = projectivity_report(F, make_residual_grid(F, per_axis, options.gate_dirs), tol);
  diag.hamel_residual = report.max_residual;
  if (!report.pass()) {
    std::ostringstream os;
    os << "Hamel residual " << report.max_residual << " exceeds tol " << tol << " at x = " << describe(report.worst_x)
       << ", v = " << describe(report.worst_v) << " (entry " << report.worst_i + 1 << report.worst_j + 1 << ")";
    throw DecompositionError("projectivity", os.str());
  }
}

DecompositionResult run_pipeline(const OneDensity& F, FinslerMetric F0, const CellGrid& grid, double tol,
                                 DecompositionDiagnostics diag) {
  const OneDensity L = F - F0;
  OneFormExtraction one_form = extract_one_form(L, grid, tol);
  diag.linearity_defect = one_form.linearity_defect;
  diag.closedness_defect = one_form.closedness_defect;
  PotentialResult potential = integrate_potential(one_form.field, tol);
  diag.path_independence_defect = potential.path_independence_defect;

  const std::vector<Vec> tests = test_directions(F.dim());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec x = grid.point(k);
    const Vec& b = one_form.field.beta[k];
    diag.max_beta = std::max(diag.max_beta, b.norm());
    for (const Vec& v : tests) {
      diag.reconstruction_defect = std::max(diag.reconstruction_defect, std::abs(F(x, v) - F0(x, v) - b.dot(v)));
    }
  }
  if (F.reversible() && diag.max_beta > tol) {
    std::ostringstream os;
    os << "reversible input has |beta| up to " << diag.max_beta << " > tol " << tol;
    throw DecompositionError("reversibility", os.str());
  }
  return DecompositionResult{std::move(F0), std::move(one_form.field), std::move(potential.f), diag, tol};
}

}  // namespace

DecompositionResult decompose_periodic_projective(const OneDensity& F, double tol, const DecompositionOptions& options) {
  if (F.smoothness() != Smoothness::C2) throw PreconditionError("decompose_periodic_projective: needs a C2 density");
  std::optional<Lattice> lattice = F.lattice();
  if (!lattice && F.translation_invariant()) lattice = Lattice::integer(F.dim());
  if (!lattice) throw PreconditionError("decompose_periodic_projective: input has no periodicity lattice");
  const OneDensity periodic_F = F.lattice() ? F : F.with_traits([&] {
    DensityTraits t = F.traits();
    t.lattice = lattice;
    return t;
  }());

  DecompositionDiagnostics diag;
  projectivity_gate(periodic_F, options, tol, diag);
  const int per_axis = options.per_axis > 0 ? options.per_axis : default_per_axis(F.dim());
  return run_pipeline(periodic_F, translation_invariant_part(periodic_F), CellGrid::periodic(*lattice, per_axis), tol, diag);
}

DecompositionResult decompose_compact_support(const OneDensity& L, const Vec& lo, const Vec& hi, double tol,
                                              const DecompositionOptions& options) {
  const int n = L.dim();
  if (lo.size() != n || hi.size() != n || ((hi - lo).array() <= 0.0).any()) {
    throw PreconditionError("decompose_compact_support: need lo < hi in the dimension of L");
  }
  if (L.smoothness() != Smoothness::C2) throw PreconditionError("decompose_compact_support: needs a C2 density");

  // Support check on the faces of the stated cell.
  const std::vector<Vec> dirs = test_directions(n);
  const CellGrid faces = CellGrid::box(lo, hi, 17);
  double boundary = 0.0;
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const std::vector<int> m = faces.unravel(k);
    if (std::none_of(m.begin(), m.end(), [&](int i) { return i == 0 || i == faces.per_axis() - 1; })) continue;
    const Vec x = faces.point(k);
    for (const Vec& v : dirs) boundary = std::max(boundary, std::abs(L(x, v)));
  }
  if (boundary > tol) {
    std::ostringstream os;
    os << "density reaches " << boundary << " on the boundary of the cell";
    throw DecompositionError("support", os.str());
  }

  const Vec center = 0.5 * (lo + hi);
  const Vec width = 1.5 * (hi - lo);
  const Vec corner = center - 0.5 * width;
  const Lattice lattice(Mat(width.asDiagonal()));
  DensityTraits t = L.traits();
  t.lattice = lattice;
  t.translation_invariant = false;
  const OneDensity periodized(n, [L, lattice, corner](const Vec& x, const Vec& v) { return L(corner + lattice.reduce(x - corner), v); }, t);

  DecompositionDiagnostics diag;
  projectivity_gate(periodized, options, tol, diag);
  FinslerMetric F0 = frozen_at(periodized, corner, "norm_part");
  double norm_size = 0.0;
  for (const Vec& v : sphere_directions(n, 64)) norm_size = std::max(norm_size, std::abs(F0(corner, v)));
  if (norm_size > tol) {
    std::ostringstream os;
    os << "translation-invariant part reaches " << norm_size << ", expected 0";
    throw DecompositionError("norm_part", os.str());
  }
  // The bump-like profiles this targets need a finer 2D grid than the periodic default.
  const int per_axis = options.per_axis > 0 ? options.per_axis : (n == 2 ? 128 : default_per_axis(n));
  return run_pipeline(periodized, std::move(F0), CellGrid::periodic(lattice, per_axis, corner), tol, diag);
}

double potential_at(const DecompositionResult& result, const Vec& x) {
  const CellGrid& grid = result.one_form.grid;
  const int n = grid.dim();
  const int N = grid.per_axis();
  const Vec s = grid.basis().inverse() * (x - grid.origin());
  std::vector<int> lo(n);
  std::vector<double> frac(n);
  for (int i = 0; i < n; ++i) {
    double u = s(i) / grid.step();
    if (grid.is_periodic()) {
      u = std::fmod(u, static_cast<double>(N));
      if (u < 0.0) u += N;
    } else {
      u = std::clamp(u, 0.0, static_cast<double>(N - 1) - 1e-12);
    }
    lo[i] = static_cast<int>(std::floor(u));
    frac[i] = u - lo[i];
  }
  double value = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::vector<int> m(n);
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      const int up = (corner >> i) & 1;
      m[i] = lo[i] + up;
      if (grid.is_periodic()) m[i] %= N;
      w *= up ? frac[i] : 1.0 - frac[i];
    }
    if (w != 0.0) value += w * result.potential[grid.index(m)];
  }
  return value;
}

RandersReport randers_test(const OneDensity& F, const Vec& base, const std::vector<Vec>& points, double tol, int grid_points) {
  if (base.size() != F.dim()) throw PreconditionError("randers_test: dimension mismatch");
  if (points.empty()) throw PreconditionError("randers_test: no sample points");
  const SphereGrid grid = grid_points > 0 ? (F.dim() == 2 ? SphereGrid::circle(grid_points) : SphereGrid::sphere(grid_points, grid_points / 2))
                                          : SphereGrid::defaults(F.dim());
  auto codisc = [&](const Vec& x) { return polar_dual(body_from_norm(F, x, grid)); };

  RandersReport r;
  r.tol = tol;
  r.base = base;
  r.points = points;
  const ConvexBody base_disc = codisc(base);
  std::optional<ConvexBody> previous;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const ConvexBody disc = codisc(points[k]);
    const TranslateFit from_base = fit_translation(base_disc, disc);
    r.pairs.push_back({base, points[k], from_base.max_residual, from_base.translation});
    r.beta.push_back(from_base.translation);
    if (previous) {
      const TranslateFit step = fit_translation(*previous, disc);
      r.pairs.push_back({points[k - 1], points[k], step.max_residual, step.translation});
    }
    previous = disc;
  }
  for (const auto& p : r.pairs) r.max_residual = std::max(r.max_residual, p.residual);
  if (r.pass()) r.norm = frozen_at(F, base, "randers_norm");
  return r;
}

DensePlanesReport dense_planes_test(const OneDensity& F, int n_planes, double tol, std::uint64_t seed, int points_per_plane) {
  const int n = F.dim();
  if (n < 3) throw PreconditionError("dense_planes_test: needs dimension >= 3");
  if (n_planes < 1 || points_per_plane < 1) throw PreconditionError("dense_planes_test: need positive counts");
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  const int values[] = {-2, -1, 1, 2};
  auto integer_direction = [&] {
    Vec m(n);
    for (int i = 0; i < n; ++i) m(i) = values[pick(rng)];
    return m;
  };
  const Mat B = F.lattice() ? F.lattice()->basis() : Mat::Identity(n, n);

  DensePlanesReport report;
  report.tol = tol;
  int passed = 0;
  for (int p = 0; p < n_planes; ++p) {
    Vec m1 = integer_direction(), m2 = integer_direction();
    // Reject parallel pairs.
    while (std::abs(m1.normalized().dot(m2.normalized())) > 1.0 - 1e-9) m2 = integer_direction();
    const Vec e1 = B * m1, e2 = B * m2;
    const Vec base = B * random_in_box(rng, Vec::Zero(n), Vec::Ones(n));
    const OneDensity G = restrict_to_plane(F, base, e1, e2);
    std::vector<Vec> pts;
    for (int k = 0; k < points_per_plane; ++k) pts.push_back(random_in_box(rng, Vec::Zero(2), Vec::Ones(2)));
    const RandersReport r = randers_test(G, Vec::Zero(2), pts, tol);
    report.planes.push_back({base, e1, e2, r.max_residual, r.pass()});
    if (r.pass()) ++passed;
  }
  report.pass_fraction = static_cast<double>(passed) / n_planes;
  return report;
}

void write_decomposition(const std::filesystem::path& dir, const DecompositionResult& result) {
  std::filesystem::create_directories(dir);
  const CellGrid& grid = result.one_form.grid;
  const int n = grid.dim();
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(std::string("write_decomposition: cannot write ") + (dir / name).string());
    out << std::setprecision(17);
    return out;
  };
  {
    std::ofstream out = open("norm.txt");
    for (const Vec& u : sphere_directions(n, n == 2 ? 256 : 512)) {
      for (int i = 0; i < n; ++i) out << u(i) << ' ';
      out << result.norm_part(Vec::Zero(n), u) << '\n';
    }
  }
  {
    std::ofstream beta = open("one_form.txt");
    std::ofstream pot = open("potential.txt");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec x = grid.point(k);
      for (int i = 0; i < n; ++i) {
        beta << x(i) << ' ';
        pot << x(i) << ' ';
      }
      for (int i = 0; i < n; ++i) beta << result.one_form.beta[k](i) << (i + 1 < n ? ' ' : '\n');
      pot << result.potential[k] << '\n';
    }
  }
  std::ofstream diag = open("diagnostics.txt");
  const DecompositionDiagnostics& d = result.diagnostics;
  diag << "grid = " << grid.per_axis() << "^" << n << '\n'
       << "tol = " << result.tol << '\n'
       << "hamel_residual = " << d.hamel_residual << '\n'
       << "linearity_defect = " << d.linearity_defect << '\n'
       << "closedness_defect = " << d.closedness_defect << '\n'
       << "path_independence_defect = " << d.path_independence_defect << '\n'
       << "reconstruction_defect = " << d.reconstruction_defect << '\n'
       << "max_beta = " << d.max_beta << '\n';
}

}  // namespace projfinsler
