#include "projfinsler/convex_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

namespace projfinsler {

namespace {

// First row of the inverse of the circulant matrix tridiag(1, 4, 1), cached per size.
const std::vector<double>& circulant_inverse(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::vector<double>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Mat C = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    C(i, i) += 4.0;
    C(i, (i + 1) % n) += 1.0;
    C(i, (i + n - 1) % n) += 1.0;
  }
  Vec e = Vec::Zero(static_cast<Eigen::Index>(n));
  e(0) = 1.0;
  const Vec col = C.partialPivLu().solve(e);
  return cache.emplace(n, std::vector<double>(col.data(), col.data() + n)).first->second;
}

double wrap(double t, double period) {
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  return r;
}

Vec from_spherical(double theta, double phi) {
  Vec u(3);
  u << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return u;
}

// Orthonormal pair spanning the tangent plane at unit u in R^3.
std::pair<Vec, Vec> tangent_frame(const Vec& u) {
  Eigen::Vector3d a = u.head<3>();
  Eigen::Vector3d helper = std::abs(a.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d e1 = (helper - helper.dot(a) * a).normalized();
  Eigen::Vector3d e2 = a.cross(e1);
  return {Vec(e1), Vec(e2)};
}

double golden_max(const std::function<double(double)>& f, double a, double b, int iterations = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && (b - a) > 1e-13; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

// Nelder-Mead maximization in two variables starting from the origin.
double nelder_mead_max(const std::function<double(double, double)>& f, double step, int iterations = 200) {
  std::array<Eigen::Vector2d, 3> p{Eigen::Vector2d(0, 0), Eigen::Vector2d(step, 0), Eigen::Vector2d(0, step)};
  std::array<double, 3> v{};
  for (int i = 0; i < 3; ++i) v[i] = -f(p[i].x(), p[i].y());
  for (int it = 0; it < iterations; ++it) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
    const int best = order[0], mid = order[1], worst = order[2];
    const double size = std::max((p[mid] - p[best]).norm(), (p[worst] - p[best]).norm());
    if (size < 1e-11) break;
    const Eigen::Vector2d centroid = 0.5 * (p[best] + p[mid]);
    const Eigen::Vector2d xr = centroid + (centroid - p[worst]);
    const double fr = -f(xr.x(), xr.y());
    if (fr < v[best]) {
      const Eigen::Vector2d xe = centroid + 2.0 * (centroid - p[worst]);
      const double fe = -f(xe.x(), xe.y());
      if (fe < fr) {
        p[worst] = xe;
        v[worst] = fe;
      } else {
        p[worst] = xr;
        v[worst] = fr;
      }
    } else if (fr < v[mid]) {
      p[worst] = xr;
      v[worst] = fr;
    } else {
      const Eigen::Vector2d xc = centroid + 0.5 * (p[worst] - centroid);
      const double fc = -f(xc.x(), xc.y());
      if (fc < v[worst]) {
        p[worst] = xc;
        v[worst] = fc;
      } else {
        for (int i : {mid, worst}) {
          p[i] = p[best] + 0.5 * (p[i] - p[best]);
          v[i] = -f(p[i].x(), p[i].y());
        }
      }
    }
  }
  return -*std::min_element(v.begin(), v.end());
}

// max over unit w of (u . w) * rho(w): scan the grid nodes (values rho_k given),
// then refine around the best node with the continuous radial function.
double radial_max(const SphereGrid& grid, const std::vector<double>& rho_nodes, const std::function<double(const Vec&)>& rho,
                  const Vec& u) {
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid.size(); ++k) {
    const double val = u.dot(grid.direction(k)) * rho_nodes[k];
    if (val > best_value) {
      best_value = val;
      best = k;
    }
  }
  const Vec& n = grid.direction(best);
  if (grid.dim() == 2) {
    const double theta = std::atan2(n(1), n(0));
    const double delta = grid.spacing();
    auto f = [&](double t) {
      Vec w(2);
      w << std::cos(t), std::sin(t);
      return u.dot(w) * rho(w);
    };
    return std::max(best_value, golden_max(f, theta - delta, theta + delta));
  }
  const auto [e1, e2] = tangent_frame(n);
  auto f = [&](double a, double b) {
    const Vec w = (n + a * e1 + b * e2).normalized();
    return u.dot(w) * rho(w);
  };
  return std::max(best_value, nelder_mead_max(f, 0.5 * grid.spacing()));
}

void require_interior(const ConvexBody& P, const char* op) {
  if (!P.origin_interior()) throw PreconditionError(std::string(op) + ": origin is not an interior point (min h <= 0)");
}

}  // namespace

PeriodicSpline::PeriodicSpline(std::vector<double> values, double start, double period)
    : values_(std::move(values)), start_(start), period_(period) {
  const std::size_t n = values_.size();
  if (n < 3) throw PreconditionError("PeriodicSpline: need at least three samples");
  if (!(period > 0.0)) throw PreconditionError("PeriodicSpline: period must be positive");
  step_ = period_ / static_cast<double>(n);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = 6.0 / (step_ * step_) * (values_[(i + 1) % n] - 2.0 * values_[i] + values_[(i + n - 1) % n]);
  }
  const auto& inv = circulant_inverse(n);
  second_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += inv[(j + n - i) % n] * rhs[j];
    second_[i] = s;
  }
}

double PeriodicSpline::operator()(double t) const {
  const std::size_t n = values_.size();
  const double s = wrap(t - start_, period_) / step_;
  const double fl = std::floor(s);
  const double a = s - fl;
  const std::size_t k = static_cast<std::size_t>(fl) % n;
  const std::size_t k1 = (k + 1) % n;
  const double b = 1.0 - a;
  return b * values_[k] + a * values_[k1] +
         step_ * step_ / 6.0 * ((b * b * b - b) * second_[k] + (a * a * a - a) * second_[k1]);
}

SphereGrid::SphereGrid(int dim, int n_phi, int n_theta) : dim_(dim), n_phi_(n_phi), n_theta_(n_theta) {
  if (dim == 2) {
    for (int i = 0; i < n_phi; ++i) {
      const double t = 2.0 * kPi * i / n_phi;
      Vec u(2);
      u << std::cos(t), std::sin(t);
      directions_.push_back(u);
    }
  } else {
    for (int j = 0; j < n_theta; ++j) {
      const double theta = (j + 0.5) * kPi / n_theta;
      for (int i = 0; i < n_phi; ++i) directions_.push_back(from_spherical(theta, 2.0 * kPi * i / n_phi));
    }
  }
}

SphereGrid SphereGrid::circle(int n) {
  if (n < 8) throw PreconditionError("SphereGrid::circle: need at least 8 directions");
  return SphereGrid(2, n, 1);
}

SphereGrid SphereGrid::sphere(int n_phi, int n_theta) {
  if (n_phi < 8 || n_theta < 4 || n_phi % 2 != 0) {
    throw PreconditionError("SphereGrid::sphere: need even n_phi >= 8 and n_theta >= 4");
  }
  return SphereGrid(3, n_phi, n_theta);
}

SphereGrid SphereGrid::defaults(int dim) {
  if (dim == 2) return circle(256);
  if (dim == 3) return sphere(64, 32);
  throw PreconditionError("SphereGrid: only dimensions 2 and 3 are supported");
}

double SphereGrid::spacing() const { return 2.0 * kPi / n_phi_; }

ConvexBody::ConvexBody(SphereGrid grid, std::vector<double> support) : grid_(std::move(grid)), values_(std::move(support)) {
  if (static_cast<int>(values_.size()) != grid_.size()) throw PreconditionError("ConvexBody: support sample count mismatch");
  for (double h : values_) {
    if (!std::isfinite(h)) throw NumericalError("ConvexBody: non-finite support value");
  }
  const int rows = grid_.dim() == 2 ? 1 : grid_.n_theta();
  for (int j = 0; j < rows; ++j) {
    std::vector<double> row(values_.begin() + j * grid_.n_phi(), values_.begin() + (j + 1) * grid_.n_phi());
    rows_.emplace_back(std::move(row), 0.0, 2.0 * kPi);
  }
}

ConvexBody ConvexBody::from_support(const SphereGrid& grid, const std::function<double(const Vec&)>& h) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (const Vec& u : grid.directions()) values.push_back(h(u));
  return ConvexBody(grid, std::move(values));
}

ConvexBody ConvexBody::ball(const SphereGrid& grid, double radius) {
  return from_support(grid, [radius](const Vec&) { return radius; });
}

ConvexBody ConvexBody::ellipsoid(const SphereGrid& grid, const Mat& A) {
  if (A.rows() != grid.dim() || A.cols() != grid.dim()) throw PreconditionError("ConvexBody::ellipsoid: dimension mismatch");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw PreconditionError("ConvexBody::ellipsoid: matrix is not positive definite");
  const Mat inv = llt.solve(Mat::Identity(A.rows(), A.cols()));
  return from_support(grid, [inv](const Vec& u) { return std::sqrt(u.dot(inv * u)); });
}

double ConvexBody::support_unit(const Vec& u) const {
  if (dim() == 2) return rows_[0](std::atan2(u(1), u(0)));
  const int nt = grid_.n_theta();
  const double theta = std::acos(std::clamp(u(2), -1.0, 1.0));
  const double phi = std::atan2(u(1), u(0));
  const double dtheta = kPi / nt;
  const double s = theta / dtheta - 0.5;
  const int base = static_cast<int>(std::floor(s));
  const double a = s - base;
  // Rows continued across the poles: index k >= nt or k < 0 is the row
  // 2 nt - 1 - k (mod 2 nt) read at the antipodal azimuth.
  auto column = [&](int k) {
    k = ((k % (2 * nt)) + 2 * nt) % (2 * nt);
    return k < nt ? rows_[k](phi) : rows_[2 * nt - 1 - k](phi + kPi);
  };
  const double f0 = column(base - 1), f1 = column(base), f2 = column(base + 1), f3 = column(base + 2);
  // Cubic Lagrange through nodes -1, 0, 1, 2.
  return f0 * (-a * (a - 1.0) * (a - 2.0) / 6.0) + f1 * ((a + 1.0) * (a - 1.0) * (a - 2.0) / 2.0) +
         f2 * (-(a + 1.0) * a * (a - 2.0) / 2.0) + f3 * ((a + 1.0) * a * (a - 1.0) / 6.0);
}

double ConvexBody::support(const Vec& u) const {
  if (u.size() != dim()) throw PreconditionError("ConvexBody::support: dimension mismatch");
  const double r = u.norm();
  if (r == 0.0) return 0.0;
  return r * support_unit(u / r);
}

double ConvexBody::min_support() const { return *std::min_element(values_.begin(), values_.end()); }

ConvexBody ConvexBody::translated(const Vec& t) const {
  if (t.size() != dim()) throw PreconditionError("ConvexBody::translated: dimension mismatch");
  std::vector<double> values = values_;
  for (int k = 0; k < grid_.size(); ++k) values[k] += grid_.direction(k).dot(t);
  return ConvexBody(grid_, std::move(values));
}

LinearSubspace::LinearSubspace(const Mat& spanning) {
  if (spanning.cols() < 1 || spanning.cols() > spanning.rows()) {
    throw PreconditionError("LinearSubspace: need between 1 and n spanning vectors");
  }
  Eigen::HouseholderQR<Mat> qr(spanning);
  const Mat R = qr.matrixQR().topRows(spanning.cols()).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, spanning.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < spanning.cols(); ++i) {
    if (std::abs(R(i, i)) < 1e-10 * scale) throw PreconditionError("LinearSubspace: degenerate spanning set");
  }
  basis_ = qr.householderQ() * Mat::Identity(spanning.rows(), spanning.cols());
}

ConvexBody body_from_norm(const OneDensity& N, const Vec& x, const SphereGrid& grid) {
  if (N.dim() != grid.dim()) throw PreconditionError("body_from_norm: dimension mismatch");
  std::vector<double> rho;
  rho.reserve(grid.size());
  for (const Vec& w : grid.directions()) {
    const double value = N(x, w);
    if (!(value > 0.0) || !std::isfinite(value)) throw PreconditionError("body_from_norm: norm is not positive on sphere samples");
    rho.push_back(1.0 / value);
  }
  auto radial = [&](const Vec& w) { return 1.0 / N(x, w); };
  std::vector<double> h;
  h.reserve(grid.size());
  for (const Vec& u : grid.directions()) h.push_back(radial_max(grid, rho, radial, u));
  return ConvexBody(grid, std::move(h));
}

ConvexBody polar_dual(const ConvexBody& P) {
  require_interior(P, "polar_dual");
  const SphereGrid& grid = P.grid();
  std::vector<double> rho;
  rho.reserve(grid.size());
  for (double h : P.values()) rho.push_back(1.0 / h);
  auto radial = [&](const Vec& w) { return 1.0 / P.support(w); };
  std::vector<double> h;
  h.reserve(grid.size());
  for (const Vec& u : grid.directions()) h.push_back(radial_max(grid, rho, radial, u));
  return ConvexBody(grid, std::move(h));
}

namespace {

void require_plane(const ConvexBody& P, const LinearSubspace& Y, const char* op) {
  if (P.dim() != 3 || Y.ambient_dim() != 3 || Y.dim() != 2) {
    throw PreconditionError(std::string(op) + ": needs a body in R^3 and a 2-dimensional subspace");
  }
}

}  // namespace

ConvexBody dual_restriction(const ConvexBody& P, const LinearSubspace& Y, int circle_points) {
  require_plane(P, Y, "dual_restriction");
  require_interior(P, "dual_restriction");
  const ConvexBody dual = polar_dual(P);
  const SphereGrid circle = SphereGrid::circle(circle_points);
  return ConvexBody::from_support(circle, [&](const Vec& c) { return dual.support(Y.basis() * c); });
}

ConvexBody section(const ConvexBody& P, const LinearSubspace& Y, int circle_points) {
  require_plane(P, Y, "section");
  require_interior(P, "section");
  const SphereGrid& grid = P.grid();
  std::vector<double> rho_nodes;
  rho_nodes.reserve(grid.size());
  for (double h : P.values()) rho_nodes.push_back(1.0 / h);
  auto radial3 = [&](const Vec& w) { return 1.0 / P.support(w); };
  // Radial function of P on the unit circle of Y: 1 / gauge, gauge = h_{P*}.
  const SphereGrid circle = SphereGrid::circle(circle_points);
  std::vector<double> rho;
  rho.reserve(circle.size());
  for (const Vec& c : circle.directions()) {
    const Vec y = Y.basis() * c;
    rho.push_back(1.0 / radial_max(grid, rho_nodes, radial3, y));
  }
  const PeriodicSpline rho_spline(rho, 0.0, 2.0 * kPi);
  auto radial2 = [&](const Vec& w) { return rho_spline(std::atan2(w(1), w(0))); };
  std::vector<double> h;
  h.reserve(circle.size());
  for (const Vec& u : circle.directions()) h.push_back(radial_max(circle, rho, radial2, u));
  return ConvexBody(circle, std::move(h));
}

TranslateFit fit_translation(const ConvexBody& P, const ConvexBody& Q) {
  if (!(P.grid() == Q.grid())) throw PreconditionError("are_translates: grid mismatch");
  const int m = P.grid().size(), n = P.dim();
  Mat A(m, n);
  Vec b(m);
  for (int k = 0; k < m; ++k) {
    A.row(k) = P.grid().direction(k).transpose();
    b(k) = Q.values()[k] - P.values()[k];
  }
  TranslateFit fit;
  fit.translation = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  fit.max_residual = (b - A * fit.translation).cwiseAbs().maxCoeff();
  return fit;
}

std::optional<Vec> are_translates(const ConvexBody& P, const ConvexBody& Q, double tol) {
  const TranslateFit fit = fit_translation(P, Q);
  if (fit.max_residual <= tol) return fit.translation;
  return std::nullopt;
}

double min_curvature_radius(const ConvexBody& P) {
  const SphereGrid& grid = P.grid();
  const auto& h = P.values();
  double worst = std::numeric_limits<double>::infinity();
  if (P.dim() == 2) {
    const int n = grid.size();
    const double d = grid.spacing();
    for (int k = 0; k < n; ++k) {
      const double second = (h[(k + 1) % n] - 2.0 * h[k] + h[(k + n - 1) % n]) / (d * d);
      worst = std::min(worst, h[k] + second);
    }
    return worst;
  }
  const double d = kPi / grid.n_theta();
  for (int k = 0; k < grid.size(); ++k) {
    const Vec& u = grid.direction(k);
    const auto [e1, e2] = tangent_frame(u);
    for (const Vec* e : {&e1, &e2}) {
      const double plus = P.support(std::cos(d) * u + std::sin(d) * *e);
      const double minus = P.support(std::cos(d) * u - std::sin(d) * *e);
      worst = std::min(worst, h[k] + (plus - 2.0 * h[k] + minus) / (d * d));
    }
  }
  return worst;
}

bool dual_strictly_convex(const ConvexBody& P, double margin) { return min_curvature_radius(P) > margin; }

GroemerReport groemer_experiment(const ConvexBody& P, const ConvexBody& Q, const LinearSubspace& W, int n_planes,
                                 double tol, double convexity_margin) {
  if (P.dim() != 3 || Q.dim() != 3 || W.ambient_dim() != 3 || W.dim() != 1) {
    throw PreconditionError("groemer_experiment: needs bodies in R^3 and a line W");
  }
  if (n_planes < 1) throw PreconditionError("groemer_experiment: n_planes must be positive");
  if (!dual_strictly_convex(P, convexity_margin)) {
    throw PreconditionError("groemer_experiment: strict convexity of the polar body fails on samples");
  }
  const Vec w = W.basis().col(0);
  const auto [a, b] = tangent_frame(w);
  GroemerReport r;
  r.tol = tol;
  for (int k = 0; k < n_planes; ++k) {
    const double alpha = kPi * (k + 0.5) / n_planes;
    const Vec normal = std::cos(alpha) * a + std::sin(alpha) * b;
    Mat span(3, 2);
    span.col(0) = w;
    span.col(1) = -std::sin(alpha) * a + std::cos(alpha) * b;
    const LinearSubspace Y(span);
    const TranslateFit fit = fit_translation(polar_dual(section(P, Y)), polar_dual(section(Q, Y)));
    r.planes.push_back({normal, fit.max_residual, fit.translation});
    r.max_plane_residual = std::max(r.max_plane_residual, fit.max_residual);
  }
  r.hypotheses_hold = r.max_plane_residual <= tol;
  const TranslateFit global = fit_translation(polar_dual(P), polar_dual(Q));
  r.global_residual = global.max_residual;
  r.global_translation = global.translation;
  r.conclusion_holds = global.max_residual <= tol;
  return r;
}

void write_body(std::ostream& out, const ConvexBody& P) {
  const SphereGrid& g = P.grid();
  out << "# convex_body dim=" << g.dim() << " n_phi=" << g.n_phi() << " n_theta=" << g.n_theta() << '\n';
  out << std::setprecision(17);
  for (int k = 0; k < g.size(); ++k) {
    for (int i = 0; i < g.dim(); ++i) out << g.direction(k)(i) << ' ';
    out << P.values()[k] << '\n';
  }
}

ConvexBody read_body(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("read_body: empty input");
  int dim = 0, n_phi = 0, n_theta = 0;
  if (std::sscanf(line.c_str(), "# convex_body dim=%d n_phi=%d n_theta=%d", &dim, &n_phi, &n_theta) != 3) {
    throw Error("read_body: malformed header line");
  }
  const SphereGrid grid = dim == 2 ? SphereGrid::circle(n_phi) : SphereGrid::sphere(n_phi, n_theta);
  std::vector<double> values;
  int lineno = 1;
  while (static_cast<int>(values.size()) < grid.size() && std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    Vec u(dim);
    double h = 0.0;
    for (int i = 0; i < dim; ++i) row >> u(i);
    row >> h;
    if (!row) throw Error("read_body: line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) + " numbers");
    if ((u - grid.direction(static_cast<int>(values.size()))).norm() > 1e-9) {
      throw Error("read_body: line " + std::to_string(lineno) + ": direction does not match the grid");
    }
    values.push_back(h);
  }
  if (static_cast<int>(values.size()) != grid.size()) throw Error("read_body: truncated input");
  return ConvexBody(grid, std::move(values));
}

}  // namespace projfinsler
