#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projfinsler/decomposition.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace projfinsler;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

double bump(const Vec& x) {
  const double r2 = x.squaredNorm() / 0.04;
  return r2 < 1 ? std::exp(-1.0 / (1 - r2)) : 0.0;
}

Vec bump_gradient(const Vec& x) {
  const double r2 = x.squaredNorm() / 0.04;
  if (r2 >= 1) return Vec::Zero(x.size());
  return -bump(x) / ((1 - r2) * (1 - r2)) * 2.0 * x / 0.04;
}

// f - f(0) - grad f(0) . x, the gauge in which the periodic pipeline returns f.
double gauge_error(const DecompositionResult& r, const TrigPotential& f) {
  const int n = f.dim();
  const Vec g0 = f.gradient(Vec::Zero(n));
  const double f0 = f.value(Vec::Zero(n));
  double worst = 0.0;
  for (std::size_t k = 0; k < r.one_form.grid.size(); ++k) {
    const Vec x = r.one_form.grid.point(k);
    worst = std::max(worst, std::abs(r.potential[k] - (f.value(x) - f0 - g0.dot(x))));
  }
  return worst;
}

OneDensity one_form(int n, std::function<Vec(const Vec&)> beta) {
  return OneDensity(n, [beta](const Vec& x, const Vec& v) { return beta(x).dot(v); });
}

}  // namespace

TEST_CASE("cell grids") {
  const CellGrid p = CellGrid::periodic(Lattice::integer(3), 5);
  CHECK(p.size() == 125);
  CHECK(p.step() == doctest::Approx(0.2));
  for (std::size_t k : {0ul, 7ul, 124ul}) CHECK(p.index(p.unravel(k)) == k);
  const CellGrid b = CellGrid::box(v2(-1, 0), v2(1, 2), 5);
  CHECK((b.point(b.size() - 1) - v2(1, 2)).norm() <= 1e-15);
  CHECK((b.point(0) - v2(-1, 0)).norm() == 0.0);
}

TEST_CASE("translation-invariant part") {
  const auto E = catalog_metric("ellipse_norm", 2);
  const FinslerMetric F0 = translation_invariant_part(E);
  const auto R = catalog_metric("randers_exact", 2);
  const FinslerMetric R0 = translation_invariant_part(R);
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vec x = random_in_box(rng, Vec::Zero(2), Vec::Ones(2));
    const Vec v = random_unit_vector(rng, 2);
    CHECK(F0(x, v) == E(x, v));
    CHECK(std::abs(R0(x, v) - E(x, v)) <= 1e-15);
  }
}

TEST_CASE("one-form extraction") {
  const CellGrid grid = CellGrid::periodic(Lattice::integer(2), 16);
  const OneFormExtraction c = extract_one_form(one_form(2, [](const Vec&) { return v2(0.3, 0); }), grid, 1e-9);
  for (const Vec& b : c.field.beta) CHECK((b - v2(0.3, 0)).norm() <= 1e-12);
  CHECK(c.linearity_defect <= 1e-12);
  CHECK(c.closedness_defect <= 1e-12);

  const TrigPotential f = TrigPotential::sine_product(2, 0.05);
  const CellGrid fine = CellGrid::periodic(Lattice::integer(2), 64);
  const OneFormExtraction d = extract_one_form(one_form(2, [f](const Vec& x) { return f.gradient(x); }), fine, 1e-9);
  double worst = 0.0;
  for (std::size_t k = 0; k < fine.size(); ++k) worst = std::max(worst, (d.field.beta[k] - f.gradient(fine.point(k))).norm());
  CHECK(worst <= 1e-5);
  CHECK(d.closedness_defect <= 1e-4);

  const CellGrid box = CellGrid::box(v2(0, 0), v2(1, 1), 17);
  const OneFormExtraction curl = extract_one_form(one_form(2, [](const Vec& x) { return v2(x(1), 0); }), box, 1e-9);
  CHECK(curl.closedness_defect == doctest::Approx(1.0).epsilon(1e-9));

  const OneDensity nonlinear(2, [](const Vec&, const Vec& v) { return v.norm(); });
  CHECK_THROWS_AS(extract_one_form(nonlinear, grid, 1e-6), DecompositionError);
}

TEST_CASE("potential integration") {
  const CellGrid box = CellGrid::box(v2(0, 0), v2(1, 1), 9);
  OneFormField constant{box, std::vector<Vec>(box.size(), v2(0.4, -1.5))};
  const PotentialResult p = integrate_potential(constant, 1e-12);
  for (std::size_t k = 0; k < box.size(); ++k) {
    CHECK(p.f[k] == doctest::Approx(box.point(k).dot(v2(0.4, -1.5))).epsilon(1e-14));
  }

  const TrigPotential f = TrigPotential::sine_product(2, 0.05);
  const CellGrid grid = CellGrid::periodic(Lattice::integer(2), 64);
  OneFormField exact{grid, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) exact.beta.push_back(f.gradient(grid.point(k)));
  const PotentialResult q = integrate_potential(exact, 1e-5);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(q.f[k] - f.value(grid.point(k))));
  CHECK(worst <= 1e-4);
  CHECK(q.path_independence_defect <= 1e-5);

  OneFormField curl{box, {}};
  for (std::size_t k = 0; k < box.size(); ++k) curl.beta.push_back(v2(box.point(k)(1), 0));
  try {
    integrate_potential(curl, 1e-3);
    FAIL("expected rejection");
  } catch (const DecompositionError& e) {
    CHECK(e.stage() == "path_independence");
  }
  CHECK(integrate_potential(curl, 10.0).path_independence_defect == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("periodic decomposition") {
  const auto E = catalog_metric("ellipse_norm", 2);
  const DecompositionResult n = decompose_periodic_projective(E, 1e-4);
  for (double f : n.potential) CHECK(std::abs(f) <= 1e-10);
  CHECK(n.diagnostics.max_beta <= 1e-10);
  CHECK(n.diagnostics.reconstruction_defect <= 1e-10);

  const auto R = catalog_metric("randers_exact", 2);
  const DecompositionResult r = decompose_periodic_projective(R, 1e-4);
  CHECK(gauge_error(r, TrigPotential::sine_product(2, 0.05)) <= 1e-4);
  CHECK(r.diagnostics.reconstruction_defect <= 1e-4);
  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const Vec v = random_unit_vector(rng, 2);
    CHECK(std::abs(r.norm_part(Vec::Zero(2), v) - E(Vec::Zero(2), v)) <= 1e-12);
  }

  const DecompositionDiagnostics& d = r.diagnostics;
  for (double x : {d.hamel_residual, d.linearity_defect, d.closedness_defect, d.path_independence_defect,
                   d.reconstruction_defect, d.max_beta}) {
    CHECK(x >= 0.0);
  }

  try {
    decompose_periodic_projective(catalog_metric("conformal_nonprojective", 2), 1e-4);
    FAIL("expected rejection");
  } catch (const DecompositionError& e) {
    CHECK(e.stage() == "projectivity");
  }
}

TEST_CASE("random round trips and general lattices") {
  Rng rng(5);
  for (int n : {2, 3}) {
    const TrigPotential f = TrigPotential::random(rng, n, 3, 2, 0.02);
    const OneDensity F = randers_metric(Mat::Identity(n, n), f);
    const DecompositionResult r = decompose_periodic_projective(F, 1e-4);
    CHECK(gauge_error(r, f) <= 1e-4);
    CHECK(r.diagnostics.reconstruction_defect <= 1e-4);
  }
  Mat B(2, 2);
  B << 1.0, 0.4, 0.0, 0.8;
  TrigPotential g(B);
  g.add(Eigen::Vector2i(1, 1), 0.03).add(Eigen::Vector2i(0, 1), 0.02, 0.7);
  const DecompositionResult s = decompose_periodic_projective(randers_metric(Mat::Identity(2, 2), g), 1e-4);
  CHECK(gauge_error(s, g) <= 1e-4);
}

TEST_CASE("gauge: adding a constant covector only shifts the norm part") {
  const TrigPotential f = TrigPotential::sine_product(2, 0.05);
  const OneDensity F = randers_metric(Mat::Identity(2, 2), f);
  const OneDensity shifted(2, [F](const Vec& x, const Vec& v) { return F(x, v) + 0.1 * v(0) - 0.05 * v(1); }, F.traits());
  const DecompositionResult a = decompose_periodic_projective(F, 1e-4);
  const DecompositionResult b = decompose_periodic_projective(shifted, 1e-4);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.potential.size(); ++k) worst = std::max(worst, std::abs(a.potential[k] - b.potential[k]));
  CHECK(worst <= 1e-10);
  const Vec v = v2(0.6, 0.8);
  CHECK(b.norm_part(Vec::Zero(2), v) - a.norm_part(Vec::Zero(2), v) == doctest::Approx(0.06 - 0.04).epsilon(1e-12));
}

TEST_CASE("reversible inputs are norms") {
  for (const char* name : {"ellipse_norm", "pnorm_smooth", "euclidean"}) {
    CAPTURE(name);
    const DecompositionResult r = decompose_periodic_projective(catalog_metric(name, 2), 1e-4);
    CHECK(r.diagnostics.max_beta <= 1e-4);
  }
}

TEST_CASE("compactly supported densities") {
  const Vec lo = Vec::Constant(2, -0.25), hi = Vec::Constant(2, 0.25);
  const DecompositionResult r = decompose_compact_support(one_form(2, bump_gradient), lo, hi, 1e-4);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.one_form.grid.size(); ++k) {
    worst = std::max(worst, std::abs(r.potential[k] - bump(r.one_form.grid.point(k))));
  }
  CHECK(worst <= 1e-4);
  CHECK(std::abs(potential_at(r, v2(0.05, -0.03)) - bump(v2(0.05, -0.03))) <= 1e-3);
  CHECK(r.norm_part(Vec::Zero(2), v2(1, 0)) == doctest::Approx(0.0));

  const OneDensity zero(2, [](const Vec&, const Vec&) { return 0.0; });
  const DecompositionResult z = decompose_compact_support(zero, lo, hi, 1e-4);
  for (double f : z.potential) CHECK(f == 0.0);

  const OneDensity bump_norm(2, [](const Vec& x, const Vec& v) { return bump(x) * v.norm(); });
  try {
    decompose_compact_support(bump_norm, lo, hi, 1e-4);
    FAIL("expected rejection");
  } catch (const DecompositionError& e) {
    CHECK(e.stage() == "projectivity");
  }

  const OneDensity wide(2, [](const Vec&, const Vec& v) { return 0.1 * v(0); });
  try {
    decompose_compact_support(wide, lo, hi, 1e-4);
    FAIL("expected rejection");
  } catch (const DecompositionError& e) {
    CHECK(e.stage() == "support");
  }
}

TEST_CASE("Randers co-disc test") {
  const std::vector<Vec> points{v2(0.1, 0.2), v2(0.6, 0.35), v2(0.8, 0.9)};
  const RandersReport norm = randers_test(catalog_metric("ellipse_norm", 2), v2(0, 0), points, 1e-6);
  CHECK(norm.pass());
  for (const Vec& b : norm.beta) CHECK(b.norm() <= 1e-12);

  const TrigPotential f = TrigPotential::sine_product(2, 0.05);
  const RandersReport r = randers_test(catalog_metric("randers_exact", 2), v2(0, 0), points, 1e-4);
  CHECK(r.pass());
  REQUIRE(r.norm);
  for (std::size_t k = 0; k < points.size(); ++k) {
    CHECK((r.beta[k] - (f.gradient(points[k]) - f.gradient(Vec::Zero(2)))).norm() <= 1e-4);
  }

  const RandersReport c = randers_test(catalog_metric("conformal_nonprojective", 2), v2(0, 0), points, 1e-4);
  CHECK_FALSE(c.pass());
  CHECK(c.max_residual >= 0.1);
  CHECK_FALSE(c.norm);
}

TEST_CASE("dense planes") {
  const DensePlanesReport r = dense_planes_test(catalog_metric("randers_exact", 3), 6, 1e-4, 7);
  CHECK(r.pass_fraction == 1.0);
  const DensePlanesReport c = dense_planes_test(catalog_metric("conformal_nonprojective", 3), 6, 1e-4, 7);
  CHECK(c.pass_fraction == 0.0);
  const DensePlanesReport n = dense_planes_test(catalog_metric("ellipse_norm", 3), 6, 1e-6, 7);
  CHECK(n.pass_fraction == 1.0);
  for (const auto& p : r.planes) {
    for (int i = 0; i < 3; ++i) {
      CHECK(p.e1(i) != 0.0);
      CHECK(std::abs(p.e1(i)) <= 2.0);
    }
  }
}

TEST_CASE("restriction of the 3D Randers metric stays Randers") {
  const auto R = catalog_metric("randers_exact", 3);
  const OneDensity G = restrict_to_plane(R, Vec::Zero(3), Vec::Unit(3, 0), Vec::Unit(3, 1));
  CHECK(randers_test(G, v2(0, 0), {v2(0.2, 0.3), v2(0.7, 0.1)}, 1e-4).pass());
}

TEST_CASE("bundle output") {
  const auto dir = std::filesystem::temp_directory_path() / "projfinsler_bundle_test";
  std::filesystem::remove_all(dir);
  DecompositionOptions o;
  o.per_axis = 16;
  write_decomposition(dir, decompose_periodic_projective(catalog_metric("randers_exact", 2), 1e-3, o));
  for (const char* name : {"norm.txt", "one_form.txt", "potential.txt", "diagnostics.txt"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  std::ifstream in(dir / "diagnostics.txt");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("reconstruction_defect") != std::string::npos);
  std::filesystem::remove_all(dir);
}
