#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projfinsler/grassmannian.hpp"
#include "projfinsler/hamel.hpp"

#include <cmath>

using namespace projfinsler;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

TEST_CASE("residual vanishes for translation-invariant densities") {
  Rng rng(2);
  const auto F = catalog_metric("ellipse_norm", 3);
  for (int k = 0; k < 10; ++k) {
    const Mat R = hamel_residual(F, random_in_box(rng, Vec::Zero(3), Vec::Ones(3)), random_unit_vector(rng, 3));
    CHECK(R.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("residual is antisymmetric and vanishes on exact forms") {
  Rng rng(4);
  const TrigPotential f = TrigPotential::random(rng, 2, 4, 2, 0.1);
  const OneDensity df(2, [f](const Vec& x, const Vec& v) { return f.gradient(x).dot(v); });
  for (int k = 0; k < 10; ++k) {
    const Mat R = hamel_residual(df, random_in_box(rng, Vec::Zero(2), Vec::Ones(2)), random_unit_vector(rng, 2));
    CHECK(R.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((R + R.transpose()).norm() == 0.0);
  }
}

TEST_CASE("worked conformal example") {
  const auto C = catalog_metric("conformal_nonprojective", 2);
  const Mat R = hamel_residual(C, v2(0, 0.125), v2(1, 0));
  CHECK(R(0, 1) == doctest::Approx(-2 * kPi).epsilon(1e-3 / (2 * kPi)));
}

TEST_CASE("projectivity report discriminates") {
  for (const char* name : {"euclidean", "ellipse_norm", "randers_exact", "pnorm_smooth"}) {
    CAPTURE(name);
    const auto F = catalog_metric(name, 2);
    CHECK(projectivity_report(F, make_residual_grid(F, 8, 16), 1e-5).pass());
  }
  const HyperplaneMeasure half(2, [](const Vec&, double) { return 0.5; });
  const FinslerMetric crofton = crofton_finsler(half);
  const HamelReport rc = projectivity_report(crofton, make_residual_grid(crofton, 4, 8), 1e-5);
  CHECK(rc.pass());

  const auto C = catalog_metric("conformal_nonprojective", 2);
  const HamelReport r = projectivity_report(C, make_residual_grid(C, 8, 16), 1e-5);
  CHECK_FALSE(r.pass());
  CHECK(r.max_residual >= 1.0);
  CHECK(r.samples.size() == 64 * 16);
  CHECK(r.worst_x.size() == 2);
  for (const auto& s : r.samples) CHECK(s.residual >= 0.0);

  CHECK_THROWS_AS(projectivity_report(catalog_metric("busemann_example_density", 2),
                                      make_residual_grid(C, 4, 4), 1e-5),
                  PreconditionError);
}

TEST_CASE("Euler-Lagrange residual along lines") {
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);
  const auto E = catalog_metric("ellipse_norm", 2);
  for (const Vec& r : euler_lagrange_residual(E, v2(0.1, 0.2), v2(0.6, 0.8), times)) CHECK(r.norm() == 0.0);

  const auto R = catalog_metric("randers_exact", 2);
  double worst = 0.0;
  for (const Vec& r : euler_lagrange_residual(R, v2(0.1, 0.2), v2(0.6, 0.8), times)) worst = std::max(worst, r.norm());
  CHECK(worst <= 1e-4);

  const auto C = catalog_metric("conformal_nonprojective", 2);
  worst = 0.0;
  for (const Vec& r : euler_lagrange_residual(C, v2(0.1, 0.2), v2(0.6, 0.8), times)) worst = std::max(worst, r.norm());
  CHECK(worst > 0.1);
}

TEST_CASE("Hilbert forms") {
  const auto E = catalog_metric("euclidean", 2);
  const HilbertFormSample h = hilbert_forms(E, v2(0, 0), v2(3, 4));
  CHECK(h.alpha(0) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(h.alpha(1) == doctest::Approx(0.8).epsilon(1e-6));
  const auto C = catalog_metric("conformal_nonprojective", 3);
  const HilbertFormSample g = hilbert_forms(C, (Vec(3) << 0.1, 0.3, 0.2).finished(), (Vec(3) << 1, 2, -1).finished());
  CHECK((g.omega_xx + g.omega_xx.transpose()).norm() == 0.0);
  CHECK((g.omega_vx - g.omega_vx.transpose()).cwiseAbs().maxCoeff() <= 1e-5);
}
