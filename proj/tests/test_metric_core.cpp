#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projfinsler/metric_core.hpp"

#include <cmath>

using namespace projfinsler;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

OneDensity conformal_2d() {
  return OneDensity(2, [](const Vec& x, const Vec& v) {
    const double s = std::sin(2 * kPi * x(1));
    return (1 + s * s) * v.norm();
  });
}

}  // namespace

TEST_CASE("catalog values") {
  const auto E = catalog_metric("euclidean", 2);
  CHECK(E(v2(0, 0), v2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));

  CHECK(busemann_distance(v2(0, 0), v2(0, 1)) == doctest::Approx(8.0).epsilon(1e-15));
  const auto B = catalog_metric("busemann_example_density", 2);
  REQUIRE(B.closed_form_distance());
  CHECK((*B.closed_form_distance())(v2(0, 0), v2(0, 1)) == doctest::Approx(8.0));
  CHECK(B.smoothness() == Smoothness::C0);

  Params p;
  p.matrices["A"] = Mat(v2(1, 2).asDiagonal());
  const auto R = catalog_metric("randers_exact", 2, p);
  CHECK(R(v2(0, 0), v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("unknown catalog entry and bad parameters are rejected") {
  CHECK_THROWS_AS(catalog_metric("nope", 2), PreconditionError);
  CHECK_THROWS_AS(catalog_info("nope"), PreconditionError);
  Params p;
  p.matrices["A"] = Mat(v2(1, -1).asDiagonal());
  CHECK_THROWS_AS(catalog_metric("ellipse_norm", 2, p), PreconditionError);
}

TEST_CASE("homogeneity and lattice periodicity of the catalog") {
  Rng rng(11);
  for (const auto& info : catalog_entries()) {
    for (int n : {2, 3}) {
      if (info.name == "busemann_example_density" && n != 2) continue;
      CAPTURE(info.name);
      CAPTURE(n);
      const auto F = catalog_metric(info.name, n);
      for (int k = 0; k < 20; ++k) {
        const Vec x = random_in_box(rng, Vec::Constant(n, -2), Vec::Constant(n, 2));
        const Vec v = random_unit_vector(rng, n);
        for (double lambda : {0.3, 2.0, 9.0}) {
          CHECK(F(x, lambda * v) == doctest::Approx(lambda * F(x, v)).epsilon(1e-12));
        }
        if (F.lattice()) {
          const Vec m = F.lattice()->basis() * Vec::Constant(n, 1.0) - F.lattice()->generator(0);
          CHECK(F(x + m, v) == doctest::Approx(F(x, v)).epsilon(1e-12));
        }
        if (F.reversible()) CHECK(F(x, -v) == doctest::Approx(F(x, v)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Finsler catalog entries are positive and convex") {
  for (const auto& info : catalog_entries()) {
    if (!info.finsler || info.smoothness != Smoothness::C2) continue;
    CAPTURE(info.name);
    const auto F = catalog_metric(info.name, 2);
    FinslerSampling s{cell_sample_points(2, F.lattice(), 5), 32};
    const FinslerCheck c = check_finsler(F, s);
    CHECK(c.ok());
    CHECK(c.min_value > 0.0);
  }
}

TEST_CASE("finite-difference partials") {
  const auto E = catalog_metric("euclidean", 2);
  const Partials p = partials(E, v2(0, 0), v2(3, 4));
  CHECK(p.dv(0) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(p.dv(1) == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(p.dxdv.cwiseAbs().maxCoeff() == 0.0);

  const Partials q = partials(conformal_2d(), v2(0, 0.125), v2(1, 0));
  CHECK(q.dxdv(1, 0) == doctest::Approx(2 * kPi).epsilon(1e-3 / (2 * kPi)));

  CHECK_THROWS_AS(partials(E, v2(0, 0), v2(0, 0)), PreconditionError);
}

TEST_CASE("plane restriction") {
  const auto E = catalog_metric("euclidean", 3);
  const auto G = restrict_to_plane(E, Vec::Zero(3), v3(1, 0, 0), v3(0, 1, 0));
  CHECK(G(v2(0, 0), v2(1, 1)) == doctest::Approx(std::sqrt(2.0)));
  const auto H = restrict_to_plane(E, Vec::Zero(3), v3(1, 0, 0), v3(1, 1, 0));
  CHECK(H(v2(0, 0), v2(0, 1)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("affine pullback") {
  Rng rng(3);
  const auto E = catalog_metric("euclidean", 2);
  const auto R = catalog_metric("randers_exact", 2);
  const auto same = affine_pullback(R, AffineMap::identity(2));
  const auto doubled = affine_pullback(E, AffineMap::linear_map(2 * Mat::Identity(2, 2)));
  Mat rot(2, 2);
  rot << std::cos(kPi / 4), -std::sin(kPi / 4), std::sin(kPi / 4), std::cos(kPi / 4);
  const auto rotated = affine_pullback(E, AffineMap::linear_map(rot));
  for (int k = 0; k < 10; ++k) {
    const Vec x = random_in_box(rng, Vec::Zero(2), Vec::Ones(2));
    const Vec v = random_unit_vector(rng, 2);
    CHECK(same(x, v) == R(x, v));
    CHECK(doubled(x, v) == doctest::Approx(2 * E(x, v)));
    CHECK(rotated(x, v) == doctest::Approx(E(x, v)));
  }
  const AffineMap T(rot, v2(0.3, -1));
  const Vec x = v2(0.2, 0.7);
  CHECK((T.inverse().apply(T.apply(x)) - x).norm() < 1e-14);
  CHECK_THROWS_AS(AffineMap::linear_map(Mat::Zero(2, 2)), PreconditionError);
  CHECK_THROWS_AS(Lattice(Mat::Zero(2, 2)), PreconditionError);
}

TEST_CASE("even/odd split") {
  Rng rng(5);
  const auto E = catalog_metric("euclidean", 2);
  const OneDensity F(2, [](const Vec&, const Vec& v) { return v.norm() + 0.3 * v(0); });
  const auto parts = even_odd_split(F);
  const auto rev = even_odd_split(catalog_metric("ellipse_norm", 2));
  const auto R = catalog_metric("randers_exact", 2);
  const auto rparts = even_odd_split(R);
  const auto ell = catalog_metric("ellipse_norm", 2);
  const TrigPotential f = TrigPotential::sine_product(2, 0.05);
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_in_box(rng, Vec::Zero(2), Vec::Ones(2));
    const Vec v = random_unit_vector(rng, 2);
    CHECK(parts.even(x, v) == doctest::Approx(E(x, v)).epsilon(1e-14));
    CHECK(parts.odd(x, v) == doctest::Approx(0.3 * v(0)).epsilon(1e-14));
    CHECK(std::abs(rev.odd(x, v)) < 1e-15);
    CHECK(std::abs(rparts.even(x, v) - ell(x, v)) < 1e-12);
    CHECK(std::abs(rparts.odd(x, v) - f.gradient(x).dot(v)) < 1e-12);
  }
}

TEST_CASE("perturbation keeps the Finsler property") {
  const auto E = catalog_metric("euclidean", 2);
  FinslerSampling s{cell_sample_points(2, std::nullopt, 6), 32};
  const OneDensity zero(2, [](const Vec&, const Vec&) { return 0.0; });
  CHECK(perturb_to_finsler(E, zero, {0.5, 0.9, 1.1}, s) == 1.1);
  const OneDensity minus(2, [](const Vec&, const Vec& v) { return -v.norm(); });
  CHECK(perturb_to_finsler(E, minus, {0.5, 0.9, 1.1}, s) == 0.9);
  const OneDensity wave(2, [](const Vec& x, const Vec& v) { return std::sin(2 * kPi * x(0)) * v(1); });
  const double eps = perturb_to_finsler(E, wave, {0.2, 0.5, 2.0}, s);
  CHECK(eps == 0.5);
}

TEST_CASE("metric axioms") {
  Rng rng(17);
  const auto triples = sample_triples(rng, 2, 1000);
  const DistanceFn euclid = [](const Vec& x, const Vec& y) { return (x - y).norm(); };
  const AxiomReport r = metric_axioms_check(euclid, triples, 1e-12);
  CHECK(r.pass());
  CHECK(r.triangle <= 1e-12);
  CHECK(r.additivity <= 1e-12);

  const AxiomReport b = metric_axioms_check(busemann_distance, triples, 1e-9);
  CHECK(b.additivity <= 1e-9);
  CHECK(b.pass());

  const DistanceFn squared = [](const Vec& x, const Vec& y) { return (x - y).squaredNorm(); };
  const AxiomReport s = metric_axioms_check(squared, triples, 1e-9);
  CHECK_FALSE(s.pass());
  CHECK(s.triangle > 0.0);
  CHECK(s.additivity > 0.0);
}
