#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projfinsler/grassmannian.hpp"

#include <cmath>

using namespace projfinsler;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

HyperplaneMeasure constant(int n, double c) {
  return HyperplaneMeasure(n, [c](const Vec&, double) { return c; });
}

// Lattice-periodic density with nontrivial p-dependence in every direction.
HyperplaneMeasure periodic_density() {
  return HyperplaneMeasure(2, [](const Vec& u, double p) {
    return 0.5 + 0.1 * std::cos(2 * kPi * p) * u(0) * u(0) * u(1) * u(1);
  });
}

}  // namespace

TEST_CASE("quadrature basics") {
  const QuadratureRule g = gauss_legendre(5, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 9);
  CHECK(s == doctest::Approx(102.4).epsilon(1e-13));
  for (const int n : {2, 3}) {
    double area = 0.0;
    for (const auto& node : sphere_rule(Vec::Unit(n, 0), SphereResolution::defaults(n))) area += node.weight;
    CHECK(area == doctest::Approx(sphere_area(n)).epsilon(1e-12));
  }
  bool ok = false;
  CHECK(adaptive_simpson([](double t) { return std::exp(t); }, 0, 1, 1e-12, &ok) == doctest::Approx(std::exp(1.0) - 1));
  CHECK(ok);
}

TEST_CASE("segment measure of the constant density") {
  const auto mu = constant(2, 0.5);
  const SegmentMeasureResult r = segment_measure(mu, v2(0, 0), v2(1, 0));
  CHECK(std::abs(r.value - 1.0) <= 1e-6);
  CHECK(r.error_estimate >= 0.0);
  CHECK(segment_measure(mu, v2(0.3, 0.2), v2(0.3, 0.2)).value == 0.0);
  CHECK(segment_measure(mu, v2(0.3, 0.2), v2(1.3, -0.8)).value >= 0.0);
}

TEST_CASE("Crofton Finsler metric") {
  Rng rng(9);
  const FinslerMetric F = crofton_finsler(constant(2, 0.5));
  for (int k = 0; k < 20; ++k) {
    const Vec x = random_in_box(rng, Vec::Zero(2), Vec::Ones(2));
    const Vec v = random_unit_vector(rng, 2);
    CHECK(std::abs(F(x, v) - 1.0) <= 1e-5);
  }
  const HyperplaneMeasure aniso(2, [](const Vec& u, double) { return 0.5 + 0.2 * u(0) * u(0); });
  const FinslerMetric G = crofton_finsler(aniso);
  const Vec v = v2(0.6, 0.8);
  CHECK(G(v2(0, 0), v) == doctest::Approx(G(v2(0.7, -3.1), v)).epsilon(1e-12));

  const HyperplaneMeasure lopsided(2, [](const Vec& u, double) { return 0.5 + 0.2 * u(0); }, true);
  CHECK_THROWS_AS(crofton_finsler(lopsided), PreconditionError);
}

TEST_CASE("quasipositivity") {
  Rng rng(21);
  const auto triples = sample_triples(rng, 2, 50);
  CHECK(quasipositivity_check(constant(2, 0.5), triples, 1e-10).pass());
  const QuasipositivityReport zero = quasipositivity_check(constant(2, 0.0), triples, 1e-8, {128, 1});
  CHECK_FALSE(zero.pass());
  CHECK(zero.min_measure == 0.0);
  const HyperplaneMeasure signed_m(2, [](const Vec&, double p) { return 0.5 * (1 - 1.5 * std::cos(2 * kPi * p)); });
  const QuasipositivityReport s = quasipositivity_check(signed_m, triples, 1e-8, {128, 1});
  CHECK_FALSE(s.pass());
  CHECK(s.measures.size() == s.n_triples);
}

TEST_CASE("pushforward matches pullback") {
  Rng rng(23);
  const auto mu = periodic_density();
  CHECK(segment_measure(measure_pushforward(mu, AffineMap::identity(2)), v2(0, 0), v2(0.4, 0.9)).value ==
        doctest::Approx(segment_measure(mu, v2(0, 0), v2(0.4, 0.9)).value).epsilon(1e-12));
  const auto half = constant(2, 0.5);
  const auto shifted = measure_pushforward(half, AffineMap::translation(v2(0.3, -0.4)));
  CHECK(segment_measure(shifted, v2(0, 0), v2(1, 0)).value == doctest::Approx(1.0).epsilon(1e-6));

  Mat A(2, 2);
  A << 1.2, 0.3, -0.2, 0.9;
  const AffineMap T(A, v2(0.1, 0.25));
  const auto pushed = measure_pushforward(mu, T);
  const FinslerMetric F = crofton_finsler(mu);
  const FinslerMetric Fpushed = crofton_finsler(pushed);
  const OneDensity pulled = affine_pullback(F, T);
  for (int k = 0; k < 5; ++k) {
    const Vec x = random_in_box(rng, Vec::Zero(2), Vec::Ones(2));
    const Vec y = random_in_box(rng, Vec::Zero(2), Vec::Ones(2));
    CHECK(segment_measure(pushed, x, y).value ==
          doctest::Approx(segment_measure(mu, T.apply(x), T.apply(y)).value).epsilon(1e-7));
    const Vec v = random_unit_vector(rng, 2);
    CHECK(Fpushed(x, v) == doctest::Approx(pulled(x, v)).epsilon(1e-7));
  }
}

TEST_CASE("lattice orbit density") {
  CHECK_FALSE(lattice_orbit_net(v2(1, 0), 50, 0.1).dense);
  CHECK(lattice_orbit_net(v2(1, 0), 50, 0.1).largest_gap == doctest::Approx(1.0));

  const Vec irrational = v2(1, std::sqrt(2.0)) / std::sqrt(3.0);
  CHECK(lattice_orbit_net(irrational, 50, 0.02).dense);

  const Vec diagonal = v2(1, 1) / std::sqrt(2.0);
  const OrbitNetReport d = lattice_orbit_net(diagonal, 50, 0.02);
  CHECK_FALSE(d.dense);
  CHECK(d.largest_gap == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));

  double previous = 2.0;
  for (int N : {10, 20, 40, 80}) {
    const double gap = lattice_orbit_net(irrational, N, 0.02).largest_gap;
    CHECK(gap <= previous * (1 + 1e-9));
    previous = gap;
  }
}

TEST_CASE("invariance gap") {
  const Lattice Z2 = Lattice::integer(2);
  InvarianceSampling s;
  s.samples = 2000;
  const InvarianceGapReport flat = invariance_gap([](const Vec& u, double) { return u(0) * u(0); }, Z2, s, 1e-12);
  CHECK(flat.gap == 0.0);
  CHECK(flat.pass());

  CHECK_THROWS_AS(invariance_gap([](const Vec&, double p) { return std::cos(2 * kPi * p); }, Z2, s, 1e-6),
                  PreconditionError);

  // Average of a p-periodic profile over the orbit closure: the p-dependence
  // cancels for every direction with an irrational slope.
  const HyperplaneDensityFn averaged = [](const Vec& u, double p) {
    double acc = 0.0;
    const int m = 64;
    for (int k = 0; k < m; ++k) acc += std::cos(2 * kPi * (p + static_cast<double>(k) / m));
    return 1.0 + u(1) * u(1) + acc / m;
  };
  s.samples = 10'000;
  CHECK(invariance_gap(averaged, Z2, s, 1e-2).pass());
}
