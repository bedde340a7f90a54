#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace projfinsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition (bad parameters, degenerate
/// geometry, zero velocity, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its stated accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Seeded generator used by every sampler. All randomized procedures take
/// their seed explicitly.
using Rng = std::mt19937_64;

inline Vec random_unit_vector(Rng& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = g(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

inline Vec random_in_box(Rng& rng, const Vec& lo, const Vec& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(lo.size());
  for (int i = 0; i < lo.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return x;
}

}  // namespace projfinsler
