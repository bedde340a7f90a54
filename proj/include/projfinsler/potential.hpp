#pragma once

#include "projfinsler/types.hpp"

#include <optional>
#include <vector>

namespace projfinsler {

/// Lattice-periodic trigonometric polynomial
///   f(x) = sum_k a_k cos(2 pi <k, B^{-1} x> + phi_k)
/// with integer frequency vectors k. Serves as the scalar potential of
/// Randers-type catalog metrics and as a test oracle with exact gradients.
class TrigPotential {
 public:
  struct Term {
    Eigen::VectorXi frequency;
    double amplitude = 0.0;
    double phase = 0.0;
  };

  /// Potential on the integer lattice Z^dim.
  explicit TrigPotential(int dim);
  /// Potential periodic under the lattice whose generators are the columns of basis.
  explicit TrigPotential(const Mat& basis);

  TrigPotential& add(Eigen::VectorXi frequency, double amplitude, double phase = 0.0);

  int dim() const { return static_cast<int>(inverse_basis_.rows()); }
  const std::vector<Term>& terms() const { return terms_; }
  /// Generators of the periodicity lattice (columns).
  const Mat& basis() const { return basis_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// amplitude * sin(2 pi x1) sin(2 pi x2), the catalog potential.
  static TrigPotential sine_product(int dim, double amplitude);

  /// Random trig polynomial with `n_terms` terms, frequencies in [-max_freq, max_freq]
  /// and amplitudes uniform in [-max_amp, max_amp].
  static TrigPotential random(Rng& rng, int dim, int n_terms, int max_freq, double max_amp);

  /// Upper bound of |grad f| over R^n (sum of |a_k| * 2 pi |B^{-T} k|).
  double gradient_bound() const;

 private:
  Mat basis_;
  Mat inverse_basis_;
  std::vector<Term> terms_;
};

}  // namespace projfinsler
