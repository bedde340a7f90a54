#include "projfinsler/potential.hpp"

#include <cmath>

namespace projfinsler {

TrigPotential::TrigPotential(int dim) : basis_(Mat::Identity(dim, dim)), inverse_basis_(basis_) {}

TrigPotential::TrigPotential(const Mat& basis) {
  if (basis.rows() != basis.cols() || std::abs(basis.determinant()) < 1e-14) {
    throw PreconditionError("TrigPotential: lattice basis must be square and invertible");
  }
  basis_ = basis;
  inverse_basis_ = basis.inverse();
}

TrigPotential& TrigPotential::add(Eigen::VectorXi frequency, double amplitude, double phase) {
  if (frequency.size() != dim()) throw PreconditionError("TrigPotential: frequency dimension mismatch");
  terms_.push_back({std::move(frequency), amplitude, phase});
  return *this;
}

double TrigPotential::value(const Vec& x) const {
  const Vec s = inverse_basis_ * x;
  double f = 0.0;
  for (const auto& t : terms_) {
    f += t.amplitude * std::cos(2.0 * kPi * t.frequency.cast<double>().dot(s) + t.phase);
  }
  return f;
}

Vec TrigPotential::gradient(const Vec& x) const {
  const Vec s = inverse_basis_ * x;
  Vec g = Vec::Zero(dim());
  for (const auto& t : terms_) {
    const Vec k = inverse_basis_.transpose() * t.frequency.cast<double>();
    const double arg = 2.0 * kPi * t.frequency.cast<double>().dot(s) + t.phase;
    g -= t.amplitude * 2.0 * kPi * std::sin(arg) * k;
  }
  return g;
}

Mat TrigPotential::hessian(const Vec& x) const {
  const Vec s = inverse_basis_ * x;
  Mat h = Mat::Zero(dim(), dim());
  for (const auto& t : terms_) {
    const Vec k = inverse_basis_.transpose() * t.frequency.cast<double>();
    const double arg = 2.0 * kPi * t.frequency.cast<double>().dot(s) + t.phase;
    h -= t.amplitude * 4.0 * kPi * kPi * std::cos(arg) * (k * k.transpose());
  }
  return h;
}

TrigPotential TrigPotential::sine_product(int dim, double amplitude) {
  // sin a sin b = (cos(a - b) - cos(a + b)) / 2
  TrigPotential f(dim);
  Eigen::VectorXi minus = Eigen::VectorXi::Zero(dim);
  Eigen::VectorXi plus = Eigen::VectorXi::Zero(dim);
  minus[0] = 1;
  minus[1] = -1;
  plus[0] = 1;
  plus[1] = 1;
  f.add(minus, 0.5 * amplitude);
  f.add(plus, -0.5 * amplitude);
  return f;
}

TrigPotential TrigPotential::random(Rng& rng, int dim, int n_terms, int max_freq, double max_amp) {
  TrigPotential f(dim);
  std::uniform_int_distribution<int> freq(-max_freq, max_freq);
  std::uniform_real_distribution<double> amp(-max_amp, max_amp);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int t = 0; t < n_terms; ++t) {
    Eigen::VectorXi k(dim);
    do {
      for (int i = 0; i < dim; ++i) k[i] = freq(rng);
    } while (k.cwiseAbs().sum() == 0);
    f.add(k, amp(rng), phase(rng));
  }
  return f;
}

double TrigPotential::gradient_bound() const {
  double bound = 0.0;
  for (const auto& t : terms_) {
    bound += std::abs(t.amplitude) * 2.0 * kPi * (inverse_basis_.transpose() * t.frequency.cast<double>()).norm();
  }
  return bound;
}

}  // namespace projfinsler
