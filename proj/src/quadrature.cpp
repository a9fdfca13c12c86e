#include "rkck/quadrature.hpp"

#include <cmath>

namespace rkck::quad {

Rule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Rule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double first = es.eigenvectors()(0, k);
    rule.weights(k) = 2.0 * first * first;
  }
  return rule;
}

RealVector hermite_functions(double x, int count) {
  RealVector psi(count);
  psi(0) = std::pow(M_PI, -0.25) * std::exp(-x * x / 2.0);
  if (count > 1) psi(1) = std::sqrt(2.0) * x * psi(0);
  for (int n = 1; n + 1 < count; ++n) {
    psi(n + 1) = std::sqrt(2.0 / (n + 1.0)) * x * psi(n) -
                 std::sqrt(n / (n + 1.0)) * psi(n - 1);
  }
  return psi;
}

}  // namespace rkck::quad
