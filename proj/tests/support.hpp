#pragma once

#include <random>

#include "rkck/coherent.hpp"
#include "rkck/fock.hpp"

namespace rkck::test {

// Deterministic generators for randomized suites.
class Rng {
 public:
  explicit Rng(unsigned long long seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  CoherentLabel label(int modes, double zmax) {
    Vector z(modes);
    for (int m = 0; m < modes; ++m) {
      z(m) = Complex(uniform(-zmax, zmax), uniform(-zmax, zmax));
    }
    const double norm = std::sqrt(z.squaredNorm());
    if (norm > zmax) z *= zmax / norm;
    return CoherentLabel::from_z(z);
  }

  Matrix hermitian(Eigen::Index n, double scale = 1.0) {
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        m(r, c) = Complex(uniform(-scale, scale), uniform(-scale, scale));
      }
    }
    return (m + m.adjoint()) / 2.0;
  }

  Vector unit_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(uniform(-1, 1), uniform(-1, 1));
    return v / v.norm();
  }

 private:
  std::mt19937_64 gen_;
};

inline CoherentLabel label1(double p, double q) {
  CoherentLabel l;
  l.p = RealVector::Constant(1, p);
  l.q = RealVector::Constant(1, q);
  return l;
}

}  // namespace rkck::test
