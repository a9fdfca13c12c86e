#pragma once

#include "rkck/types.hpp"

namespace rkck::quad {

struct Rule {
  RealVector nodes;
  RealVector weights;
};

/// Gauss–Legendre rule on [-1, 1] (Golub–Welsch).
Rule gauss_legendre(int n);

/// Orthonormal Hermite functions ψ_0..ψ_{count-1} evaluated at x.
RealVector hermite_functions(double x, int count);

}  // namespace rkck::quad
