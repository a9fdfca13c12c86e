#pragma once

#include <string>

#include "rkck/fock.hpp"
#include "rkck/types.hpp"

namespace rkck {

/// Phase-space point (p, q) ∈ R^{2J}. The holomorphic label is
/// z = (q + ip)/√2 componentwise.
struct CoherentLabel {
  RealVector p;
  RealVector q;

  static CoherentLabel zero(int modes);
  static CoherentLabel from_z(const Vector& z);

  int modes() const { return static_cast<int>(p.size()); }
  Vector z() const;
  double z_norm_sq() const;
  bool finite() const;
};

bool operator==(const CoherentLabel& a, const CoherentLabel& b);

struct FiducialVector {
  Vector coeffs;  // unit norm in the Fock basis
  std::string name;
};

FiducialVector make_fiducial(Vector coeffs, std::string name);
FiducialVector ground_fiducial(const FockSpace& space);
FiducialVector fock_fiducial(const FockSpace& space, const std::vector<int>& occ);
/// The displaced ground state |z0⟩ used as a fiducial vector in its own right.
FiducialVector coherent_fiducial(const FockSpace& space, const CoherentLabel& label);

/// Applies exp(i p·Q − i q·P) to an arbitrary vector. Unrestricted spaces use
/// the cached per-mode factorization; capped spaces exponentiate the full
/// generator. `checked` enforces the truncation-leak guard |z|² ≤ cutoff/4.
Vector displace_vector(const FockSpace& space, const CoherentLabel& label,
                       const Vector& v, bool checked = true);

Vector coherent_state(const FockSpace& space, const FiducialVector& fiducial,
                      const CoherentLabel& label);

/// Numeric inner product ⟨bra|ket⟩ of two coherent states.
Complex overlap(const FockSpace& space, const FiducialVector& fiducial,
                const CoherentLabel& bra, const CoherentLabel& ket);

/// Closed-form Gaussian overlap Π_j exp(−½|z″_j|² + z″_j* z′_j − ½|z′_j|²),
/// valid for the oscillator ground-state fiducial. Kept as a cross-check
/// oracle against the matrix-exponential path.
Complex ground_overlap(const CoherentLabel& bra, const CoherentLabel& ket);

struct QuadratureSpec {
  double z_radius = 6.0;    // disc |z| <= z_radius per mode
  int nodes_per_axis = 200; // trapezoid nodes per phase-space axis
  int block_nmax = 5;       // low-Fock block for the defect norm
};

struct ResolutionReport {
  double defect = 0.0;      // spectral norm of (∫|p,q⟩⟨p,q|dμ − 1) on the block
  bool under_resolved = false;
  long nodes_in_region = 0;
};

/// Checks the coherent-state resolution of unity on a truncated region by
/// tensor-grid trapezoid quadrature over the disc |z| <= radius.
ResolutionReport check_resolution_of_unity(const FockSpace& space,
                                           const FiducialVector& fiducial,
                                           const QuadratureSpec& spec);

}  // namespace rkck
