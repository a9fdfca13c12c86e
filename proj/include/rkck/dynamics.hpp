#pragma once

#include "rkck/constraint.hpp"
#include "rkck/product.hpp"

namespace rkck {

/// U(T) = exp(−iHT), unitary-flagged.
OperatorMatrix propagator(const FockSpace& space, const OperatorMatrix& hamiltonian, double T);

/// Coherent-state matrix element ⟨bra|X|ket⟩.
Complex coherent_matrix_element(const FockSpace& space, const FiducialVector& fiducial,
                                const OperatorMatrix& op, const CoherentLabel& bra,
                                const CoherentLabel& ket);

enum class ConstraintBranch { general, commuting };

/// Eq.-16 style constrained evolution: E·exp(−i(EHE)T)·E, or exp(−iHT)·E when
/// E and H commute (the two agree identically in that case).
OperatorMatrix constrained_propagator(const FockSpace& space, const ConstraintProjector& proj,
                                      const OperatorMatrix& hamiltonian, double T,
                                      ConstraintBranch branch);

struct RenormalizedHamiltonian {
  OperatorMatrix hbar;      // H − Ē
  double ebar = 0.0;        // energy shift per basic system
  int selected_index = 0;   // p (non-commuting) or r (commuting)
  Vector selected_vector;   // η̄: the selected eigenvector
  ConstraintBranch branch = ConstraintBranch::commuting;
};

/// Chooses the fiducial eigenvector and the energy shift making the selected
/// physical eigenvalue zero. Non-commuting branch: lowest eigenvector of EHE
/// restricted to range(E). Commuting branch: lowest eigenvector of H with
/// positive overlap against E.
RenormalizedHamiltonian select_fiducial_and_shift(const FockSpace& space,
                                                  const ConstraintProjector& proj,
                                                  const OperatorMatrix& hamiltonian,
                                                  ConstraintBranch branch);

/// Product-system propagator: per-factor S̄^{−1}⟨bra_n|X(T)|ket_n⟩ with the
/// Eq.-33/35 fixed-point condition verified before any product is formed.
ProductKernelResult product_propagator(const FockSpace& space, const ConstraintProjector& proj,
                                       const RenormalizedHamiltonian& bundle,
                                       const FiducialVector& fiducial,
                                       const LabelSequence& seq_bra,
                                       const LabelSequence& seq_ket, double T, long n_max);

}  // namespace rkck
