#include "rkck/dynamics.hpp"

#include <cmath>

namespace rkck {

OperatorMatrix propagator(const FockSpace& space, const OperatorMatrix& hamiltonian, double T) {
  if (!hamiltonian.hermitian) throw ValidationError("propagator: hamiltonian must be hermitian");
  if (hamiltonian.dim() != space.dim()) throw ValidationError("propagator: dimension mismatch");
  OperatorMatrix u = expm(hamiltonian, -kImag * T);
  u.unitary = true;
  return u;
}

Complex coherent_matrix_element(const FockSpace& space, const FiducialVector& fiducial,
                                const OperatorMatrix& op, const CoherentLabel& bra,
                                const CoherentLabel& ket) {
  const Vector vb = coherent_state(space, fiducial, bra);
  const Vector vk = coherent_state(space, fiducial, ket);
  return vb.dot(op.mat * vk);
}

namespace {

double commutator_norm(const ConstraintProjector& proj, const OperatorMatrix& h) {
  return (proj.projector.mat * h.mat - h.mat * proj.projector.mat).norm();
}

}  // namespace

OperatorMatrix constrained_propagator(const FockSpace& space, const ConstraintProjector& proj,
                                      const OperatorMatrix& hamiltonian, double T,
                                      ConstraintBranch branch) {
  if (!hamiltonian.hermitian) {
    throw ValidationError("constrained_propagator: hamiltonian must be hermitian");
  }
  if (proj.projector.dim() != space.dim() || hamiltonian.dim() != space.dim()) {
    throw ValidationError("constrained_propagator: dimension mismatch");
  }
  if (branch == ConstraintBranch::commuting) {
    const double comm = commutator_norm(proj, hamiltonian);
    if (comm > 1e-10) {
      throw ValidationError("commuting branch requested but ||[E,H]|| = " +
                            std::to_string(comm));
    }
    OperatorMatrix out;
    out.mat = expm(hamiltonian, -kImag * T).mat * proj.projector.mat;
    return out;
  }
  const Matrix& e = proj.projector.mat;
  OperatorMatrix ehe;
  ehe.mat = e * hamiltonian.mat * e;
  ehe.hermitian = true;
  OperatorMatrix out;
  out.mat = e * expm(ehe, -kImag * T).mat * e;
  return out;
}

RenormalizedHamiltonian select_fiducial_and_shift(const FockSpace& space,
                                                  const ConstraintProjector& proj,
                                                  const OperatorMatrix& hamiltonian,
                                                  ConstraintBranch branch) {
  if (!hamiltonian.hermitian) throw ValidationError("select: hamiltonian must be hermitian");
  if (proj.rank == 0) throw ValidationError("select: E = 0, no physical space");
  RenormalizedHamiltonian out;
  out.branch = branch;

  if (branch == ConstraintBranch::general) {
    // spectrum of EHE restricted to range(E)
    OperatorMatrix restricted;
    restricted.mat = proj.range_basis.adjoint() * hamiltonian.mat * proj.range_basis;
    restricted.hermitian = true;
    const EigResult eig = eig_hermitian(restricted);
    out.selected_index = 0;
    out.ebar = eig.values(0);
    out.selected_vector = proj.range_basis * eig.vectors.col(0);
  } else {
    const double comm = commutator_norm(proj, hamiltonian);
    if (comm > 1e-10) {
      throw ValidationError("commuting selection requested but ||[E,H]|| = " +
                            std::to_string(comm));
    }
    const EigResult eig = eig_hermitian(hamiltonian);
    int r = -1;
    for (Eigen::Index l = 0; l < eig.values.size(); ++l) {
      const Vector pe = proj.range_basis.adjoint() * eig.vectors.col(l);
      if (pe.squaredNorm() > 1e-10) {
        r = static_cast<int>(l);
        break;
      }
    }
    if (r < 0) {
      throw ValidationError("select: no eigenvector of H is compatible with E");
    }
    out.selected_index = r;
    out.ebar = eig.values(r);
    out.selected_vector = eig.vectors.col(r);
  }

  out.hbar.mat = hamiltonian.mat -
                 out.ebar * Matrix::Identity(space.dim(), space.dim());
  out.hbar.hermitian = true;
  return out;
}

ProductKernelResult product_propagator(const FockSpace& space, const ConstraintProjector& proj,
                                       const RenormalizedHamiltonian& bundle,
                                       const FiducialVector& fiducial,
                                       const LabelSequence& seq_bra,
                                       const LabelSequence& seq_ket, double T, long n_max) {
  // X(T): the per-factor constrained evolution
  const OperatorMatrix x =
      constrained_propagator(space, proj, bundle.hbar, T, bundle.branch);

  // Eq.-33/35 fixed point at the sector point: X·E|η̄⟩ = E|η̄⟩.
  const CoherentLabel& sector = seq_bra.limit();
  const Vector eta = coherent_state(space, fiducial, sector);
  const Vector pe = proj.projector.mat * eta;
  const double sbar = pe.squaredNorm();
  if (sbar <= 1e-12) {
    throw ValidationError(
        "fixed-point check failed: E annihilates the sector fiducial (S-bar = 0); "
        "change the fiducial or the sector point");
  }
  const double defect = (x.mat * pe - pe).norm() / pe.norm();
  if (defect > 1e-9) {
    throw ValidationError(
        "fixed-point check failed: constrained evolution moves E|fiducial> "
        "(defect " + std::to_string(defect) + "); wrong energy shift or fiducial");
  }

  FactorFn factor = [&](const CoherentLabel& bra, const CoherentLabel& ket) {
    const Vector vb = coherent_state(space, fiducial, bra);
    const Vector vk = coherent_state(space, fiducial, ket);
    return vb.dot(x.mat * vk) / sbar;
  };
  ProductKernelResult res = product_kernel(space, fiducial, nullptr, seq_bra, seq_ket,
                                           n_max, &factor);
  res.sbar = sbar;
  return res;
}

}  // namespace rkck
