#pragma once

#include <functional>
#include <vector>

#include "rkck/coherent.hpp"
#include "rkck/fock.hpp"
#include "rkck/types.hpp"

namespace rkck {

enum class ConstraintKind { discrete_spectrum, second_class, continuous_zero };

struct ConstraintSet {
  std::vector<OperatorMatrix> ops;  // every Φ_α hermitian-flagged
  ConstraintKind kind = ConstraintKind::discrete_spectrum;
  double delta_squared = 0.0;
};

struct ConstraintProjector {
  OperatorMatrix projector;       // E, hermitian + projector flagged (rank 0 allowed)
  Matrix range_basis;             // dim × rank, orthonormal retained eigenvectors
  std::vector<double> retained;   // eigenvalues of ΣΦ² kept below δ²
  double delta_squared = 0.0;
  int rank = 0;
};

/// Standard constraint sets.
ConstraintSet second_class_pq(const FockSpace& space, double delta_squared = 1.0);
ConstraintSet angular_momentum_zero(const FockSpace& space, double delta_squared);
/// Φ = P² + Q² − (2·excitation+1), the oscillator-shell constraint pinning
/// the number operator at `excitation` (single-mode spaces).
ConstraintSet number_shell(const FockSpace& space, int excitation, double delta_squared);

/// Spectral projector onto the eigenvalues of ΣΦ_α² at or below δ².
/// Eigenvalues within 1e−12·max(1,δ²) of the boundary count as exactly on it
/// and are retained; eigenvalues in the wider 1e−9 band raise an ambiguity
/// error (the physical answer must not depend on float ordering there).
ConstraintProjector build_projector(const FockSpace& space, const ConstraintSet& constraints);

/// ⟨bra|E|ket⟩ over coherent states.
Complex constrained_kernel(const FockSpace& space, const FiducialVector& fiducial,
                           const ConstraintProjector& proj,
                           const CoherentLabel& bra, const CoherentLabel& ket);

/// Gram matrix of the (possibly constrained) kernel over a label set.
Matrix kernel_gram(const FockSpace& space, const FiducialVector& fiducial,
                   const ConstraintProjector* proj,
                   const std::vector<CoherentLabel>& labels);

/// Numerical rank: eigenvalues above rel_tol·λ_max of a PSD Gram matrix.
/// psd_rel_tol bounds how negative the smallest eigenvalue may be; exact
/// projector kernels are PSD to 1e−9, extrapolated ones only to their
/// extrapolation residual.
int kernel_rank(const Matrix& gram, double rel_tol = 1e-8, double psd_rel_tol = 1e-9);

struct WSearchSpec {
  double lo = -2.5;
  double hi = 2.5;
  int nodes_per_axis = 51;
  int refine_nodes = 21;
};

struct WEstimate {
  double value = 0.0;
  CoherentLabel argmax;
  bool schwarz_ok = true;
};

/// Grid estimate of W = limsup ⟨p,q|E|p,q⟩ with one refinement pass around
/// the best node, plus a Schwarz-chain spot check on grid samples.
WEstimate estimate_W(const FockSpace& space, const FiducialVector& fiducial,
                     const ConstraintProjector& proj, const WSearchSpec& spec);

struct LabelPair {
  CoherentLabel bra;
  CoherentLabel ket;
};

enum class RescaleFamily { none, half_width, w_sup };

struct ReducedPoint {
  std::vector<Complex> values;  // rescaled kernel per ladder rung
  Complex limit{0.0, 0.0};
  double rho = 0.0;
  double residual = 0.0;
  bool converged = true;
};

struct ReducedKernel {
  std::vector<LabelPair> grid;
  std::vector<double> ladder;
  RescaleFamily rescale = RescaleFamily::none;
  std::vector<ReducedPoint> points;
  double typical_rho = 0.0;
  bool delta_independent = false;
};

using ConstraintFamily = std::function<ConstraintSet(double delta)>;

/// δ→0 reduction for a rank-stable (or W-rescaled) spectral family. Rank
/// collapse to zero at finite δ raises "kernel vanishes; rescale required".
ReducedKernel reduce_kernel_delta_limit(const FockSpace& space,
                                        const FiducialVector& fiducial,
                                        const ConstraintFamily& family,
                                        const std::vector<LabelPair>& grid,
                                        const std::vector<double>& ladder,
                                        RescaleFamily rescale);

/// Φ = coef_p·P + coef_q·Q + shift on one mode; the continuous-zero window.
struct LinearWindowConstraint {
  int mode = 0;
  double coef_p = 1.0;
  double coef_q = 0.0;
  double shift = 0.0;
};

/// δ→0 reduction of the (1/2δ)-rescaled window kernel for a constraint with
/// zero in its continuous spectrum. The window integral over the spectral
/// variable is evaluated with momentum-space wavefunctions expanded in the
/// truncated Fock basis, then the fitted power law is extrapolated to δ=0.
ReducedKernel reduce_kernel_delta_limit(const FockSpace& space,
                                        const FiducialVector& fiducial,
                                        const LinearWindowConstraint& window,
                                        const std::vector<LabelPair>& grid,
                                        const std::vector<double>& ladder);

}  // namespace rkck
