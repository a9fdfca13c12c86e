#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rkck/types.hpp"

namespace rkck {

/// Dense operator with structural metadata. Flags are promises checked at
/// construction sites, not re-verified on every use.
struct OperatorMatrix {
  Matrix mat;
  bool hermitian = false;
  bool unitary = false;
  bool projector = false;

  Eigen::Index dim() const { return mat.rows(); }
};

/// Validates the hermiticity contract and returns a flagged operator.
OperatorMatrix as_hermitian(Matrix m);

inline constexpr long kDefaultDimensionLimit = 20000;

/// Truncated bosonic Hilbert space: `modes` oscillators with `cutoff` Fock
/// levels each (dimension cutoff^modes), optionally restricted to total
/// occupation <= total_cap. Basis order is lexicographic with mode 0 most
/// significant, which for the unrestricted space coincides with Kronecker
/// order a_0 (x) a_1 (x) ... .
class FockSpace {
 public:
  FockSpace(int modes, int cutoff,
            std::optional<int> total_cap = std::nullopt,
            long dimension_limit = kDefaultDimensionLimit);

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  std::optional<int> total_cap() const { return total_cap_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  double tail_tolerance() const { return tail_tolerance_; }

  const std::vector<std::vector<int>>& occupations() const { return basis_; }
  Eigen::Index index_of(const std::vector<int>& occ) const;

  /// Full-space annihilation operator for one mode.
  Matrix lower(int mode) const;
  Matrix raise(int mode) const;

  OperatorMatrix identity() const;
  OperatorMatrix position(int mode) const;   // Q = (a + a†)/√2
  OperatorMatrix momentum(int mode) const;   // P = (a − a†)/(i√2)
  OperatorMatrix number(int mode) const;     // a†a
  OperatorMatrix total_number() const;

  /// Single-mode cutoff×cutoff annihilation matrix.
  const Matrix& mode_lower() const { return mode_a_; }

  /// Eigendecomposition of the single-mode hermitian generator −i(a†−a),
  /// cached for fast displacement evaluation.
  const RealVector& displacement_eigenvalues() const { return disp_w_; }
  const Matrix& displacement_eigenvectors() const { return disp_v_; }

 private:
  void check_mode(int mode) const;

  int modes_;
  int cutoff_;
  std::optional<int> total_cap_;
  double tail_tolerance_ = 1e-10;
  std::vector<std::vector<int>> basis_;
  Matrix mode_a_;
  RealVector disp_w_;
  Matrix disp_v_;
};

/// (a, a†) embedded in the full space.
std::pair<OperatorMatrix, OperatorMatrix> build_ladder(const FockSpace& space, int mode);

/// (P, Q) for one mode, hermitian-flagged.
std::pair<OperatorMatrix, OperatorMatrix> canonical_ops(const FockSpace& space, int mode);

/// Angular momentum J_axis = −i ε_{axis,k,l} a_k† a_l on a three-mode space.
OperatorMatrix angular_momentum(const FockSpace& space, int axis);

/// Kronecker-structured embedding of per-mode operators, identity on
/// unlisted modes. Operands are cutoff×cutoff single-mode matrices.
OperatorMatrix tensor(const FockSpace& space,
                      const std::vector<std::pair<int, OperatorMatrix>>& placed);

/// exp(scale·M). Hermitian inputs go through the eigensolver; anything else
/// through Padé scaling-and-squaring.
OperatorMatrix expm(const OperatorMatrix& m, Complex scale);

struct EigResult {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns, phase-fixed
};

/// Eigendecomposition of a hermitian-flagged operator. Eigenvector phases are
/// fixed so the first component of largest magnitude is real positive.
EigResult eig_hermitian(const OperatorMatrix& m);

/// Applies a single-mode matrix to one mode of a full-space vector
/// (unrestricted spaces only).
Vector apply_mode(const FockSpace& space, int mode, const Matrix& op, const Vector& v);

}  // namespace rkck
