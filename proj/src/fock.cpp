#include "rkck/fock.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace rkck {

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

OperatorMatrix as_hermitian(Matrix m) {
  const double scale = m.norm();
  if (scale > 0 && (m - m.adjoint()).norm() > 1e-12 * scale) {
    throw ValidationError("operator is not hermitian within tolerance");
  }
  OperatorMatrix out;
  out.mat = std::move(m);
  out.hermitian = true;
  return out;
}

namespace {

void enumerate_basis(int modes, int cutoff, std::optional<int> cap,
                     std::vector<int>& occ, int mode,
                     std::vector<std::vector<int>>& out) {
  if (mode == modes) {
    out.push_back(occ);
    return;
  }
  int used = 0;
  for (int j = 0; j < mode; ++j) used += occ[j];
  int top = cutoff - 1;
  if (cap) top = std::min(top, *cap - used);
  for (int n = 0; n <= top; ++n) {
    occ[mode] = n;
    enumerate_basis(modes, cutoff, cap, occ, mode + 1, out);
  }
  occ[mode] = 0;
}

}  // namespace

FockSpace::FockSpace(int modes, int cutoff, std::optional<int> total_cap,
                     long dimension_limit)
    : modes_(modes), cutoff_(cutoff), total_cap_(total_cap) {
  if (modes < 1) throw ValidationError("FockSpace: modes must be >= 1");
  if (cutoff < 2) throw ValidationError("FockSpace: cutoff must be >= 2");
  if (total_cap && *total_cap < 1) {
    throw ValidationError("FockSpace: total occupation cap must be >= 1");
  }
  double est = 1.0;
  for (int j = 0; j < modes; ++j) est *= cutoff;
  if (!total_cap && est > static_cast<double>(dimension_limit)) {
    throw ResourceCapError("FockSpace dimension " + std::to_string(est) +
                           " exceeds cap " + std::to_string(dimension_limit));
  }
  std::vector<int> occ(modes, 0);
  enumerate_basis(modes, cutoff, total_cap, occ, 0, basis_);
  if (static_cast<long>(basis_.size()) > dimension_limit) {
    throw ResourceCapError("FockSpace dimension " + std::to_string(basis_.size()) +
                           " exceeds cap " + std::to_string(dimension_limit));
  }

  mode_a_ = Matrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) mode_a_(n - 1, n) = std::sqrt(double(n));

  // generator of radial displacement, −i(a†−a)
  Matrix k = -kImag * (mode_a_.adjoint() - mode_a_);
  Eigen::SelfAdjointEigenSolver<Matrix> es(k);
  disp_w_ = es.eigenvalues();
  disp_v_ = es.eigenvectors();
}

Eigen::Index FockSpace::index_of(const std::vector<int>& occ) const {
  if (static_cast<int>(occ.size()) != modes_) return -1;
  for (int n : occ) {
    if (n < 0 || n >= cutoff_) return -1;
  }
  if (!total_cap_) {
    Eigen::Index idx = 0;
    for (int j = 0; j < modes_; ++j) idx = idx * cutoff_ + occ[j];
    return idx;
  }
  auto it = std::lower_bound(basis_.begin(), basis_.end(), occ);
  if (it == basis_.end() || *it != occ) return -1;
  return static_cast<Eigen::Index>(it - basis_.begin());
}

void FockSpace::check_mode(int mode) const {
  if (mode < 0 || mode >= modes_) {
    throw ValidationError("mode index " + std::to_string(mode) + " out of range");
  }
}

Matrix FockSpace::lower(int mode) const {
  check_mode(mode);
  const Eigen::Index n = dim();
  Matrix a = Matrix::Zero(n, n);
  std::vector<int> occ;
  for (Eigen::Index col = 0; col < n; ++col) {
    occ = basis_[col];
    if (occ[mode] == 0) continue;
    occ[mode] -= 1;
    const Eigen::Index row = index_of(occ);
    a(row, col) = std::sqrt(double(basis_[col][mode]));
  }
  return a;
}

Matrix FockSpace::raise(int mode) const { return lower(mode).adjoint(); }

OperatorMatrix FockSpace::identity() const {
  OperatorMatrix out;
  out.mat = Matrix::Identity(dim(), dim());
  out.hermitian = out.unitary = out.projector = true;
  return out;
}

OperatorMatrix FockSpace::position(int mode) const {
  const Matrix a = lower(mode);
  OperatorMatrix out;
  out.mat = (a + a.adjoint()) / std::sqrt(2.0);
  out.hermitian = true;
  return out;
}

OperatorMatrix FockSpace::momentum(int mode) const {
  const Matrix a = lower(mode);
  OperatorMatrix out;
  out.mat = (a - a.adjoint()) / (kImag * std::sqrt(2.0));
  out.hermitian = true;
  return out;
}

OperatorMatrix FockSpace::number(int mode) const {
  const Matrix a = lower(mode);
  OperatorMatrix out;
  out.mat = a.adjoint() * a;
  out.hermitian = true;
  return out;
}

OperatorMatrix FockSpace::total_number() const {
  Matrix sum = Matrix::Zero(dim(), dim());
  for (int j = 0; j < modes_; ++j) sum += number(j).mat;
  OperatorMatrix out;
  out.mat = std::move(sum);
  out.hermitian = true;
  return out;
}

std::pair<OperatorMatrix, OperatorMatrix> build_ladder(const FockSpace& space, int mode) {
  OperatorMatrix a;
  a.mat = space.lower(mode);
  OperatorMatrix ad;
  ad.mat = a.mat.adjoint();
  return {a, ad};
}

std::pair<OperatorMatrix, OperatorMatrix> canonical_ops(const FockSpace& space, int mode) {
  return {space.momentum(mode), space.position(mode)};
}

OperatorMatrix angular_momentum(const FockSpace& space, int axis) {
  if (space.modes() != 3) {
    throw ValidationError("angular_momentum requires a three-mode space");
  }
  if (axis < 0 || axis > 2) throw ValidationError("angular momentum axis out of range");
  const int k = (axis + 1) % 3;
  const int l = (axis + 2) % 3;
  const Matrix ak = space.lower(k);
  const Matrix al = space.lower(l);
  // J_axis = −i (a_k† a_l − a_l† a_k)
  OperatorMatrix out;
  out.mat = -kImag * (ak.adjoint() * al - al.adjoint() * ak);
  out.hermitian = true;
  return out;
}

OperatorMatrix tensor(const FockSpace& space,
                      const std::vector<std::pair<int, OperatorMatrix>>& placed) {
  const int d = space.cutoff();
  std::vector<const Matrix*> factor(space.modes(), nullptr);
  bool all_hermitian = true;
  for (const auto& [mode, op] : placed) {
    if (mode < 0 || mode >= space.modes()) {
      throw ValidationError("tensor: mode index out of range");
    }
    if (factor[mode] != nullptr) throw ValidationError("tensor: duplicate mode");
    if (op.mat.rows() != d || op.mat.cols() != d) {
      throw ValidationError("tensor: operand dimension does not match per-mode cutoff");
    }
    factor[mode] = &op.mat;
    all_hermitian = all_hermitian && op.hermitian;
  }
  const Eigen::Index n = space.dim();
  const auto& basis = space.occupations();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index row = 0; row < n; ++row) {
    for (Eigen::Index col = 0; col < n; ++col) {
      Complex prod(1.0, 0.0);
      for (int j = 0; j < space.modes() && prod != Complex(0.0, 0.0); ++j) {
        if (factor[j]) {
          prod *= (*factor[j])(basis[row][j], basis[col][j]);
        } else if (basis[row][j] != basis[col][j]) {
          prod = 0.0;
        }
      }
      out(row, col) = prod;
    }
  }
  OperatorMatrix result;
  result.mat = std::move(out);
  result.hermitian = all_hermitian;
  return result;
}

OperatorMatrix expm(const OperatorMatrix& m, Complex scale) {
  if (!m.mat.allFinite()) throw ValidationError("expm: non-finite input");
  OperatorMatrix out;
  if (m.hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat);
    const RealVector& w = es.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::exp(scale * w(i));
    out.mat = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    out.unitary = std::abs(scale.real()) < 1e-15;
    out.hermitian = std::abs(scale.imag()) < 1e-15;
  } else {
    out.mat = Matrix(scale * m.mat).exp();
  }
  return out;
}

EigResult eig_hermitian(const OperatorMatrix& m) {
  if (!m.hermitian) throw ValidationError("eig_hermitian: operator not flagged hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat);
  EigResult res;
  res.values = es.eigenvalues();
  res.vectors = es.eigenvectors();
  // phase convention: first component of largest magnitude made real positive
  for (Eigen::Index k = 0; k < res.vectors.cols(); ++k) {
    Eigen::Index best = 0;
    double best_mag = 0.0;
    for (Eigen::Index i = 0; i < res.vectors.rows(); ++i) {
      const double mag = std::abs(res.vectors(i, k));
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (best_mag > 0) {
      const Complex phase = std::conj(res.vectors(best, k)) / best_mag;
      res.vectors.col(k) *= phase;
    }
  }
  return res;
}

Vector apply_mode(const FockSpace& space, int mode, const Matrix& op, const Vector& v) {
  if (space.total_cap()) {
    throw ValidationError("apply_mode: unrestricted spaces only");
  }
  const int d = space.cutoff();
  if (op.rows() != d || op.cols() != d) {
    throw ValidationError("apply_mode: operand dimension mismatch");
  }
  Eigen::Index outer_stride = 1;
  for (int j = mode + 1; j < space.modes(); ++j) outer_stride *= d;
  const Eigen::Index block = outer_stride * d;
  Vector out = Vector::Zero(v.size());
  for (Eigen::Index base = 0; base < v.size(); base += block) {
    for (Eigen::Index inner = 0; inner < outer_stride; ++inner) {
      for (int r = 0; r < d; ++r) {
        Complex acc(0.0, 0.0);
        for (int c = 0; c < d; ++c) {
          acc += op(r, c) * v(base + inner + c * outer_stride);
        }
        out(base + inner + r * outer_stride) = acc;
      }
    }
  }
  return out;
}

}  // namespace rkck
