#include "rkck/oracles.hpp"

#include <cmath>

namespace rkck::oracle {

OracleSpec example_spec(int example) {
  switch (example) {
    case 1: return {1, 1, 1, 0.0};
    case 2: return {2, 1, 2, 0.5};
    case 3: return {3, 1, 1, 1.5};
    case 4: return {4, 3, 3, 1.5};
    default: throw ValidationError("example id must be 1..4");
  }
}

namespace {

void check_arity(int example, const CoherentLabel& l) {
  const int expect = example == 4 ? 3 : 1;
  if (l.modes() != expect) {
    throw ValidationError("example " + std::to_string(example) + " expects " +
                          std::to_string(expect) + "-component labels");
  }
}

Complex bilinear_square(const Vector& z) {
  Complex s(0.0, 0.0);
  for (Eigen::Index j = 0; j < z.size(); ++j) s += z(j) * z(j);
  return s;
}

}  // namespace

Complex example_kernel(int example, const CoherentLabel& bra, const CoherentLabel& ket,
                       double T) {
  check_arity(example, bra);
  check_arity(example, ket);
  const Vector zb = bra.z();
  const Vector zk = ket.z();
  const double gauss = -0.5 * (zb.squaredNorm() + zk.squaredNorm());
  switch (example) {
    case 1:
    case 2:
      return std::exp(Complex(gauss, 0.0));
    case 3:
      return std::exp(Complex(gauss + 1.0, 0.0)) * std::conj(zb(0)) * zk(0);
    case 4: {
      const Complex a2 = bilinear_square(zb.conjugate()) * bilinear_square(zk);
      Complex sum(0.0, 0.0);
      Complex term(1.0, 0.0);
      for (int m = 0; m < 64; ++m) {
        if (m > 0) term *= a2 / (2.0 * m * (2.0 * m + 1.0));
        sum += term * std::exp(-kImag * (2.0 * m * T));
        if (std::abs(term) < 1e-16 && m >= 1) break;
      }
      return std::exp(Complex(gauss, 0.0)) * sum;
    }
    default:
      throw ValidationError("example id must be 1..4");
  }
}

ExampleSystem build_example_system(int example, int cutoff) {
  switch (example) {
    case 1: {
      FockSpace space(1, cutoff);
      FiducialVector fid = ground_fiducial(space);
      auto proj = build_projector(space, second_class_pq(space, 1.0));
      OperatorMatrix h;
      h.mat = Matrix::Zero(space.dim(), space.dim());
      h.hermitian = true;
      auto bundle = select_fiducial_and_shift(space, proj, h, ConstraintBranch::commuting);
      return {std::move(space), std::move(fid), std::move(proj), std::move(h),
              std::move(bundle), 1.0};
    }
    case 2:
    case 3: {
      FockSpace space(1, cutoff);
      FiducialVector fid = ground_fiducial(space);
      auto proj = example == 2
                      ? build_projector(space, second_class_pq(space, 1.0))
                      : build_projector(space, number_shell(space, 1, 0.1));
      const Matrix p = space.momentum(0).mat;
      const Matrix q = space.position(0).mat;
      OperatorMatrix h;
      h.mat = 0.5 * (p * p + q * q);
      h.hermitian = true;
      auto bundle = select_fiducial_and_shift(space, proj, h, ConstraintBranch::commuting);
      ExampleSystem sys{std::move(space), std::move(fid), std::move(proj),
                        std::move(h), std::move(bundle), 1.0};
      if (example == 3) {
        // sector point z = √i, i.e. (p, q) = (1, 1)
        CoherentLabel sector;
        sector.p = RealVector::Constant(1, 1.0);
        sector.q = RealVector::Constant(1, 1.0);
        const Vector eta = coherent_state(sys.space, sys.fiducial, sector);
        sys.sbar = (sys.projector.range_basis.adjoint() * eta).squaredNorm();
      }
      return sys;
    }
    case 4: {
      FockSpace space(3, cutoff, cutoff - 1);
      FiducialVector fid = ground_fiducial(space);
      auto proj = build_projector(space, angular_momentum_zero(space, 0.1));
      Matrix sum = Matrix::Zero(space.dim(), space.dim());
      for (int j = 0; j < 3; ++j) {
        const Matrix p = space.momentum(j).mat;
        const Matrix q = space.position(j).mat;
        sum += 0.5 * (p * p + q * q);
      }
      OperatorMatrix h;
      h.mat = std::move(sum);
      h.hermitian = true;
      auto bundle = select_fiducial_and_shift(space, proj, h, ConstraintBranch::commuting);
      return {std::move(space), std::move(fid), std::move(proj), std::move(h),
              std::move(bundle), 1.0};
    }
    default:
      throw ValidationError("example id must be 1..4");
  }
}

DeviationReport oracle_vs_engine(int example, const std::vector<LabelPair>& grid,
                                 const std::vector<double>& times, int cutoff) {
  ExampleSystem sys = build_example_system(example, cutoff);
  DeviationReport report;
  for (double T : times) {
    const OperatorMatrix x = constrained_propagator(sys.space, sys.projector, sys.bundle.hbar,
                                                    T, ConstraintBranch::commuting);
    for (const auto& pair : grid) {
      const Complex engine =
          coherent_matrix_element(sys.space, sys.fiducial, x, pair.bra, pair.ket) / sys.sbar;
      const Complex closed = example_kernel(example, pair.bra, pair.ket, T);
      report.max_abs_dev = std::max(report.max_abs_dev, std::abs(engine - closed));
      ++report.comparisons;
    }
  }
  return report;
}

Vector invariant_state(const FockSpace& space, int m) {
  if (space.modes() != 3) throw ValidationError("invariant_state needs a three-mode space");
  Matrix creator = Matrix::Zero(space.dim(), space.dim());
  for (int j = 0; j < 3; ++j) {
    const Matrix ad = space.raise(j);
    creator += ad * ad;
  }
  Vector v = Vector::Zero(space.dim());
  v(space.index_of(std::vector<int>(3, 0))) = 1.0;
  for (int k = 0; k < m; ++k) v = creator * v;
  const double norm = v.norm();
  if (norm == 0) throw ValidationError("invariant_state: truncated away");
  return v / norm;
}

}  // namespace rkck::oracle
