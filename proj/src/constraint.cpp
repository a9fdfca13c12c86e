#include "rkck/constraint.hpp"

#include <algorithm>
#include <cmath>

#include "rkck/quadrature.hpp"

namespace rkck {

ConstraintSet second_class_pq(const FockSpace& space, double delta_squared) {
  ConstraintSet cs;
  cs.kind = ConstraintKind::second_class;
  cs.delta_squared = delta_squared;
  for (int j = 0; j < space.modes(); ++j) {
    cs.ops.push_back(space.momentum(j));
    cs.ops.push_back(space.position(j));
  }
  return cs;
}

ConstraintSet angular_momentum_zero(const FockSpace& space, double delta_squared) {
  ConstraintSet cs;
  cs.kind = ConstraintKind::discrete_spectrum;
  cs.delta_squared = delta_squared;
  for (int axis = 0; axis < 3; ++axis) cs.ops.push_back(angular_momentum(space, axis));
  return cs;
}

ConstraintSet number_shell(const FockSpace& space, int excitation, double delta_squared) {
  if (space.modes() != 1) throw ValidationError("number_shell: single-mode spaces only");
  if (excitation < 0 || excitation >= space.cutoff()) {
    throw ValidationError("number_shell: excitation outside the truncated spectrum");
  }
  const Matrix p = space.momentum(0).mat;
  const Matrix q = space.position(0).mat;
  OperatorMatrix phi;
  phi.mat = p * p + q * q -
            (2.0 * excitation + 1.0) * Matrix::Identity(space.dim(), space.dim());
  phi.hermitian = true;
  ConstraintSet cs;
  cs.kind = ConstraintKind::discrete_spectrum;
  cs.delta_squared = delta_squared;
  cs.ops.push_back(std::move(phi));
  return cs;
}

ConstraintProjector build_projector(const FockSpace& space, const ConstraintSet& constraints) {
  if (constraints.ops.empty()) throw ValidationError("constraint set is empty");
  if (constraints.delta_squared <= 0) {
    throw ValidationError("delta_squared must be positive");
  }
  const Eigen::Index n = space.dim();
  Matrix sum = Matrix::Zero(n, n);
  for (const auto& phi : constraints.ops) {
    if (!phi.hermitian) throw ValidationError("constraint operator not hermitian-flagged");
    if (phi.dim() != n) throw ValidationError("constraint operator dimension mismatch");
    sum.noalias() += phi.mat * phi.mat;
  }
  OperatorMatrix squares;
  squares.mat = std::move(sum);
  squares.hermitian = true;
  const EigResult eig = eig_hermitian(squares);
  if (eig.values(0) < -1e-10) {
    throw ValidationError("sum of squared constraints is not positive semidefinite");
  }

  const double d2 = constraints.delta_squared;
  const double exact_band = 1e-12 * std::max(1.0, std::abs(d2));
  const double ambiguity_band = 1e-9 * std::max(1.0, std::abs(d2));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double gap = std::abs(eig.values(k) - d2);
    if (gap > exact_band && gap <= ambiguity_band) {
      throw AmbiguityError(
          "delta_squared sits within 1e-9 of a constraint eigenvalue (" +
          std::to_string(eig.values(k)) + "); choose a different delta_squared");
    }
  }

  ConstraintProjector proj;
  proj.delta_squared = d2;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (eig.values(k) <= d2 + exact_band) keep.push_back(k);
  }
  proj.rank = static_cast<int>(keep.size());
  proj.range_basis.resize(n, proj.rank);
  proj.retained.reserve(keep.size());
  for (int i = 0; i < proj.rank; ++i) {
    proj.range_basis.col(i) = eig.vectors.col(keep[i]);
    proj.retained.push_back(eig.values(keep[i]));
  }
  proj.projector.mat = proj.range_basis * proj.range_basis.adjoint();
  proj.projector.hermitian = true;
  proj.projector.projector = true;
  return proj;
}

Complex constrained_kernel(const FockSpace& space, const FiducialVector& fiducial,
                           const ConstraintProjector& proj,
                           const CoherentLabel& bra, const CoherentLabel& ket) {
  if (proj.projector.dim() != space.dim()) {
    throw ValidationError("projector built on a different space");
  }
  if (proj.rank == 0) return Complex(0.0, 0.0);
  const Vector vb = proj.range_basis.adjoint() * coherent_state(space, fiducial, bra);
  const Vector vk = proj.range_basis.adjoint() * coherent_state(space, fiducial, ket);
  return vb.dot(vk);
}

Matrix kernel_gram(const FockSpace& space, const FiducialVector& fiducial,
                   const ConstraintProjector* proj,
                   const std::vector<CoherentLabel>& labels) {
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  std::vector<Vector> reduced;
  reduced.reserve(labels.size());
  for (const auto& label : labels) {
    Vector state = coherent_state(space, fiducial, label);
    if (proj) state = proj->range_basis.adjoint() * state;
    reduced.push_back(std::move(state));
  }
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = reduced[i].dot(reduced[j]);
  }
  return gram;
}

int kernel_rank(const Matrix& gram, double rel_tol, double psd_rel_tol) {
  OperatorMatrix g;
  g.mat = (gram + gram.adjoint()) / 2.0;
  g.hermitian = true;
  const EigResult eig = eig_hermitian(g);
  const double top = eig.values(eig.values.size() - 1);
  if (top <= 0) return 0;
  if (eig.values(0) < -psd_rel_tol * top) {
    throw AmbiguityError("kernel Gram matrix is not PSD within tolerance");
  }
  int rank = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) > rel_tol * top) ++rank;
  }
  return rank;
}

namespace {

double projector_diagonal(const FockSpace& space, const FiducialVector& fiducial,
                          const ConstraintProjector& proj, const CoherentLabel& label) {
  const Vector v = proj.range_basis.adjoint() * coherent_state(space, fiducial, label);
  return v.squaredNorm();
}

}  // namespace

WEstimate estimate_W(const FockSpace& space, const FiducialVector& fiducial,
                     const ConstraintProjector& proj, const WSearchSpec& spec) {
  if (proj.rank == 0) {
    throw ValidationError("estimate_W: E = 0, W undefined (zero physical space)");
  }
  if (spec.nodes_per_axis < 2 || spec.refine_nodes < 2 || spec.hi <= spec.lo) {
    throw ValidationError("estimate_W: bad search grid");
  }
  const int axes = 2 * space.modes();
  if (std::pow(double(spec.nodes_per_axis), axes) > 5e7) {
    throw ValidationError("estimate_W: search grid too large");
  }
  const double guard = space.cutoff() / 4.0;

  auto scan = [&](const RealVector& lo, double step, int count, CoherentLabel& best_label,
                  double& best_value) {
    std::vector<int> digit(axes, 0);
    CoherentLabel label = CoherentLabel::zero(space.modes());
    while (true) {
      for (int j = 0; j < space.modes(); ++j) {
        label.p(j) = lo(2 * j) + step * digit[2 * j];
        label.q(j) = lo(2 * j + 1) + step * digit[2 * j + 1];
      }
      if (label.z_norm_sq() <= guard) {
        const double val = projector_diagonal(space, fiducial, proj, label);
        if (val > best_value) {
          best_value = val;
          best_label = label;
        }
      }
      int ax = axes - 1;
      while (ax >= 0 && ++digit[ax] == count) digit[ax--] = 0;
      if (ax < 0) break;
    }
  };

  CoherentLabel best = CoherentLabel::zero(space.modes());
  double best_value = -1.0;
  const double step = (spec.hi - spec.lo) / (spec.nodes_per_axis - 1);
  RealVector lo = RealVector::Constant(axes, spec.lo);
  scan(lo, step, spec.nodes_per_axis, best, best_value);
  if (best_value < 0) throw ValidationError("estimate_W: no grid node inside the truncation guard");

  // one refinement pass around the best coarse node
  RealVector lo2(axes);
  for (int j = 0; j < space.modes(); ++j) {
    lo2(2 * j) = best.p(j) - step;
    lo2(2 * j + 1) = best.q(j) - step;
  }
  const double step2 = 2.0 * step / (spec.refine_nodes - 1);
  scan(lo2, step2, spec.refine_nodes, best, best_value);

  WEstimate est;
  est.value = best_value;
  est.argmax = best;

  // Schwarz chain spot check on a deterministic subsample of coarse nodes
  std::vector<CoherentLabel> sample;
  const int stride = std::max(1, spec.nodes_per_axis / 4);
  for (int i = 0; i < spec.nodes_per_axis; i += stride) {
    for (int j = 0; j < spec.nodes_per_axis; j += stride) {
      CoherentLabel l = CoherentLabel::zero(space.modes());
      l.p(0) = spec.lo + step * i;
      l.q(0) = spec.lo + step * j;
      if (l.z_norm_sq() <= guard) sample.push_back(l);
      if (sample.size() >= 12) break;
    }
    if (sample.size() >= 12) break;
  }
  for (size_t i = 0; i < sample.size() && est.schwarz_ok; ++i) {
    for (size_t j = i + 1; j < sample.size(); ++j) {
      const Complex k = constrained_kernel(space, fiducial, proj, sample[i], sample[j]);
      const double di = projector_diagonal(space, fiducial, proj, sample[i]);
      const double dj = projector_diagonal(space, fiducial, proj, sample[j]);
      if (std::norm(k) > di * dj + 1e-12 || di > est.value + 1e-9 || dj > est.value + 1e-9) {
        est.schwarz_ok = false;
        break;
      }
    }
  }
  return est;
}

namespace {

void validate_ladder(const std::vector<double>& ladder) {
  if (ladder.size() < 4) throw ValidationError("delta ladder needs at least 4 rungs");
  for (size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] <= 0) throw ValidationError("delta ladder entries must be positive");
    if (i > 0 && ladder[i] >= ladder[i - 1]) {
      throw ValidationError("delta ladder must be strictly decreasing");
    }
  }
}

ReducedPoint fit_point(const std::vector<Complex>& values, const std::vector<double>& ladder) {
  ReducedPoint pt;
  pt.values = values;
  const size_t m = values.size();
  const Complex last = values.back();

  double spread = 0.0;
  for (const Complex& v : values) spread = std::max(spread, std::abs(v - last));
  if (spread <= 1e-12 * (1.0 + std::abs(last))) {
    pt.limit = last;
    pt.rho = 0.0;
    pt.residual = spread;
    pt.converged = true;
    return pt;
  }

  std::vector<Complex> diffs(m - 1);
  for (size_t i = 0; i + 1 < m; ++i) diffs[i] = values[i] - values[i + 1];
  bool degenerate = false;
  for (const Complex& d : diffs) degenerate = degenerate || std::abs(d) < 1e-300;
  if (degenerate) {
    pt.limit = last;
    pt.rho = 0.0;
    pt.residual = spread;
    pt.converged = spread <= 1e-4;
    return pt;
  }

  // log-log least squares for the order: |v(δ_i) − v(δ_{i+1})| ≈ c δ_i^ρ
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(diffs.size());
  for (size_t i = 0; i < diffs.size(); ++i) {
    const double x = std::log(ladder[i]);
    const double y = std::log(std::abs(diffs[i]));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  const double rho = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
  pt.rho = rho;
  if (!std::isfinite(rho) || rho <= 0) {
    pt.limit = last;
    pt.residual = std::abs(diffs.back());
    pt.converged = false;
    return pt;
  }

  auto richardson = [&](size_t hi) {
    // extrapolate from the pair (values[hi-1], values[hi])
    const double r = std::pow(ladder[hi - 1] / ladder[hi], rho);
    return (r * values[hi] - values[hi - 1]) / (r - 1.0);
  };
  pt.limit = richardson(m - 1);
  pt.residual = std::abs(pt.limit - richardson(m - 2));
  pt.converged = pt.residual <= 1e-4;
  return pt;
}

void finalize(ReducedKernel& out) {
  std::vector<double> rhos;
  bool all_flat = !out.points.empty();
  for (const auto& pt : out.points) {
    if (pt.rho > 0) rhos.push_back(pt.rho);
    all_flat = all_flat && pt.rho == 0.0 && pt.converged;
  }
  out.delta_independent = all_flat;
  if (!rhos.empty()) {
    std::sort(rhos.begin(), rhos.end());
    out.typical_rho = rhos[rhos.size() / 2];
  }
}

}  // namespace

ReducedKernel reduce_kernel_delta_limit(const FockSpace& space,
                                        const FiducialVector& fiducial,
                                        const ConstraintFamily& family,
                                        const std::vector<LabelPair>& grid,
                                        const std::vector<double>& ladder,
                                        RescaleFamily rescale) {
  validate_ladder(ladder);
  if (grid.empty()) throw ValidationError("reduction grid is empty");
  if (rescale == RescaleFamily::half_width) {
    throw ValidationError(
        "half-width rescaling requires a continuous-zero window constraint; "
        "use the LinearWindowConstraint overload");
  }

  std::vector<ConstraintProjector> projectors;
  std::vector<double> scales;
  int first_rank = -1;
  for (double delta : ladder) {
    ConstraintProjector proj = build_projector(space, family(delta));
    if (proj.rank == 0) {
      throw AmbiguityError("kernel vanishes at delta=" + std::to_string(delta) +
                           "; rescale required");
    }
    if (first_rank < 0) first_rank = proj.rank;
    if (proj.rank != first_rank && rescale == RescaleFamily::none) {
      throw AmbiguityError("projector rank not stable along the ladder; declare a rescale family");
    }
    double scale = 1.0;
    if (rescale == RescaleFamily::w_sup) {
      scale = estimate_W(space, fiducial, proj, WSearchSpec{}).value;
    }
    projectors.push_back(std::move(proj));
    scales.push_back(scale);
  }

  ReducedKernel out;
  out.grid = grid;
  out.ladder = ladder;
  out.rescale = rescale;
  for (const auto& pair : grid) {
    std::vector<Complex> values;
    values.reserve(ladder.size());
    for (size_t r = 0; r < ladder.size(); ++r) {
      values.push_back(constrained_kernel(space, fiducial, projectors[r], pair.bra, pair.ket) /
                       scales[r]);
    }
    out.points.push_back(fit_point(values, ladder));
  }
  finalize(out);
  return out;
}

namespace {

// Contracts ⟨u| against one mode of a full-space vector: the remaining-modes
// coefficient vector of the generalized momentum eigenfunction overlap.
Vector mode_momentum_contraction(const FockSpace& space, int mode, const Vector& coeff,
                                 const Vector& state) {
  const int d = space.cutoff();
  Eigen::Index outer = 1;
  for (int j = mode + 1; j < space.modes(); ++j) outer *= d;
  const Eigen::Index rest = state.size() / d;
  Vector out = Vector::Zero(rest);
  const Eigen::Index block = outer * d;
  Eigen::Index slot = 0;
  for (Eigen::Index base = 0; base < state.size(); base += block) {
    for (Eigen::Index inner = 0; inner < outer; ++inner, ++slot) {
      Complex acc(0.0, 0.0);
      for (int n = 0; n < d; ++n) acc += coeff(n) * state(base + inner + n * outer);
      out(slot) = acc;
    }
  }
  return out;
}

}  // namespace

ReducedKernel reduce_kernel_delta_limit(const FockSpace& space,
                                        const FiducialVector& fiducial,
                                        const LinearWindowConstraint& window,
                                        const std::vector<LabelPair>& grid,
                                        const std::vector<double>& ladder) {
  validate_ladder(ladder);
  if (grid.empty()) throw ValidationError("reduction grid is empty");
  if (space.total_cap()) {
    throw ValidationError("window reduction supports unrestricted spaces only");
  }
  if (window.mode < 0 || window.mode >= space.modes()) {
    throw ValidationError("window constraint mode out of range");
  }
  const double rho_coef = std::hypot(window.coef_p, window.coef_q);
  if (rho_coef <= 0) throw ValidationError("window constraint has zero coefficients");
  const double phi = std::atan2(window.coef_q, window.coef_p);

  const int d = space.cutoff();
  std::vector<std::pair<Vector, Vector>> states;
  states.reserve(grid.size());
  for (const auto& pair : grid) {
    states.emplace_back(coherent_state(space, fiducial, pair.bra),
                        coherent_state(space, fiducial, pair.ket));
  }

  const quad::Rule base = quad::gauss_legendre(32);
  std::vector<std::vector<Complex>> values(grid.size(),
                                           std::vector<Complex>(ladder.size()));
  for (size_t r = 0; r < ladder.size(); ++r) {
    const double delta = ladder[r];
    const double lo = (-delta - window.shift) / rho_coef;
    const double hi = (delta - window.shift) / rho_coef;
    std::vector<Complex> acc(grid.size(), Complex(0.0, 0.0));
    for (Eigen::Index g = 0; g < base.nodes.size(); ++g) {
      const double u = 0.5 * (hi + lo) + 0.5 * (hi - lo) * base.nodes(g);
      const double wgt = 0.5 * (hi - lo) * base.weights(g);
      const RealVector psi = quad::hermite_functions(u, d);
      Vector coeff(d);
      Complex phase(1.0, 0.0);
      const Complex step = std::exp(kImag * phi) * Complex(0.0, -1.0);  // e^{iφ}·(−i)
      for (int n = 0; n < d; ++n) {
        coeff(n) = phase * psi(n);
        phase *= step;
      }
      for (size_t p = 0; p < grid.size(); ++p) {
        const Vector tb = mode_momentum_contraction(space, window.mode, coeff, states[p].first);
        const Vector tk = mode_momentum_contraction(space, window.mode, coeff, states[p].second);
        acc[p] += wgt * tb.dot(tk);
      }
    }
    for (size_t p = 0; p < grid.size(); ++p) values[p][r] = acc[p] / (2.0 * delta);
  }

  ReducedKernel out;
  out.grid = grid;
  out.ladder = ladder;
  out.rescale = RescaleFamily::half_width;
  for (size_t p = 0; p < grid.size(); ++p) out.points.push_back(fit_point(values[p], ladder));
  finalize(out);
  return out;
}

}  // namespace rkck
