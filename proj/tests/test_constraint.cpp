#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rkck/constraint.hpp"
#include "support.hpp"

using namespace rkck;

namespace {

CoherentLabel zlabel(Complex z) {
  Vector v(1);
  v(0) = z;
  return CoherentLabel::from_z(v);
}

}  // namespace

TEST_CASE("second-class P,Q at delta^2 = 1 projects onto the ground state") {
  FockSpace space(1, 40);
  const ConstraintProjector proj = build_projector(space, second_class_pq(space, 1.0));
  CHECK(proj.rank == 1);
  Matrix expect = Matrix::Zero(40, 40);
  expect(0, 0) = 1.0;
  CHECK((proj.projector.mat - expect).norm() < 1e-12);
  CHECK((proj.projector.mat * proj.projector.mat - proj.projector.mat).norm() < 1e-10);
  CHECK((proj.projector.mat - proj.projector.mat.adjoint()).norm() < 1e-12);
  CHECK(std::abs(proj.projector.mat.trace().real() - proj.rank) < 1e-8);
}

TEST_CASE("angular momentum constraint at delta^2 = 1/10 keeps the invariant subspace") {
  FockSpace space(3, 6, 5);
  const ConstraintProjector proj = build_projector(space, angular_momentum_zero(space, 0.1));
  CHECK(proj.rank == 3);  // invariant states with total number 0, 2, 4
  for (double lam : proj.retained) CHECK(std::abs(lam) < 1e-10);
}

TEST_CASE("oscillator shell constraint picks the first excited state") {
  FockSpace space(1, 40);
  const ConstraintProjector proj = build_projector(space, number_shell(space, 1, 0.1));
  CHECK(proj.rank == 1);
  Vector e1 = Vector::Zero(40);
  e1(1) = 1.0;
  CHECK(std::abs(std::abs(proj.range_basis.col(0).dot(e1)) - 1.0) < 1e-10);
}

TEST_CASE("delta^2 in the ambiguity band is refused") {
  FockSpace space(1, 40);
  CHECK_THROWS_AS(build_projector(space, second_class_pq(space, 3.0 + 5e-10)), AmbiguityError);
  // exact boundary is inclusive
  const ConstraintProjector proj = build_projector(space, second_class_pq(space, 3.0));
  CHECK(proj.rank == 2);
}

TEST_CASE("rank monotonicity in delta^2") {
  FockSpace space(1, 30);
  int prev = 1 << 20;
  for (double d2 : {7.5, 5.5, 3.5, 1.5, 0.5}) {
    const ConstraintProjector proj = build_projector(space, second_class_pq(space, d2));
    CHECK(proj.rank <= prev);
    prev = proj.rank;
  }
}

TEST_CASE("constrained kernel closed forms") {
  FockSpace space(1, 40);
  const FiducialVector fid = ground_fiducial(space);
  const ConstraintProjector ground = build_projector(space, second_class_pq(space, 1.0));
  const ConstraintProjector first = build_projector(space, number_shell(space, 1, 0.1));

  test::Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const CoherentLabel a = rng.label(1, 2.0);
    const CoherentLabel b = rng.label(1, 2.0);
    const Complex za = a.z()(0), zb = b.z()(0);
    const double gauss = -0.5 * (std::norm(za) + std::norm(zb));

    const Complex k0 = constrained_kernel(space, fid, ground, a, b);
    CHECK(std::abs(k0 - std::exp(gauss)) < 1e-8);

    const Complex k1 = constrained_kernel(space, fid, first, a, b);
    CHECK(std::abs(k1 - std::exp(gauss) * std::conj(za) * zb) < 1e-8);
  }
}

TEST_CASE("unconstrained limit reduces to the plain overlap") {
  FockSpace space(1, 30);
  const FiducialVector fid = ground_fiducial(space);
  // E = 1 via a constraint that retains everything
  OperatorMatrix zero;
  zero.mat = Matrix::Zero(30, 30);
  zero.hermitian = true;
  ConstraintSet cs;
  cs.ops.push_back(zero);
  cs.delta_squared = 0.5;
  const ConstraintProjector full = build_projector(space, cs);
  CHECK(full.rank == 30);
  test::Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const CoherentLabel a = rng.label(1, 1.5);
    const CoherentLabel b = rng.label(1, 1.5);
    CHECK(std::abs(constrained_kernel(space, fid, full, a, b) - overlap(space, fid, a, b)) <
          1e-10);
  }
}

TEST_CASE("kernel Gram matrices are PSD and rank counts match") {
  FockSpace space(1, 40);
  const FiducialVector fid = ground_fiducial(space);
  const ConstraintProjector ground = build_projector(space, second_class_pq(space, 1.0));

  test::Rng rng(8);
  std::vector<CoherentLabel> labels;
  for (int i = 0; i < 6; ++i) labels.push_back(rng.label(1, 1.5));

  const Matrix constrained = kernel_gram(space, fid, &ground, labels);
  CHECK(kernel_rank(constrained) == 1);

  const Matrix unconstrained = kernel_gram(space, fid, nullptr, labels);
  CHECK(kernel_rank(unconstrained) == 6);

  CHECK(kernel_rank(kernel_gram(space, fid, nullptr, {labels[0]})) == 1);
}

TEST_CASE("W estimates") {
  FockSpace space(1, 40);
  const FiducialVector fid = ground_fiducial(space);

  const ConstraintProjector ground = build_projector(space, second_class_pq(space, 1.0));
  WSearchSpec spec;
  const WEstimate w0 = estimate_W(space, fid, ground, spec);
  CHECK(std::abs(w0.value - 1.0) < 1e-6);
  CHECK(w0.schwarz_ok);

  const ConstraintProjector first = build_projector(space, number_shell(space, 1, 0.1));
  const WEstimate w1 = estimate_W(space, fid, first, spec);
  CHECK(std::abs(w1.value - std::exp(-1.0)) < 1e-4);
  CHECK(std::abs(w1.argmax.z_norm_sq() - 1.0) < 1e-2);

  OperatorMatrix zero;
  zero.mat = Matrix::Zero(40, 40);
  zero.hermitian = true;
  ConstraintSet cs;
  cs.ops.push_back(zero);
  cs.delta_squared = 0.5;
  const ConstraintProjector full = build_projector(space, cs);
  const WEstimate wfull = estimate_W(space, fid, full, spec);
  CHECK(std::abs(wfull.value - 1.0) < 1e-12);

  // E = 0 is undefined
  ConstraintSet never = number_shell(space, 1, 0.1);
  never.ops[0].mat += 100.0 * Matrix::Identity(40, 40);
  const ConstraintProjector none = build_projector(space, never);
  CHECK(none.rank == 0);
  CHECK_THROWS_AS(estimate_W(space, fid, none, spec), ValidationError);
}

TEST_CASE("delta reduction: rank-stable family is flagged delta-independent") {
  FockSpace space(1, 40);
  const FiducialVector fid = ground_fiducial(space);
  ConstraintFamily family = [&](double delta) {
    return second_class_pq(space, delta * delta);
  };
  // delta^2 ranges over (1, 3): rank stays 1
  const std::vector<double> ladder{1.69, 1.55, 1.45, 1.40};
  std::vector<LabelPair> grid;
  test::Rng rng(31);
  for (int i = 0; i < 3; ++i) grid.push_back({rng.label(1, 1.0), rng.label(1, 1.0)});
  const ReducedKernel red =
      reduce_kernel_delta_limit(space, fid, family, grid, ladder, RescaleFamily::none);
  CHECK(red.delta_independent);
  for (const auto& pt : red.points) {
    CHECK(pt.converged);
    CHECK(pt.rho == 0.0);
    CHECK(std::abs(pt.limit - pt.values.back()) == 0.0);
  }
}

TEST_CASE("delta reduction: rank collapse to zero reports the rescale branch") {
  FockSpace space(1, 40);
  const FiducialVector fid = ground_fiducial(space);
  ConstraintFamily family = [&](double delta) {
    return second_class_pq(space, delta * delta);
  };
  const std::vector<double> ladder{0.95, 0.9, 0.85, 0.8};  // delta^2 < 1: empty window
  std::vector<LabelPair> grid{{test::label1(0.1, 0.2), test::label1(0.0, 0.3)}};
  CHECK_THROWS_WITH_AS(
      reduce_kernel_delta_limit(space, fid, family, grid, ladder, RescaleFamily::none),
      doctest::Contains("rescale required"), AmbiguityError);
}

TEST_CASE("delta reduction: momentum window extrapolates to the rank-one formula") {
  FockSpace space(1, 60);
  const FiducialVector fid = ground_fiducial(space);
  const std::vector<double> ladder{0.4, 0.2, 0.1, 0.05, 0.025};
  test::Rng rng(12);
  std::vector<LabelPair> grid;
  for (int i = 0; i < 5; ++i) grid.push_back({rng.label(1, 1.0), rng.label(1, 1.0)});

  const LinearWindowConstraint window{};  // Φ = P on mode 0
  const ReducedKernel red = reduce_kernel_delta_limit(space, fid, window, grid, ladder);

  auto eta = [](double k) { return std::pow(M_PI, -0.25) * std::exp(-k * k / 2.0); };
  for (size_t i = 0; i < grid.size(); ++i) {
    const auto& pair = grid[i];
    const double pb = pair.bra.p(0), qb = pair.bra.q(0);
    const double pk = pair.ket.p(0), qk = pair.ket.q(0);
    const Complex target = std::exp(-kImag * (pb * qb / 2.0)) * eta(-pb) * eta(-pk) *
                           std::exp(kImag * (pk * qk / 2.0));
    CHECK(red.points[i].converged);
    CHECK(std::abs(red.points[i].limit - target) < 2e-3);
    CHECK(red.points[i].rho > 1.5);
    CHECK(red.points[i].rho < 2.5);
  }

  // the extrapolated kernel is numerically rank one on the grid labels
  std::vector<CoherentLabel> labels;
  for (const auto& pair : grid) {
    labels.push_back(pair.bra);
    labels.push_back(pair.ket);
  }
  std::vector<LabelPair> all;
  for (const auto& a : labels)
    for (const auto& b : labels) all.push_back({a, b});
  const ReducedKernel full = reduce_kernel_delta_limit(space, fid, window, all, ladder);
  Matrix gram(labels.size(), labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    for (size_t j = 0; j < labels.size(); ++j)
      gram(i, j) = full.points[i * labels.size() + j].limit;
  OperatorMatrix g;
  g.mat = (gram + gram.adjoint()) / 2.0;
  g.hermitian = true;
  const EigResult eig = eig_hermitian(g);
  const double top = eig.values(eig.values.size() - 1);
  const double second = eig.values(eig.values.size() - 2);
  CHECK(second <= 1e-6 * top);
}

TEST_CASE("reduction ladder validation") {
  FockSpace space(1, 20);
  const FiducialVector fid = ground_fiducial(space);
  ConstraintFamily family = [&](double delta) { return second_class_pq(space, delta * delta); };
  std::vector<LabelPair> grid{{test::label1(0, 0), test::label1(0, 0.5)}};
  CHECK_THROWS_AS(reduce_kernel_delta_limit(space, fid, family, grid, {1.5, 1.4},
                                            RescaleFamily::none),
                  ValidationError);
  CHECK_THROWS_AS(reduce_kernel_delta_limit(space, fid, family, grid, {1.5, 1.4, 1.45, 1.3},
                                            RescaleFamily::none),
                  ValidationError);
}

TEST_CASE("projector laws on random constraint sets") {
  test::Rng rng(77);
  FockSpace space(1, 16);
  for (int trial = 0; trial < 30; ++trial) {
    OperatorMatrix phi;
    phi.mat = rng.hermitian(16, 1.0);
    phi.hermitian = true;
    ConstraintSet cs;
    cs.ops.push_back(phi);
    cs.kind = ConstraintKind::discrete_spectrum;
    cs.delta_squared = 0.3 + rng.uniform(0, 1);
    ConstraintProjector proj;
    try {
      proj = build_projector(space, cs);
    } catch (const AmbiguityError&) {
      continue;  // random eigenvalue happened to sit in the refusal band
    }
    const Matrix& e = proj.projector.mat;
    CHECK((e * e - e).norm() <= 1e-10);
    CHECK((e - e.adjoint()).norm() <= 1e-12);
    CHECK(std::abs(e.trace().real() - proj.rank) < 1e-8);
  }
}
