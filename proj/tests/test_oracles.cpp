#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rkck/oracles.hpp"
#include "support.hpp"

using namespace rkck;

namespace {

CoherentLabel zlabel3(Complex z0, Complex z1, Complex z2) {
  Vector z(3);
  z << z0, z1, z2;
  return CoherentLabel::from_z(z);
}

}  // namespace

TEST_CASE("oracle closed-form values") {
  const CoherentLabel zero1 = CoherentLabel::zero(1);
  CHECK(std::abs(oracle::example_kernel(1, zero1, zero1, 0.0) - 1.0) == 0.0);

  // Example 3 at z'' = z' = sqrt(i): value 1/e, which equals S-bar
  const CoherentLabel sqrt_i = test::label1(1.0, 1.0);
  CHECK(std::abs(oracle::example_kernel(3, sqrt_i, sqrt_i, 5.0) - 1.0) < 1e-14);

  const CoherentLabel zero3 = CoherentLabel::zero(3);
  CHECK(std::abs(oracle::example_kernel(4, zero3, zero3, 0.0) - 1.0) == 0.0);

  CHECK_THROWS_AS(oracle::example_kernel(4, zero1, zero1, 0.0), ValidationError);
  CHECK_THROWS_AS(oracle::example_kernel(1, zero3, zero3, 0.0), ValidationError);
  CHECK_THROWS_AS(oracle::example_kernel(7, zero1, zero1, 0.0), ValidationError);
}

TEST_CASE("oracle evaluators are hermitian-symmetric at T=0") {
  test::Rng rng(19);
  for (int example : {1, 2, 3, 4}) {
    const int modes = example == 4 ? 3 : 1;
    for (int trial = 0; trial < 20; ++trial) {
      const CoherentLabel a = rng.label(modes, 1.5);
      const CoherentLabel b = rng.label(modes, 1.5);
      const Complex xy = oracle::example_kernel(example, a, b, 0.0);
      const Complex yx = oracle::example_kernel(example, b, a, 0.0);
      CHECK(std::abs(xy - std::conj(yx)) < 1e-14);
    }
  }
}

TEST_CASE("example 4 oracle defines a PSD kernel") {
  test::Rng rng(23);
  std::vector<CoherentLabel> labels;
  for (int i = 0; i < 8; ++i) labels.push_back(rng.label(3, 1.0));
  Matrix gram(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      gram(i, j) = oracle::example_kernel(4, labels[i], labels[j], 0.0);
  OperatorMatrix g;
  g.mat = (gram + gram.adjoint()) / 2.0;
  g.hermitian = true;
  const EigResult eig = eig_hermitian(g);
  CHECK(eig.values(0) > -1e-9 * eig.values(7));
}

TEST_CASE("example specs") {
  CHECK(oracle::example_spec(1).modes == 1);
  CHECK(oracle::example_spec(2).ebar == doctest::Approx(0.5));
  CHECK(oracle::example_spec(3).ebar == doctest::Approx(1.5));
  CHECK(oracle::example_spec(4).modes == 3);
  CHECK_THROWS_AS(oracle::example_spec(0), ValidationError);
}

TEST_CASE("engine matches oracle, examples 1 and 2") {
  test::Rng rng(29);
  std::vector<LabelPair> grid;
  for (int i = 0; i < 20; ++i) grid.push_back({rng.label(1, 2.0), rng.label(1, 2.0)});
  const std::vector<double> times{0.0, 1.0};

  const oracle::DeviationReport r1 = oracle::oracle_vs_engine(1, grid, times, 40);
  CHECK(r1.max_abs_dev <= 1e-8);
  const oracle::DeviationReport r2 = oracle::oracle_vs_engine(2, grid, times, 40);
  CHECK(r2.max_abs_dev <= 1e-8);
}

TEST_CASE("example 2 oracle equals example 1 oracle") {
  test::Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const CoherentLabel a = rng.label(1, 2.0);
    const CoherentLabel b = rng.label(1, 2.0);
    CHECK(oracle::example_kernel(1, a, b, 0.3) == oracle::example_kernel(2, a, b, 0.3));
  }
}

TEST_CASE("engine matches oracle, example 3") {
  test::Rng rng(37);
  std::vector<LabelPair> grid;
  for (int i = 0; i < 15; ++i) grid.push_back({rng.label(1, 2.0), rng.label(1, 2.0)});
  const oracle::DeviationReport r = oracle::oracle_vs_engine(3, grid, {0.0, 1.0, 10.0}, 40);
  CHECK(r.max_abs_dev <= 1e-8);
}

TEST_CASE("engine matches oracle, example 4 at cutoff 10") {
  test::Rng rng(41);
  std::vector<LabelPair> grid;
  for (int i = 0; i < 10; ++i) grid.push_back({rng.label(3, 1.0), rng.label(3, 1.0)});
  const oracle::DeviationReport r = oracle::oracle_vs_engine(4, grid, {0.0, 1.0}, 10);
  CHECK(r.max_abs_dev <= 1e-5);

  // diagonal labels at T=0
  std::vector<LabelPair> diag;
  for (int i = 0; i < 6; ++i) {
    const CoherentLabel l = rng.label(3, 1.0);
    diag.push_back({l, l});
  }
  CHECK(oracle::oracle_vs_engine(4, diag, {0.0}, 10).max_abs_dev <= 1e-5);
}

TEST_CASE("example 4 invariant states span the projector range") {
  oracle::ExampleSystem sys = oracle::build_example_system(4, 10);
  CHECK(sys.projector.rank == 5);
  for (int m = 0; m <= 4; ++m) {
    const Vector v = oracle::invariant_state(sys.space, m);
    CHECK((sys.projector.projector.mat * v - v).norm() < 1e-10);
  }
  // norm of the unnormalized ladder: ||(A†)^m|0>||² = (2m+1)!
  Matrix creator = Matrix::Zero(sys.space.dim(), sys.space.dim());
  for (int j = 0; j < 3; ++j) {
    const Matrix ad = sys.space.raise(j);
    creator += ad * ad;
  }
  Vector v = Vector::Zero(sys.space.dim());
  v(sys.space.index_of({0, 0, 0})) = 1.0;
  double expect = 1.0;
  for (int m = 1; m <= 4; ++m) {
    v = creator * v;
    expect *= (2.0 * m) * (2.0 * m + 1.0);  // (2m+1)!
    CHECK(std::abs(v.squaredNorm() - expect) < 1e-6 * expect);
  }
}

TEST_CASE("example 4 constrained spectrum is 0,2,4,6,8") {
  oracle::ExampleSystem sys = oracle::build_example_system(4, 10);
  OperatorMatrix restricted;
  restricted.mat =
      sys.projector.range_basis.adjoint() * sys.bundle.hbar.mat * sys.projector.range_basis;
  restricted.hermitian = true;
  const EigResult eig = eig_hermitian(restricted);
  REQUIRE(eig.values.size() == 5);
  for (int m = 0; m < 5; ++m) CHECK(std::abs(eig.values(m) - 2.0 * m) < 1e-8);
}
