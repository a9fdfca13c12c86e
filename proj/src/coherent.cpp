#include "rkck/coherent.hpp"

#include <cmath>
#include <utility>

namespace rkck {

CoherentLabel CoherentLabel::zero(int modes) {
  CoherentLabel l;
  l.p = RealVector::Zero(modes);
  l.q = RealVector::Zero(modes);
  return l;
}

CoherentLabel CoherentLabel::from_z(const Vector& z) {
  CoherentLabel l;
  l.p = std::sqrt(2.0) * z.imag();
  l.q = std::sqrt(2.0) * z.real();
  return l;
}

Vector CoherentLabel::z() const {
  return (q.cast<Complex>() + kImag * p.cast<Complex>()) / std::sqrt(2.0);
}

double CoherentLabel::z_norm_sq() const { return (p.squaredNorm() + q.squaredNorm()) / 2.0; }

bool CoherentLabel::finite() const { return p.allFinite() && q.allFinite(); }

bool operator==(const CoherentLabel& a, const CoherentLabel& b) {
  return a.p.size() == b.p.size() && a.p == b.p && a.q == b.q;
}

FiducialVector make_fiducial(Vector coeffs, std::string name) {
  const double norm = coeffs.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw ValidationError("fiducial vector must have unit norm");
  }
  return FiducialVector{std::move(coeffs), std::move(name)};
}

FiducialVector ground_fiducial(const FockSpace& space) {
  Vector v = Vector::Zero(space.dim());
  v(0) = 1.0;
  return FiducialVector{std::move(v), "ground"};
}

FiducialVector fock_fiducial(const FockSpace& space, const std::vector<int>& occ) {
  if (static_cast<int>(occ.size()) != space.modes()) {
    throw ValidationError("fock_fiducial: occupation arity mismatch");
  }
  const Eigen::Index idx = space.index_of(occ);
  if (idx < 0) throw ValidationError("fock_fiducial: occupation outside the space");
  Vector v = Vector::Zero(space.dim());
  v(idx) = 1.0;
  std::string name = "fock:";
  for (int n : occ) name += std::to_string(n) + ",";
  name.pop_back();
  return FiducialVector{std::move(v), std::move(name)};
}

FiducialVector coherent_fiducial(const FockSpace& space, const CoherentLabel& label) {
  Vector v = coherent_state(space, ground_fiducial(space), label);
  v /= v.norm();
  return FiducialVector{std::move(v), "coherent"};
}

namespace {

Vector apply_mode_diag(const FockSpace& space, int mode, const Vector& f, Vector v) {
  const int d = space.cutoff();
  Eigen::Index outer = 1;
  for (int j = mode + 1; j < space.modes(); ++j) outer *= d;
  const Eigen::Index block = outer * d;
  for (Eigen::Index base = 0; base < v.size(); base += block) {
    for (int n = 0; n < d; ++n) {
      v.segment(base + n * outer, outer) *= f(n);
    }
  }
  return v;
}

Vector displace_uncapped(const FockSpace& space, const CoherentLabel& label, Vector v) {
  const int d = space.cutoff();
  const Vector z = label.z();
  const RealVector& w = space.displacement_eigenvalues();
  const Matrix& vec = space.displacement_eigenvectors();
  const Matrix vec_adj = vec.adjoint();
  for (int j = 0; j < space.modes(); ++j) {
    const double r = std::abs(z(j));
    if (r < 1e-300) continue;
    const double theta = std::arg(z(j));
    Vector rot(d), mid(d);
    for (int n = 0; n < d; ++n) rot(n) = std::exp(kImag * (theta * n));
    for (int n = 0; n < d; ++n) mid(n) = std::exp(kImag * (r * w(n)));
    v = apply_mode_diag(space, j, rot.conjugate(), std::move(v));
    v = apply_mode(space, j, vec_adj, v);
    v = apply_mode_diag(space, j, mid, std::move(v));
    v = apply_mode(space, j, vec, v);
    v = apply_mode_diag(space, j, rot, std::move(v));
  }
  return v;
}

Vector displace_capped(const FockSpace& space, const CoherentLabel& label, const Vector& v) {
  Matrix gen = Matrix::Zero(space.dim(), space.dim());
  for (int j = 0; j < space.modes(); ++j) {
    gen += label.p(j) * space.position(j).mat - label.q(j) * space.momentum(j).mat;
  }
  OperatorMatrix g;
  g.mat = std::move(gen);
  g.hermitian = true;
  return expm(g, kImag).mat * v;
}

}  // namespace

Vector displace_vector(const FockSpace& space, const CoherentLabel& label,
                       const Vector& v, bool checked) {
  if (label.modes() != space.modes()) {
    throw ValidationError("coherent label arity does not match the space");
  }
  if (!label.finite()) throw ValidationError("coherent label has non-finite components");
  if (checked && label.z_norm_sq() > space.cutoff() / 4.0) {
    throw ValidationError("coherent label violates the truncation bound |z|^2 <= cutoff/4");
  }
  if (v.size() != space.dim()) throw ValidationError("state dimension mismatch");
  if (space.total_cap()) return displace_capped(space, label, v);
  return displace_uncapped(space, label, v);
}

Vector coherent_state(const FockSpace& space, const FiducialVector& fiducial,
                      const CoherentLabel& label) {
  return displace_vector(space, label, fiducial.coeffs, true);
}

Complex overlap(const FockSpace& space, const FiducialVector& fiducial,
                const CoherentLabel& bra, const CoherentLabel& ket) {
  const Vector vb = coherent_state(space, fiducial, bra);
  const Vector vk = coherent_state(space, fiducial, ket);
  return vb.dot(vk);
}

Complex ground_overlap(const CoherentLabel& bra, const CoherentLabel& ket) {
  const Vector zb = bra.z();
  const Vector zk = ket.z();
  Complex expo(0.0, 0.0);
  for (Eigen::Index j = 0; j < zb.size(); ++j) {
    expo += -0.5 * std::norm(zb(j)) + std::conj(zb(j)) * zk(j) - 0.5 * std::norm(zk(j));
  }
  return std::exp(expo);
}

ResolutionReport check_resolution_of_unity(const FockSpace& space,
                                           const FiducialVector& fiducial,
                                           const QuadratureSpec& spec) {
  if (spec.nodes_per_axis < 2) throw ValidationError("quadrature needs >= 2 nodes per axis");
  if (spec.block_nmax < 0) throw ValidationError("block_nmax must be >= 0");
  const int axes = 2 * space.modes();
  const double total_nodes = std::pow(double(spec.nodes_per_axis), axes);
  if (total_nodes > 5e7) throw ValidationError("quadrature grid too large");

  // low-Fock block: total occupation <= block_nmax
  std::vector<Eigen::Index> block;
  for (Eigen::Index i = 0; i < space.dim(); ++i) {
    int tot = 0;
    for (int n : space.occupations()[i]) tot += n;
    if (tot <= spec.block_nmax) block.push_back(i);
  }
  const Eigen::Index b = static_cast<Eigen::Index>(block.size());

  const double half = spec.z_radius * std::sqrt(2.0);
  const int n = spec.nodes_per_axis;
  const double h = 2.0 * half / (n - 1);
  RealVector nodes(n), weights(n);
  for (int i = 0; i < n; ++i) nodes(i) = -half + h * i;
  weights.setConstant(h);
  weights(0) *= 0.5;
  weights(n - 1) *= 0.5;

  Matrix acc = Matrix::Zero(b, b);
  long used = 0;
  std::vector<int> digit(axes, 0);
  CoherentLabel label = CoherentLabel::zero(space.modes());
  Vector low(b);
  while (true) {
    double wprod = 1.0;
    for (int ax = 0; ax < axes; ++ax) wprod *= weights(digit[ax]);
    for (int j = 0; j < space.modes(); ++j) {
      label.p(j) = nodes(digit[2 * j]);
      label.q(j) = nodes(digit[2 * j + 1]);
    }
    if (label.z_norm_sq() <= spec.z_radius * spec.z_radius) {
      ++used;
      const Vector state = displace_vector(space, label, fiducial.coeffs, false);
      for (Eigen::Index i = 0; i < b; ++i) low(i) = state(block[i]);
      const double measure = wprod / std::pow(2.0 * M_PI, space.modes());
      acc.noalias() += measure * (low * low.adjoint());
    }
    int ax = axes - 1;
    while (ax >= 0 && ++digit[ax] == n) digit[ax--] = 0;
    if (ax < 0) break;
  }

  ResolutionReport report;
  report.nodes_in_region = used;
  report.under_resolved = h > 0.125;
  if (used == 0) {
    report.defect = 1.0;  // spectral norm of the identity block
    return report;
  }
  report.defect = spectral_norm(acc - Matrix::Identity(b, b));
  return report;
}

}  // namespace rkck
