#include "rkck/product.hpp"

#include <cmath>

namespace rkck {

namespace {

void check_label(const CoherentLabel& l, const char* what) {
  if (!l.finite()) throw ValidationError(std::string(what) + ": non-finite label");
}

}  // namespace

LabelSequence LabelSequence::finite_support(std::vector<CoherentLabel> head,
                                            CoherentLabel limit) {
  check_label(limit, "finite_support limit");
  for (const auto& l : head) {
    check_label(l, "finite_support head");
    if (l.modes() != limit.modes()) throw ValidationError("sequence head arity mismatch");
  }
  LabelSequence s;
  s.family_ = SequenceFamily::finite_support;
  s.head_ = std::move(head);
  s.limit_ = std::move(limit);
  return s;
}

LabelSequence LabelSequence::power_law(CoherentLabel limit, CoherentLabel direction,
                                       double alpha) {
  check_label(limit, "power_law limit");
  check_label(direction, "power_law direction");
  if (direction.modes() != limit.modes()) throw ValidationError("sequence arity mismatch");
  if (!(alpha > 0)) throw ValidationError("power_law requires alpha > 0");
  LabelSequence s;
  s.family_ = SequenceFamily::power_law;
  s.limit_ = std::move(limit);
  s.direction_ = std::move(direction);
  s.alpha_ = alpha;
  return s;
}

LabelSequence LabelSequence::geometric(CoherentLabel limit, CoherentLabel direction,
                                       double ratio) {
  check_label(limit, "geometric limit");
  check_label(direction, "geometric direction");
  if (direction.modes() != limit.modes()) throw ValidationError("sequence arity mismatch");
  if (!(std::abs(ratio) < 1.0)) throw ValidationError("geometric requires |ratio| < 1");
  LabelSequence s;
  s.family_ = SequenceFamily::geometric;
  s.limit_ = std::move(limit);
  s.direction_ = std::move(direction);
  s.ratio_ = ratio;
  return s;
}

CoherentLabel LabelSequence::at(long n) const {
  if (n < 1) throw ValidationError("sequence index starts at 1");
  switch (family_) {
    case SequenceFamily::finite_support:
      if (n <= static_cast<long>(head_.size())) return head_[n - 1];
      return limit_;
    case SequenceFamily::power_law: {
      CoherentLabel l = limit_;
      const double f = std::pow(double(n), -alpha_);
      l.p += f * direction_.p;
      l.q += f * direction_.q;
      return l;
    }
    case SequenceFamily::geometric: {
      CoherentLabel l = limit_;
      const double f = std::pow(ratio_, double(n));
      l.p += f * direction_.p;
      l.q += f * direction_.q;
      return l;
    }
  }
  throw Error("unreachable");
}

bool ell1_criterion(const LabelSequence& seq) {
  switch (seq.family()) {
    case SequenceFamily::finite_support:
      return true;  // all tail terms vanish exactly
    case SequenceFamily::power_law:
      return seq.alpha() > 1.0;
    case SequenceFamily::geometric:
      return true;
  }
  throw Error("unreachable");
}

ProductKernelResult classify_factors(const std::function<Complex(long)>& factor, long n_max) {
  if (n_max < 16) throw ValidationError("classification needs at least 16 factors");
  ProductKernelResult res;
  Complex partial(1.0, 0.0);
  double s = 0.0, t = 0.0;
  const long half = n_max / 2;
  double s_half = 0.0;
  // modulus samples across the last decade of N, for the monotone-trend test
  std::vector<double> tail_mod;
  std::vector<double> tail_t;
  const long decade_start = std::max<long>(1, n_max / 10);
  const long decade_step = std::max<long>(1, (n_max - decade_start) / 16);
  double t_half = 0.0;

  long next_curve = 1;
  for (long n = 1; n <= n_max; ++n) {
    const Complex f = factor(n);
    partial *= f;
    s += std::abs(1.0 - f);
    const double mag = std::abs(f);
    t += -std::log(std::max(mag, 1e-300));
    if (n == half) {
      s_half = s;
      t_half = t;
    }
    if (n >= decade_start && (n - decade_start) % decade_step == 0) {
      tail_mod.push_back(std::abs(partial));
      tail_t.push_back(t);
    }
    if (n == next_curve || n == n_max) {
      res.curve.push_back({n, partial, s, t});
      next_curve *= 2;
    }
  }
  res.limit = partial;
  res.cauchy_defect = std::abs(s - s_half);

  if (res.cauchy_defect <= 1e-6 * (1.0 + s)) {
    res.classification = ProductClass::convergent;
    return res;
  }
  bool monotone_down = true;
  for (size_t i = 1; i < tail_mod.size(); ++i) {
    monotone_down = monotone_down && tail_mod[i] <= tail_mod[i - 1] * (1.0 + 1e-12);
  }
  bool t_monotone_up = true;
  for (size_t i = 1; i < tail_t.size(); ++i) {
    t_monotone_up = t_monotone_up && tail_t[i] >= tail_t[i - 1] - 1e-12;
  }
  const bool tiny_product = std::abs(partial) < 1e-8 && monotone_down;
  const bool log_growth = (t - t_half) >= 0.05 && t_monotone_up;
  res.classification = (tiny_product || log_growth) ? ProductClass::diverges_to_zero
                                                    : ProductClass::divergent;
  return res;
}

ProductKernelResult classify_sequence(const FockSpace& space, const FiducialVector& fiducial,
                                      const LabelSequence& seq, long n_max) {
  if (seq.limit().z_norm_sq() > space.cutoff() / 4.0) {
    throw ValidationError("sequence limit violates the truncation bound");
  }
  const Vector ref = coherent_state(space, fiducial, seq.limit());
  auto factor = [&](long n) {
    const Vector state = coherent_state(space, fiducial, seq.at(n));
    return state.dot(ref);
  };
  return classify_factors(factor, n_max);
}

SectorDecay orthogonality_of_sectors(const FockSpace& space, const FiducialVector& fiducial,
                                     const CoherentLabel& a, const CoherentLabel& b,
                                     const std::vector<long>& schedule) {
  SectorDecay decay;
  if (a == b) {
    decay.same_sector = true;
    decay.ratio = 1.0;
    for (long n : schedule) decay.curve.emplace_back(n, 1.0);
    return decay;
  }
  decay.ratio = std::abs(overlap(space, fiducial, a, b));
  for (long n : schedule) {
    decay.curve.emplace_back(n, std::pow(decay.ratio, double(n)));
  }
  return decay;
}

ProductKernelResult product_kernel(const FockSpace& space, const FiducialVector& fiducial,
                                   const ConstraintProjector* constraint,
                                   const LabelSequence& seq_bra, const LabelSequence& seq_ket,
                                   long n_max, const FactorFn* factor_override) {
  const CoherentLabel& sector = seq_bra.limit();
  {
    RealVector dp = seq_bra.limit().p - seq_ket.limit().p;
    RealVector dq = seq_bra.limit().q - seq_ket.limit().q;
    if (seq_bra.modes() != seq_ket.modes() ||
        dp.lpNorm<Eigen::Infinity>() > 1e-12 || dq.lpNorm<Eigen::Infinity>() > 1e-12) {
      throw ValidationError("product_kernel: sequences lie in different sectors");
    }
  }

  double sbar = 1.0;
  if (constraint) {
    const Vector eta = coherent_state(space, fiducial, sector);
    const Vector pe = constraint->range_basis.adjoint() * eta;
    sbar = pe.squaredNorm();
    if (sbar <= 1e-12) {
      throw ValidationError(
          "product_kernel: fiducial incompatible with the constraint projector "
          "(S-bar below 1e-12)");
    }
  }

  ProductKernelResult res;
  if (factor_override) {
    auto factor = [&](long n) { return (*factor_override)(seq_bra.at(n), seq_ket.at(n)); };
    res = classify_factors(factor, n_max);
  } else if (constraint) {
    auto factor = [&](long n) {
      return constrained_kernel(space, fiducial, *constraint, seq_bra.at(n), seq_ket.at(n)) /
             sbar;
    };
    res = classify_factors(factor, n_max);
  } else {
    auto factor = [&](long n) {
      return overlap(space, fiducial, seq_bra.at(n), seq_ket.at(n));
    };
    res = classify_factors(factor, n_max);
  }
  res.sbar = sbar;
  return res;
}

}  // namespace rkck
