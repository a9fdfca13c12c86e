#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rkck/coherent.hpp"
#include "rkck/constraint.hpp"
#include "rkck/fock.hpp"

namespace rkck {

enum class SequenceFamily { finite_support, power_law, geometric };

/// Parametric label sequence n ↦ (p_n, q_n), n ≥ 1, with a declared limit
/// point. Tails are exactly the limit (finite support) or closed-form decays,
/// so convergence classification has decidable evidence.
class LabelSequence {
 public:
  static LabelSequence finite_support(std::vector<CoherentLabel> head, CoherentLabel limit);
  /// (p_n, q_n) = limit + direction · n^{−alpha}, alpha > 0.
  static LabelSequence power_law(CoherentLabel limit, CoherentLabel direction, double alpha);
  /// (p_n, q_n) = limit + direction · ratio^n, |ratio| < 1.
  static LabelSequence geometric(CoherentLabel limit, CoherentLabel direction, double ratio);

  CoherentLabel at(long n) const;
  const CoherentLabel& limit() const { return limit_; }
  SequenceFamily family() const { return family_; }
  double alpha() const { return alpha_; }
  double ratio() const { return ratio_; }
  int modes() const { return limit_.modes(); }

 private:
  LabelSequence() = default;
  SequenceFamily family_ = SequenceFamily::finite_support;
  std::vector<CoherentLabel> head_;
  CoherentLabel limit_;
  CoherentLabel direction_;
  double alpha_ = 0.0;
  double ratio_ = 0.0;
};

enum class ProductClass { convergent, diverges_to_zero, divergent };

struct CurvePoint {
  long n = 0;
  Complex partial{1.0, 0.0};  // Π_{k<=n} factors
  double s = 0.0;             // Σ |1 − factor|
  double t = 0.0;             // −Σ log|factor|
};

struct ProductKernelResult {
  ProductClass classification = ProductClass::convergent;
  std::vector<CurvePoint> curve;  // logarithmic N schedule plus N_max
  Complex limit{0.0, 0.0};        // final partial product
  double cauchy_defect = 0.0;     // |s_N − s_{N/2}|
  double sbar = 1.0;              // rescale factor applied per factor
};

/// Convergence classification of Π ⟨p_n,q_n|p̄,q̄⟩ from the partial sums
/// s_N = Σ_{n≤N} |1 − overlap| and the modulus curve of the partial products.
ProductKernelResult classify_sequence(const FockSpace& space, const FiducialVector& fiducial,
                                      const LabelSequence& seq, long n_max);

/// Σ_n Σ_j (|p_n^j − p̄^j| + |q_n^j − q̄^j|) < ∞, decided analytically per family.
bool ell1_criterion(const LabelSequence& seq);

struct SectorDecay {
  double ratio = 1.0;  // |⟨labelA|labelB⟩|
  bool same_sector = false;
  std::vector<std::pair<long, double>> curve;  // (N, ratio^N)
};

/// Decay of the cross-sector overlap power |⟨p̄,q̄|r̄,s̄⟩|^N.
SectorDecay orthogonality_of_sectors(const FockSpace& space, const FiducialVector& fiducial,
                                     const CoherentLabel& a, const CoherentLabel& b,
                                     const std::vector<long>& schedule);

using FactorFn = std::function<Complex(const CoherentLabel& bra, const CoherentLabel& ket)>;

/// Product kernel Π_n S̄^{−1}⟨bra_n|E|ket_n⟩ (S̄ = ⟨η̄|E|η̄⟩ with η̄ the
/// fiducial displaced to the common sector point; S̄ = 1 unconstrained).
/// `factor_override` substitutes a closed-form per-factor evaluator while
/// keeping the classification machinery identical.
ProductKernelResult product_kernel(const FockSpace& space, const FiducialVector& fiducial,
                                   const ConstraintProjector* constraint,
                                   const LabelSequence& seq_bra, const LabelSequence& seq_ket,
                                   long n_max, const FactorFn* factor_override = nullptr);

/// Shared classifier for an externally produced factor sequence.
ProductKernelResult classify_factors(const std::function<Complex(long)>& factor, long n_max);

}  // namespace rkck
