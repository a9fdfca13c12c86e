#pragma once

#include <vector>

#include "rkck/constraint.hpp"
#include "rkck/dynamics.hpp"

namespace rkck::oracle {

/// Descriptor of one closed-form example system.
struct OracleSpec {
  int example = 1;
  int modes = 1;            // J
  int constraint_count = 1; // A
  double ebar = 0.0;        // energy shift selected by the dynamics
};

OracleSpec example_spec(int example);

/// Closed-form constrained propagator factor for examples 1-4.
///   1: exp[−½(|z″|²+|z′|²)]                            (T-independent)
///   2: identical to example 1 after the zero-point shift
///   3: exp[−½(|z″|²+|z′|²−2)]·z″*z′                    (T-independent)
///   4: exp[−½(|z″|²+|z′|²)]·Σ_m [(z″*)²(z′)²]^m e^{−i2mT}/(2m+1)!
/// Example 4 uses three-component labels and the bilinear square (z)²=Σ_j z_j².
Complex example_kernel(int example, const CoherentLabel& bra, const CoherentLabel& ket,
                       double T);

struct DeviationReport {
  double max_abs_dev = 0.0;
  long comparisons = 0;
};

/// Runs the generic engine (projectors, selection, constrained propagators)
/// on the example's operators and compares against the closed form over a
/// grid of label pairs and a set of times.
DeviationReport oracle_vs_engine(int example, const std::vector<LabelPair>& grid,
                                 const std::vector<double>& times, int cutoff);

/// Engine-side assembly shared with the CLI: space, projector, Hamiltonian
/// and selection for one example system.
struct ExampleSystem {
  FockSpace space;
  FiducialVector fiducial;           // base fiducial the labels displace
  ConstraintProjector projector;
  OperatorMatrix hamiltonian;        // unshifted H
  RenormalizedHamiltonian bundle;    // selection output (Ē, H̄, η̄)
  double sbar = 1.0;                 // ⟨η̄|E|η̄⟩ at the sector point
};

ExampleSystem build_example_system(int example, int cutoff);

/// Normalized rotation-invariant vectors ((Σ_j a_j†²)^m)|0⟩/√((2m+1)!) used by
/// the example-4 checks.
Vector invariant_state(const FockSpace& space, int m);

}  // namespace rkck::oracle
