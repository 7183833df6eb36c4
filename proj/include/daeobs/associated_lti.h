#pragma once

#include <string>
#include <vector>

#include "daeobs/dae_model.h"
#include "daeobs/geometric.h"
#include "daeobs/linalg.h"
#include "daeobs/signal.h"

namespace daeobs {

/// LTI system 𝒮 = (A_l, B_l, C_l, D_l) whose outputs (x, u) are exactly the
/// trajectories of the DAE it was built from:
///
///   v̇ = A_l v + B_l g,  v(0) = Λ·E·x0,
///   x = C_s v + D_s g,  u = C_inp v + D_inp g,
///
/// with Λ = (E·C_s)⁺ and consistency space 𝒳 = Im(E·C_s).
struct AssociatedLti {
  Matrix A_l, B_l, C_l, D_l;
  Matrix C_s, C_inp, D_s, D_inp;
  Subspace X = Subspace::zero(0);
  Matrix Lambda;
  /// Descriptor matrix of the source DAE.
  Matrix E;
  int n = 0;
  int m = 0;
  int n_hat = 0;
  int k = 0;
};

/// One named identity check and its outcome, embedded in reports.
struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Every intermediate object of one associated-LTI build. Keeping S, T, F̃,
/// L and the basis of 𝒱 lets two builds be compared by `feedback_equiv`.
struct Construction {
  DaeSystem sys;
  CanonicalForm cf;
  OutputNullingData ond;
  AssociatedLti lti;
};

/// Assemble 𝒮 from a canonical form and its output-nulling data, using the
/// orthonormal basis of 𝒱 in ond for coordinates. Throws
/// InternalConsistencyError naming the violated identity if any structural
/// invariant fails.
AssociatedLti build_associated_lti(const DaeSystem& sys, const CanonicalForm& cf,
                                   const OutputNullingData& ond,
                                   const Tolerances& tol = {});

/// Canonical form, output-nulling data and associated LTI with the default
/// (SVD-based, minimum-norm) choices.
Construction construct(const DaeSystem& sys, const Tolerances& tol = {});

/// Structural identities: E·D_s = 0, rank(E·C_s) = n̂, Λ·E·C_s = I,
/// rank D_l = k.
std::vector<InvariantCheck> structural_checks(const AssociatedLti& lti,
                                              double tol = 1e-9);

/// E·x0 ∈ 𝒳 within the subspace tolerance.
bool is_consistent(const AssociatedLti& lti, const Matrix& e, const Vector& x0);

/// v(0) = Λ·E·x0; throws InconsistentStateError if x0 is not consistent.
Vector initial_lti_state(const AssociatedLti& lti, const Vector& x0);

struct DaeTrajectory {
  SampledSignal v;
  SampledSignal x;
  SampledSignal u;
  SampledSignal g;
};

/// Integrates 𝒮 from v(0) = Λ·E·x0 with RK4 and maps to (x, u).
DaeTrajectory output_trajectory(const AssociatedLti& lti, const Vector& x0,
                                const SampledSignal& g);
DaeTrajectory output_trajectory(const AssociatedLti& lti, const Vector& x0,
                                const std::vector<double>& grid,
                                const InputFunction& g);

/// Same, starting directly from an LTI state v0.
DaeTrajectory lti_trajectory(const AssociatedLti& lti, const Vector& v0,
                             const std::vector<double>& grid,
                             const InputFunction& g);

}  // namespace daeobs
