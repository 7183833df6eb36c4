#pragma once

#include <optional>
#include <vector>

#include "daeobs/associated_lti.h"
#include "daeobs/dae_model.h"
#include "daeobs/linalg.h"
#include "daeobs/lq_riccati.h"

namespace daeobs {

/// Estimation of ℓᵀF·x(t) for F·ẋ = A·x + f, y = H·x + η, with the
/// uncertainty ellipsoid x0ᵀQ0x0 + ∫ fᵀQf + ηᵀRη ≤ 1.
struct EstimationProblem {
  ObservedDae obs;
  Matrix Q0;
  Matrix Q;
  Matrix R;
  Vector ell;

  /// Throws InputError naming the failing field, e.g.
  /// "Q0 must be symmetric positive definite".
  void validate() const;
};

/// Dynamical observer ṡ = A_o s + B_o y, s(0) = 0, estimate = C_o s.
struct Observer {
  Matrix A_o;
  Matrix B_o;
  Matrix C_o;
  /// Worst-case asymptotic squared error ℓᵀFΛᵀPΛFᵀℓ.
  double sigma = 0.0;
  Matrix P;
  Matrix Lambda;
  Vector ell;

  // Kernel data: Û(t,s) = kernel_C · exp(kernel_A (t − s)) · kernel_v0.
  Matrix kernel_C;
  Matrix kernel_A;
  Vector kernel_v0;
  int p = 0;

  std::vector<InvariantCheck> checks;
};

/// Dual construction shared by every functional ℓ: only C_o and sigma
/// depend on ℓ.
struct DualSynthesis {
  ObservedDae obs;
  Matrix Q0;
  Matrix Q;
  Matrix R;
  Construction dual;
  LqWeights weights;
  RiccatiSolution riccati;
  DynamicController controller;

  /// Fᵀℓ lies in the consistency space of the dual DAE.
  bool estimable(const Vector& ell) const;
  /// Throws NotEstimableError when ℓ is not estimable.
  Observer observer_for(const Vector& ell) const;
};

/// Dual DAE (Fᵀ, Aᵀ, −Hᵀ), its associated LTI and the Riccati solution for
/// the weights diag(Q⁻¹, R⁻¹). Throws NotStabilizableError("dual associated
/// LTI not stabilizable") when no stabilizing solution exists. `prob.ell`
/// is not used.
DualSynthesis synthesize_dual(const EstimationProblem& prob,
                              const Tolerances& tol = {});

/// Same, reusing a caller-supplied construction of the dual DAE (for
/// instance one with a non-default canonical form or friend).
DualSynthesis synthesize_dual(const EstimationProblem& prob, Construction dual,
                              const Tolerances& tol = {});

/// synthesize_dual(prob).observer_for(prob.ell).
Observer synthesize(const EstimationProblem& prob, const Tolerances& tol = {});

/// Λ_opt = U(UᵀQ0⁻¹U)⁻¹UᵀQ0⁻¹·Fᵀ⁺ with Im U = ker Fᵀ; zero when the
/// kernel is trivial.
Matrix lambda_opt(const Matrix& f, const Matrix& q0,
                  double rank_tol = kDefaultRankTol);

/// Q̄0 = (Fᵀ⁺ − Λ_opt)ᵀQ0⁻¹(Fᵀ⁺ − Λ_opt).
Matrix q0_bar(const Matrix& f, const Matrix& q0, double rank_tol = kDefaultRankTol);

/// Û(t, s) ∈ ℝ^{n+p}; throws InputError when s > t.
Vector observer_kernel(const Observer& obsv, double t, double s);

/// Last p entries of Û(t, s): the weight applied to y(s).
Vector observer_output_kernel(const Observer& obsv, double t, double s);

}  // namespace daeobs
