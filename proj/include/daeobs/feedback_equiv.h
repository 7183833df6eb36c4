#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "daeobs/associated_lti.h"

namespace daeobs {

/// Feedback equivalence between two builds of the associated LTI of one DAE.
///
/// With R = T₂⁻¹T₁ = [[R11, 0], [R21, R22]] and S₂S₁⁻¹ = [[R11, H12], [0, H22]],
/// the maps are T = R11 (on ℝ^r), U = L₁⁺ÛL₂ and F = L₁⁺(F̂ + ÛF₂R11 − F₁),
/// where F̂ = [−R22⁻¹R21; 0] and Û = diag(R22⁻¹, I_m).
struct FeedbackEquivalence {
  Matrix T;      // r × r
  Matrix F;      // k × r
  Matrix U;      // k × k
  Matrix F_hat;  // (n−r+m) × r
  Matrix U_hat;  // (n−r+m) × (n−r+m)
  Matrix G_hat;  // R11⁻¹H12
  Matrix V_hat;  // H22

  /// The same maps in the coordinates of the two 𝒱 bases: v₂ = T_lti·v₁,
  /// g₁ = K·v₁ + U·g₂.
  Matrix T_lti;
  Matrix K;

  /// Relative residuals of
  ///   (1) T(𝒱₁) = 𝒱₂,
  ///   (2) (Ã₁ + G₁F̃₁ + G₁L₁F)𝒱₁ ⊆ 𝒱₁,
  ///   (3) T(Ã₁ + G₁F̃₁ + G₁L₁F) = (Ã₂ + G₂F̃₂)T on 𝒱₁,
  ///   (4) T·G₁L₁U = G₂L₂,
  ///   (5) diag(T₁, I)[0; L₁U] = diag(T₂, I)[0; L₂],
  ///   (6) diag(T₁, I)[I; F̃₁ + L₁F] = diag(T₂, I)[I; F̃₂]T on 𝒱₁.
  std::array<double, 6> defects{};
  /// Largest relative violation of the block zeros and of H11 = R11.
  double structural_defect = 0.0;

  double max_defect() const;
};

/// Throws InputError when the builds do not share the DAE dimensions, and
/// InternalConsistencyError when the block-structure zeros fail
/// (tolerance 1e-8 relative to the transformation norms) or when
/// dim 𝒱 or rank L differ between the builds.
FeedbackEquivalence build_equivalence(const Construction& b1, const Construction& b2,
                                      double tol = 1e-8);

struct EquivalenceReport {
  std::vector<InvariantCheck> checks;
  bool pass = true;
  double max_residual = 0.0;
};

/// Checks that (A₁ + B₁K, B₁U, C₁ + D₁K, D₁U) is similar to 𝒮₂ through
/// T_lti. Residuals are relative: ‖lhs − rhs‖ / max(1, ‖rhs‖).
EquivalenceReport verify_equivalence(const AssociatedLti& sys1,
                                     const AssociatedLti& sys2,
                                     const FeedbackEquivalence& eq, double tol = 1e-8);

/// Report entries for the six construction defects and the structural zeros.
EquivalenceReport defect_report(const FeedbackEquivalence& eq, double tol = 1e-8);

/// Random well-conditioned square matrix (singular values in [0.5, 2]).
Matrix random_well_conditioned(int dim, std::mt19937_64& rng);

/// Random orthogonal matrix.
Matrix random_orthogonal(int dim, std::mt19937_64& rng);

/// A second build of sys: canonical form S₂ = H·S₁, T₂ = T₁·R⁻¹ with random
/// admissible block transformations, the 𝒱 basis rotated, L multiplied by a
/// random invertible matrix and the friend perturbed by L·N·Wᵀ + M(I − WWᵀ).
Construction randomized_construction(const DaeSystem& sys, std::mt19937_64& rng,
                                     const Tolerances& tol = {});

}  // namespace daeobs
