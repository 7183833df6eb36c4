#pragma once

#include <vector>

#include "daeobs/dae_model.h"
#include "daeobs/linalg.h"

namespace daeobs {

/// Output-nulling data of the auxiliary system (Ã, G, C̃, D̃):
///   (Ã + G·F̃)·V ⊆ V,  (C̃ + D̃·F̃)·V = 0,  Im L = ker D̃ ∩ G⁻¹(V).
struct OutputNullingData {
  Subspace V;
  Matrix F_tilde;  // (n−r+m) × r
  Matrix L;        // (n−r+m) × k, full column rank
  int k = 0;
  /// dim V₀, dim V₁, ... of the subspace iteration (last entry repeats
  /// the fixed point).
  std::vector<int> iteration_dims;
};

/// Largest subspace of ℝ^r from which some input keeps z ≡ 0.
///
/// Invariant-subspace iteration: V₀ = ℝ^r and
///   V_{j+1} = {x : ∃q, Ãx + Gq ∈ V_j, C̃x + D̃q = 0},
/// i.e. the x-projection of ker [[P⊥Ã, P⊥G], [C̃, D̃]] with P⊥ = I − V_jV_jᵀ.
/// Stops once the dimension stalls, which happens within r steps.
Subspace weakly_observable_subspace(const CanonicalForm& cf,
                                    double rank_tol = kDefaultRankTol,
                                    std::vector<int>* iteration_dims = nullptr);

/// Minimum-norm friend F̃: for each basis vector v_i of V, the least-squares
/// u_i of [P⊥G; D̃]·u = −[P⊥Ãv_i; C̃v_i]; F̃ = U·Vᵀ (zero on V^⊥). Throws
/// InternalConsistencyError if the system is infeasible, which means V is
/// not output-nulling under the working tolerance.
Matrix compute_friend(const CanonicalForm& cf, const Subspace& v,
                      double rank_tol = kDefaultRankTol, double tol = 1e-9);

/// Orthonormal basis of ker D̃ ∩ G⁻¹(V).
Matrix input_kernel_matrix(const CanonicalForm& cf, const Subspace& v,
                           double rank_tol = kDefaultRankTol);

OutputNullingData output_nulling_data(const CanonicalForm& cf,
                                      const Tolerances& tol = {});

/// Residual norms of the friend conditions on a basis of V:
///   invariance = ‖(I − VVᵀ)(Ã + GF̃)V‖,  nulling = ‖(C̃ + D̃F̃)V‖.
struct FriendDefects {
  double invariance = 0.0;
  double nulling = 0.0;
};
FriendDefects friend_defects(const CanonicalForm& cf, const Subspace& v,
                             const Matrix& f_tilde);

}  // namespace daeobs
