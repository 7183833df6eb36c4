#pragma once

#include "daeobs/linalg.h"

namespace daeobs {

/// d(E·x)/dt = Â·x + B̂·u with E, Â ∈ ℝ^{n×n}, B̂ ∈ ℝ^{n×m}. E may be
/// singular and the pencil need not be regular.
class DaeSystem {
 public:
  /// Throws InputError on dimension mismatch or non-finite entries.
  DaeSystem(Matrix e, Matrix a_hat, Matrix b_hat);

  const Matrix& E() const { return e_; }
  const Matrix& A_hat() const { return a_hat_; }
  const Matrix& B_hat() const { return b_hat_; }
  int n() const { return static_cast<int>(e_.rows()); }
  int m() const { return static_cast<int>(b_hat_.cols()); }

 private:
  Matrix e_;
  Matrix a_hat_;
  Matrix b_hat_;
};

/// Observed DAE d(F·x)/dt = A·x + f, y = H·x + η.
class ObservedDae {
 public:
  ObservedDae(Matrix f, Matrix a, Matrix h);

  const Matrix& F() const { return f_; }
  const Matrix& A() const { return a_; }
  const Matrix& H() const { return h_; }
  int n() const { return static_cast<int>(f_.rows()); }
  int p() const { return static_cast<int>(h_.rows()); }

 private:
  Matrix f_;
  Matrix a_;
  Matrix h_;
};

/// S·E·T = diag(I_r, 0) together with the induced partitions
///
///   S·Â·T = [Ã  A12; A21 A22],  S·B̂ = [B1; B2],
///   G = [A12, B1],  C̃ = A21,  D̃ = [A22, B2].
///
/// The auxiliary system ṗ = Ãp + Gq, z = C̃p + D̃q has state p ∈ ℝ^r and
/// input q ∈ ℝ^{n−r+m}; DAE trajectories are exactly its output-zeroing
/// trajectories with T⁻¹x = (p, q₁), q = (q₁, u).
struct CanonicalForm {
  Matrix S, T, S_inv, T_inv;
  int n = 0;
  int m = 0;
  int r = 0;
  Matrix A_tilde, A12, A21, A22, B1, B2;
  Matrix G, C_tilde, D_tilde;

  /// Dimension of the auxiliary input q.
  int q_dim() const { return n - r + m; }
};

/// Canonical form from the SVD E = U Σ Vᵀ: S = [Σ_r⁻¹U_rᵀ; U_⊥ᵀ], T = V.
CanonicalForm canonical_form(const DaeSystem& sys,
                             double rank_tol = kDefaultRankTol);

/// Canonical form for caller-supplied transforms. Throws InputError unless
/// S·E·T = diag(I_r, 0) within tol·max(1, ‖E‖).
CanonicalForm canonical_form_with(const DaeSystem& sys, const Matrix& s,
                                  const Matrix& t, int r, double tol = 1e-9);

/// Step 1 of the observer pipeline: (E, Â, B̂) = (Fᵀ, Aᵀ, −Hᵀ).
DaeSystem dual_dae(const ObservedDae& obs);

}  // namespace daeobs
