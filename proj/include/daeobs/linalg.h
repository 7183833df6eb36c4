#pragma once

// Rank-aware dense linear algebra shared by every stage of the pipeline.
//
// All rank decisions go through one rule: a singular value σ counts as zero
// when σ ≤ rank_tol · σ_ref · max(rows, cols), where σ_ref is the largest
// singular value of the matrix unless the caller supplies a reference scale.
// Callers that factor a projected matrix (e.g. (I − VVᵀ)M) pass the scale of
// the unprojected matrix so that round-off residue is not mistaken for rank.

#include <optional>

#include <Eigen/Dense>

namespace daeobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kDefaultSubspaceTol = 1e-8;

struct Tolerances {
  double rank_tol = kDefaultRankTol;
  /// Containment / consistency threshold for subspace membership tests.
  double subspace_tol = kDefaultSubspaceTol;
  /// Relative ARE residual bound: ‖res‖ ≤ are_tol·(1 + ‖P‖).
  double are_tol = 1e-8;
};

/// Linear subspace stored by an orthonormal basis (ambient_dim × dim).
class Subspace {
 public:
  /// Throws InputError if the columns are not orthonormal within tol.
  Subspace(Matrix basis, double tol = kDefaultSubspaceTol);

  static Subspace zero(int ambient_dim, double tol = kDefaultSubspaceTol);
  static Subspace full(int ambient_dim, double tol = kDefaultSubspaceTol);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }
  double tol() const { return tol_; }

  /// Orthogonal projector B·Bᵀ.
  Matrix projector() const;
  /// I − B·Bᵀ.
  Matrix complement_projector() const;

 private:
  Matrix basis_;
  double tol_;
};

bool all_finite(const Matrix& m);
bool is_symmetric(const Matrix& m, double rel_tol = 1e-10);
/// Smallest eigenvalue of the symmetric part of m (+inf for an empty matrix).
double min_symmetric_eigenvalue(const Matrix& m);
bool is_positive_definite(const Matrix& m, double rel_tol = 1e-12);
bool is_positive_semidefinite(const Matrix& m, double rel_tol = 1e-12);

/// Largest singular value; 0 for empty matrices.
double spectral_norm(const Matrix& m);

int numerical_rank(const Matrix& m, double rank_tol = kDefaultRankTol,
                   std::optional<double> scale = std::nullopt);

/// Moore–Penrose pseudoinverse with singular values below the rank
/// threshold treated as zero.
Matrix pseudoinverse(const Matrix& m, double rank_tol = kDefaultRankTol,
                     std::optional<double> scale = std::nullopt);

/// Orthonormal basis of {x : m·x = 0}.
Subspace kernel_basis(const Matrix& m, double rank_tol = kDefaultRankTol,
                      std::optional<double> scale = std::nullopt);

/// Orthonormal basis of the column space of m.
Subspace image_basis(const Matrix& m, double rank_tol = kDefaultRankTol,
                     std::optional<double> scale = std::nullopt);

Subspace subspace_sum(const Subspace& v, const Subspace& w,
                      double rank_tol = kDefaultRankTol);

/// V ∩ W as the kernel of the stacked complement projectors.
Subspace subspace_intersection(const Subspace& v, const Subspace& w,
                               double rank_tol = kDefaultRankTol);

/// {x : m·x ∈ V}, computed as ker((I − VVᵀ)·m) on the scale of ‖m‖.
Subspace preimage(const Matrix& m, const Subspace& v,
                  double rank_tol = kDefaultRankTol);

/// True iff W ⊆ V, i.e. ‖(I − VVᵀ)·W.basis‖ ≤ V.tol.
bool contains(const Subspace& v, const Subspace& w);

/// Subspace equality (mutual containment and equal dimension).
bool same_subspace(const Subspace& v, const Subspace& w);

/// Distance of the columns of m from V: ‖(I − VVᵀ)·m‖₂.
double distance_from(const Subspace& v, const Matrix& m);

/// M^{-1/2} for symmetric positive definite M. Throws InputError when M is
/// not symmetric or has an eigenvalue ≤ tol·λ_max.
Matrix inv_sqrt_spd(const Matrix& m, double tol = 1e-12);

/// Inverse of a symmetric positive definite matrix via Cholesky. Throws
/// InputError when the factorization fails.
Matrix spd_inverse(const Matrix& m);

/// Block-diagonal assembly diag(a, b).
Matrix block_diag(const Matrix& a, const Matrix& b);

}  // namespace daeobs
