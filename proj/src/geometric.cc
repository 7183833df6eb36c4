#include "daeobs/geometric.h"

#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

// Unprojected reference scale for rank decisions on the stacked systems.
double system_scale(const CanonicalForm& cf) {
  const int r = cf.r;
  const int d = cf.n - r;
  Matrix full(r + d, r + cf.q_dim());
  full << cf.A_tilde, cf.G, cf.C_tilde, cf.D_tilde;
  return std::max(spectral_norm(full), 1.0);
}

}  // namespace

Subspace weakly_observable_subspace(const CanonicalForm& cf, double rank_tol,
                                    std::vector<int>* iteration_dims) {
  const int r = cf.r;
  const int d = cf.n - r;
  const int nq = cf.q_dim();
  Subspace current = Subspace::full(r);
  if (iteration_dims) iteration_dims->assign(1, r);
  if (r == 0) return current;

  const double scale = system_scale(cf);
  for (int iter = 0; iter <= r; ++iter) {
    const Matrix p_perp = current.complement_projector();
    Matrix stacked(r + d, r + nq);
    stacked << p_perp * cf.A_tilde, p_perp * cf.G, cf.C_tilde, cf.D_tilde;
    const Subspace ker = kernel_basis(stacked, rank_tol, scale);
    // Orthonormal kernel columns: their x-parts are O(1), so unit scale.
    Subspace next = image_basis(ker.basis().topRows(r), rank_tol, 1.0);
    if (iteration_dims) iteration_dims->push_back(next.dim());
    if (next.dim() == current.dim()) return next;
    current = std::move(next);
  }
  throw InternalConsistencyError(
      "weakly_observable_subspace: iteration failed to reach a fixed point");
}

Matrix compute_friend(const CanonicalForm& cf, const Subspace& v, double rank_tol,
                      double tol) {
  const int r = cf.r;
  const int d = cf.n - r;
  const int nq = cf.q_dim();
  if (v.ambient_dim() != r) {
    throw InputError("compute_friend: subspace must live in R^r");
  }
  if (v.dim() == 0) return Matrix::Zero(nq, r);

  const Matrix p_perp = v.complement_projector();
  Matrix lhs(r + d, nq);
  lhs << p_perp * cf.G, cf.D_tilde;
  Matrix rhs(r + d, v.dim());
  rhs << p_perp * cf.A_tilde * v.basis(), cf.C_tilde * v.basis();

  const double scale = system_scale(cf);
  const Matrix u = -pseudoinverse(lhs, rank_tol, scale) * rhs;
  const double residual = (lhs * u + rhs).norm();
  if (!(residual <= tol * scale)) {
    throw InternalConsistencyError(fmt::format(
        "compute_friend: no friend keeps V invariant and output-nulling "
        "(residual {:.3e})",
        residual));
  }
  return u * v.basis().transpose();
}

Matrix input_kernel_matrix(const CanonicalForm& cf, const Subspace& v,
                           double rank_tol) {
  const int nq = cf.q_dim();
  const Subspace ker_d = kernel_basis(cf.D_tilde, rank_tol,
                                      std::max(spectral_norm(cf.D_tilde), 1.0));
  const Subspace pre_g =
      cf.r == 0 ? Subspace::full(nq) : preimage(cf.G, v, rank_tol);
  return subspace_intersection(ker_d, pre_g, rank_tol).basis();
}

OutputNullingData output_nulling_data(const CanonicalForm& cf,
                                      const Tolerances& tol) {
  std::vector<int> dims;
  Subspace v = weakly_observable_subspace(cf, tol.rank_tol, &dims);
  Matrix f_tilde = compute_friend(cf, v, tol.rank_tol);
  Matrix l = input_kernel_matrix(cf, v, tol.rank_tol);
  const int k = static_cast<int>(l.cols());
  return OutputNullingData{std::move(v), std::move(f_tilde), std::move(l), k,
                           std::move(dims)};
}

FriendDefects friend_defects(const CanonicalForm& cf, const Subspace& v,
                             const Matrix& f_tilde) {
  FriendDefects out;
  if (v.dim() == 0) return out;
  const Matrix closed = (cf.A_tilde + cf.G * f_tilde) * v.basis();
  out.invariance = spectral_norm(v.complement_projector() * closed);
  out.nulling = spectral_norm((cf.C_tilde + cf.D_tilde * f_tilde) * v.basis());
  return out;
}

}  // namespace daeobs
