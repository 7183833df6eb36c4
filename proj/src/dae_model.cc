#include "daeobs/dae_model.h"

#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

void require_finite(const Matrix& m, const char* name) {
  if (!all_finite(m)) {
    throw InputError(fmt::format("{} contains non-finite entries", name));
  }
}

CanonicalForm partition(const DaeSystem& sys, Matrix s, Matrix t, Matrix s_inv,
                        Matrix t_inv, int r) {
  CanonicalForm cf;
  cf.n = sys.n();
  cf.m = sys.m();
  cf.r = r;
  cf.S = std::move(s);
  cf.T = std::move(t);
  cf.S_inv = std::move(s_inv);
  cf.T_inv = std::move(t_inv);

  const int n = cf.n;
  const int d = n - r;
  const Matrix sat = cf.S * sys.A_hat() * cf.T;
  const Matrix sb = cf.S * sys.B_hat();
  cf.A_tilde = sat.topLeftCorner(r, r);
  cf.A12 = sat.topRightCorner(r, d);
  cf.A21 = sat.bottomLeftCorner(d, r);
  cf.A22 = sat.bottomRightCorner(d, d);
  cf.B1 = sb.topRows(r);
  cf.B2 = sb.bottomRows(d);

  cf.G.resize(r, d + cf.m);
  cf.G << cf.A12, cf.B1;
  cf.D_tilde.resize(d, d + cf.m);
  cf.D_tilde << cf.A22, cf.B2;
  cf.C_tilde = cf.A21;
  return cf;
}

}  // namespace

DaeSystem::DaeSystem(Matrix e, Matrix a_hat, Matrix b_hat)
    : e_(std::move(e)), a_hat_(std::move(a_hat)), b_hat_(std::move(b_hat)) {
  if (e_.rows() != e_.cols()) throw InputError("E must be square");
  if (a_hat_.rows() != e_.rows() || a_hat_.cols() != e_.cols()) {
    throw InputError(fmt::format("A_hat must be {0}x{0}, got {1}x{2}", e_.rows(),
                                 a_hat_.rows(), a_hat_.cols()));
  }
  if (b_hat_.rows() != e_.rows()) {
    throw InputError(fmt::format("B_hat must have {} rows, got {}", e_.rows(),
                                 b_hat_.rows()));
  }
  require_finite(e_, "E");
  require_finite(a_hat_, "A_hat");
  require_finite(b_hat_, "B_hat");
}

ObservedDae::ObservedDae(Matrix f, Matrix a, Matrix h)
    : f_(std::move(f)), a_(std::move(a)), h_(std::move(h)) {
  if (f_.rows() != f_.cols()) throw InputError("F must be square");
  if (a_.rows() != f_.rows() || a_.cols() != f_.cols()) {
    throw InputError(fmt::format("A must be {0}x{0}, got {1}x{2}", f_.rows(),
                                 a_.rows(), a_.cols()));
  }
  if (h_.cols() != f_.cols()) {
    throw InputError(fmt::format("H must have {} columns, got {}", f_.cols(),
                                 h_.cols()));
  }
  require_finite(f_, "F");
  require_finite(a_, "A");
  require_finite(h_, "H");
}

CanonicalForm canonical_form(const DaeSystem& sys, double rank_tol) {
  const int n = sys.n();
  if (n == 0) {
    return partition(sys, Matrix(0, 0), Matrix(0, 0), Matrix(0, 0), Matrix(0, 0), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(sys.E(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int r = numerical_rank(sys.E(), rank_tol);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const Vector sigma_r = svd.singularValues().head(r);

  Matrix s(n, n);
  s.topRows(r) = sigma_r.cwiseInverse().asDiagonal() * u.leftCols(r).transpose();
  s.bottomRows(n - r) = u.rightCols(n - r).transpose();
  Matrix s_inv(n, n);
  s_inv.leftCols(r) = u.leftCols(r) * sigma_r.asDiagonal();
  s_inv.rightCols(n - r) = u.rightCols(n - r);
  return partition(sys, std::move(s), v, std::move(s_inv), v.transpose(), r);
}

CanonicalForm canonical_form_with(const DaeSystem& sys, const Matrix& s,
                                  const Matrix& t, int r, double tol) {
  const int n = sys.n();
  if (s.rows() != n || s.cols() != n || t.rows() != n || t.cols() != n) {
    throw InputError("canonical_form_with: S and T must be n x n");
  }
  if (r < 0 || r > n) throw InputError("canonical_form_with: invalid rank");
  Matrix target = Matrix::Zero(n, n);
  target.topLeftCorner(r, r).setIdentity();
  const double defect = (s * sys.E() * t - target).norm();
  if (!(defect <= tol * std::max(1.0, sys.E().norm()))) {
    throw InputError(fmt::format(
        "canonical_form_with: S*E*T deviates from diag(I_r, 0) by {:.3e}", defect));
  }
  Eigen::FullPivLU<Matrix> s_lu(s);
  Eigen::FullPivLU<Matrix> t_lu(t);
  if (!s_lu.isInvertible() || !t_lu.isInvertible()) {
    throw InputError("canonical_form_with: S and T must be invertible");
  }
  return partition(sys, s, t, s_lu.inverse(), t_lu.inverse(), r);
}

DaeSystem dual_dae(const ObservedDae& obs) {
  return DaeSystem(obs.F().transpose(), obs.A().transpose(), -obs.H().transpose());
}

}  // namespace daeobs
