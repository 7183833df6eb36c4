#include "daeobs/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

struct FullSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

FullSvd full_svd(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

double threshold(const Matrix& m, const Vector& sigma, double rank_tol,
                 std::optional<double> scale) {
  const double ref = scale.value_or(sigma.size() > 0 ? sigma(0) : 0.0);
  return rank_tol * ref * static_cast<double>(std::max(m.rows(), m.cols()));
}

int count_above(const Vector& sigma, double thresh) {
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > thresh) ++rank;
  }
  return rank;
}

}  // namespace

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)), tol_(tol) {
  if (tol_ < 0.0) throw InputError("Subspace tolerance must be nonnegative");
  if (basis_.cols() > basis_.rows()) {
    throw InputError("Subspace basis has more columns than ambient dimension");
  }
  if (basis_.cols() > 0) {
    const Matrix gram = basis_.transpose() * basis_;
    const double defect =
        (gram - Matrix::Identity(gram.rows(), gram.cols())).norm();
    if (!(defect <= std::max(tol_, 1e-12))) {
      throw InputError(fmt::format(
          "Subspace basis is not orthonormal (defect {:.3e})", defect));
    }
  }
}

Subspace Subspace::zero(int ambient_dim, double tol) {
  return Subspace(Matrix::Zero(ambient_dim, 0), tol);
}

Subspace Subspace::full(int ambient_dim, double tol) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim), tol);
}

Matrix Subspace::projector() const { return basis_ * basis_.transpose(); }

Matrix Subspace::complement_projector() const {
  return Matrix::Identity(ambient_dim(), ambient_dim()) - projector();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.transpose()).norm() <= rel_tol * std::max(1.0, m.norm());
}

double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_positive_definite(const Matrix& m, double rel_tol) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev(0) > rel_tol * std::max(1.0, ev(ev.size() - 1));
}

bool is_positive_semidefinite(const Matrix& m, double rel_tol) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev(0) >= -rel_tol * std::max(1.0, ev(ev.size() - 1));
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

int numerical_rank(const Matrix& m, double rank_tol, std::optional<double> scale) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sigma = svd.singularValues();
  return count_above(sigma, threshold(m, sigma, rank_tol, scale));
}

Matrix pseudoinverse(const Matrix& m, double rank_tol, std::optional<double> scale) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const FullSvd s = full_svd(m);
  const int rank = count_above(s.sigma, threshold(m, s.sigma, rank_tol, scale));
  Matrix out = Matrix::Zero(m.cols(), m.rows());
  for (int i = 0; i < rank; ++i) {
    out += s.v.col(i) * (1.0 / s.sigma(i)) * s.u.col(i).transpose();
  }
  return out;
}

Subspace kernel_basis(const Matrix& m, double rank_tol, std::optional<double> scale) {
  const int cols = static_cast<int>(m.cols());
  if (m.rows() == 0 || cols == 0) return Subspace::full(cols);
  const FullSvd s = full_svd(m);
  const int rank = count_above(s.sigma, threshold(m, s.sigma, rank_tol, scale));
  return Subspace(s.v.rightCols(cols - rank));
}

Subspace image_basis(const Matrix& m, double rank_tol, std::optional<double> scale) {
  const int rows = static_cast<int>(m.rows());
  if (rows == 0 || m.cols() == 0) return Subspace::zero(rows);
  const FullSvd s = full_svd(m);
  const int rank = count_above(s.sigma, threshold(m, s.sigma, rank_tol, scale));
  return Subspace(s.u.leftCols(rank));
}

Subspace subspace_sum(const Subspace& v, const Subspace& w, double rank_tol) {
  if (v.ambient_dim() != w.ambient_dim()) {
    throw InputError("subspace_sum: ambient dimensions differ");
  }
  Matrix stacked(v.ambient_dim(), v.dim() + w.dim());
  stacked << v.basis(), w.basis();
  // Orthonormal inputs: unit scale keeps tiny-but-genuine directions.
  const Subspace img = image_basis(stacked, rank_tol, 1.0);
  return Subspace(img.basis(), std::max(v.tol(), w.tol()));
}

Subspace subspace_intersection(const Subspace& v, const Subspace& w,
                               double rank_tol) {
  if (v.ambient_dim() != w.ambient_dim()) {
    throw InputError("subspace_intersection: ambient dimensions differ");
  }
  const int n = v.ambient_dim();
  Matrix stacked(2 * n, n);
  stacked << v.complement_projector(), w.complement_projector();
  const Subspace ker = kernel_basis(stacked, rank_tol, 1.0);
  return Subspace(ker.basis(), std::max(v.tol(), w.tol()));
}

Subspace preimage(const Matrix& m, const Subspace& v, double rank_tol) {
  if (m.rows() != v.ambient_dim()) {
    throw InputError(fmt::format(
        "preimage: map has {} rows but subspace lives in R^{}", m.rows(),
        v.ambient_dim()));
  }
  const Matrix projected = v.complement_projector() * m;
  const Subspace ker = kernel_basis(projected, rank_tol, spectral_norm(m));
  return Subspace(ker.basis(), v.tol());
}

double distance_from(const Subspace& v, const Matrix& m) {
  if (m.rows() != v.ambient_dim()) {
    throw InputError("distance_from: ambient dimensions differ");
  }
  return spectral_norm(v.complement_projector() * m);
}

bool contains(const Subspace& v, const Subspace& w) {
  if (v.ambient_dim() != w.ambient_dim()) {
    throw InputError("contains: ambient dimensions differ");
  }
  if (w.dim() == 0) return true;
  return distance_from(v, w.basis()) <= v.tol();
}

bool same_subspace(const Subspace& v, const Subspace& w) {
  return v.dim() == w.dim() && contains(v, w) && contains(w, v);
}

Matrix inv_sqrt_spd(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw InputError("inv_sqrt_spd: matrix is not square");
  if (m.size() == 0) return m;
  if (!is_symmetric(m)) throw InputError("inv_sqrt_spd: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector& ev = es.eigenvalues();
  if (!(ev(0) > tol * std::max(1.0, ev(ev.size() - 1)))) {
    throw InputError(fmt::format(
        "inv_sqrt_spd: matrix is not positive definite (min eigenvalue {:.3e})",
        ev(0)));
  }
  const Matrix& q = es.eigenvectors();
  return q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
}

Matrix spd_inverse(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) {
    throw InputError("spd_inverse: matrix is not positive definite");
  }
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace daeobs
