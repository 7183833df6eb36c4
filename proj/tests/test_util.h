#pragma once
// Random problem generators and reference computations shared by the tests.
// The reference routines deliberately avoid the library's own algorithms
// (Kronecker-product linear solves instead of Schur methods, pencil kernels
// instead of canonical forms) so they can serve as independent checks.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "daeobs/dae_model.h"
#include "daeobs/linalg.h"

namespace daeobs::testing {

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline Vector random_vector(int n, std::mt19937_64& rng) {
  return random_matrix(n, 1, rng).col(0);
}

inline Matrix random_orthogonal_matrix(int n, std::mt19937_64& rng) {
  if (n == 0) return Matrix(0, 0);
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// U·diag(s)·Vᵀ with s uniform in [lo, hi] for the first `rank` values.
inline Matrix random_rank_matrix(int rows, int cols, int rank, std::mt19937_64& rng,
                                 double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> sv(lo, hi);
  const Matrix u = random_orthogonal_matrix(rows, rng);
  const Matrix v = random_orthogonal_matrix(cols, rng);
  Matrix s = Matrix::Zero(rows, cols);
  for (int i = 0; i < rank; ++i) s(i, i) = sv(rng);
  return u * s * v.transpose();
}

inline Matrix random_spd(int n, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> ev(lo, hi);
  const Matrix q = random_orthogonal_matrix(n, rng);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = ev(rng);
  return q * d.asDiagonal() * q.transpose();
}

/// Random DAE E·ẋ = Â·x + B̂·u with rank E = r.
inline DaeSystem random_dae(int n, int m, int r, std::mt19937_64& rng) {
  return DaeSystem(random_rank_matrix(n, n, r, rng), random_matrix(n, n, rng),
                   random_matrix(n, m, rng));
}

/// DAE assembled from chosen canonical blocks: Ã (r×r), G = [A12, B1],
/// C̃ = A21, D̃ = [A22, B2], mapped back through random well-conditioned S, T.
struct BlockDae {
  DaeSystem sys;
  Matrix S, T;
  Matrix A_tilde, G, C_tilde, D_tilde;
};

inline BlockDae block_dae(const Matrix& a_tilde, const Matrix& g, const Matrix& c_tilde,
                          const Matrix& d_tilde, int m, std::mt19937_64& rng) {
  const int r = static_cast<int>(a_tilde.rows());
  const int n = r + static_cast<int>(c_tilde.rows());
  const int nr = n - r;
  Matrix s = random_rank_matrix(n, n, n, rng);
  Matrix t = random_rank_matrix(n, n, n, rng);
  Matrix core = Matrix::Zero(n, n);
  core.topLeftCorner(r, r) = Matrix::Identity(r, r);
  Matrix a_blocks(n, n);
  a_blocks << a_tilde, g.leftCols(nr), c_tilde, d_tilde.leftCols(nr);
  Matrix b_blocks(n, m);
  b_blocks << g.rightCols(m), d_tilde.rightCols(m);
  const Matrix s_inv = s.inverse();
  const Matrix t_inv = t.inverse();
  DaeSystem sys(s_inv * core * t_inv, s_inv * a_blocks * t_inv, s_inv * b_blocks);
  return BlockDae{std::move(sys), s, t, a_tilde, g, c_tilde, d_tilde};
}

/// Solves AᵀX + XA + W = 0 through the n²×n² Kronecker system.
inline Matrix kron_lyapunov(const Matrix& a, const Matrix& w) {
  const int n = static_cast<int>(a.rows());
  const Matrix id = Matrix::Identity(n, n);
  Matrix big = Matrix::Zero(n * n, n * n);
  // vec(AᵀX) = (I ⊗ Aᵀ)vec X, vec(XA) = (Aᵀ ⊗ I)vec X.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      big.block(i * n, j * n, n, n) += id(i, j) * a.transpose();
      big.block(i * n, j * n, n, n) += a(j, i) * id;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(w.data(), n * n);
  const Vector x = big.fullPivLu().solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

/// Stabilizing solution of AᵀP + PA − (PB + N)R⁻¹(BᵀP + Nᵀ) + Q = 0 by
/// Newton–Kleinman iteration from a stabilizing gain k0, with Kronecker
/// Lyapunov solves.
inline Matrix newton_care(const Matrix& a, const Matrix& b, const Matrix& q,
                          const Matrix& r, const Matrix& n_cross, Matrix k0,
                          int iterations = 60) {
  const Matrix r_inv = r.inverse();
  Matrix p = Matrix::Zero(a.rows(), a.rows());
  Matrix k = std::move(k0);
  for (int it = 0; it < iterations; ++it) {
    const Matrix a_cl = a - b * k;
    const Matrix w = q + k.transpose() * r * k - n_cross * k - k.transpose() * n_cross.transpose();
    const Matrix next = kron_lyapunov(a_cl, w);
    k = r_inv * (b.transpose() * next + n_cross.transpose());
    const double change = (next - p).norm();
    p = next;
    if (change <= 1e-15 * (1.0 + p.norm())) break;
  }
  return p;
}

/// Bass's construction of a stabilizing gain for a controllable pair:
/// X solves (A + βI)X + X(A + βI)ᵀ = 2BBᵀ with β above the spectral
/// abscissa, and K = BᵀX⁻¹.
inline Matrix bass_gain(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.rows());
  const double beta = a.norm() + 1.0;
  const Matrix shifted = a + beta * Matrix::Identity(n, n);
  const Matrix x = kron_lyapunov(-shifted.transpose(), 2.0 * b * b.transpose());
  return b.transpose() * x.inverse();
}

inline double max_real_eig(const Matrix& a) {
  if (a.rows() == 0) return -1.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

/// Shifts A so that its spectrum lies in Re λ ≤ −margin.
inline Matrix make_stable(const Matrix& a, double margin = 0.3) {
  const double top = max_real_eig(a);
  if (top < -margin) return a;
  return a - (top + margin) * Matrix::Identity(a.rows(), a.cols());
}

/// ∫₀ʰ e^{Mᵀt}·W·e^{Mt} dt by the Van Loan block exponential.
inline Matrix gramian_integral(const Matrix& m, const Matrix& w, double h) {
  const int d = static_cast<int>(m.rows());
  Matrix big = Matrix::Zero(2 * d, 2 * d);
  big.topLeftCorner(d, d) = -m.transpose();
  big.topRightCorner(d, d) = w;
  big.bottomRightCorner(d, d) = m;
  const Matrix e = Matrix(big * h).exp();
  const Matrix out = e.bottomRightCorner(d, d).transpose() * e.topRightCorner(d, d);
  return 0.5 * (out + out.transpose());
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() / scale;
}

}  // namespace daeobs::testing
