#include "daeobs/lq_riccati.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Swaps the adjacent diagonal entries k, k+1 of the upper triangular T with
// a Givens similarity, updating the accumulated unitary factor U.
void swap_adjacent(CMatrix& t, CMatrix& u, int k) {
  const Complex t11 = t(k, k);
  const Complex t22 = t(k + 1, k + 1);
  const Complex f = t(k, k + 1);
  const Complex g = t22 - t11;
  const double norm = std::hypot(std::abs(f), std::abs(g));
  if (norm == 0.0) return;
  double c;
  Complex s;
  if (std::abs(f) == 0.0) {
    c = 0.0;
    s = 1.0;
  } else {
    c = std::abs(f) / norm;
    s = (f / std::abs(f)) * std::conj(g) / norm;
  }
  Eigen::Matrix2cd rot;
  rot << c, s, -std::conj(s), c;
  const Eigen::Matrix2cd rot_h = rot.adjoint();
  t.middleRows(k, 2) = rot * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * rot_h;
  u.middleCols(k, 2) = u.middleCols(k, 2) * rot_h;
  t(k + 1, k) = 0.0;
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
}

// Reorders the Schur form so that eigenvalues with negative real part come
// first; returns how many there are.
int order_stable_first(CMatrix& t, CMatrix& u) {
  const int size = static_cast<int>(t.rows());
  int placed = 0;
  for (int j = 0; j < size; ++j) {
    if (t(j, j).real() < 0.0) {
      for (int p = j - 1; p >= placed; --p) swap_adjacent(t, u, p);
      ++placed;
    }
  }
  return placed;
}

double care_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                     const Matrix& p) {
  return (a.transpose() * p + p * a - p * b * b.transpose() * p + q).norm();
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

std::vector<Complex> eigenvalues(const Matrix& a) {
  std::vector<Complex> out;
  if (a.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es(a, false);
  const auto ev = es.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  return out;
}

Matrix gain_denominator(const AssociatedLti& lti, const Matrix& s) {
  return symmetrize(lti.D_l.transpose() * s * lti.D_l);
}

Matrix gain(const AssociatedLti& lti, const Matrix& s, const Matrix& w_inv,
            const Matrix& p) {
  return w_inv * (lti.B_l.transpose() * p + lti.D_l.transpose() * s * lti.C_l);
}

}  // namespace

void LqWeights::validate(int n, int m) const {
  auto square = [](const Matrix& w, int dim, const char* name) {
    if (w.rows() != dim || w.cols() != dim) {
      throw InputError(fmt::format("{} must be {}x{}, got {}x{}", name, dim, dim,
                                   w.rows(), w.cols()));
    }
    if (!all_finite(w)) throw InputError(fmt::format("{} has non-finite entries", name));
  };
  square(Q, n, "Q");
  square(R, m, "R");
  square(Q0, n, "Q0");
  if (!is_symmetric(Q) || !is_positive_definite(Q)) {
    throw InputError("Q must be symmetric positive definite");
  }
  if (!is_symmetric(R) || !is_positive_definite(R)) {
    throw InputError("R must be symmetric positive definite");
  }
  if (!is_symmetric(Q0) || !is_positive_semidefinite(Q0)) {
    throw InputError("Q0 must be symmetric positive semidefinite");
  }
}

double RiccatiSolution::max_closed_loop_real() const {
  double out = -std::numeric_limits<double>::infinity();
  for (const auto& z : closed_loop_spectrum) out = std::max(out, z.real());
  return out;
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double rank_tol) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return true;
  const double scale =
      std::max(1.0, spectral_norm(a) + spectral_norm(b));
  for (const Complex& lambda : eigenvalues(a)) {
    if (lambda.real() < -rank_tol * scale) continue;
    CMatrix pencil(n, n + b.cols());
    pencil.leftCols(n) = a.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    pencil.rightCols(b.cols()) = b.cast<Complex>();
    Eigen::JacobiSVD<CMatrix> svd(pencil);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= rank_tol * scale * (n + b.cols())) return false;
  }
  return true;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& w) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || w.rows() != n || w.cols() != n) {
    throw InputError("solve_lyapunov: dimension mismatch");
  }
  if (n == 0) return Matrix(0, 0);
  Eigen::ComplexSchur<CMatrix> schur(a.cast<Complex>());
  const CMatrix& t = schur.matrixT();
  const CMatrix& u = schur.matrixU();
  const CMatrix c = u.adjoint() * w.cast<Complex>() * u;
  // Tᴴ Y + Y T = −C, solved column by column (Tᴴ is lower triangular).
  const CMatrix t_h = t.adjoint();
  CMatrix y(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXcd rhs = -c.col(j);
    if (j > 0) rhs -= y.leftCols(j) * t.col(j).head(j);
    const CMatrix shifted = t_h + t(j, j) * CMatrix::Identity(n, n);
    y.col(j) = shifted.triangularView<Eigen::Lower>().solve(rhs);
  }
  return symmetrize((u * y * u.adjoint()).real());
}

Matrix solve_standard_care(const Matrix& a, const Matrix& b, const Matrix& q) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n) {
    throw InputError("solve_standard_care: dimension mismatch");
  }
  if (n == 0) return Matrix(0, 0);
  Matrix h(2 * n, 2 * n);
  h << a, -b * b.transpose(), -q, -a.transpose();
  Eigen::ComplexSchur<CMatrix> schur(h.cast<Complex>());
  CMatrix t = schur.matrixT();
  CMatrix u = schur.matrixU();
  const double h_scale = std::max(1.0, spectral_norm(h));
  for (int i = 0; i < 2 * n; ++i) {
    if (std::abs(t(i, i).real()) <= 1e-12 * h_scale) {
      throw NotStabilizableError(
          "Hamiltonian has eigenvalues on the imaginary axis; no stabilizing "
          "Riccati solution");
    }
  }
  if (order_stable_first(t, u) != n) {
    throw NotStabilizableError("Hamiltonian stable subspace has wrong dimension");
  }
  const CMatrix x1 = u.topLeftCorner(n, n);
  const CMatrix x2 = u.bottomLeftCorner(n, n);
  Eigen::FullPivLU<CMatrix> lu(x1);
  if (!lu.isInvertible()) {
    throw NotStabilizableError("stable Hamiltonian subspace is not a graph");
  }
  const CMatrix p_c = x2 * lu.inverse();
  Matrix p = symmetrize(p_c.real());

  // Newton–Kleinman refinement: each step solves a Lyapunov equation for
  // the closed loop of the current iterate.
  double res = care_residual(a, b, q, p);
  for (int it = 0; it < 4 && res > 0.0; ++it) {
    const Matrix k = b.transpose() * p;
    const Matrix a_cl = a - b * k;
    bool hurwitz = true;
    for (const Complex& z : eigenvalues(a_cl)) hurwitz = hurwitz && z.real() < 0.0;
    if (!hurwitz) break;
    Matrix next = solve_lyapunov(a_cl, q + k.transpose() * k);
    const double next_res = care_residual(a, b, q, next);
    if (!(next_res < res)) break;
    p = std::move(next);
    res = next_res;
  }
  return p;
}

double are_residual(const AssociatedLti& lti, const Matrix& s, const Matrix& p) {
  const Matrix w = gain_denominator(lti, s);
  const Matrix w_inv = lti.k > 0 ? spd_inverse(w) : Matrix(0, 0);
  const Matrix k = gain(lti, s, w_inv, p);
  const Matrix res = p * lti.A_l + lti.A_l.transpose() * p - k.transpose() * w * k +
                     lti.C_l.transpose() * s * lti.C_l;
  return res.norm();
}

RiccatiSolution solve_are(const AssociatedLti& lti, const Matrix& s,
                          const Tolerances& tol) {
  const int nl = lti.n + lti.m;
  if (s.rows() != nl || s.cols() != nl) {
    throw InputError("solve_are: cost weight S has wrong size");
  }
  if (!is_symmetric(s) || !is_positive_definite(s)) {
    throw InputError("solve_are: cost weight S must be symmetric positive definite");
  }
  if (!is_stabilizable(lti.A_l, lti.B_l)) {
    throw NotStabilizableError("associated LTI not stabilizable");
  }

  const Matrix w = gain_denominator(lti, s);
  Matrix w_inv(0, 0);
  Matrix u_scale(0, 0);
  if (lti.k > 0) {
    try {
      u_scale = -inv_sqrt_spd(w);
      w_inv = spd_inverse(w);
    } catch (const InputError&) {
      throw InternalConsistencyError("D_l^T S D_l is singular");
    }
  }
  const Matrix f_hat = -w_inv * lti.D_l.transpose() * s * lti.C_l;
  const Matrix a_bar = lti.A_l + lti.B_l * f_hat;
  const Matrix b_bar = lti.B_l * u_scale;
  const Matrix c_bar = lti.C_l + lti.D_l * f_hat;
  const Matrix q_bar = symmetrize(c_bar.transpose() * s * c_bar);

  RiccatiSolution out;
  out.P = solve_standard_care(a_bar, b_bar, q_bar);
  out.K = gain(lti, s, w_inv, out.P);
  out.residual = are_residual(lti, s, out.P);
  out.closed_loop_spectrum = eigenvalues(lti.A_l - lti.B_l * out.K);

  const double bound = tol.are_tol * (1.0 + out.P.norm());
  if (!(out.residual <= bound)) {
    throw InternalConsistencyError(fmt::format(
        "Riccati residual {:.3e} exceeds {:.3e}", out.residual, bound));
  }
  if (lti.n_hat > 0 && !(out.max_closed_loop_real() < 0.0)) {
    throw InternalConsistencyError("Riccati closed loop is not Hurwitz");
  }
  return out;
}

RiccatiSolution solve_are(const AssociatedLti& lti, const LqWeights& w,
                          const Tolerances& tol) {
  w.validate(lti.n, lti.m);
  return solve_are(lti, w.S(), tol);
}

DynamicController assemble_controller(const AssociatedLti& lti,
                                      const RiccatiSolution& rs, double tol) {
  DynamicController c;
  c.A_c = lti.A_l - lti.B_l * rs.K;
  c.B_c = lti.Lambda;
  c.C_x = lti.C_s - lti.D_s * rs.K;
  c.C_u = lti.C_inp - lti.D_inp * rs.K;
  const double defect = controller_identity_defect(lti, c);
  if (!(defect <= tol)) {
    throw InternalConsistencyError(
        fmt::format("controller identity B_c E C_x = I violated: {:.3e}", defect));
  }
  return c;
}

double controller_identity_defect(const AssociatedLti& lti,
                                  const DynamicController& c) {
  return spectral_norm(c.B_c * lti.E * c.C_x -
                       Matrix::Identity(lti.n_hat, lti.n_hat));
}

double optimal_cost(const RiccatiSolution& rs, const Vector& v0) {
  if (v0.size() != rs.P.rows()) throw InputError("optimal_cost: v0 has wrong size");
  return v0.dot(rs.P * v0);
}

namespace {

CostBreakdown cost_of(const AssociatedLti& lti, const LqWeights& w,
                      const SampledSignal& v, const SampledSignal& g) {
  const SampledSignal nu = output_map(lti.C_l, v, lti.D_l, g);
  CostBreakdown out;
  out.running = simpson(nu.times, quadratic_series(nu, w.S()));
  const Vector x_end = lti.E * lti.C_s * v.values.col(v.size() - 1);
  out.terminal = x_end.dot(w.Q0 * x_end);
  return out;
}

}  // namespace

CostBreakdown evaluate_cost(const AssociatedLti& lti, const LqWeights& w,
                            const Vector& v0, const SampledSignal& g) {
  w.validate(lti.n, lti.m);
  const SampledSignal v = integrate_lti(lti.A_l, lti.B_l, v0, g);
  return cost_of(lti, w, v, g);
}

CostBreakdown evaluate_cost(const AssociatedLti& lti, const LqWeights& w,
                            const Vector& v0, const std::vector<double>& grid,
                            const InputFunction& g) {
  w.validate(lti.n, lti.m);
  const SampledSignal v = integrate_lti(lti.A_l, lti.B_l, v0, grid, g);
  return cost_of(lti, w, v, sample(g, grid));
}

CostBreakdown closed_loop_cost(const AssociatedLti& lti, const LqWeights& w,
                               const RiccatiSolution& rs, const Vector& v0,
                               double t1, double step) {
  w.validate(lti.n, lti.m);
  const int n_steps = std::max(2, static_cast<int>(std::ceil(t1 / step)));
  const std::vector<double> grid = uniform_grid(t1, n_steps);
  const Matrix a_cl = lti.A_l - lti.B_l * rs.K;
  const SampledSignal v =
      integrate_lti(a_cl, Matrix(lti.n_hat, 0), v0, SampledSignal::zeros(grid, 0));
  const SampledSignal g(grid, -rs.K * v.values);
  return cost_of(lti, w, v, g);
}

}  // namespace daeobs
