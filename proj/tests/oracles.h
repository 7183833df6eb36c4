#pragma once
// Independent checks used by both the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>

#include "daeobs/associated_lti.h"
#include "daeobs/dae_model.h"
#include "daeobs/linalg.h"
#include "daeobs/signal.h"
#include "test_util.h"

namespace daeobs::testing {

/// Largest central-difference residual of d(Ex)/dt − Âx − B̂u along an
/// LTI-generated trajectory on [0, t1] with step h, relative to the size of
/// the terms involved.
inline double lti_trajectory_defect(const DaeSystem& sys, const AssociatedLti& lti,
                                    const Vector& v0, const InputFunction& g, double t1,
                                    double h) {
  const int steps = static_cast<int>(std::lround(t1 / h));
  const std::vector<double> grid = uniform_grid(t1, steps);
  const DaeTrajectory traj = lti_trajectory(lti, v0, grid, g);
  const Matrix ex = sys.E() * traj.x.values;
  double worst = 0.0;
  double scale = 1.0;
  for (int i = 1; i < steps; ++i) {
    const Vector rhs = sys.A_hat() * traj.x.values.col(i) +
                       (lti.m > 0 ? Vector(sys.B_hat() * traj.u.values.col(i))
                                  : Vector::Zero(lti.n));
    const Vector derivative = (ex.col(i + 1) - ex.col(i - 1)) / (2.0 * h);
    worst = std::max(worst, (derivative - rhs).norm());
    scale = std::max(scale, rhs.norm());
  }
  return worst / scale;
}

struct ModeMatch {
  double output_residual = 0.0;
  double dynamics_residual = 0.0;
  bool found = false;
};

/// Builds an exponential solution x = e^{λt}x̄, u = e^{λt}ū of the DAE from
/// ker [λE − Â, −B̂] and recovers the LTI trajectory that should reproduce
/// it: v = Λ·E·x and g = D_l⁺([x; u] − C_l v). Returns how well
/// [x; u] = C_l v + D_l g and v̇ = A_l v + B_l g hold (relative).
inline ModeMatch match_exponential_mode(const DaeSystem& sys, const AssociatedLti& lti,
                                        double lambda, std::mt19937_64& rng) {
  const int n = sys.n();
  const int m = sys.m();
  Matrix pencil(n, n + m);
  pencil << lambda * sys.E() - sys.A_hat(), -sys.B_hat();
  Eigen::FullPivLU<Matrix> lu(pencil);
  const Matrix kernel = lu.kernel();
  ModeMatch out;
  if (lu.dimensionOfKernel() == 0) return out;
  out.found = true;
  Vector xu = kernel * random_vector(static_cast<int>(kernel.cols()), rng);
  xu /= xu.norm();
  const Vector x = xu.head(n);
  const Vector v = lti.Lambda * (sys.E() * x);
  const Vector rest = xu - lti.C_l * v;
  const Vector g = lti.k > 0 ? Vector(pseudoinverse(lti.D_l) * rest) : Vector::Zero(0);
  const Vector recon = lti.C_l * v + (lti.k > 0 ? Vector(lti.D_l * g) : Vector::Zero(n + m));
  out.output_residual = (recon - xu).norm();
  const Vector dyn = lambda * v - lti.A_l * v - (lti.k > 0 ? Vector(lti.B_l * g) : Vector::Zero(v.size()));
  out.dynamics_residual =
      dyn.norm() / std::max(1.0, std::abs(lambda) * v.norm() + spectral_norm(lti.A_l) * v.norm());
  return out;
}

/// Minimum of ∫₀^τ ‖C̃x₁ + D̃q‖² over polynomial inputs q of degree ≤ d,
/// from x₁(0) = x0, for ẋ₁ = Ãx₁ + Gq. The polynomial coefficients are
/// carried as extra states (a chain of integrators), so the cost is an exact
/// quadratic form whose minimum over the coefficients is a least-squares
/// problem.
inline double polynomial_nulling_cost(const Matrix& a_tilde, const Matrix& g,
                                      const Matrix& c_tilde, const Matrix& d_tilde,
                                      const Vector& x0, int degree, double tau) {
  const int r = static_cast<int>(a_tilde.rows());
  const int q = static_cast<int>(g.cols());
  const int nc = q * (degree + 1);
  const int d = r + nc;
  Matrix m = Matrix::Zero(d, d);
  m.topLeftCorner(r, r) = a_tilde;
  m.block(0, r, r, q) = g;
  for (int j = 0; j < degree; ++j) {
    m.block(r + j * q, r + (j + 1) * q, q, q) = Matrix::Identity(q, q);
  }
  Matrix out_map = Matrix::Zero(c_tilde.rows(), d);
  out_map.leftCols(r) = c_tilde;
  out_map.block(0, r, c_tilde.rows(), q) = d_tilde;
  const Matrix w = gramian_integral(m, out_map.transpose() * out_map, tau);

  // W = ΦᵀΦ; minimize ‖Φ_x x0 + Φ_c c‖² over c.
  Eigen::SelfAdjointEigenSolver<Matrix> es(w);
  const Vector ev = es.eigenvalues().cwiseMax(0.0);
  const Matrix phi = ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Vector target = phi.leftCols(r) * x0;
  if (nc == 0) return target.squaredNorm();
  const Matrix phi_c = phi.rightCols(nc);
  const Vector c = phi_c.completeOrthogonalDecomposition().solve(-target);
  return (target + phi_c * c).squaredNorm();
}

/// Exact-zeroing test through Taylor jets. An input that keeps
/// y = C̃x + D̃q identically zero near t = 0 makes every output derivative
/// vanish there:
///   y⁽ʲ⁾(0) = C̃Ãʲx0 + Σ_{i<j} C̃Ãʲ⁻¹⁻ⁱG q⁽ⁱ⁾(0) + D̃q⁽ʲ⁾(0) = 0,  j = 0..J.
/// Returns the distance of the x0 term from the span of all input jets,
/// relative to the size of the x0 map (0 when some jet nulls J + 1
/// derivatives). Time is rescaled so that ‖Ã‖, ‖G‖ ≤ 1.
inline double jet_nulling_residual(const Matrix& a_tilde, const Matrix& g,
                                   const Matrix& c_tilde, const Matrix& d_tilde,
                                   const Vector& x0, int order) {
  const int r = static_cast<int>(a_tilde.rows());
  const int q = static_cast<int>(g.cols());
  const int p = static_cast<int>(c_tilde.rows());
  const double s = std::max({1.0, a_tilde.norm(), g.norm()});
  const Matrix a = a_tilde / s;
  const Matrix gs = g / s;
  const int blocks = order + 1;
  Matrix mx(p * blocks, r);
  Matrix mq = Matrix::Zero(p * blocks, q * blocks);
  std::vector<Matrix> ca_pow;  // C̃Ãʲ
  Matrix cur = c_tilde;
  for (int j = 0; j < blocks; ++j) {
    ca_pow.push_back(cur);
    cur = cur * a;
  }
  for (int j = 0; j < blocks; ++j) {
    mx.middleRows(j * p, p) = ca_pow[j];
    mq.block(j * p, j * q, p, q) = d_tilde;
    for (int i = 0; i < j; ++i) mq.block(j * p, i * q, p, q) = ca_pow[j - 1 - i] * gs;
  }
  Eigen::JacobiSVD<Matrix> svd(mq, Eigen::ComputeFullU);
  const Vector sv = svd.singularValues();
  int rank = 0;
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
  const Matrix u_perp = svd.matrixU().rightCols(mq.rows() - rank);
  const Vector target = mx * x0;
  return (u_perp.transpose() * target).norm() / std::max(1.0, spectral_norm(mx)) /
         std::max(1e-300, x0.norm());
}

}  // namespace daeobs::testing
