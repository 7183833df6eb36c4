#include "daeobs/observer.h"

#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

void require_spd(const Matrix& m, int dim, const char* name) {
  if (m.rows() != dim || m.cols() != dim) {
    throw InputError(fmt::format("{} must be {}x{}, got {}x{}", name, dim, dim,
                                 m.rows(), m.cols()));
  }
  if (!all_finite(m) || !is_symmetric(m) || !is_positive_definite(m)) {
    throw InputError(fmt::format("{} must be symmetric positive definite", name));
  }
}

}  // namespace

void EstimationProblem::validate() const {
  const int n = obs.n();
  require_spd(Q0, n, "Q0");
  require_spd(Q, n, "Q");
  require_spd(R, obs.p(), "R");
  if (ell.size() != n) {
    throw InputError(fmt::format("ell must have length {}, got {}", n, ell.size()));
  }
  if (!all_finite(ell)) throw InputError("ell has non-finite entries");
}

Matrix lambda_opt(const Matrix& f, const Matrix& q0, double rank_tol) {
  const int n = static_cast<int>(f.rows());
  const Matrix ft = f.transpose();
  const Matrix u = kernel_basis(ft, rank_tol).basis();
  if (u.cols() == 0) return Matrix::Zero(n, n);
  const Matrix q0_inv = spd_inverse(q0);
  const Matrix gram = u.transpose() * q0_inv * u;
  return u * gram.ldlt().solve(u.transpose() * q0_inv * pseudoinverse(ft, rank_tol));
}

Matrix q0_bar(const Matrix& f, const Matrix& q0, double rank_tol) {
  const Matrix diff = pseudoinverse(f.transpose(), rank_tol) - lambda_opt(f, q0, rank_tol);
  const Matrix out = diff.transpose() * spd_inverse(q0) * diff;
  return 0.5 * (out + out.transpose());
}

DualSynthesis synthesize_dual(const EstimationProblem& prob, const Tolerances& tol) {
  prob.validate();
  return synthesize_dual(prob, construct(dual_dae(prob.obs), tol), tol);
}

DualSynthesis synthesize_dual(const EstimationProblem& prob, Construction dual,
                              const Tolerances& tol) {
  prob.validate();
  const ObservedDae& obs = prob.obs;
  if (dual.lti.n != obs.n() || dual.lti.m != obs.p()) {
    throw InputError("synthesize_dual: construction does not match the dual DAE");
  }
  LqWeights weights{spd_inverse(prob.Q), spd_inverse(prob.R),
                    q0_bar(obs.F(), prob.Q0, tol.rank_tol)};
  RiccatiSolution rs;
  try {
    rs = solve_are(dual.lti, weights.S(), tol);
  } catch (const NotStabilizableError&) {
    throw NotStabilizableError("dual associated LTI not stabilizable");
  }
  DynamicController controller = assemble_controller(dual.lti, rs);
  return DualSynthesis{obs,     prob.Q0,           prob.Q,           prob.R,
                       std::move(dual), std::move(weights), std::move(rs),
                       std::move(controller)};
}

bool DualSynthesis::estimable(const Vector& ell) const {
  if (ell.size() != obs.n()) throw InputError("ell has wrong length");
  return is_consistent(dual.lti, dual.lti.E, ell);
}

Observer DualSynthesis::observer_for(const Vector& ell) const {
  if (!estimable(ell)) {
    throw NotEstimableError("functional ell not estimable: dual DAE has no solution on [0,inf)");
  }
  const AssociatedLti& lti = dual.lti;
  const Matrix& f = obs.F();
  Observer o;
  o.ell = ell;
  o.p = obs.p();
  o.P = riccati.P;
  o.Lambda = lti.Lambda;
  o.A_o = controller.A_c.transpose();
  o.B_o = controller.C_u.transpose();
  o.C_o = ell.transpose() * f * controller.B_c.transpose();
  const Vector v0 = lti.Lambda * (f.transpose() * ell);
  o.sigma = v0.dot(riccati.P * v0);
  o.kernel_C = lti.C_l - lti.D_l * riccati.K;
  o.kernel_A = controller.A_c;
  o.kernel_v0 = v0;

  const double max_re = riccati.max_closed_loop_real();
  o.checks.push_back({"A_o stable", lti.n_hat > 0 ? max_re : -1.0, 0.0,
                      lti.n_hat == 0 || max_re < 0.0});
  const double sigma_tol = 1e-12 * (1.0 + riccati.P.norm()) * std::max(1.0, v0.squaredNorm());
  o.checks.push_back({"sigma >= 0", -o.sigma, sigma_tol, o.sigma >= -sigma_tol});
  o.checks.push_back({"Riccati residual", riccati.residual,
                      1e-8 * (1.0 + riccati.P.norm()),
                      riccati.residual <= 1e-8 * (1.0 + riccati.P.norm())});
  const double id_defect = controller_identity_defect(lti, controller);
  o.checks.push_back({"B_c E C_x = I", id_defect, 1e-9, id_defect <= 1e-9});
  const double kernel_gap =
      spectral_norm(o.kernel_C.bottomRows(o.p).transpose() - o.B_o);
  const double kernel_tol = 1e-12 * std::max(1.0, spectral_norm(o.kernel_C));
  o.checks.push_back({"B_o = y-rows of (C_l - D_l K)^T", kernel_gap, kernel_tol,
                      kernel_gap <= kernel_tol});
  for (const auto& c : o.checks) {
    if (!c.pass) {
      throw InternalConsistencyError(
          fmt::format("observer invariant '{}' violated: {:.3e}", c.name, c.value));
    }
  }
  return o;
}

Observer synthesize(const EstimationProblem& prob, const Tolerances& tol) {
  return synthesize_dual(prob, tol).observer_for(prob.ell);
}

Vector observer_kernel(const Observer& obsv, double t, double s) {
  if (s > t) throw InputError("observer_kernel requires s <= t");
  if (obsv.kernel_A.rows() == 0) return Vector::Zero(obsv.kernel_C.rows());
  const Matrix a = obsv.kernel_A * (t - s);
  const Matrix e = a.exp();
  return obsv.kernel_C * (e * obsv.kernel_v0);
}

Vector observer_output_kernel(const Observer& obsv, double t, double s) {
  return observer_kernel(obsv, t, s).tail(obsv.p);
}

}  // namespace daeobs
