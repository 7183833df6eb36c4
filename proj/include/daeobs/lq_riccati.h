#pragma once

#include <complex>
#include <vector>

#include "daeobs/associated_lti.h"
#include "daeobs/linalg.h"
#include "daeobs/signal.h"

namespace daeobs {

/// Cost weights of the DAE control problem: R > 0, Q > 0, Q0 ≥ 0. The
/// running cost acts on (x, u) through S = diag(Q, R).
struct LqWeights {
  Matrix Q;
  Matrix R;
  Matrix Q0;

  /// Throws InputError with the offending weight named.
  void validate(int n, int m) const;
  Matrix S() const { return block_diag(Q, R); }
};

/// Stabilizing solution of
///   0 = P A_l + A_lᵀ P − Kᵀ (D_lᵀ S D_l) K + C_lᵀ S C_l,
///   K = (D_lᵀ S D_l)⁻¹ (B_lᵀ P + D_lᵀ S C_l).
struct RiccatiSolution {
  Matrix P;
  Matrix K;
  double residual = 0.0;
  std::vector<std::complex<double>> closed_loop_spectrum;

  double max_closed_loop_real() const;
};

/// (A_c, B_c, C_x, C_u): ṡ = A_c s, s(0) = B_c E x0, x* = C_x s, u* = C_u s.
struct DynamicController {
  Matrix A_c;
  Matrix B_c;
  Matrix C_x;
  Matrix C_u;
};

/// PBH test: rank [A − λI, B] = n for every eigenvalue with Re λ ≥ 0.
bool is_stabilizable(const Matrix& a, const Matrix& b, double rank_tol = 1e-9);

/// Solves AᵀX + XA + W = 0 (Bartels–Stewart on the complex Schur form).
Matrix solve_lyapunov(const Matrix& a, const Matrix& w);

/// Stabilizing solution of AᵀP + PA − PBBᵀP + Q = 0 from the ordered Schur
/// form of the Hamiltonian [[A, −BBᵀ], [−Q, −Aᵀ]], refined by Newton–Kleinman
/// steps. Throws NotStabilizableError when the Hamiltonian has imaginary-axis
/// eigenvalues (no stabilizing solution).
Matrix solve_standard_care(const Matrix& a, const Matrix& b, const Matrix& q);

/// Residual norm (Frobenius) of the weighted ARE for a candidate P.
double are_residual(const AssociatedLti& lti, const Matrix& s, const Matrix& p);

/// Solves the weighted ARE through the pre-transformation
/// g = F̂v + U w with U = −(D_lᵀSD_l)^{−1/2}, F̂ = −(D_lᵀSD_l)⁻¹D_lᵀSC_l,
/// which reduces it to a standard problem with unit input cost.
///
/// Throws NotStabilizableError("associated LTI not stabilizable") and
/// InternalConsistencyError when D_lᵀSD_l is singular or the refined
/// residual / closed-loop spectrum violate their bounds.
RiccatiSolution solve_are(const AssociatedLti& lti, const Matrix& s,
                          const Tolerances& tol = {});
RiccatiSolution solve_are(const AssociatedLti& lti, const LqWeights& w,
                          const Tolerances& tol = {});

/// A_c = A_l − B_lK, B_c = Λ, C_x = C_s − D_sK, C_u = C_inp − D_inpK.
/// Throws InternalConsistencyError unless B_c·E·C_x = I within tol.
DynamicController assemble_controller(const AssociatedLti& lti,
                                      const RiccatiSolution& rs, double tol = 1e-9);

/// ‖B_c·E·C_x − I‖₂.
double controller_identity_defect(const AssociatedLti& lti,
                                  const DynamicController& c);

/// v0ᵀ P v0.
double optimal_cost(const RiccatiSolution& rs, const Vector& v0);

struct CostBreakdown {
  double running = 0.0;
  double terminal = 0.0;
  double total() const { return running + terminal; }
};

/// Finite-horizon cost 𝒥(v0, g, t1) with t1 the end of the grid: running
/// cost by Simpson quadrature along the RK4 trajectory plus the terminal
/// term v(t1)ᵀ(EC_s)ᵀQ0(EC_s)v(t1).
CostBreakdown evaluate_cost(const AssociatedLti& lti, const LqWeights& w,
                            const Vector& v0, const SampledSignal& g);
CostBreakdown evaluate_cost(const AssociatedLti& lti, const LqWeights& w,
                            const Vector& v0, const std::vector<double>& grid,
                            const InputFunction& g);

/// Cost of the closed loop g = −Kv on [0, t1] (RK4 at the given step).
CostBreakdown closed_loop_cost(const AssociatedLti& lti, const LqWeights& w,
                               const RiccatiSolution& rs, const Vector& v0,
                               double t1, double step);

}  // namespace daeobs
