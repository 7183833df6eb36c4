#include "daeobs/associated_lti.h"

#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

void enforce(const std::vector<InvariantCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) {
      throw InternalConsistencyError(fmt::format(
          "associated LTI invariant '{}' violated: {:.3e} > {:.3e}", c.name,
          c.value, c.tol));
    }
  }
}

InvariantCheck bound_check(std::string name, double value, double tol) {
  return InvariantCheck{std::move(name), value, tol, value <= tol};
}

InvariantCheck rank_check(std::string name, int rank, int expected) {
  return InvariantCheck{std::move(name), static_cast<double>(rank),
                        static_cast<double>(expected), rank == expected};
}

DaeTrajectory map_outputs(const AssociatedLti& lti, SampledSignal v,
                          SampledSignal g) {
  DaeTrajectory out;
  out.x = output_map(lti.C_s, v, lti.D_s, g);
  out.u = output_map(lti.C_inp, v, lti.D_inp, g);
  out.v = std::move(v);
  out.g = std::move(g);
  return out;
}

}  // namespace

AssociatedLti build_associated_lti(const DaeSystem& sys, const CanonicalForm& cf,
                                   const OutputNullingData& ond,
                                   const Tolerances& tol) {
  const int n = cf.n;
  const int m = cf.m;
  const int r = cf.r;
  const int nq = cf.q_dim();
  const Matrix& w = ond.V.basis();
  const int n_hat = ond.V.dim();
  const int k = static_cast<int>(ond.L.cols());
  if (ond.F_tilde.rows() != nq || ond.F_tilde.cols() != r || ond.L.rows() != nq) {
    throw InputError("build_associated_lti: output-nulling data does not match");
  }

  AssociatedLti lti;
  lti.n = n;
  lti.m = m;
  lti.n_hat = n_hat;
  lti.k = k;
  lti.E = sys.E();

  const Matrix closed = cf.A_tilde + cf.G * ond.F_tilde;
  const Matrix gl = cf.G * ond.L;
  const double scale = std::max(
      1.0, spectral_norm(cf.A_tilde) + spectral_norm(cf.G) * (1.0 + spectral_norm(ond.F_tilde)));
  const Matrix p_perp = ond.V.complement_projector();
  enforce({bound_check("(A~+G F~) V subset V", spectral_norm(p_perp * closed * w),
                       1e-9 * scale),
           bound_check("G L subset V", spectral_norm(p_perp * gl), 1e-9 * scale)});

  lti.A_l = w.transpose() * closed * w;
  lti.B_l = w.transpose() * gl;

  // C̄ = diag(T, I_m)·[I_r; F̃],  D̄ = diag(T, I_m)·[0; L].
  Matrix stacked_c(r + nq, r);
  stacked_c << Matrix::Identity(r, r), ond.F_tilde;
  Matrix stacked_d(r + nq, k);
  stacked_d << Matrix::Zero(r, k), ond.L;
  const Matrix lift = block_diag(cf.T, Matrix::Identity(m, m));
  lti.C_l = lift * stacked_c * w;
  lti.D_l = lift * stacked_d;

  lti.C_s = lti.C_l.topRows(n);
  lti.C_inp = lti.C_l.bottomRows(m);
  lti.D_s = lti.D_l.topRows(n);
  lti.D_inp = lti.D_l.bottomRows(m);

  const Matrix ec = sys.E() * lti.C_s;
  lti.Lambda = pseudoinverse(ec, tol.rank_tol);
  lti.X = Subspace(image_basis(ec, tol.rank_tol).basis(), tol.subspace_tol);

  enforce(structural_checks(lti));
  return lti;
}

Construction construct(const DaeSystem& sys, const Tolerances& tol) {
  CanonicalForm cf = canonical_form(sys, tol.rank_tol);
  OutputNullingData ond = output_nulling_data(cf, tol);
  AssociatedLti lti = build_associated_lti(sys, cf, ond, tol);
  return Construction{sys, std::move(cf), std::move(ond), std::move(lti)};
}

std::vector<InvariantCheck> structural_checks(const AssociatedLti& lti, double tol) {
  const Matrix ec = lti.E * lti.C_s;
  const double e_scale = std::max(1.0, spectral_norm(lti.E));
  std::vector<InvariantCheck> checks;
  checks.push_back(bound_check("E D_s = 0", spectral_norm(lti.E * lti.D_s),
                               tol * e_scale * std::max(1.0, spectral_norm(lti.D_s))));
  checks.push_back(rank_check("rank(E C_s) = n_hat", numerical_rank(ec), lti.n_hat));
  checks.push_back(bound_check(
      "Lambda E C_s = I",
      spectral_norm(lti.Lambda * ec - Matrix::Identity(lti.n_hat, lti.n_hat)), tol));
  checks.push_back(rank_check("rank D_l = k", numerical_rank(lti.D_l), lti.k));
  return checks;
}

bool is_consistent(const AssociatedLti& lti, const Matrix& e, const Vector& x0) {
  if (e.cols() != x0.size() || e.rows() != lti.X.ambient_dim()) {
    throw InputError("is_consistent: dimension mismatch");
  }
  const Vector ex = e * x0;
  return distance_from(lti.X, ex) <= lti.X.tol() * std::max(1.0, ex.norm());
}

Vector initial_lti_state(const AssociatedLti& lti, const Vector& x0) {
  if (!is_consistent(lti, lti.E, x0)) {
    throw InconsistentStateError(
        "initial state is inconsistent: E*x0 is outside the consistency space");
  }
  return lti.Lambda * (lti.E * x0);
}

DaeTrajectory output_trajectory(const AssociatedLti& lti, const Vector& x0,
                                const SampledSignal& g) {
  if (g.dim() != lti.k) {
    throw InputError(fmt::format("output_trajectory: g has dimension {}, expected {}",
                                 g.dim(), lti.k));
  }
  const Vector v0 = initial_lti_state(lti, x0);
  SampledSignal v = integrate_lti(lti.A_l, lti.B_l, v0, g);
  return map_outputs(lti, std::move(v), g);
}

DaeTrajectory output_trajectory(const AssociatedLti& lti, const Vector& x0,
                                const std::vector<double>& grid,
                                const InputFunction& g) {
  return lti_trajectory(lti, initial_lti_state(lti, x0), grid, g);
}

DaeTrajectory lti_trajectory(const AssociatedLti& lti, const Vector& v0,
                             const std::vector<double>& grid,
                             const InputFunction& g) {
  if (v0.size() != lti.n_hat) throw InputError("lti_trajectory: v0 has wrong size");
  SampledSignal v = integrate_lti(lti.A_l, lti.B_l, v0, grid, g);
  SampledSignal gs = sample(g, grid);
  if (gs.dim() != lti.k) throw InputError("lti_trajectory: g has wrong dimension");
  return map_outputs(lti, std::move(v), std::move(gs));
}

}  // namespace daeobs
