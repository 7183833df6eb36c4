#include "daeobs/feedback_equiv.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

double relative_gap(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.size() == 0 && rhs.size() == 0) return 0.0;
  const double scale = std::max({1.0, spectral_norm(lhs), spectral_norm(rhs)});
  return spectral_norm(lhs - rhs) / scale;
}

Matrix random_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

InvariantCheck check(std::string name, double value, double tol) {
  return InvariantCheck{std::move(name), value, tol, value <= tol};
}

}  // namespace

double FeedbackEquivalence::max_defect() const {
  return std::max(*std::max_element(defects.begin(), defects.end()), structural_defect);
}

FeedbackEquivalence build_equivalence(const Construction& b1, const Construction& b2,
                                      double tol) {
  const CanonicalForm& c1 = b1.cf;
  const CanonicalForm& c2 = b2.cf;
  if (c1.n != c2.n || c1.m != c2.m || c1.r != c2.r) {
    throw InputError("build_equivalence: builds come from DAEs of different shape");
  }
  const int n = c1.n;
  const int m = c1.m;
  const int r = c1.r;
  const int nr = n - r;
  const int nq = c1.q_dim();
  const int k = b1.ond.k;
  if (b1.ond.V.dim() != b2.ond.V.dim()) {
    throw InternalConsistencyError(fmt::format(
        "output-nulling subspaces differ in dimension: {} vs {}", b1.ond.V.dim(),
        b2.ond.V.dim()));
  }
  const int rank1 = numerical_rank(b1.ond.L);
  const int rank2 = numerical_rank(b2.ond.L);
  if (rank1 != k || rank2 != b2.ond.k || rank1 != rank2) {
    throw InternalConsistencyError(
        fmt::format("Rank L_1 = {} and Rank L_2 = {} must both equal k", rank1, rank2));
  }

  const Matrix rmat = c2.T_inv * c1.T;
  const Matrix hmat = c2.S * c1.S_inv;
  const Matrix r11 = rmat.topLeftCorner(r, r);
  const Matrix r12 = rmat.topRightCorner(r, nr);
  const Matrix r21 = rmat.bottomLeftCorner(nr, r);
  const Matrix r22 = rmat.bottomRightCorner(nr, nr);
  const Matrix h11 = hmat.topLeftCorner(r, r);
  const Matrix h12 = hmat.topRightCorner(r, nr);
  const Matrix h_low = hmat.bottomLeftCorner(nr, r);
  const Matrix h22 = hmat.bottomRightCorner(nr, nr);

  FeedbackEquivalence eq;
  const double scale = std::max({1.0, spectral_norm(rmat), spectral_norm(hmat)});
  eq.structural_defect = std::max({spectral_norm(r12), spectral_norm(h_low),
                                   spectral_norm(h11 - r11)}) /
                         scale;
  if (!(eq.structural_defect <= tol)) {
    throw InternalConsistencyError(fmt::format(
        "block structure of T_2^-1 T_1 / S_2 S_1^-1 violated ({:.3e}); the builds do "
        "not describe the same DAE",
        eq.structural_defect));
  }

  Eigen::FullPivLU<Matrix> r22_lu(r22);
  Eigen::FullPivLU<Matrix> r11_lu(r11);
  if ((nr > 0 && !r22_lu.isInvertible()) || (r > 0 && !r11_lu.isInvertible())) {
    throw InternalConsistencyError("diagonal blocks of T_2^-1 T_1 are singular");
  }
  const Matrix r22_inv = nr > 0 ? r22_lu.inverse() : Matrix(0, 0);

  eq.F_hat = Matrix::Zero(nq, r);
  if (nr > 0) eq.F_hat.topRows(nr) = -r22_inv * r21;
  eq.U_hat = block_diag(r22_inv, Matrix::Identity(m, m));
  eq.G_hat = r > 0 ? Matrix(r11_lu.solve(h12)) : Matrix(0, nr);
  eq.V_hat = h22;

  const Matrix& l1 = b1.ond.L;
  const Matrix& l2 = b2.ond.L;
  const Matrix l1_pinv = pseudoinverse(l1);
  const Matrix& f1 = b1.ond.F_tilde;
  const Matrix& f2 = b2.ond.F_tilde;
  eq.T = r11;
  eq.U = l1_pinv * eq.U_hat * l2;
  eq.F = l1_pinv * (eq.F_hat + eq.U_hat * f2 * r11 - f1);

  const Matrix& w1 = b1.ond.V.basis();
  const Matrix& w2 = b2.ond.V.basis();
  eq.T_lti = w2.transpose() * r11 * w1;
  eq.K = eq.F * w1;

  const Matrix closed1 = c1.A_tilde + c1.G * f1 + c1.G * l1 * eq.F;
  const Matrix closed2 = c2.A_tilde + c2.G * f2;
  const Matrix lift1 = block_diag(c1.T, Matrix::Identity(m, m));
  const Matrix lift2 = block_diag(c2.T, Matrix::Identity(m, m));
  auto stack = [&](const Matrix& top, const Matrix& bottom) {
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
  };

  const Matrix tw1 = r11 * w1;
  eq.defects[0] = spectral_norm(b2.ond.V.complement_projector() * tw1) /
                  std::max(1.0, spectral_norm(tw1));
  eq.defects[1] = spectral_norm(b1.ond.V.complement_projector() * closed1 * w1) /
                  std::max(1.0, spectral_norm(closed1));
  eq.defects[2] = relative_gap(r11 * closed1 * w1, closed2 * tw1);
  eq.defects[3] = relative_gap(r11 * c1.G * l1 * eq.U, c2.G * l2);
  eq.defects[4] = relative_gap(lift1 * stack(Matrix::Zero(r, k), l1 * eq.U),
                               lift2 * stack(Matrix::Zero(r, k), l2));
  eq.defects[5] =
      relative_gap(lift1 * stack(Matrix::Identity(r, r), f1 + l1 * eq.F) * w1,
                   lift2 * stack(Matrix::Identity(r, r), f2) * tw1);
  return eq;
}

EquivalenceReport verify_equivalence(const AssociatedLti& sys1,
                                     const AssociatedLti& sys2,
                                     const FeedbackEquivalence& eq, double tol) {
  EquivalenceReport report;
  const bool shapes_match = sys1.n_hat == sys2.n_hat && sys1.k == sys2.k &&
                            eq.T_lti.rows() == sys1.n_hat && eq.K.rows() == sys1.k &&
                            eq.U.rows() == sys1.k && eq.U.cols() == sys2.k;
  if (!shapes_match) {
    report.checks.push_back({"dimensions match", 1.0, 0.0, false});
    report.pass = false;
    report.max_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  Eigen::FullPivLU<Matrix> lu(eq.T_lti);
  if (sys1.n_hat > 0 && !lu.isInvertible()) {
    report.checks.push_back({"T invertible", 1.0, 0.0, false});
    report.pass = false;
    report.max_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  const Matrix t_inv = sys1.n_hat > 0 ? lu.inverse() : Matrix(0, 0);
  const Matrix a = eq.T_lti * (sys1.A_l + sys1.B_l * eq.K) * t_inv;
  const Matrix b = eq.T_lti * sys1.B_l * eq.U;
  const Matrix c = (sys1.C_l + sys1.D_l * eq.K) * t_inv;
  const Matrix d = sys1.D_l * eq.U;
  report.checks.push_back(check("T(A1 + B1 K)T^-1 = A2", relative_gap(a, sys2.A_l), tol));
  report.checks.push_back(check("T B1 U = B2", relative_gap(b, sys2.B_l), tol));
  report.checks.push_back(check("(C1 + D1 K)T^-1 = C2", relative_gap(c, sys2.C_l), tol));
  report.checks.push_back(check("D1 U = D2", relative_gap(d, sys2.D_l), tol));
  const int u_rank = numerical_rank(eq.U);
  report.checks.push_back(
      {"U invertible", static_cast<double>(u_rank), static_cast<double>(sys1.k),
       u_rank == sys1.k});
  for (const auto& ch : report.checks) {
    report.pass = report.pass && ch.pass;
    if (ch.name != "U invertible") report.max_residual = std::max(report.max_residual, ch.value);
  }
  return report;
}

EquivalenceReport defect_report(const FeedbackEquivalence& eq, double tol) {
  static const char* kNames[6] = {
      "T(V1) = V2",
      "(A1 + G1 F1 + G1 L1 F) V1 subset V1",
      "T (A1 + G1 F1 + G1 L1 F) = (A2 + G2 F2) T on V1",
      "T G1 L1 U = G2 L2",
      "diag(T1, I)[0; L1 U] = diag(T2, I)[0; L2]",
      "diag(T1, I)[I; F1 + L1 F] = diag(T2, I)[I; F2] T on V1",
  };
  EquivalenceReport report;
  report.checks.push_back(check("block structure zeros", eq.structural_defect, tol));
  for (int i = 0; i < 6; ++i) report.checks.push_back(check(kNames[i], eq.defects[i], tol));
  for (const auto& ch : report.checks) {
    report.pass = report.pass && ch.pass;
    report.max_residual = std::max(report.max_residual, ch.value);
  }
  return report;
}

Matrix random_orthogonal(int dim, std::mt19937_64& rng) {
  if (dim == 0) return Matrix(0, 0);
  Eigen::HouseholderQR<Matrix> qr(random_normal(dim, dim, rng));
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  // Fix column signs so the distribution does not depend on QR conventions.
  const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    if (rr(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q;
}

Matrix random_well_conditioned(int dim, std::mt19937_64& rng) {
  if (dim == 0) return Matrix(0, 0);
  std::uniform_real_distribution<double> sv(0.5, 2.0);
  Vector s(dim);
  for (int i = 0; i < dim; ++i) s(i) = sv(rng);
  return random_orthogonal(dim, rng) * s.asDiagonal() * random_orthogonal(dim, rng);
}

Construction randomized_construction(const DaeSystem& sys, std::mt19937_64& rng,
                                     const Tolerances& tol) {
  const CanonicalForm base = canonical_form(sys, tol.rank_tol);
  const int n = base.n;
  const int r = base.r;
  const int nr = n - r;

  const Matrix r11 = random_well_conditioned(r, rng);
  const Matrix r22 = random_well_conditioned(nr, rng);
  Matrix rmat = Matrix::Zero(n, n);
  rmat.topLeftCorner(r, r) = r11;
  rmat.bottomLeftCorner(nr, r) = 0.5 * random_normal(nr, r, rng);
  rmat.bottomRightCorner(nr, nr) = r22;
  Matrix hmat = Matrix::Zero(n, n);
  hmat.topLeftCorner(r, r) = r11;
  hmat.topRightCorner(r, nr) = 0.5 * random_normal(r, nr, rng);
  hmat.bottomRightCorner(nr, nr) = random_well_conditioned(nr, rng);

  const Matrix s2 = hmat * base.S;
  const Matrix t2 = base.T * rmat.fullPivLu().inverse();
  CanonicalForm cf = canonical_form_with(sys, s2, t2, r, 1e-8);
  OutputNullingData ond = output_nulling_data(cf, tol);

  const int k = ond.k;
  const int nv = ond.V.dim();
  const Matrix w = ond.V.basis() * random_orthogonal(nv, rng);
  ond.V = Subspace(w, ond.V.tol());
  const Matrix l = ond.L * random_well_conditioned(k, rng);
  const Matrix off_v = Matrix::Identity(r, r) - w * w.transpose();
  ond.F_tilde += l * (0.5 * random_normal(k, nv, rng)) * w.transpose() +
                 0.5 * random_normal(cf.q_dim(), r, rng) * off_v;
  ond.L = l;

  AssociatedLti lti = build_associated_lti(sys, cf, ond, tol);
  return Construction{sys, std::move(cf), std::move(ond), std::move(lti)};
}

}  // namespace daeobs
