#include "daeobs/observer.h"

#include <gtest/gtest.h>

#include <cmath>

#include "daeobs/errors.h"
#include "daeobs/feedback_equiv.h"
#include "test_util.h"

namespace daeobs {
namespace {

using testing::random_matrix;

EstimationProblem make_problem(const Matrix& f, const Matrix& a, const Matrix& h,
                               const Vector& ell) {
  const int n = static_cast<int>(f.rows());
  const int p = static_cast<int>(h.rows());
  return EstimationProblem{ObservedDae(f, a, h), Matrix::Identity(n, n), Matrix::Identity(n, n),
                           Matrix::Identity(p, p), ell};
}

// Minimum over λ ∈ ker Fᵀ of (Fᵀ⁺z − λ)ᵀQ0⁻¹(Fᵀ⁺z − λ), by least squares.
double q0_bar_oracle(const Matrix& f, const Matrix& q0, const Vector& z) {
  const Matrix ft_pinv = f.transpose().completeOrthogonalDecomposition().pseudoInverse();
  const Vector base = ft_pinv * z;
  Eigen::FullPivLU<Matrix> lu(f.transpose());
  Eigen::LLT<Matrix> chol(q0.inverse());
  const Matrix l = chol.matrixU();  // Q0⁻¹ = LᵀL
  if (lu.dimensionOfKernel() == 0) return (l * base).squaredNorm();
  const Matrix u = lu.kernel();
  const Vector c = (l * u).colPivHouseholderQr().solve(l * base);
  return (l * (base - u * c)).squaredNorm();
}

TEST(ObserverTest, ReducedInitialWeightMatchesLeastSquares) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    const Matrix f = testing::random_rank_matrix(n, n, 1 + trial % n, rng);
    const Matrix q0 = testing::random_spd(n, rng);
    const Matrix qb = q0_bar(f, q0);
    for (int s = 0; s < 3; ++s) {
      const Vector z = f.transpose() * testing::random_vector(n, rng);
      EXPECT_LT(testing::rel_diff(z.dot(qb * z), q0_bar_oracle(f, q0, z)), 1e-10);
    }
    // Λ_opt maps into ker Fᵀ.
    EXPECT_LT((f.transpose() * lambda_opt(f, q0)).norm(), 1e-10);
  }
  const Matrix id = Matrix::Identity(3, 3);
  EXPECT_LT(lambda_opt(id, id).norm(), 1e-15);
  EXPECT_LT((q0_bar(id, 2.0 * id) - 0.5 * id).norm(), 1e-14);
}

TEST(ObserverTest, RegularCaseMatchesClassicalFilter) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial % 3;
    const int p = 1 + trial % 2;
    const Matrix a = random_matrix(n, n, rng);
    const Matrix h = random_matrix(p, n, rng);
    EstimationProblem prob = make_problem(Matrix::Identity(n, n), a, h,
                                          testing::random_vector(n, rng));
    prob.Q = testing::random_spd(n, rng);
    prob.R = testing::random_spd(p, rng);
    prob.Q0 = testing::random_spd(n, rng);
    const Observer obsv = synthesize(prob);

    // Filter Riccati equation AP + PAᵀ − PHᵀRHP + Q⁻¹ = 0, written as the
    // control equation of (Aᵀ, Hᵀ).
    const Matrix pf = testing::newton_care(a.transpose(), h.transpose(), prob.Q.inverse(),
                                           prob.R.inverse(), Matrix::Zero(n, p),
                                           testing::bass_gain(a.transpose(), h.transpose()));
    const Matrix gain = pf * h.transpose() * prob.R;
    const Matrix a_kf = a - gain * h;
    EXPECT_LT(testing::rel_diff(obsv.sigma, prob.ell.dot(pf * prob.ell)), 1e-8);

    // Same input-output map: compare Markov parameters C A^j B.
    Matrix pow_o = Matrix::Identity(obsv.A_o.rows(), obsv.A_o.cols());
    Matrix pow_k = Matrix::Identity(n, n);
    for (int j = 0; j < 2 * n; ++j) {
      const Matrix mo = obsv.C_o * pow_o * obsv.B_o;
      const Matrix mk = prob.ell.transpose() * pow_k * gain;
      EXPECT_LT(testing::rel_diff(mo, mk), 1e-8) << "trial " << trial << " j " << j;
      pow_o = pow_o * obsv.A_o;
      pow_k = pow_k * a_kf;
    }
    for (const auto& c : obsv.checks) EXPECT_TRUE(c.pass) << c.name;
  }
}

TEST(ObserverTest, SingularDescriptorReducesToScalarFilter) {
  // ẋ1 = −x1 + x2 + f1, 0 = x2 + x3 + f2, 0 = 2x2 + 2x3 + f3, y = (x1, x2) + η.
  // Taking x3 = −x2 makes x2 a free signal seen through y2, so the
  // disturbance of x1 is d = f1 − η2 at cost d²/2: the scalar filter
  // equation −2P + 2 − P² = 0 gives P = √3 − 1.
  Matrix f = Matrix::Zero(3, 3);
  f(0, 0) = 1.0;
  Matrix a(3, 3), h(2, 3);
  a << -1, 1, 0, 0, 1, 1, 0, 2, 2;
  h << 1, 0, 0, 0, 1, 0;
  const Observer obsv = synthesize(make_problem(f, a, h, Eigen::Vector3d(1, 0, 0)));
  EXPECT_NEAR(obsv.sigma, std::sqrt(3.0) - 1.0, 1e-12);
  ASSERT_EQ(obsv.A_o.rows(), 1);
  EXPECT_NEAR(obsv.A_o(0, 0), -std::sqrt(3.0), 1e-12);
}

TEST(ObserverTest, ZeroFunctionalHasZeroObserver) {
  std::mt19937_64 rng(53);
  const EstimationProblem prob = make_problem(Matrix::Identity(2, 2), random_matrix(2, 2, rng),
                                              random_matrix(1, 2, rng), Vector::Zero(2));
  const Observer obsv = synthesize(prob);
  EXPECT_EQ(obsv.sigma, 0.0);
  EXPECT_EQ(obsv.C_o.norm(), 0.0);
}

TEST(ObserverTest, OutputKernelMatchesImpulseResponse) {
  std::mt19937_64 rng(54);
  const EstimationProblem prob = make_problem(Matrix::Identity(3, 3), random_matrix(3, 3, rng),
                                              random_matrix(2, 3, rng),
                                              testing::random_vector(3, rng));
  const Observer obsv = synthesize(prob);
  // Integrate ṡ = A_o s from s(0) = B_o with RK4; then C_o s(τ) is the
  // weight on y(t − τ).
  const double h = 1e-3;
  Matrix s = obsv.B_o;
  const Matrix& m = obsv.A_o;
  for (int step = 1; step <= 2000; ++step) {
    const Matrix k1 = m * s;
    const Matrix k2 = m * (s + 0.5 * h * k1);
    const Matrix k3 = m * (s + 0.5 * h * k2);
    const Matrix k4 = m * (s + h * k3);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (step % 500 == 0) {
      const double tau = step * h;
      const Vector kernel = observer_output_kernel(obsv, 5.0, 5.0 - tau);
      const Vector expected = (obsv.C_o * s).transpose();
      EXPECT_LT((kernel - expected).norm(), 1e-5 * std::max(1.0, expected.norm()));
    }
  }
  EXPECT_THROW(observer_kernel(obsv, 1.0, 2.0), InputError);
}

TEST(ObserverTest, SigmaDoesNotDependOnTheBuild) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial % 2;
    const Matrix f = testing::random_rank_matrix(n, n, n - 1, rng);
    EstimationProblem prob = make_problem(f, random_matrix(n, n, rng), random_matrix(2, n, rng),
                                          testing::random_vector(n, rng));
    const DualSynthesis base = synthesize_dual(prob);
    if (!base.estimable(prob.ell)) continue;
    const double sigma = base.observer_for(prob.ell).sigma;
    const DualSynthesis other =
        synthesize_dual(prob, randomized_construction(dual_dae(prob.obs), rng));
    EXPECT_LT(testing::rel_diff(other.observer_for(prob.ell).sigma, sigma), 1e-8);
  }
}

TEST(ObserverTest, InconsistentFunctionalIsRejected) {
  // Dual DAE: ż1 = z2 − u, ż2 = z3, 0 = z1. Fᵀℓ must have z1 = 0.
  Matrix f = Matrix::Zero(3, 3);
  f(0, 0) = 1.0;
  f(1, 1) = 1.0;
  Matrix a(3, 3), h(1, 3);
  a << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  h << 1, 0, 0;
  const EstimationProblem prob = make_problem(f, a, h, Eigen::Vector3d(1, 0, 0));
  const DualSynthesis syn = synthesize_dual(prob);
  EXPECT_FALSE(syn.estimable(Eigen::Vector3d(1, 0, 0)));
  EXPECT_TRUE(syn.estimable(Eigen::Vector3d(0, 1, 0)));
  EXPECT_THROW(synthesize(prob), NotEstimableError);
  EXPECT_NO_THROW(syn.observer_for(Eigen::Vector3d(0, 1, 0)));
}

TEST(ObserverTest, ValidationNamesTheFailingWeight) {
  EstimationProblem prob = make_problem(Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                                        Matrix::Identity(1, 2), Vector::Zero(2));
  prob.Q0(0, 1) = prob.Q0(1, 0) = 2.0;
  try {
    prob.validate();
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "Q0 must be symmetric positive definite");
  }
  prob.Q0 = Matrix::Identity(2, 2);
  prob.ell = Vector::Zero(3);
  EXPECT_THROW(prob.validate(), InputError);
}

}  // namespace
}  // namespace daeobs
