#include "daeobs/simulate.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "daeobs/errors.h"

namespace daeobs {
namespace {

Vector standard_normal(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(dim);
  for (int i = 0; i < dim; ++i) out(i) = normal(rng);
  return out;
}

int step_count(double t1, double step) {
  if (!(t1 > 0.0)) throw InputError("horizon must be positive");
  if (!(step > 0.0)) throw InputError("integration step must be positive");
  return std::max(2, static_cast<int>(std::ceil(t1 / step - 1e-9)));
}

// Samples a primal trajectory: F·ẋ = A·x + B̂·g_free is realized through the
// associated LTI of (F, A, B̂), with v0 and the free input drawn at random.
struct PrimalSample {
  SampledSignal x;
  SampledSignal u;
};

PrimalSample primal_sample(const Construction& c, const std::vector<double>& grid,
                           std::mt19937_64& rng) {
  const Vector v0 = standard_normal(c.lti.n_hat, rng);
  const InputFunction g = random_smooth_signal(c.lti.k, rng);
  DaeTrajectory traj = lti_trajectory(c.lti, v0, grid, g);
  return PrimalSample{std::move(traj.x), std::move(traj.u)};
}

}  // namespace

double realization_rho(const EstimationProblem& prob, const NoiseRealization& r,
                       bool use_trapezoid) {
  const auto& times = r.x.times;
  Vector running = Vector::Zero(static_cast<int>(times.size()));
  if (r.f.size() > 0) running += quadratic_series(r.f, prob.Q);
  if (r.eta.size() > 0) running += quadratic_series(r.eta, prob.R);
  const double integral = use_trapezoid ? trapezoid(times, running) : simpson(times, running);
  return r.x0.dot(prob.Q0 * r.x0) + integral;
}

InputFunction random_smooth_signal(int dim, std::mt19937_64& rng, int modes) {
  std::uniform_real_distribution<double> freq(0.2, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  Matrix amp(dim, modes), omega(dim, modes), phi(dim, modes);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < modes; ++j) {
      amp(i, j) = standard_normal(1, rng)(0);
      omega(i, j) = freq(rng);
      phi(i, j) = phase(rng);
    }
  }
  return [amp, omega, phi](double t) {
    return Vector((amp.array() * (omega.array() * t + phi.array()).sin())
                      .rowwise()
                      .sum());
  };
}

double simulation_step(std::initializer_list<const Matrix*> generators) {
  double step = 1e-3;
  for (const Matrix* a : generators) step = std::min(step, default_step(*a));
  return step;
}

NoiseRealization sample_admissible(const EstimationProblem& prob, double t1,
                                   std::uint64_t seed, double step,
                                   const Tolerances& tol) {
  prob.validate();
  const ObservedDae& obs = prob.obs;
  const int n = obs.n();
  const Construction primal_lti = construct(DaeSystem(obs.F(), obs.A(), Matrix::Identity(n, n)), tol);
  if (step <= 0.0) step = simulation_step({&obs.A(), &primal_lti.lti.A_l});
  const std::vector<double> grid = uniform_grid(t1, step_count(t1, step));
  std::mt19937_64 rng(seed);

  const PrimalSample primal = primal_sample(primal_lti, grid, rng);
  const SampledSignal eta = sample(random_smooth_signal(obs.p(), rng), grid);

  NoiseRealization r;
  r.x = primal.x;
  r.f = primal.u;
  r.eta = eta;
  r.x0 = obs.F() * primal.x.at(0);
  const double raw = realization_rho(prob, r);
  const double radius = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double scale = raw > 0.0 ? radius / std::sqrt(raw) : 0.0;
  r.x.values *= scale;
  r.f.values *= scale;
  r.eta.values *= scale;
  r.x0 *= scale;
  r.rho = realization_rho(prob, r);
  return r;
}

NoiseRealization clean_realization(const EstimationProblem& prob, double t1,
                                   std::uint64_t seed, double step,
                                   const Tolerances& tol) {
  prob.validate();
  const ObservedDae& obs = prob.obs;
  const int n = obs.n();
  const Construction primal_lti = construct(DaeSystem(obs.F(), obs.A(), Matrix(n, 0)), tol);
  if (step <= 0.0) step = simulation_step({&obs.A(), &primal_lti.lti.A_l});
  const std::vector<double> grid = uniform_grid(t1, step_count(t1, step));
  std::mt19937_64 rng(seed);

  const PrimalSample primal = primal_sample(primal_lti, grid, rng);
  NoiseRealization r;
  r.x = primal.x;
  r.f = SampledSignal::zeros(grid, n);
  r.eta = SampledSignal::zeros(grid, obs.p());
  r.x0 = obs.F() * primal.x.at(0);
  r.rho = realization_rho(prob, r);
  return r;
}

SampledSignal run_observer(const Observer& obsv, const SampledSignal& y) {
  if (y.dim() != obsv.B_o.cols()) {
    throw InputError(fmt::format("run_observer: y has dimension {}, observer expects {}",
                                 y.dim(), obsv.B_o.cols()));
  }
  const Vector s0 = Vector::Zero(obsv.A_o.rows());
  const SampledSignal s = integrate_lti(obsv.A_o, obsv.B_o, s0, y);
  return SampledSignal(y.times, obsv.C_o * s.values);
}

ExperimentResult estimation_experiment(const EstimationProblem& prob,
                                       const Observer& obsv,
                                       const NoiseRealization& realization) {
  const ObservedDae& obs = prob.obs;
  const SampledSignal& x = realization.x;
  if (x.dim() != obs.n() || realization.eta.dim() != obs.p() ||
      realization.eta.size() != x.size()) {
    throw InputError("estimation_experiment: realization does not match the problem");
  }
  const double step = x.step();
  const double a_norm = spectral_norm(obsv.A_o);
  if (a_norm * step > 0.5) {
    throw InputError(fmt::format(
        "integration step {:.3e} too large for observer dynamics (norm {:.3e})", step,
        a_norm));
  }
  ExperimentResult out;
  out.y = SampledSignal(x.times, obs.H() * x.values + realization.eta.values);
  out.estimate = run_observer(obsv, out.y);
  out.truth = SampledSignal(x.times, prob.ell.transpose() * obs.F() * x.values);
  out.error = SampledSignal(x.times, out.truth.values - out.estimate.values);
  const double last = out.error.values(0, x.size() - 1);
  out.final_sq_error = last * last;
  return out;
}

double worst_case_bound(const DualSynthesis& synthesis, const Vector& ell, double t1,
                        double step) {
  if (!synthesis.estimable(ell)) {
    throw NotEstimableError("functional ell not estimable: dual DAE has no solution on [0,inf)");
  }
  const AssociatedLti& lti = synthesis.dual.lti;
  const Vector v0 = lti.Lambda * (synthesis.obs.F().transpose() * ell);
  if (lti.n_hat == 0) return 0.0;
  return closed_loop_cost(lti, synthesis.weights, synthesis.riccati, v0, t1, step)
      .total();
}

StepDiscretization discretize_step(const AssociatedLti& lti, const Matrix& s, double h) {
  const int nv = lti.n_hat;
  const int k = lti.k;
  const int d = nv + k;
  Matrix m = Matrix::Zero(d, d);
  m.topLeftCorner(nv, nv) = lti.A_l;
  m.topRightCorner(nv, k) = lti.B_l;
  Matrix c_hat(lti.C_l.rows(), d);
  c_hat << lti.C_l, lti.D_l;
  const Matrix weight = c_hat.transpose() * s * c_hat;

  // Van Loan: exp([[−Mᵀ, W], [0, M]]·h) = [[·, F12], [0, e^{Mh}]] and the
  // step cost matrix is e^{Mh}ᵀ·F12.
  Matrix big = Matrix::Zero(2 * d, 2 * d);
  big.topLeftCorner(d, d) = -m.transpose();
  big.topRightCorner(d, d) = weight;
  big.bottomRightCorner(d, d) = m;
  const Matrix big_h = big * h;
  const Matrix e = big_h.exp();
  const Matrix f22 = e.bottomRightCorner(d, d);
  const Matrix z = f22.transpose() * e.topRightCorner(d, d);

  StepDiscretization out;
  out.Phi = f22.topLeftCorner(nv, nv);
  out.Gamma = f22.topRightCorner(nv, k);
  out.Z = 0.5 * (z + z.transpose());
  return out;
}

double finite_horizon_infimum(const AssociatedLti& lti, const LqWeights& w,
                              const Vector& v0, double t1, int n_steps) {
  w.validate(lti.n, lti.m);
  if (n_steps < 2) throw InputError("finite_horizon_infimum needs n_steps >= 2");
  if (!(t1 > 0.0)) throw InputError("finite_horizon_infimum needs t1 > 0");
  if (v0.size() != lti.n_hat) throw InputError("finite_horizon_infimum: v0 has wrong size");
  const int nv = lti.n_hat;
  const int k = lti.k;
  if (nv == 0) return 0.0;

  const StepDiscretization step = discretize_step(lti, w.S(), t1 / n_steps);
  Matrix transition(nv, nv + k);
  transition << step.Phi, step.Gamma;
  const Matrix ec = lti.E * lti.C_s;
  Matrix value = ec.transpose() * w.Q0 * ec;
  for (int j = 0; j < n_steps; ++j) {
    const Matrix h = step.Z + transition.transpose() * value * transition;
    if (k == 0) {
      value = h;
    } else {
      const Matrix hgg = h.bottomRightCorner(k, k);
      const Matrix hgv = h.bottomLeftCorner(k, nv);
      value = h.topLeftCorner(nv, nv) - hgv.transpose() * hgg.llt().solve(hgv);
    }
    value = 0.5 * (value + value.transpose());
  }
  return v0.dot(value * v0);
}

}  // namespace daeobs
