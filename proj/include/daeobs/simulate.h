#pragma once

#include <cstdint>
#include <random>

#include "daeobs/associated_lti.h"
#include "daeobs/lq_riccati.h"
#include "daeobs/observer.h"
#include "daeobs/signal.h"

namespace daeobs {

/// One element of the uncertainty set: a trajectory x of F·ẋ = A·x + f
/// together with the measurement noise η. x0 = F·x(0).
struct NoiseRealization {
  Vector x0;
  SampledSignal x;
  SampledSignal f;
  SampledSignal eta;
  /// x0ᵀQ0x0 + ∫ fᵀQf + ηᵀRη (Simpson quadrature).
  double rho = 0.0;
};

/// ρ of a realization recomputed with the given quadrature rule.
double realization_rho(const EstimationProblem& prob, const NoiseRealization& r,
                       bool use_trapezoid = false);

/// Sum of a few sinusoids with random amplitudes, frequencies in
/// [0.2, 2] rad/s and phases.
InputFunction random_smooth_signal(int dim, std::mt19937_64& rng, int modes = 3);

/// Step used when the caller passes step ≤ 0: the default RK4 step for
/// the fastest of the given generators.
double simulation_step(std::initializer_list<const Matrix*> generators);

/// Draws a random trajectory of the primal DAE through its associated LTI
/// (v0 and the free input g random, f read off the LTI outputs), adds a
/// smooth η, and rescales everything so that √ρ is uniform on [0, 1].
/// Deterministic for a given seed.
NoiseRealization sample_admissible(const EstimationProblem& prob, double t1,
                                   std::uint64_t seed, double step = 0.0,
                                   const Tolerances& tol = {});

/// f = 0, η = 0: a random consistent trajectory of F·ẋ = A·x.
NoiseRealization clean_realization(const EstimationProblem& prob, double t1,
                                   std::uint64_t seed, double step = 0.0,
                                   const Tolerances& tol = {});

/// Integrates the observer from s(0) = 0 over the grid of y; returns the
/// 1-dimensional estimate trace.
SampledSignal run_observer(const Observer& obsv, const SampledSignal& y);

struct ExperimentResult {
  SampledSignal y;
  SampledSignal estimate;
  SampledSignal truth;
  SampledSignal error;
  double final_sq_error = 0.0;
};

/// y = Hx + η, estimate from run_observer, truth = ℓᵀF·x.
ExperimentResult estimation_experiment(const EstimationProblem& prob,
                                       const Observer& obsv,
                                       const NoiseRealization& realization);

/// Worst-case squared error of the observer at time t1 over ρ ≤ 1: the
/// dual closed-loop cost on [0, t1] including its initial-state term.
/// Tends to sigma as t1 grows.
double worst_case_bound(const DualSynthesis& synthesis, const Vector& ell,
                        double t1, double step);

/// Minimum of 𝒥(v0, g, t1) over inputs g that are piecewise constant on
/// n_steps equal intervals, with the state and running cost discretized
/// exactly (matrix exponentials). Solved by backward dynamic programming.
double finite_horizon_infimum(const AssociatedLti& lti, const LqWeights& w,
                              const Vector& v0, double t1, int n_steps);

/// Per-step exact discretization used by finite_horizon_infimum:
/// v⁺ = Φv + Γg and ∫ νᵀSν = [v; g]ᵀZ[v; g] over one step of length h.
struct StepDiscretization {
  Matrix Phi;
  Matrix Gamma;
  Matrix Z;
};
StepDiscretization discretize_step(const AssociatedLti& lti, const Matrix& s,
                                   double h);

}  // namespace daeobs
