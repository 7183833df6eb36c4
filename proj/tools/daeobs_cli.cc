// Command-line front end: synthesis, simulation and equivalence checks on
// problem files. Exit codes: 0 success, 1 invalid input, 2 not stabilizable,
// 3 functional not estimable, 11 internal or equivalence failure, 12 other.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "daeobs/associated_lti.h"
#include "daeobs/errors.h"
#include "daeobs/feedback_equiv.h"
#include "daeobs/lq_riccati.h"
#include "daeobs/observer.h"
#include "daeobs/problem_io.h"
#include "daeobs/simulate.h"

namespace daeobs {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotStabilizable = 2;
constexpr int kExitNotEstimable = 3;
constexpr int kExitInternal = 11;
constexpr int kExitOther = 12;

struct Flags {
  std::string input;
  std::string output;
  std::optional<double> rank_tol;
  std::optional<double> are_tol;
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  bool clean = false;
  bool noisy = false;
  double perturb_u = 0.0;
};

Tolerances tolerances(const Flags& flags, const ProblemFile& file) {
  Tolerances tol;
  if (auto v = flags.rank_tol.has_value() ? flags.rank_tol : file.options.rank_tol) {
    tol.rank_tol = *v;
  }
  if (auto v = flags.are_tol.has_value() ? flags.are_tol : file.options.are_tol) {
    tol.are_tol = *v;
  }
  return tol;
}

template <typename T>
T pick(const std::optional<T>& flag, const std::optional<T>& option, T fallback) {
  if (flag) return *flag;
  if (option) return *option;
  return fallback;
}

Json header(const std::string& command, const ProblemFile& file, const Tolerances& tol) {
  return Json{{"tool", "daeobs"},
              {"tool_version", kToolVersion},
              {"command", command},
              {"input_digest", file.digest},
              {"tolerances",
               {{"rank_tol", tol.rank_tol},
                {"subspace_tol", tol.subspace_tol},
                {"are_tol", tol.are_tol}}}};
}

Json dimensions(const Construction& c) {
  return Json{{"n", c.lti.n},         {"m", c.lti.m},
              {"r", c.cf.r},          {"n_hat", c.lti.n_hat},
              {"k", c.lti.k},         {"dim_X", c.lti.X.dim()},
              {"isa_dims", c.ond.iteration_dims}};
}

Json lti_json(const AssociatedLti& lti) {
  return Json{{"A_l", matrix_to_json(lti.A_l)},     {"B_l", matrix_to_json(lti.B_l)},
              {"C_l", matrix_to_json(lti.C_l)},     {"D_l", matrix_to_json(lti.D_l)},
              {"C_s", matrix_to_json(lti.C_s)},     {"C_inp", matrix_to_json(lti.C_inp)},
              {"D_s", matrix_to_json(lti.D_s)},     {"D_inp", matrix_to_json(lti.D_inp)},
              {"X_basis", matrix_to_json(lti.X.basis())},
              {"Lambda", matrix_to_json(lti.Lambda)}};
}

Json riccati_json(const RiccatiSolution& rs) {
  return Json{{"P", matrix_to_json(rs.P)},
              {"K", matrix_to_json(rs.K)},
              {"residual", rs.residual},
              {"closed_loop_spectrum", spectrum_to_json(rs.closed_loop_spectrum)}};
}

std::vector<InvariantCheck> riccati_checks(const RiccatiSolution& rs, const Tolerances& tol) {
  const double bound = tol.are_tol * (1.0 + rs.P.norm());
  const double max_re = rs.closed_loop_spectrum.empty() ? -1.0 : rs.max_closed_loop_real();
  return {{"ARE residual", rs.residual, bound, rs.residual <= bound},
          {"closed loop Hurwitz", max_re, 0.0, max_re < 0.0}};
}

void emit(const Flags& flags, const Json& report) {
  const std::string text = report.dump(2) + "\n";
  if (flags.output.empty()) {
    std::cout << text;
  } else {
    write_text_file(flags.output, text);
  }
}

void require_all_pass(const std::vector<InvariantCheck>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) {
      throw InternalConsistencyError(
          fmt::format("invariant '{}' failed: {:.3e} (tol {:.3e})", c.name, c.value, c.tol));
    }
  }
}

int cmd_associated_lti(const Flags& flags) {
  const ProblemFile file = load_problem(flags.input);
  const Tolerances tol = tolerances(flags, file);
  std::optional<DaeSystem> sys;
  if (file.kind == ProblemKind::kControl) {
    sys.emplace(to_control_problem(file).sys);
  } else {
    sys.emplace(dual_dae(to_estimation_problem(file).obs));
  }
  const Construction c = construct(*sys, tol);
  const auto checks = structural_checks(c.lti);
  require_all_pass(checks);
  Json report = header("associated-lti", file, tol);
  report["system"] = file.kind == ProblemKind::kControl ? "control DAE" : "dual DAE";
  report["dimensions"] = dimensions(c);
  report["lti"] = lti_json(c.lti);
  report["checks"] = checks_to_json(checks);
  emit(flags, report);
  return kExitOk;
}

int cmd_solve_lq(const Flags& flags) {
  const ProblemFile file = load_problem(flags.input);
  const Tolerances tol = tolerances(flags, file);
  const ControlProblem prob = to_control_problem(file);
  const Construction c = construct(prob.sys, tol);
  const RiccatiSolution rs = solve_are(c.lti, prob.weights, tol);
  const DynamicController ctrl = assemble_controller(c.lti, rs);
  auto checks = structural_checks(c.lti);
  const auto ric = riccati_checks(rs, tol);
  checks.insert(checks.end(), ric.begin(), ric.end());
  const double id_defect = controller_identity_defect(c.lti, ctrl);
  checks.push_back({"B_c E C_x = I", id_defect, 1e-9, id_defect <= 1e-9});
  require_all_pass(checks);

  Json report = header("solve-lq", file, tol);
  report["dimensions"] = dimensions(c);
  report["controller"] = {{"A_c", matrix_to_json(ctrl.A_c)},
                          {"B_c", matrix_to_json(ctrl.B_c)},
                          {"C_x", matrix_to_json(ctrl.C_x)},
                          {"C_u", matrix_to_json(ctrl.C_u)}};
  report["riccati"] = riccati_json(rs);
  report["checks"] = checks_to_json(checks);
  emit(flags, report);
  return kExitOk;
}

Json observer_json(const Observer& o) {
  return Json{{"A_o", matrix_to_json(o.A_o)},
              {"B_o", matrix_to_json(o.B_o)},
              {"C_o", matrix_to_json(o.C_o)},
              {"sigma", o.sigma}};
}

int cmd_synthesize_observer(const Flags& flags) {
  const ProblemFile file = load_problem(flags.input);
  const Tolerances tol = tolerances(flags, file);
  const EstimationProblem prob = to_estimation_problem(file);
  const DualSynthesis syn = synthesize_dual(prob, tol);
  const Observer o = syn.observer_for(prob.ell);
  auto checks = structural_checks(syn.dual.lti);
  checks.insert(checks.end(), o.checks.begin(), o.checks.end());
  require_all_pass(checks);

  Json report = header("synthesize-observer", file, tol);
  report["dimensions"] = dimensions(syn.dual);
  report["observer"] = observer_json(o);
  report["riccati"] = riccati_json(syn.riccati);
  report["Lambda"] = matrix_to_json(syn.dual.lti.Lambda);
  report["Lambda_opt"] = matrix_to_json(lambda_opt(prob.obs.F(), prob.Q0, tol.rank_tol));
  report["Q0_bar"] = matrix_to_json(syn.weights.Q0);
  report["checks"] = checks_to_json(checks);
  emit(flags, report);
  return kExitOk;
}

int cmd_simulate(const Flags& flags) {
  const ProblemFile file = load_problem(flags.input);
  const Tolerances tol = tolerances(flags, file);
  const EstimationProblem prob = to_estimation_problem(file);
  if (flags.output.empty()) throw InputError("simulate needs --output <directory>");
  const double horizon = pick(flags.horizon, file.options.horizon, 20.0);
  const std::uint64_t seed = pick<std::uint64_t>(flags.seed, file.options.seed, 1);
  const int trials = pick(flags.trials, file.options.trials, 1);
  if (trials < 1) throw InputError("--trials must be at least 1");
  const bool clean = flags.clean;

  const DualSynthesis syn = synthesize_dual(prob, tol);
  const Observer o = syn.observer_for(prob.ell);
  const int n = prob.obs.n();
  const Construction primal =
      construct(DaeSystem(prob.obs.F(), prob.obs.A(),
                          clean ? Matrix(n, 0) : Matrix(Matrix::Identity(n, n))),
                tol);
  const double step =
      pick(flags.step, file.options.step,
           simulation_step({&prob.obs.A(), &o.A_o, &primal.lti.A_l}));
  const double bound = worst_case_bound(syn, prob.ell, horizon, step);

  std::filesystem::create_directories(flags.output);
  Json runs = Json::array();
  bool all_within = true;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(i);
    const NoiseRealization real = clean ? clean_realization(prob, horizon, run_seed, step, tol)
                                        : sample_admissible(prob, horizon, run_seed, step, tol);
    const ExperimentResult res = estimation_experiment(prob, o, real);
    const std::string name = fmt::format("run_{:03d}.csv", i);
    std::ostringstream csv;
    write_trace_csv(csv, res.y, res.estimate, res.truth, res.error);
    write_text_file((std::filesystem::path(flags.output) / name).string(), csv.str());

    const int samples = res.error.size();
    const int tail_start = samples - std::max(1, samples / 10);
    const double trailing =
        res.error.values.rightCols(samples - tail_start).cwiseAbs().maxCoeff();
    const double initial = std::abs(res.error.values(0, 0));
    const bool within = res.final_sq_error <= bound + 1e-6;
    all_within = all_within && within;
    runs.push_back({{"file", name},
                    {"seed", run_seed},
                    {"rho", real.rho},
                    {"initial_abs_error", initial},
                    {"trailing_max_abs_error", trailing},
                    {"final_sq_error", res.final_sq_error},
                    {"within_bound", within}});
  }

  Json report = header("simulate", file, tol);
  report["mode"] = clean ? "clean" : "noisy";
  report["horizon"] = horizon;
  report["step"] = step;
  report["seed"] = seed;
  report["sigma"] = o.sigma;
  report["worst_case_bound_at_horizon"] = bound;
  report["all_within_bound"] = all_within;
  report["runs"] = std::move(runs);
  write_text_file((std::filesystem::path(flags.output) / "summary.json").string(),
                  report.dump(2) + "\n");
  return kExitOk;
}

// One pair of builds: identity pair for trial 0, randomized second build
// afterwards. Compares invariant quantities across the pair.
Json equivalence_trial(const DaeSystem& sys, const Construction& base, int trial,
                       std::mt19937_64& rng, const Flags& flags, const Tolerances& tol,
                       const std::function<double(const Construction&, const Vector&)>& value,
                       bool& pass, std::array<double, 11>& worst) {
  const Construction other = trial == 0 ? base : randomized_construction(sys, rng, tol);
  FeedbackEquivalence eq = build_equivalence(base, other);
  if (flags.perturb_u != 0.0) eq.U.array() += flags.perturb_u;
  const EquivalenceReport defects = defect_report(eq);
  const EquivalenceReport sim = verify_equivalence(base.lti, other.lti, eq);

  // Matched initial states: x0 consistent for both builds, v0_i = Λ_i E x0.
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(base.lti.n_hat);
  for (int i = 0; i < w.size(); ++i) w(i) = normal(rng);
  const Vector x0 = base.lti.C_s * w;
  double value_gap = 0.0;
  Json values = Json::object();
  if (value) {
    const double v1 = value(base, x0);
    const double v2 = value(other, x0);
    value_gap = std::abs(v1 - v2) / std::max(1.0, std::abs(v1));
    values = {{"build_1", v1}, {"build_2", v2}, {"relative_gap", value_gap}};
  }
  const bool ok = defects.pass && sim.pass && value_gap <= 1e-8;
  pass = pass && ok;
  for (int i = 0; i < 7; ++i) worst[i] = std::max(worst[i], defects.checks[i].value);
  for (int i = 0; i < 4; ++i) worst[7 + i] = std::max(worst[7 + i], sim.checks[i].value);
  return Json{{"trial", trial},
              {"pass", ok},
              {"defects", checks_to_json(defects.checks)},
              {"similarity", checks_to_json(sim.checks)},
              {"value", values}};
}

int cmd_check_equivalence(const Flags& flags) {
  const ProblemFile file = load_problem(flags.input);
  const Tolerances tol = tolerances(flags, file);
  const int trials = pick(flags.trials, file.options.trials, 20);
  if (trials < 1) throw InputError("--trials must be at least 1");
  const std::uint64_t seed = pick<std::uint64_t>(flags.seed, file.options.seed, 1);

  std::optional<DaeSystem> sys;
  std::function<double(const Construction&, const Vector&)> value;
  std::string value_name;
  if (file.kind == ProblemKind::kControl) {
    const ControlProblem prob = to_control_problem(file);
    sys.emplace(prob.sys);
    const Matrix s = prob.weights.S();
    value_name = "v0^T P v0";
    value = [s, tol](const Construction& c, const Vector& x0) {
      const RiccatiSolution rs = solve_are(c.lti, s, tol);
      return optimal_cost(rs, initial_lti_state(c.lti, x0));
    };
  } else {
    const EstimationProblem prob = to_estimation_problem(file);
    sys.emplace(dual_dae(prob.obs));
    value_name = "sigma";
    value = [prob, tol](const Construction& c, const Vector&) {
      const DualSynthesis syn = synthesize_dual(prob, c, tol);
      return syn.estimable(prob.ell) ? syn.observer_for(prob.ell).sigma : 0.0;
    };
  }
  const Construction base = construct(*sys, tol);
  std::mt19937_64 rng(seed);
  bool pass = true;
  std::array<double, 11> worst{};
  Json trial_reports = Json::array();
  for (int t = 0; t < trials; ++t) {
    trial_reports.push_back(
        equivalence_trial(*sys, base, t, rng, flags, tol, value, pass, worst));
  }
  static const char* kWorstNames[11] = {
      "block structure zeros",
      "T(V1) = V2",
      "(A1 + G1 F1 + G1 L1 F) V1 subset V1",
      "T (A1 + G1 F1 + G1 L1 F) = (A2 + G2 F2) T on V1",
      "T G1 L1 U = G2 L2",
      "diag(T1, I)[0; L1 U] = diag(T2, I)[0; L2]",
      "diag(T1, I)[I; F1 + L1 F] = diag(T2, I)[I; F2] T on V1",
      "T(A1 + B1 K)T^-1 = A2",
      "T B1 U = B2",
      "(C1 + D1 K)T^-1 = C2",
      "D1 U = D2"};
  Json maxima = Json::object();
  for (int i = 0; i < 11; ++i) maxima[kWorstNames[i]] = worst[i];

  Json report = header("check-equivalence", file, tol);
  report["system"] = file.kind == ProblemKind::kControl ? "control DAE" : "dual DAE";
  report["dimensions"] = dimensions(base);
  report["trials"] = trials;
  report["seed"] = seed;
  report["compared_value"] = value_name;
  report["max_defects"] = std::move(maxima);
  report["pass"] = pass;
  report["trial_reports"] = std::move(trial_reports);
  emit(flags, report);
  if (!pass) {
    std::cerr << "error: feedback equivalence check failed (see report)\n";
    return kExitInternal;
  }
  return kExitOk;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const NotStabilizableError& e) {
    std::cerr << "error [Riccati stage]: " << e.what() << "\n";
    return kExitNotStabilizable;
  } catch (const NotEstimableError& e) {
    std::cerr << "error [observer assembly]: " << e.what() << "\n";
    return kExitNotEstimable;
  } catch (const InputError& e) {
    std::cerr << "error [input validation]: " << e.what() << "\n";
    return kExitInput;
  } catch (const InconsistentStateError& e) {
    std::cerr << "error [initial state]: " << e.what() << "\n";
    return kExitInput;
  } catch (const InternalConsistencyError& e) {
    std::cerr << "error [internal consistency]: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace
}  // namespace daeobs

int main(int argc, char** argv) {
  using namespace daeobs;
  CLI::App app{"Minimax observers and LQ control for linear DAEs"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", flags.input, "Problem file (JSON)")->required();
    sub->add_option("--output,-o", flags.output, "Report path (stdout when omitted)");
    sub->add_option("--rank-tol", flags.rank_tol, "Relative rank threshold");
    sub->add_option("--are-tol", flags.are_tol, "Relative Riccati residual bound");
  };

  auto* synth = app.add_subcommand("synthesize-observer", "Minimax observer for F x' = A x + f, y = H x + eta");
  add_common(synth);
  auto* lq = app.add_subcommand("solve-lq", "Infinite-horizon LQ controller for E x' = A x + B u");
  add_common(lq);
  auto* lti = app.add_subcommand("associated-lti", "Associated LTI of a control DAE (or of the dual DAE of an estimation problem)");
  add_common(lti);
  auto* sim = app.add_subcommand("simulate", "Run the observer on sampled trajectories; writes CSV traces and summary.json to --output");
  add_common(sim);
  sim->add_option("--horizon", flags.horizon, "Simulation horizon t1");
  sim->add_option("--step", flags.step, "RK4 step");
  sim->add_option("--seed", flags.seed, "Random seed");
  sim->add_option("--trials", flags.trials, "Number of runs");
  auto* clean_flag = sim->add_flag("--clean", flags.clean, "f = 0, eta = 0");
  sim->add_flag("--noisy", flags.noisy, "Admissible noise with rho <= 1 (default)")->excludes(clean_flag);
  auto* eqv = app.add_subcommand("check-equivalence", "Feedback equivalence of randomized associated-LTI builds");
  add_common(eqv);
  eqv->add_option("--trials", flags.trials, "Number of build pairs (trial 0 is the identity pair)");
  eqv->add_option("--seed", flags.seed, "Random seed");
  eqv->add_option("--perturb-u", flags.perturb_u, "Add this value to every entry of U (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*synth) return run_guarded([&] { return cmd_synthesize_observer(flags); });
  if (*lq) return run_guarded([&] { return cmd_solve_lq(flags); });
  if (*lti) return run_guarded([&] { return cmd_associated_lti(flags); });
  if (*sim) return run_guarded([&] { return cmd_simulate(flags); });
  if (*eqv) return run_guarded([&] { return cmd_check_equivalence(flags); });
  return 1;
}
