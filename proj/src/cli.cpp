#include "sofsyn/cli.hpp"

#include "sofsyn/demo_system.hpp"
#include "sofsyn/json_io.hpp"
#include "sofsyn/plot.hpp"
#include "sofsyn/robustness.hpp"
#include "sofsyn/simulate.hpp"
#include "sofsyn/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>

namespace sofsyn {

namespace {

struct CommonOptions {
  std::string system_path;
  std::string out_path;
  SolverConfig solver;
  double mu = 2.5;
  bool optimize_mu = false;
  double gamma_fixed = -1.0;  // < 0 means "maximize"
  std::string method = "corollary1";
  double weight_objective = 1.0;
  double weight_zeta = 1.0;
  double c_uniform = 1.0;
  bool no_p_cap = false;
};

void add_solver_flags(CLI::App* cmd, SolverConfig& solver) {
  cmd->add_option("--tau", solver.strictness_margin,
                  "strictness margin for the matrix inequalities")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--feas-tol", solver.feas_tol, "feasibility tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gap-tol", solver.duality_gap_tol, "duality gap tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", solver.max_iterations,
                  "Newton-step budget per solver phase")
      ->check(CLI::PositiveNumber);
}

SynthesisRequest build_request(const CommonOptions& opt) {
  SynthesisRequest request;
  auto method = method_from_string(opt.method);
  if (!method)
    throw CLI::ValidationError("--method", "unknown method '" + opt.method + "'");
  request.method = *method;
  request.mu = opt.mu;
  request.optimize_mu = opt.optimize_mu;
  if (opt.gamma_fixed >= 0.0) {
    request.fixed_gamma = true;
    request.gamma = opt.gamma_fixed;
  }
  request.weight_objective = opt.weight_objective;
  request.weight_zeta = opt.weight_zeta;
  request.cap_p_below_identity = !opt.no_p_cap;
  request.solver = opt.solver;
  return request;
}

void print_result_summary(const SynthesisResult& result) {
  std::cout << "status: " << to_string(result.status) << "\n";
  if (result.status != SolveStatus::Optimal) return;
  auto show = [](const char* name, double v) {
    if (std::isfinite(v)) std::cout << name << " = " << v << "\n";
  };
  show("alpha*", result.alpha_star);
  show("eps1*", result.eps1_star);
  show("gamma*", result.gamma_star);
  show("mu", result.mu);
  if (result.K.size() > 0) {
    std::cout << "K =\n";
    for (Eigen::Index i = 0; i < result.K.rows(); ++i) {
      std::cout << "  ";
      for (Eigen::Index j = 0; j < result.K.cols(); ++j)
        std::cout << (j ? "  " : "") << result.K(i, j);
      std::cout << "\n";
    }
  }
  if (result.method == Method::Theorem1)
    std::cout << "gain recovery: " << to_string(result.gain_recovery)
              << " (residual " << result.gain_residual << ", rank condition "
              << (result.rank_condition_holds ? "holds" : "fails") << ")\n";
}

int finish_synthesis(const SynthesisResult& result, const std::string& out_path) {
  print_result_summary(result);
  if (!out_path.empty()) save_synthesis_result(result, out_path);
  return result.status == SolveStatus::Optimal ? 0 : 1;
}

Vector make_x0(const std::string& mode, int n, std::uint64_t seed) {
  if (mode == "zero") return Vector::Zero(n);
  if (mode == "random") {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x0(n);
    for (int i = 0; i < n; ++i) x0[i] = normal(rng);
    if (x0.norm() == 0.0) x0[0] = 1.0;
    return Vector(x0 / x0.norm());
  }
  throw CLI::ValidationError("--x0", "expected 'zero' or 'random'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"robust static output feedback synthesis toolkit"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::uint64_t seed = 1;
  int steps = 200;
  std::string gain_path, x0_mode = "random", uncertainty = "switching",
              disturbance = "zero", csv_path, svg_path, out_dir = ".",
              write_system_path, result_path;
  double amplitude = 1.0;
  int support = 0;
  double gamma_actual = -1.0;
  double jacobian_bound = -1.0;

  auto* analyze = app.add_subcommand("analyze", "admissibility and attenuation analysis "
                                                "of the uncontrolled plant");
  analyze->add_option("--system", opt.system_path, "system JSON file")->required();
  analyze->add_option("--mu", opt.mu, "attenuation level")->check(CLI::PositiveNumber);
  analyze->add_flag("--optimize-mu", opt.optimize_mu, "treat mu^2 as a variable");
  analyze->add_option("--gamma-fixed", opt.gamma_fixed,
                      "check feasibility at this Lipschitz constant instead of maximizing")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--weight-obj", opt.weight_objective, "objective weight")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--weight-zeta", opt.weight_zeta, "weight on mu^2")
      ->check(CLI::PositiveNumber);
  analyze->add_flag("--no-p-cap", opt.no_p_cap, "drop the P <= (1-tau) I block");
  analyze->add_option("--out", opt.out_path, "result JSON path");
  add_solver_flags(analyze, opt.solver);

  auto* synth = app.add_subcommand("synth", "synthesize a static output feedback gain");
  synth->add_option("--system", opt.system_path, "system JSON file")->required();
  synth->add_option("--method", opt.method, "theorem1 | corollary1 | corollary2");
  synth->add_option("--mu", opt.mu, "attenuation level")->check(CLI::PositiveNumber);
  synth->add_flag("--optimize-mu", opt.optimize_mu, "treat mu^2 as a variable");
  synth->add_option("--gamma-fixed", opt.gamma_fixed,
                    "check feasibility at this Lipschitz constant instead of maximizing")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--weight-obj", opt.weight_objective, "objective weight")
      ->check(CLI::PositiveNumber);
  synth->add_option("--weight-zeta", opt.weight_zeta, "weight on mu^2")
      ->check(CLI::PositiveNumber);
  synth->add_option("--c-uniform", opt.c_uniform,
                    "uniform element weight for corollary2")
      ->check(CLI::PositiveNumber);
  synth->add_flag("--no-p-cap", opt.no_p_cap, "drop the P <= (1-tau) I block");
  synth->add_option("--out", opt.out_path, "result JSON path");
  add_solver_flags(synth, opt.solver);

  auto* simulate_cmd = app.add_subcommand("simulate", "closed-loop rollout");
  simulate_cmd->add_option("--system", opt.system_path, "system JSON file")->required();
  simulate_cmd->add_option("--gain", gain_path, "synthesis result JSON with K")->required();
  simulate_cmd->add_option("--steps", steps, "horizon")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--x0", x0_mode, "zero | random");
  simulate_cmd->add_option("--seed", seed, "seed for signals and x0");
  simulate_cmd->add_option("--uncertainty", uncertainty,
                           "zero | constant | switching | sinusoidal");
  simulate_cmd->add_option("--disturbance", disturbance, "zero | impulse | random");
  simulate_cmd->add_option("--amplitude", amplitude, "disturbance amplitude")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--support", support,
                           "nonzero steps of the random disturbance (default steps/4)");
  simulate_cmd->add_option("--out", csv_path, "trajectory CSV path");
  simulate_cmd->add_option("--plot", svg_path, "trajectory SVG path");

  auto* robustness_cmd =
      app.add_subcommand("robustness", "margins for additive nonlinear uncertainty");
  robustness_cmd->add_option("--system", opt.system_path, "system JSON file")->required();
  robustness_cmd->add_option("--result", result_path, "synthesis result JSON")->required();
  robustness_cmd->add_option("--gamma", gamma_actual,
                             "actual Lipschitz constant (default: from the system file)")
      ->check(CLI::NonNegativeNumber);
  robustness_cmd->add_option("--jacobian-bound", jacobian_bound,
                             "also check a Jacobian norm bound against the margin")
      ->check(CLI::NonNegativeNumber);
  robustness_cmd->add_option("--out", opt.out_path, "report JSON path");

  auto* demo = app.add_subcommand("demo", "run the built-in five-state example end to end");
  demo->add_option("--method", opt.method, "theorem1 | corollary1 | corollary2");
  demo->add_option("--mu", opt.mu, "attenuation level")->check(CLI::PositiveNumber);
  demo->add_option("--gamma-fixed", opt.gamma_fixed,
                   "feasibility check at a fixed Lipschitz constant")
      ->check(CLI::NonNegativeNumber);
  demo->add_option("--steps", steps, "simulation horizon")->check(CLI::PositiveNumber);
  demo->add_option("--seed", seed, "simulation seed");
  demo->add_option("--out-dir", out_dir, "output directory");
  demo->add_option("--write-system", write_system_path,
                   "also export the built-in plant as a system JSON file");
  add_solver_flags(demo, opt.solver);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (analyze->parsed()) {
      UncertainSystem system = load_system(opt.system_path);
      SynthesisRequest request = build_request(opt);
      request.method = Method::Lemma3Analysis;
      return finish_synthesis(analyze_lemma3(system, request), opt.out_path);
    }

    if (synth->parsed()) {
      UncertainSystem system = load_system(opt.system_path);
      SynthesisRequest request = build_request(opt);
      if (request.method == Method::Lemma3Analysis)
        throw CLI::ValidationError("--method", "use the analyze subcommand for analysis");
      if (request.method == Method::Corollary2)
        request.c_weights = opt.c_uniform * Matrix::Ones(system.n, system.n);
      return finish_synthesis(synthesize(system, request), opt.out_path);
    }

    if (simulate_cmd->parsed()) {
      UncertainSystem system = load_system(opt.system_path);
      Matrix gain = load_gain(gain_path);

      UncertaintySignal f_sig = UncertaintySignal::zero(system.q);
      if (uncertainty == "zero")
        f_sig = UncertaintySignal::zero(system.q);
      else if (uncertainty == "constant")
        f_sig = UncertaintySignal::constant(system.q, seed);
      else if (uncertainty == "switching")
        f_sig = UncertaintySignal::random_switching(system.q, seed);
      else if (uncertainty == "sinusoidal")
        f_sig = UncertaintySignal::sinusoidal(system.q, seed);
      else
        throw CLI::ValidationError("--uncertainty", "unknown kind '" + uncertainty + "'");

      DisturbanceSignal w_sig = DisturbanceSignal::zero(system.d);
      if (disturbance == "zero")
        w_sig = DisturbanceSignal::zero(system.d);
      else if (disturbance == "impulse")
        w_sig = DisturbanceSignal::impulse(system.d, amplitude);
      else if (disturbance == "random")
        w_sig = DisturbanceSignal::finite_random(
            system.d, seed, support > 0 ? support : std::max(1, steps / 4), amplitude);
      else
        throw CLI::ValidationError("--disturbance", "unknown kind '" + disturbance + "'");

      // Record the Lyapunov value when the result file carries a certificate.
      std::optional<SymmetricMatrix> p_cert;
      {
        std::ifstream in(gain_path);
        nlohmann::json j;
        in >> j;
        if (j.contains("P")) {
          const auto& rows = j["P"];
          const int np = static_cast<int>(rows.size());
          Matrix p(np, np);
          for (int i = 0; i < np; ++i)
            for (int c = 0; c < np; ++c) p(i, c) = rows[i][c].get<double>();
          p_cert = SymmetricMatrix::from_dense(p, 1e-6);
        }
      }

      Trajectory traj = simulate(system, gain, system.phi, f_sig, w_sig,
                                 make_x0(x0_mode, system.n, seed), steps,
                                 p_cert ? &*p_cert : nullptr);
      std::cout << "steps recorded: " << traj.steps_recorded()
                << (traj.diverged ? " (diverged)" : "") << "\n"
                << "final state norm: " << traj.x.back().norm() << "\n";
      if (!csv_path.empty()) write_trajectory_csv(traj, csv_path);
      if (!svg_path.empty()) write_trajectory_svg(traj, svg_path);
      return traj.diverged ? 1 : 0;
    }

    if (robustness_cmd->parsed()) {
      UncertainSystem system = load_system(opt.system_path);
      std::ifstream in(result_path);
      if (!in)
        throw SystemError(SystemErrorCode::ParseError, "cannot open " + result_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw SystemError(SystemErrorCode::ParseError, e.what());
      }
      if (!j.contains("gamma_star") || !j["gamma_star"].is_number())
        throw SystemError(SystemErrorCode::SchemaViolation,
                          result_path + ": no gamma_star");
      const double gamma_star = j["gamma_star"].get<double>();
      const double gamma = gamma_actual >= 0.0 ? gamma_actual : system.gamma;

      std::optional<Matrix> Gamma_actual, Gamma_star;
      if (system.phi.kind != PhiKind::CustomCallback)
        Gamma_actual = system.phi.matrix_lipschitz(system.n);
      if (j.contains("Gamma_star")) {
        const auto& rows = j["Gamma_star"];
        Matrix gs(rows.size(), rows.size());
        for (size_t r = 0; r < rows.size(); ++r)
          for (size_t c = 0; c < rows.size(); ++c)
            gs(static_cast<int>(r), static_cast<int>(c)) = rows[r][c].get<double>();
        Gamma_star = gs;
      } else if (Gamma_actual) {
        // Isotropic fallback: gamma* in every admissible direction.
        Gamma_star = gamma_star * Matrix::Identity(system.n, system.n).eval();
      }

      RobustnessReport report =
          build_robustness_report(gamma, gamma_star, Gamma_actual, Gamma_star);
      std::cout << "normwise margin: " << report.normwise_margin << "\n";
      if (jacobian_bound >= 0.0)
        std::cout << "jacobian bound " << jacobian_bound << " admissible: "
                  << (jacobian_margin_check(jacobian_bound,
                                            std::max(0.0, report.normwise_margin))
                          ? "yes"
                          : "no")
                  << "\n";
      if (!opt.out_path.empty()) save_robustness_report(report, opt.out_path);
      return 0;
    }

    if (demo->parsed()) {
      UncertainSystem system = demo_system();
      if (!write_system_path.empty()) save_system(system, write_system_path);

      SynthesisRequest request = build_request(opt);
      if (request.method == Method::Corollary2)
        request.c_weights = Matrix::Ones(system.n, system.n);
      SynthesisResult result = request.method == Method::Lemma3Analysis
                                   ? analyze_lemma3(system, request)
                                   : synthesize(system, request);
      print_result_summary(result);
      save_synthesis_result(result, out_dir + "/demo_result.json");
      if (result.status != SolveStatus::Optimal) {
        if (request.fixed_gamma)
          std::cout << "fixed gamma " << request.gamma << ": infeasible\n";
        return 1;
      }
      if (request.fixed_gamma)
        std::cout << "fixed gamma " << request.gamma << ": feasible\n";

      RobustnessReport report = build_robustness_report(
          system.gamma, result.gamma_star, system.phi.matrix_lipschitz(system.n),
          result.Gamma_star.size() > 0
              ? std::optional<Matrix>(result.Gamma_star)
              : std::optional<Matrix>(
                    result.gamma_star * Matrix::Identity(system.n, system.n).eval()));
      std::cout << "normwise margin (gamma* - gamma): " << report.normwise_margin
                << "\n";
      save_robustness_report(report, out_dir + "/demo_robustness.json");

      if (result.K.size() > 0) {
        Trajectory traj = simulate(system, result.K, system.phi,
                                   UncertaintySignal::random_switching(system.q, seed),
                                   DisturbanceSignal::zero(system.d),
                                   make_x0("random", system.n, seed), steps, &result.P);
        write_trajectory_csv(traj, out_dir + "/demo_trajectory.csv");
        write_trajectory_svg(traj, out_dir + "/demo_trajectory.svg");
        std::cout << "final state norm after " << steps
                  << " steps: " << traj.x.back().norm() << "\n";
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const SystemError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sofsyn
