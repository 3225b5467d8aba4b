// Command-line front end: simulate trajectories, run estimators, check
// assumptions, evaluate theoretical bounds and drive Monte-Carlo experiments.
//
// Exit codes: 0 success, 1 usage error, 2 runtime/numerical error,
// 3 assumption-check failure (check subcommand only).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sysid/bounds.hpp"
#include "sysid/csv_io.hpp"
#include "sysid/estimators.hpp"
#include "sysid/experiment.hpp"
#include "sysid/json_io.hpp"
#include "sysid/system.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

struct SimulateArgs {
  std::string system_path;
  long T = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  bool emit_noise = false;
};

int run_simulate(const SimulateArgs& args) {
  const sysid::LinearSystem sys =
      sysid::system_from_json(sysid::load_json_file(args.system_path));
  sysid::SimulateOptions options;
  options.capture_noise = args.emit_noise;
  const sysid::Trajectory traj =
      sysid::simulate(sys, args.T, sysid::RngStream{args.seed, "", 0}, options);
  sysid::write_trajectory_csv(traj, args.out_path, args.emit_noise);
  std::cerr << "wrote " << args.out_path << " (T = " << traj.T() << ", n = " << traj.n
            << ", m = " << traj.m << ")\n";
  return kExitOk;
}

struct EstimateArgs {
  std::string method;
  std::string traj_path;
  std::string out_path;
  std::string sigma_eta_hat_path;
  int k = 0;  // 0: default n + 1
};

int run_estimate(const EstimateArgs& args) {
  const sysid::Trajectory traj = sysid::read_trajectory_csv(args.traj_path);
  sysid::Estimate est;
  if (args.method == "ls") {
    est = sysid::ls_estimate(traj);
  } else if (args.method == "iv") {
    est = sysid::iv_estimate(traj);
  } else if (args.method == "bc") {
    const sysid::Matrix sigma_eta_hat =
        sysid::matrix_from_json(sysid::load_json_file(args.sigma_eta_hat_path));
    est = sysid::bc_estimate(traj, sigma_eta_hat);
  } else if (args.method == "hokalman") {
    const int k = args.k > 0 ? args.k : static_cast<int>(traj.n) + 1;
    est = sysid::ho_kalman_estimate(traj, k);
  }
  const sysid::Json j = sysid::estimate_to_json(est);
  sysid::save_json_file(j, args.out_path);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

struct CheckArgs {
  std::string system_path;
  double eps_eta = 0.0;
};

int run_check(const CheckArgs& args) {
  const sysid::LinearSystem sys =
      sysid::system_from_json(sysid::load_json_file(args.system_path));
  const sysid::AssumptionReport report = sysid::check_assumptions(sys, args.eps_eta);
  std::cout << sysid::report_to_json(report).dump(2) << "\n";
  return sysid::assumption_verdict(report).all_required_ok ? kExitOk : kExitCheckFailed;
}

struct BoundsArgs {
  std::string system_path;
  double delta = 0.05;
  double c1 = 1.0;
  double c2 = 1.0;
  std::optional<double> T;
  double eps_eta = 0.0;
};

int run_bounds(const BoundsArgs& args) {
  const sysid::LinearSystem sys =
      sysid::system_from_json(sysid::load_json_file(args.system_path));
  const sysid::SystemConstants k = sysid::system_constants(sys);
  sysid::BoundConfig cfg;
  cfg.delta = args.delta;
  cfg.c1 = args.c1;
  cfg.c2 = args.c2;
  const sysid::KappaConstants kap = sysid::kappa_constants(k, cfg);
  const double thr_iv = sysid::iv_sample_threshold(k, cfg);
  const double thr_bc = sysid::bc_sample_threshold(k, cfg);

  sysid::Json j{{"psi", k.psi},
                {"psi_A", k.psi_A},
                {"rho_A", k.rho_A},
                {"phi_R", k.phi_R},
                {"phi_A", k.phi_A},
                {"phi_u", k.phi_u},
                {"kappa1", kap.kappa1},
                {"kappa2", kap.kappa2},
                {"T_threshold_iv", thr_iv},
                {"T_threshold_bc", thr_bc},
                {"delta", cfg.delta},
                {"c1", cfg.c1},
                {"c2", cfg.c2}};
  if (args.T) {
    j["T"] = *args.T;
    j["eps_eta"] = args.eps_eta;
    if (*args.T >= thr_iv) {
      j["iv_error_bound"] = sysid::iv_error_bound(k, cfg, *args.T);
    } else {
      j["iv_error_bound"] = nullptr;
      j["iv_below_threshold"] = true;
    }
    if (*args.T >= thr_bc) {
      j["bc_error_bound"] = sysid::bc_error_bound(k, cfg, *args.T, args.eps_eta);
    } else {
      j["bc_error_bound"] = nullptr;
      j["bc_below_threshold"] = true;
    }
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::string config_path;
  std::string builtin;
  std::string out_dir;
  int threads = 0;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  sysid::ExperimentConfig cfg =
      !args.builtin.empty()
          ? sysid::builtin_config(args.builtin)
          : sysid::config_from_json(sysid::load_json_file(args.config_path));
  const sysid::ExperimentResult res = sysid::run_experiment(cfg, args.threads);
  sysid::emit_experiment_outputs(res, args.out_dir);
  int failures = 0;
  for (const sysid::TrialRecord& r : res.records) {
    failures += r.failed ? 1 : 0;
  }
  std::cerr << "wrote " << args.out_dir << " (" << res.records.size() << " records, "
            << failures << " failed)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"System identification from noisy state observations"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Simulate a trajectory to CSV");
  c_sim->add_option("--system", sim.system_path, "LinearSystem JSON file")->required();
  c_sim->add_option("--T", sim.T, "horizon (number of transitions)")->required();
  c_sim->add_option("--seed", sim.seed, "master seed (default 0)");
  c_sim->add_option("--out", sim.out_path, "output CSV path")->required();
  c_sim->add_flag("--emit-noise", sim.emit_noise, "also write realized w/eta columns");

  EstimateArgs est;
  CLI::App* c_est = app.add_subcommand("estimate", "Run an estimator on a trajectory CSV");
  c_est->add_option("--method", est.method, "ls|iv|bc|hokalman")
      ->required()
      ->check(CLI::IsMember({"ls", "iv", "bc", "hokalman"}));
  c_est->add_option("--traj", est.traj_path, "trajectory CSV")->required();
  c_est->add_option("--out", est.out_path, "output estimate JSON")->required();
  c_est->add_option("--sigma-eta-hat", est.sigma_eta_hat_path,
                    "matrix-literal JSON file (required for bc)");
  c_est->add_option("--k", est.k, "Markov-parameter horizon for hokalman (default n+1)");

  CheckArgs chk;
  CLI::App* c_chk = app.add_subcommand("check", "Verify the estimator assumptions");
  c_chk->add_option("--system", chk.system_path, "LinearSystem JSON file")->required();
  c_chk->add_option("--eps-eta", chk.eps_eta, "covariance estimation error bound");

  BoundsArgs bnd;
  CLI::App* c_bnd = app.add_subcommand("bounds", "Evaluate theoretical constants and bounds");
  c_bnd->add_option("--system", bnd.system_path, "LinearSystem JSON file")->required();
  c_bnd->add_option("--delta", bnd.delta, "failure probability parameter (default 0.05)");
  c_bnd->add_option("--c1", bnd.c1, "absolute constant c1 (default 1)");
  c_bnd->add_option("--c2", bnd.c2, "absolute constant c2 (default 1)");
  double bounds_T = 0;
  CLI::Option* t_opt = c_bnd->add_option("--T", bounds_T, "evaluate error bounds at this T");
  c_bnd->add_option("--eps-eta", bnd.eps_eta, "covariance error for the bc bound");

  ExperimentArgs exp;
  CLI::App* c_exp = app.add_subcommand("experiment", "Run a Monte-Carlo experiment");
  CLI::Option* cfg_opt = c_exp->add_option("--config", exp.config_path, "experiment JSON");
  CLI::Option* builtin_opt =
      c_exp->add_option("--builtin", exp.builtin,
                        "paper-nonautonomous|paper-autonomous|scalar-benchmark");
  cfg_opt->excludes(builtin_opt);
  c_exp->add_option("--out-dir", exp.out_dir, "output directory")->required();
  c_exp->add_option("--threads", exp.threads, "worker threads (default: hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_est) {
      if (est.method == "bc" && est.sigma_eta_hat_path.empty()) {
        std::cerr << "estimate --method bc requires --sigma-eta-hat\n";
        return kExitUsage;
      }
      return run_estimate(est);
    }
    if (*c_chk) return run_check(chk);
    if (*c_bnd) {
      if (t_opt->count() > 0) bnd.T = bounds_T;
      return run_bounds(bnd);
    }
    if (*c_exp) {
      if (exp.builtin.empty() && exp.config_path.empty()) {
        std::cerr << "experiment requires --config or --builtin\n";
        return kExitUsage;
      }
      return run_experiment_cmd(exp);
    }
  } catch (const sysid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
