// Command-line front end: censored moments, trajectory simulation, filtering,
// AR(1) parameter fitting and the Monte Carlo experiment harness.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coltkf/censored_moments.hpp"
#include "coltkf/errors.hpp"
#include "coltkf/estimation.hpp"
#include "coltkf/filters.hpp"
#include "coltkf/harness.hpp"
#include "coltkf/model_io.hpp"

namespace {

using namespace coltkf;

struct MomentsArgs {
  std::string model;
  int k = 1;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  long long mc_samples = 0;
  int reps = 100;
  std::uint64_t seed = 0;
};

int run_moments(const MomentsArgs& args) {
  GaussianSpec spec = load_gaussian(args.model);
  if (args.k < 1 || args.k > spec.dim())
    throw std::invalid_argument("--k must be a 1-based coordinate index");
  const Eigen::Index k = args.k - 1;
  CensorBand band(args.lower, args.upper);

  CensoredSummary closed = censored_summary(spec, k, band);
  if (args.mc_samples > 0) {
    McCensoredSummary mc =
        mc_censored_summary_detail(spec, k, band, args.mc_samples, args.reps, {args.seed, 0});
    std::cout << moments_comparison_to_json(closed, mc);
  } else {
    std::cout << summary_to_json(closed);
  }
  return 0;
}

struct SimulateArgs {
  int experiment = 0;
  std::string model;
  long long steps = 500;
  std::uint64_t seed = 0;
  std::string out;
};

ColouredStateSpace resolve_model(int experiment, const std::string& model_path) {
  if (experiment != 0 && !model_path.empty())
    throw std::invalid_argument("give either --experiment or --model, not both");
  if (experiment != 0) return builtin_experiment(experiment).model;
  if (model_path.empty()) throw std::invalid_argument("need --experiment or --model");
  return load_model(model_path);
}

int run_simulate(const SimulateArgs& args) {
  ColouredStateSpace model = resolve_model(args.experiment, args.model);
  Trajectory traj = simulate(model, args.steps, {args.seed, 0});
  if (args.out.empty()) {
    const std::string tmp = "/dev/stdout";
    write_trajectory_csv(tmp, traj);
  } else {
    write_trajectory_csv(args.out, traj);
    std::cerr << "wrote " << traj.steps() << " steps to " << args.out << "\n";
  }
  return 0;
}

struct FilterArgs {
  std::string kind = "coltkf";
  std::string model;
  std::string data;
  std::string params;
  std::string out;
};

int run_filter_cmd(const FilterArgs& args) {
  ColouredStateSpace model = load_model(args.model);
  Trajectory traj = read_trajectory_csv(args.data);
  std::vector<double> ys(traj.observed.data(), traj.observed.data() + traj.observed.size());

  FilterOptions options;
  if (!args.params.empty()) options.assumed = load_fit_params(args.params);
  FilterTrace trace = run_filter(parse_filter_kind(args.kind), model, ys, options);

  write_trace_csv(args.out.empty() ? "/dev/stdout" : args.out, trace);
  std::cerr << "log-likelihood " << trace.total_log_lik << ", gain floor hits "
            << trace.gain_floor_hits << "\n";
  return 0;
}

struct FitArgs {
  std::string model;
  std::string data;
  int restarts = 3;
  int max_iter = 500;
  std::string out;
};

int run_fit(const FitArgs& args) {
  ColouredStateSpace model = load_model(args.model);
  Trajectory traj = read_trajectory_csv(args.data);
  std::vector<double> ys(traj.observed.data(), traj.observed.data() + traj.observed.size());
  if (ys.size() < 50)
    std::cerr << "warning: fewer than 50 observations; the fit is unlikely to be meaningful\n";

  FitConfig config;
  config.max_iterations = args.max_iter;
  if (args.restarts < 1) throw std::invalid_argument("--restarts must be >= 1");
  if (args.restarts <= 3) {
    config.start_levels.resize(args.restarts);
  } else {
    // extra restarts spread over (-0.9, 0.9)
    for (int i = 3; i < args.restarts; ++i)
      config.start_levels.push_back(-0.9 + 1.8 * (i - 2) / (args.restarts - 1));
  }
  FitReport report = fit_ar_params(model, ys, config);
  const std::string text = fit_to_json(report);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(args.out);
    out << text;
    std::cerr << "wrote " << args.out << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  int id = 1;
  int runs = 0;
  std::uint64_t seed = 0;
  std::string dump;
  std::string report;
  int threads = 0;
  bool no_fit = false;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  ExperimentConfig config = builtin_experiment(args.id);
  if (args.runs > 0) config.runs = args.runs;
  config.seed = args.seed;
  if (args.no_fit) config.fit_params = false;

  std::optional<std::string> dump;
  if (!args.dump.empty()) dump = args.dump;
  ExperimentReport report = run_experiment(config, dump, args.threads);

  std::cout << "experiment " << args.id << ", " << config.runs << " runs, seed " << args.seed
            << (config.fit_params ? ", fitted ColTKF params" : ", true params") << "\n";
  for (const auto& [name, stats] : report.table) {
    std::cout << "  " << name << " mean RMSE:";
    for (Eigen::Index i = 0; i < stats.mean.size(); ++i) std::cout << " " << stats.mean[i];
    std::cout << "  (std:";
    for (Eigen::Index i = 0; i < stats.stddev.size(); ++i) std::cout << " " << stats.stddev[i];
    std::cout << ")\n";
  }
  if (!report.excluded_runs.empty())
    std::cout << "  excluded runs: " << report.excluded_runs.size() << "\n";
  if (!args.report.empty()) {
    write_report_json(args.report, report);
    std::cerr << "wrote " << args.report << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coloured Tobit Kalman filter toolkit"};
  app.require_subcommand(1);

  MomentsArgs moments;
  auto* cmd_moments = app.add_subcommand("moments", "Censored moments of a Gaussian coordinate");
  cmd_moments->add_option("--model", moments.model, "JSON file with mean/cov (or x0/P0)")->required();
  cmd_moments->add_option("--k", moments.k, "censored coordinate (1-based)")->required();
  cmd_moments->add_option("--lower", moments.lower, "lower censoring limit");
  cmd_moments->add_option("--upper", moments.upper, "upper censoring limit");
  cmd_moments->add_option("--mc", moments.mc_samples, "Monte Carlo samples per rep (0 = off)");
  cmd_moments->add_option("--reps", moments.reps, "Monte Carlo repetitions");
  cmd_moments->add_option("--seed", moments.seed, "Monte Carlo seed");

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Simulate a censored trajectory");
  cmd_sim->add_option("--experiment", sim.experiment, "builtin experiment id (1 or 2)");
  cmd_sim->add_option("--model", sim.model, "model JSON file");
  cmd_sim->add_option("--steps", sim.steps, "number of steps");
  cmd_sim->add_option("--seed", sim.seed, "RNG seed");
  cmd_sim->add_option("--out", sim.out, "output CSV (stdout if omitted)");

  FilterArgs filt;
  auto* cmd_filter = app.add_subcommand("filter", "Run a filter over recorded measurements");
  cmd_filter->add_option("--kind", filt.kind, "akf | tkfc | coltkf")->required();
  cmd_filter->add_option("--model", filt.model, "model JSON file")->required();
  cmd_filter->add_option("--data", filt.data, "trajectory CSV")->required();
  cmd_filter->add_option("--params", filt.params, "fit JSON with assumed AR(1) parameters");
  cmd_filter->add_option("--out", filt.out, "trace CSV (stdout if omitted)");

  FitArgs fit;
  auto* cmd_fit = app.add_subcommand("fit", "Fit AR(1) noise parameters by censored likelihood");
  cmd_fit->add_option("--model", fit.model, "model JSON file")->required();
  cmd_fit->add_option("--data", fit.data, "trajectory CSV")->required();
  cmd_fit->add_option("--restarts", fit.restarts, "number of simplex restarts");
  cmd_fit->add_option("--max-iter", fit.max_iter, "max iterations per restart");
  cmd_fit->add_option("--out", fit.out, "output JSON (stdout if omitted)");

  ExperimentArgs exp;
  auto* cmd_exp = app.add_subcommand("experiment", "Monte Carlo filter comparison");
  cmd_exp->add_option("--id", exp.id, "experiment id (1 or 2)")->required();
  cmd_exp->add_option("--runs", exp.runs, "number of Monte Carlo runs");
  cmd_exp->add_option("--seed", exp.seed, "base RNG seed");
  cmd_exp->add_option("--dump", exp.dump, "directory for per-run artifacts");
  cmd_exp->add_option("--report", exp.report, "write the aggregate report JSON here");
  cmd_exp->add_option("--threads", exp.threads, "worker threads (0 = hardware)");
  cmd_exp->add_flag("--no-fit", exp.no_fit, "use true AR(1) parameters for ColTKF");

  try {
    app.parse(argc, argv);
    if (*cmd_moments) return run_moments(moments);
    if (*cmd_sim) return run_simulate(sim);
    if (*cmd_filter) return run_filter_cmd(filt);
    if (*cmd_fit) return run_fit(fit);
    if (*cmd_exp) return run_experiment_cmd(exp);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const coltkf::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
