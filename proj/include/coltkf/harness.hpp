#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coltkf/estimation.hpp"
#include "coltkf/filters.hpp"

namespace coltkf {

struct ExperimentConfig {
  int experiment_id = 0;  // 0 for custom configurations
  ColouredStateSpace model;
  Eigen::Index steps = 500;
  int runs = 100;
  std::uint64_t seed = 0;
  bool fit_params = true;  // fit (C, g) per run; fitted values go to ColTKF only
  std::vector<FilterKind> filters = {FilterKind::Akf, FilterKind::Tkfc, FilterKind::ColTkf};
  FitConfig fit;
};

// The two oscillator benchmarks: a slow rotation observed through H = [1 0.5]
// with saturating measurements, with coloured noises (id 1, band +-5) or
// white noises (id 2, band +-1).
ExperimentConfig builtin_experiment(int id);

// Per-coordinate root mean square error between estimate and truth rows.
Eigen::VectorXd rmse(const Eigen::MatrixXd& estimates, const Eigen::MatrixXd& truths);

struct FilterRmseStats {
  Eigen::VectorXd mean;    // over runs, per state coordinate
  Eigen::VectorXd stddev;  // over runs, per state coordinate
};

struct RunFailure {
  int run = 0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct ExperimentReport {
  int experiment_id = 0;
  int runs = 0;
  std::uint64_t seed = 0;
  std::map<std::string, FilterRmseStats> table;
  std::map<std::string, Eigen::MatrixXd> per_run_rmse;  // runs x n, NaN rows for failures
  std::vector<FitReport> fits;                          // one per successful run if fitting
  std::vector<RunFailure> excluded_runs;
};

// Runs the Monte Carlo comparison: per run r, simulate with stream r, fit the
// AR(1) parameters if requested, then run every configured filter and record
// per-coordinate RMSE on the physical state. Failed runs are excluded from
// the aggregates and reported. Runs execute concurrently; aggregation is by
// run index, so results are reproducible for a fixed (config, seed).
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::optional<std::string>& dump_dir = std::nullopt,
                                int threads = 0);

}  // namespace coltkf
