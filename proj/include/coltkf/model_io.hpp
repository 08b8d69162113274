#pragma once

#include <string>

#include "coltkf/estimation.hpp"
#include "coltkf/filters.hpp"
#include "coltkf/gaussian.hpp"
#include "coltkf/state_space.hpp"

namespace coltkf {

struct ExperimentReport;

// Model file: JSON object with keys A, C (n x n, nested rows or flat
// row-major), H, x0 (length n), Q, P0 (n x n), r2, g (numbers) and band
// {lower, upper} where either limit may be null (or absent) for infinite.
ColouredStateSpace load_model(const std::string& path);
void save_model(const std::string& path, const ColouredStateSpace& model);

// Gaussian input for the moments command: keys mean + cov, with x0 + P0 from
// a model file accepted as a fallback.
GaussianSpec load_gaussian(const std::string& path);

// Trajectory CSV: header t,x1..xn,y_star,y with one full-precision row per step.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

// Trace CSV: header t,zhat_1..zhat_m,loglik_step,mean_censored,var_censored,uncensored_prob.
void write_trace_csv(const std::string& path, const FilterTrace& trace);

// Fit JSON: {"c_diag":[...],"g":...,"loglik":...,"iterations":...,"converged":...}
void write_fit_json(const std::string& path, const FitReport& report);
std::string fit_to_json(const FitReport& report);
ArParams load_fit_params(const std::string& path);

// Report JSON: {"experiment":id,"runs":N,"seed":S,"table":{"AKF":{"mean":[...],
// "std":[...]},...},"excluded_runs":[...]}
std::string report_to_json(const ExperimentReport& report);
void write_report_json(const std::string& path, const ExperimentReport& report);

std::string summary_to_json(const CensoredSummary& summary);

// Combined closed-form / Monte Carlo comparison document for the moments
// command.
std::string moments_comparison_to_json(const CensoredSummary& closed,
                                       const McCensoredSummary& mc);

}  // namespace coltkf
