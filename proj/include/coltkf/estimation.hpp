#pragma once

#include <functional>
#include <vector>

#include "coltkf/filters.hpp"

namespace coltkf {

struct FitConfig {
  // Restart levels: each starts the simplex at c_diag = g = level (mapped to
  // the unconstrained scale through arctanh).
  std::vector<double> start_levels = {0.0, 0.5, 0.9};
  int max_iterations = 500;  // per restart
  double tol = 1e-6;         // simplex diameter in arctanh space
  double simplex_step = 0.5;
};

struct FitReport {
  ArParams params;
  double log_likelihood = 0.0;
  int iterations = 0;  // summed over restarts
  bool converged = false;
  int restarts_used = 0;
};

// Tobit likelihood of the censored series under the augmented filter run with
// the given AR(1) parameters: Gaussian prediction-error terms for interior
// observations, clamped tail masses at the limits. The full filter pass is
// recomputed for every candidate parameter vector.
double censored_log_likelihood(const ArParams& params, const ColouredStateSpace& model,
                               const std::vector<double>& ys);

// Maximizes the censored likelihood over (c_diag, g) with a Nelder-Mead
// simplex on the arctanh-reparameterized parameters; returns the best of all
// restarts. A, H, Q and r2 are taken from the model as known.
FitReport fit_ar_params(const ColouredStateSpace& model, const std::vector<double>& ys,
                        const FitConfig& config = {});

// Generic derivative-free simplex minimizer, exposed for reuse and testing.
struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, double step, double tol,
                          int max_iterations);

}  // namespace coltkf
