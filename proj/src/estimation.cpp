#include "coltkf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coltkf/errors.hpp"

namespace coltkf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kParamCap = 1.0 - 1e-9;

Eigen::VectorXd to_unconstrained(const ArParams& params) {
  Eigen::VectorXd theta(params.c_diag.size() + 1);
  for (Eigen::Index i = 0; i < params.c_diag.size(); ++i) theta[i] = std::atanh(params.c_diag[i]);
  theta[params.c_diag.size()] = std::atanh(params.g);
  return theta;
}

ArParams to_params(const Eigen::VectorXd& theta) {
  ArParams params;
  params.c_diag.resize(theta.size() - 1);
  for (Eigen::Index i = 0; i + 1 < theta.size(); ++i)
    params.c_diag[i] = std::clamp(std::tanh(theta[i]), -kParamCap, kParamCap);
  params.g = std::clamp(std::tanh(theta[theta.size() - 1]), -kParamCap, kParamCap);
  return params;
}

}  // namespace

double censored_log_likelihood(const ArParams& params, const ColouredStateSpace& model,
                               const std::vector<double>& ys) {
  if (params.c_diag.size() != model.dim())
    throw std::invalid_argument("censored_log_likelihood: c_diag has wrong dimension");
  FilterOptions options;
  options.assumed = params;
  options.record_steps = false;
  return run_filter(FilterKind::ColTkf, model, ys, options).total_log_lik;
}

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, double step, double tol,
                          int max_iterations) {
  const Eigen::Index n = start.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<Eigen::VectorXd> verts(n + 1, start);
  for (Eigen::Index i = 0; i < n; ++i) verts[i + 1][i] += step;
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = objective(verts[i]);

  auto order = [&] {
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
      v2[i] = verts[idx[i]];
      f2[i] = values[idx[i]];
    }
    verts.swap(v2);
    values.swap(f2);
  };

  SimplexResult result;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    order();
    double diameter = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i)
      diameter = std::max(diameter, (verts[i] - verts[0]).cwiseAbs().maxCoeff());
    if (diameter < tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += verts[i];
    centroid /= static_cast<double>(n);

    Eigen::VectorXd reflected = centroid + alpha * (centroid - verts[n]);
    double f_reflected = objective(reflected);
    if (f_reflected < values[0]) {
      Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
      double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        verts[n] = expanded;
        values[n] = f_expanded;
      } else {
        verts[n] = reflected;
        values[n] = f_reflected;
      }
    } else if (f_reflected < values[n - 1]) {
      verts[n] = reflected;
      values[n] = f_reflected;
    } else {
      const bool outside = f_reflected < values[n];
      Eigen::VectorXd contracted =
          outside ? centroid + rho * (reflected - centroid) : centroid + rho * (verts[n] - centroid);
      double f_contracted = objective(contracted);
      if (f_contracted < (outside ? f_reflected : values[n])) {
        verts[n] = contracted;
        values[n] = f_contracted;
      } else {
        for (Eigen::Index i = 1; i <= n; ++i) {
          verts[i] = verts[0] + sigma * (verts[i] - verts[0]);
          values[i] = objective(verts[i]);
        }
      }
    }
  }
  order();
  result.x = verts[0];
  result.value = values[0];
  result.iterations = iter;
  return result;
}

FitReport fit_ar_params(const ColouredStateSpace& model, const std::vector<double>& ys,
                        const FitConfig& config) {
  if (config.start_levels.empty())
    throw std::invalid_argument("fit_ar_params: need at least one restart level");

  auto objective = [&](const Eigen::VectorXd& theta) -> double {
    try {
      const double ll = censored_log_likelihood(to_params(theta), model, ys);
      return std::isfinite(ll) ? -ll : kInf;
    } catch (const NumericError&) {
      return kInf;
    }
  };

  FitReport report;
  double best = kInf;
  for (double level : config.start_levels) {
    ArParams start;
    start.c_diag = Eigen::VectorXd::Constant(model.dim(), level);
    start.g = level;
    SimplexResult res = nelder_mead(objective, to_unconstrained(start), config.simplex_step,
                                    config.tol, config.max_iterations);
    report.iterations += res.iterations;
    ++report.restarts_used;
    if (res.value < best) {
      best = res.value;
      report.params = to_params(res.x);
      report.converged = res.converged;
    }
  }
  if (!std::isfinite(best))
    throw NonFinite("fit_ar_params: all restarts produced non-finite likelihood");
  report.log_likelihood = -best;
  return report;
}

}  // namespace coltkf
