#include "coltkf/filters.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "coltkf/errors.hpp"

namespace coltkf {
namespace {

constexpr double kGainFloor = 1e-12;
constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& P) {
  return 0.5 * (P + P.transpose());
}

}  // namespace

const char* filter_kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::Akf: return "AKF";
    case FilterKind::Tkfc: return "TKFc";
    case FilterKind::ColTkf: return "ColTKF";
  }
  return "?";
}

FilterKind parse_filter_kind(const std::string& name) {
  std::string low;
  for (char c : name) low.push_back(static_cast<char>(std::tolower(c)));
  if (low == "akf") return FilterKind::Akf;
  if (low == "tkfc") return FilterKind::Tkfc;
  if (low == "coltkf") return FilterKind::ColTkf;
  throw std::invalid_argument("unknown filter kind: " + name);
}

FilterState predict(const FilterState& state, const Eigen::MatrixXd& A,
                    const Eigen::MatrixXd& Q) {
  if (A.rows() != state.z.size() || A.cols() != state.z.size() || Q.rows() != A.rows() ||
      Q.cols() != A.cols())
    throw ShapeMismatch("predict: dimension mismatch");
  FilterState out;
  out.z = A * state.z;
  out.P = symmetrized(A * state.P * A.transpose() + Q);
  return out;
}

PredictedMeasurement predicted_measurement(const FilterState& prior,
                                           const Eigen::RowVectorXd& H, double R,
                                           const CensorBand& band) {
  if (H.cols() != prior.z.size())
    throw ShapeMismatch("predicted_measurement: dimension mismatch");
  PredictedMeasurement pm;
  Eigen::VectorXd ph = prior.P * H.transpose();
  pm.mean_latent = H.dot(prior.z);
  pm.var_latent = H.dot(ph) + R;
  if (!(pm.var_latent > kGainFloor))
    throw DegenerateVariance("predicted_measurement: latent variance below floor");
  pm.mean_censored = censored_mean(pm.mean_latent, pm.var_latent, band);
  pm.var_censored = censored_variance(pm.mean_latent, pm.var_latent, band);
  pm.uncensored_prob = uncensored_prob(pm.mean_latent, pm.var_latent, band);
  pm.cross_cov = ph * pm.uncensored_prob;
  return pm;
}

UpdateResult tobit_update(const FilterState& prior, const PredictedMeasurement& pm, double y,
                          const CensorBand& band) {
  if (y < band.lower || y > band.upper)
    throw std::invalid_argument("tobit_update: observation outside the censoring band");
  UpdateResult out;
  if (!(pm.var_censored > kGainFloor)) {
    // A saturated, fully predictable measurement carries no usable gradient;
    // keep the prior and flag the step.
    out.state = prior;
    out.gain_floor_hit = true;
    return out;
  }
  Eigen::VectorXd gain = pm.cross_cov / pm.var_censored;
  out.state.z = prior.z + gain * (y - pm.mean_censored);
  out.state.P = symmetrized(prior.P - gain * pm.cross_cov.transpose());
  return out;
}

UpdateResult linear_update(const FilterState& prior, const Eigen::RowVectorXd& H, double R,
                           double y) {
  if (H.cols() != prior.z.size()) throw ShapeMismatch("linear_update: dimension mismatch");
  Eigen::VectorXd cross = prior.P * H.transpose();
  const double s = H.dot(cross) + R;
  UpdateResult out;
  if (!(s > kGainFloor)) {
    out.state = prior;
    out.gain_floor_hit = true;
    return out;
  }
  Eigen::VectorXd gain = cross / s;
  out.state.z = prior.z + gain * (y - H.dot(prior.z));
  out.state.P = symmetrized(prior.P - gain * cross.transpose());
  return out;
}

CensorClass classify_observation(double y, const CensorBand& band) {
  if (band.lower_finite() && y <= band.lower) return CensorClass::Lower;
  if (band.upper_finite() && y >= band.upper) return CensorClass::Upper;
  return CensorClass::Interior;
}

double censored_loglik_term(double y, double mean_latent, double var_latent,
                            const CensorBand& band) {
  if (!(var_latent > kGainFloor))
    throw DegenerateVariance("censored_loglik_term: innovation variance below floor");
  const double sigma = std::sqrt(var_latent);
  switch (classify_observation(y, band)) {
    case CensorClass::Lower:
      return std_normal_log_cdf((band.lower - mean_latent) / sigma);
    case CensorClass::Upper:
      return std_normal_log_cdf((mean_latent - band.upper) / sigma);
    case CensorClass::Interior: {
      const double resid = y - mean_latent;
      return -0.5 * (kLog2Pi + std::log(var_latent) + resid * resid / var_latent);
    }
  }
  return 0.0;
}

FilterTrace run_filter(FilterKind kind, const ColouredStateSpace& model,
                       const std::vector<double>& ys, const FilterOptions& options) {
  const Eigen::Index n = model.dim();
  const CensorBand& band = model.band;

  Eigen::MatrixXd A, Q;
  Eigen::RowVectorXd H;
  FilterState state;
  double R = 0.0;

  if (kind == FilterKind::Tkfc) {
    A = model.A;
    H = model.H;
    if (options.tkfc_noise == TkfcNoiseAssumption::Stationary) {
      Q = stationary_noise_cov(model.C, model.Q);
      R = model.r2 / (1.0 - model.g * model.g);
    } else {
      Q = model.Q;
      R = model.r2;
    }
    state = {model.x0, model.P0};
  } else {
    AugmentedModel aug =
        options.assumed ? augment(model, *options.assumed) : augment(model);
    A = aug.A;
    Q = aug.Q;
    H = aug.H;
    state = {aug.z0, aug.P0};
    R = 0.0;  // the augmented latent measurement is noise-free
  }

  FilterTrace trace;
  trace.state_dim = n;
  trace.state_estimates.resize(static_cast<Eigen::Index>(ys.size()), n);
  if (options.record_steps) trace.steps.reserve(ys.size());

  for (std::size_t t = 0; t < ys.size(); ++t) {
    const double y = ys[t];
    if (y < band.lower || y > band.upper)
      throw std::invalid_argument("run_filter: observation outside the censoring band");

    FilterState prior = predict(state, A, Q);
    PredictedMeasurement pm = predicted_measurement(prior, H, R, band);
    const double ll = censored_loglik_term(y, pm.mean_latent, pm.var_latent, band);

    UpdateResult updated = (kind == FilterKind::Akf)
                               ? linear_update(prior, H, R, y)
                               : tobit_update(prior, pm, y, band);
    state = updated.state;

    trace.total_log_lik += ll;
    trace.gain_floor_hits += updated.gain_floor_hit ? 1 : 0;
    trace.state_estimates.row(static_cast<Eigen::Index>(t)) = state.z.head(n).transpose();
    if (options.record_steps) {
      FilterStep step;
      step.prior_mean = prior.z;
      step.prior_cov = prior.P;
      step.post_mean = state.z;
      step.post_cov = state.P;
      step.pm = pm;
      step.log_lik = ll;
      step.censor_class = classify_observation(y, band);
      step.gain_floor_hit = updated.gain_floor_hit;
      trace.steps.push_back(std::move(step));
    }
  }
  return trace;
}

}  // namespace coltkf
