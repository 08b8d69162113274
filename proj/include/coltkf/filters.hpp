#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "coltkf/state_space.hpp"

namespace coltkf {

// AKF: linear update on the augmented model, ignores censoring.
// Tkfc: Tobit update on the unaugmented model, ignores noise colour.
// ColTkf: Tobit update on the augmented model.
enum class FilterKind { Akf, Tkfc, ColTkf };

const char* filter_kind_name(FilterKind kind);
FilterKind parse_filter_kind(const std::string& name);

struct FilterState {
  Eigen::VectorXd z;  // a posteriori estimate
  Eigen::MatrixXd P;  // a posteriori error covariance, kept symmetric
};

// Innovation statistics of the censored measurement under the predictive
// distribution N(H z^-, H P^- H^T + R).
struct PredictedMeasurement {
  double mean_latent = 0.0;
  double var_latent = 0.0;
  double mean_censored = 0.0;
  double var_censored = 0.0;
  double uncensored_prob = 1.0;
  Eigen::VectorXd cross_cov;  // Cov(z, y^c) = P^- H^T * P
};

struct UpdateResult {
  FilterState state;
  bool gain_floor_hit = false;  // update degraded to identity
};

FilterState predict(const FilterState& state, const Eigen::MatrixXd& A,
                    const Eigen::MatrixXd& Q);

PredictedMeasurement predicted_measurement(const FilterState& prior,
                                           const Eigen::RowVectorXd& H, double R,
                                           const CensorBand& band);

// K = cross / var_censored; z = z^- + K (y - mean_censored); P = P^- - K cross^T.
// A censored variance below the gain floor yields the identity update with
// the diagnostic flag set instead of throwing mid-run.
UpdateResult tobit_update(const FilterState& prior, const PredictedMeasurement& pm, double y,
                          const CensorBand& band);

// Standard scalar Kalman update (used by the AKF, which treats the clamped
// observation as a linear measurement).
UpdateResult linear_update(const FilterState& prior, const Eigen::RowVectorXd& H, double R,
                           double y);

// Classification of an observation against the band.
enum class CensorClass { Lower = -1, Interior = 0, Upper = 1 };

CensorClass classify_observation(double y, const CensorBand& band);

// Pointwise censored log-likelihood term: Gaussian log-density for interior
// observations, log of the clamped tail mass at a limit.
double censored_loglik_term(double y, double mean_latent, double var_latent,
                            const CensorBand& band);

struct FilterStep {
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;
  Eigen::VectorXd post_mean;
  Eigen::MatrixXd post_cov;
  PredictedMeasurement pm;
  double log_lik = 0.0;
  CensorClass censor_class = CensorClass::Interior;
  bool gain_floor_hit = false;
};

struct FilterTrace {
  std::vector<FilterStep> steps;      // empty when recording is off
  Eigen::MatrixXd state_estimates;    // T x n, physical-state part of each posterior
  double total_log_lik = 0.0;
  int gain_floor_hits = 0;
  Eigen::Index state_dim = 0;
};

enum class TkfcNoiseAssumption {
  Drivers,     // use Q and r2 directly as white-noise covariances
  Stationary,  // use the stationary AR(1) variances instead
};

struct FilterOptions {
  std::optional<ArParams> assumed;  // AR(1) parameters for the augmented kinds
  TkfcNoiseAssumption tkfc_noise = TkfcNoiseAssumption::Drivers;
  bool record_steps = true;
};

FilterTrace run_filter(FilterKind kind, const ColouredStateSpace& model,
                       const std::vector<double>& ys, const FilterOptions& options = {});

}  // namespace coltkf
