#pragma once

#include <Eigen/Dense>

#include "coltkf/gaussian.hpp"
#include "coltkf/rng.hpp"

namespace coltkf {

// Two-sided censoring interval; either limit may be infinite, which covers
// the one-sided Tobit cases.
struct CensorBand {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  CensorBand() = default;
  CensorBand(double lower_in, double upper_in);

  bool lower_finite() const { return std::isfinite(lower); }
  bool upper_finite() const { return std::isfinite(upper); }
  bool unbounded() const { return !lower_finite() && !upper_finite(); }
};

// Moments of a multivariate normal after clamping coordinate k to a band.
// Coordinates other than k keep their Gaussian marginals, so their means and
// mutual covariances are copied through unchanged and their skewness is zero.
struct CensoredSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd skewness;
  double uncensored_prob = 1.0;
};

// Moment generating function of the censored vector evaluated at t: the
// three-term closed form (interior mass, mass at the lower limit, mass at the
// upper limit). Equals 1 at t = 0 and reduces to the Gaussian mgf for an
// unbounded band.
double censored_mgf(const GaussianSpec& spec, Eigen::Index k, const CensorBand& band,
                    const Eigen::VectorXd& t);

// P = F((b-m)/s) - F((a-m)/s): probability mass of the latent variable inside
// the open band. Evaluated tail-first so deep censoring keeps relative
// accuracy.
double uncensored_prob(double m_k, double s2, const CensorBand& band);

double censored_mean(double m_k, double s2, const CensorBand& band);

double censored_variance(double m_k, double s2, const CensorBand& band);

// Raw third moment E[(x^c)^3].
double censored_third_moment(double m_k, double s2, const CensorBand& band);

// Skewness coefficient (E[x^3] - 3 E[x] Var - E[x]^3) / Var^(3/2), evaluated
// in centered form so symmetric limits give an exact zero.
double censored_skewness(double m_k, double s2, const CensorBand& band);

// Cov(x_i, x_k^c) = P * S_ik.
double censored_cross_cov(double s_ik, double p_uncensored);

// Full summary with coordinate k censored to the band.
CensoredSummary censored_summary(const GaussianSpec& spec, Eigen::Index k,
                                 const CensorBand& band);

// Sampling estimate of the same summary together with the spread over
// repetitions, for oracle-style comparisons against the closed form.
struct McCensoredSummary {
  CensoredSummary estimate;   // per-rep statistics averaged over reps
  CensoredSummary std_error;  // entrywise standard error of those averages
  int reps = 0;
};

McCensoredSummary mc_censored_summary_detail(const GaussianSpec& spec, Eigen::Index k,
                                             const CensorBand& band, Eigen::Index samples,
                                             int reps, RngHandle rng, int threads = 0);

CensoredSummary mc_censored_summary(const GaussianSpec& spec, Eigen::Index k,
                                    const CensorBand& band, Eigen::Index samples, int reps,
                                    RngHandle rng);

}  // namespace coltkf
