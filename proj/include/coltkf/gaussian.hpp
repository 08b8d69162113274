#pragma once

#include <Eigen/Dense>

#include "coltkf/rng.hpp"

namespace coltkf {

// Density of the standard normal distribution.
double std_normal_pdf(double x);

// Distribution function of the standard normal, accurate to well below 1e-12
// absolute everywhere; evaluated through the complementary error function so
// tail probabilities keep full relative accuracy.
double std_normal_cdf(double x);

// Survival function 1 - cdf(x) without cancellation in the upper tail.
double std_normal_sf(double x);

// log cdf(x), switching to an asymptotic tail expansion below -8 where the
// direct logarithm would underflow.
double std_normal_log_cdf(double x);

// Mean vector and covariance of a multivariate normal.
struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  GaussianSpec() = default;
  GaussianSpec(Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in);

  Eigen::Index dim() const { return mean.size(); }

  // Throws std::invalid_argument if cov is not square/symmetric or does not
  // match the mean's dimension. Semidefiniteness is checked lazily by the
  // Cholesky path.
  void validate() const;
};

// Lower-triangular L with L*L^T = S. Exactly semidefinite inputs are the
// normal case here (the augmented process covariance has a zero block), so on
// factorization failure a jitter of delta*max(diag)*I is added for
// delta in {1e-12, 1e-10, 1e-8} before giving up with NotPositiveSemiDefinite.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& S);

// Reusable sampler: factorizes the covariance once, then maps iid standard
// normals through it.
class MvnSampler {
public:
  explicit MvnSampler(const GaussianSpec& spec);

  Eigen::VectorXd draw(Rng& rng) const;

  const Eigen::MatrixXd& factor() const { return chol_; }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;
};

// `count` draws from the given normal, one row per draw.
Eigen::MatrixXd sample_mvn(const GaussianSpec& spec, RngHandle rng, Eigen::Index count);

}  // namespace coltkf
