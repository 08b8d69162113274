#pragma once

#include <Eigen/Dense>

#include "coltkf/censored_moments.hpp"
#include "coltkf/rng.hpp"

namespace coltkf {

// AR(1) noise parameters: diagonal process coefficient and scalar measurement
// coefficient, each strictly inside (-1, 1).
struct ArParams {
  Eigen::VectorXd c_diag;
  double g = 0.0;
};

// Linear state-space model with AR(1) coloured process and measurement noise
// and a scalar measurement censored to a band:
//   x_{t+1} = A x_t + u_t,        u_t = C u_{t-1} + w1_t,   w1 ~ N(0, Q)
//   y*_t    = H x_t + v_t,        v_t = g v_{t-1} + w2_t,   w2 ~ N(0, r2)
//   y_t     = clamp(y*_t, [a, b])
struct ColouredStateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::RowVectorXd H;
  Eigen::MatrixXd Q;
  double r2 = 1.0;
  double g = 0.0;
  CensorBand band;
  Eigen::VectorXd x0;
  Eigen::MatrixXd P0;

  ColouredStateSpace() = default;
  ColouredStateSpace(Eigen::MatrixXd A_in, Eigen::MatrixXd C_in, Eigen::RowVectorXd H_in,
                     Eigen::MatrixXd Q_in, double r2_in, double g_in, CensorBand band_in,
                     Eigen::VectorXd x0_in, Eigen::MatrixXd P0_in);

  // Convenience for the common diagonal-C case.
  static ColouredStateSpace with_diagonal_noise(Eigen::MatrixXd A, Eigen::RowVectorXd H,
                                                Eigen::MatrixXd Q, double r2,
                                                const Eigen::VectorXd& c_diag, double g,
                                                CensorBand band, Eigen::VectorXd x0,
                                                Eigen::MatrixXd P0);

  Eigen::Index dim() const { return A.rows(); }

  // Stationarity and shape checks; throws std::invalid_argument.
  void validate() const;
};

// White-noise rewrite with augmented state z = (x, u, v):
//   A_aug = [A  I  0; 0  C  0; 0  0  g],  H_aug = [H  0  1],
//   Q_aug = blkdiag(0, Q, r2).
// The initial covariance places P0 on the x block and the stationary AR(1)
// covariances on the noise blocks.
struct AugmentedModel {
  Eigen::MatrixXd A;
  Eigen::RowVectorXd H;
  Eigen::MatrixXd Q;
  CensorBand band;
  Eigen::VectorXd z0;
  Eigen::MatrixXd P0;
  Eigen::Index state_dim = 0;  // n of the physical state block

  Eigen::Index dim() const { return A.rows(); }
};

AugmentedModel augment(const ColouredStateSpace& model);

// Augment with assumed AR(1) parameters in place of the model's own (used by
// the filter once the parameters have been fitted).
AugmentedModel augment(const ColouredStateSpace& model, const ArParams& params);

double clamp_to_band(double y_star, const CensorBand& band);

// Stationary covariance S of u_t = C u_{t-1} + w, solving S = C S C^T + Q.
Eigen::MatrixXd stationary_noise_cov(const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q);

// Simulated sample path; row t-1 holds step t (t = 1..T).
struct Trajectory {
  Eigen::MatrixXd states;        // x_t
  Eigen::VectorXd latent;        // y*_t
  Eigen::VectorXd observed;      // y_t = clamp(y*_t)
  Eigen::MatrixXd process_noise; // u_t
  Eigen::VectorXd meas_noise;    // v_t

  Eigen::Index steps() const { return latent.size(); }
};

// Draws u_0 and v_0 from their stationary laws, then iterates the recursions
// for T steps. The drivers are drawn in a fixed order (w1 then w2 per step)
// so the augmented rewrite can replay an identical path.
Trajectory simulate(const ColouredStateSpace& model, Eigen::Index steps, RngHandle rng);

}  // namespace coltkf
