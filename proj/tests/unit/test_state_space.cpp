#include <doctest.h>

#include <cmath>

#include "coltkf/errors.hpp"
#include "coltkf/state_space.hpp"

using namespace coltkf;

namespace {

ColouredStateSpace oscillator(double c, double g, CensorBand band, double q = 1e-4,
                              double r2 = 1.0) {
  const double omega = 0.005 * 2.0 * M_PI;
  Eigen::MatrixXd A(2, 2);
  A << std::cos(omega), -std::sin(omega), std::sin(omega), std::cos(omega);
  Eigen::RowVectorXd H(2);
  H << 1.0, 0.5;
  Eigen::MatrixXd Q = q * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd x0(2);
  x0 << 5.0, 0.0;
  Eigen::MatrixXd P0 = 1e-3 * Eigen::MatrixXd::Identity(2, 2);
  return ColouredStateSpace::with_diagonal_noise(A, H, Q, r2,
                                                 Eigen::VectorXd::Constant(2, c), g, band, x0,
                                                 P0);
}

}  // namespace

TEST_SUITE_BEGIN("state_space");

TEST_CASE("construction rejects non-stationary noise parameters") {
  CHECK_THROWS_AS(oscillator(1.0, 0.5, CensorBand(-5, 5)), std::invalid_argument);
  CHECK_THROWS_AS(oscillator(0.5, 1.0, CensorBand(-5, 5)), std::invalid_argument);
  CHECK_THROWS_AS(oscillator(-1.2, 0.0, CensorBand(-5, 5)), std::invalid_argument);
  CHECK_NOTHROW(oscillator(0.99, -0.99, CensorBand(-5, 5)));

  ColouredStateSpace model = oscillator(0.5, 0.5, CensorBand(-5, 5));
  model.r2 = -1.0;
  CHECK_THROWS_AS(model.validate(), std::invalid_argument);
}

TEST_CASE("augment assembles the oscillator block structure") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5));
  AugmentedModel aug = augment(model);

  REQUIRE(aug.dim() == 5);
  CHECK(aug.A(4, 4) == 0.99);
  CHECK(aug.A.topLeftCorner(2, 2).isApprox(model.A, 0.0));
  CHECK(aug.A.block(0, 2, 2, 2).isApprox(Eigen::MatrixXd::Identity(2, 2), 0.0));
  CHECK(aug.A.block(2, 2, 2, 2).isApprox(0.9 * Eigen::MatrixXd::Identity(2, 2), 0.0));
  CHECK(aug.A.block(2, 0, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(aug.A.block(0, 4, 4, 1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(aug.A.block(4, 0, 1, 4).cwiseAbs().maxCoeff() == 0.0);

  Eigen::RowVectorXd h_ref(5);
  h_ref << 1.0, 0.5, 0.0, 0.0, 1.0;
  CHECK(aug.H.isApprox(h_ref, 0.0));

  CHECK(aug.Q.topLeftCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(aug.Q.block(2, 2, 2, 2).isApprox(model.Q, 0.0));
  CHECK(aug.Q(4, 4) == model.r2);

  // z0 = (x0, 0, 0); P0 blocks: P0, stationary u, stationary v
  CHECK(aug.z0.head(2).isApprox(model.x0, 0.0));
  CHECK(aug.z0.tail(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(aug.P0.topLeftCorner(2, 2).isApprox(model.P0, 0.0));
  CHECK(aug.P0(2, 2) == doctest::Approx(1e-4 / (1.0 - 0.81)).epsilon(1e-12));
  CHECK(aug.P0(4, 4) == doctest::Approx(1.0 / (1.0 - 0.99 * 0.99)).epsilon(1e-12));
}

TEST_CASE("augment with white noise zeroes the AR blocks") {
  ColouredStateSpace model = oscillator(0.0, 0.0, CensorBand(-1, 1));
  AugmentedModel aug = augment(model);
  CHECK(aug.A.block(2, 2, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(aug.A(4, 4) == 0.0);
  CHECK(aug.P0(2, 2) == doctest::Approx(1e-4));
  CHECK(aug.P0(4, 4) == doctest::Approx(1.0));
}

TEST_CASE("augment one-dimensional example") {
  Eigen::MatrixXd A(1, 1), Q(1, 1), P0(1, 1);
  A << 1.0;
  Q << 0.1;
  P0 << 1.0;
  Eigen::RowVectorXd H(1);
  H << 1.0;
  Eigen::VectorXd x0(1);
  x0 << 0.0;
  ColouredStateSpace model = ColouredStateSpace::with_diagonal_noise(
      A, H, Q, 1.0, Eigen::VectorXd::Constant(1, 0.5), 0.5, CensorBand(), x0, P0);
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 1, 0, 0, 0.5, 0, 0, 0, 0.5;
  CHECK(augment(model).A.isApprox(expected, 0.0));
}

TEST_CASE("augment with assumed parameters overrides the model's") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5));
  ArParams assumed{Eigen::Vector2d(0.3, -0.2), 0.7};
  AugmentedModel aug = augment(model, assumed);
  CHECK(aug.A(2, 2) == 0.3);
  CHECK(aug.A(3, 3) == -0.2);
  CHECK(aug.A(4, 4) == 0.7);
  CHECK(aug.P0(4, 4) == doctest::Approx(1.0 / (1.0 - 0.49)));

  ArParams bad{Eigen::Vector2d(1.2, 0.0), 0.0};
  CHECK_THROWS_AS(augment(model, bad), std::invalid_argument);
}

TEST_CASE("clamp_to_band") {
  const CensorBand band(-5.0, 5.0);
  CHECK(clamp_to_band(-7.0, band) == -5.0);
  CHECK(clamp_to_band(0.3, CensorBand(-1, 1)) == 0.3);
  CHECK(clamp_to_band(5.0, band) == 5.0);  // boundary maps to boundary
  CHECK(clamp_to_band(123.0, CensorBand()) == 123.0);
}

TEST_CASE("stationary_noise_cov solves the AR(1) fixed point") {
  Eigen::MatrixXd C(2, 2), Q(2, 2);
  C << 0.9, 0.0, 0.0, -0.5;
  Q << 0.1, 0.02, 0.02, 0.3;
  Eigen::MatrixXd S = stationary_noise_cov(C, Q);
  CHECK((C * S * C.transpose() + Q - S).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(S(0, 0) == doctest::Approx(0.1 / (1 - 0.81)));
  CHECK(S(0, 1) == doctest::Approx(0.02 / (1 + 0.45)));

  // non-diagonal C goes through the Kronecker solve
  C << 0.5, 0.2, -0.1, 0.4;
  S = stationary_noise_cov(C, Q);
  CHECK((C * S * C.transpose() + Q - S).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noise-free simulation follows the rotation exactly") {
  const double omega = 0.005 * 2.0 * M_PI;
  Eigen::MatrixXd A(2, 2);
  A << std::cos(omega), -std::sin(omega), std::sin(omega), std::cos(omega);
  Eigen::RowVectorXd H(2);
  H << 1.0, 0.5;
  Eigen::VectorXd x0(2);
  x0 << 5.0, 0.0;
  ColouredStateSpace model = ColouredStateSpace::with_diagonal_noise(
      A, H, Eigen::MatrixXd::Zero(2, 2), 1e-30, Eigen::VectorXd::Zero(2), 0.0, CensorBand(),
      x0, Eigen::MatrixXd::Zero(2, 2));

  Trajectory traj = simulate(model, 100, {3, 0});
  Eigen::VectorXd x = x0;
  for (int t = 0; t < 100; ++t) {
    x = A * x;
    CHECK(std::abs(traj.latent[t] - H.dot(x)) < 1e-12);
    CHECK(traj.observed[t] == traj.latent[t]);
  }
}

TEST_CASE("simulation censors a saturating oscillator") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5), 0.01);
  Trajectory traj = simulate(model, 500, {11, 0});
  int at_lower = 0, at_upper = 0, interior = 0;
  for (Eigen::Index t = 0; t < traj.steps(); ++t) {
    const double y = traj.observed[t];
    CHECK(y == clamp_to_band(traj.latent[t], model.band));
    CHECK(y >= model.band.lower);
    CHECK(y <= model.band.upper);
    if (y == model.band.lower) ++at_lower;
    else if (y == model.band.upper) ++at_upper;
    else ++interior;
  }
  CHECK(at_lower + at_upper + interior == 500);
  CHECK(at_lower + at_upper > 0);  // saturation actually occurs
}

TEST_CASE("measurement noise has the configured lag-1 autocorrelation") {
  ColouredStateSpace model = oscillator(0.0, 0.99, CensorBand());
  Trajectory traj = simulate(model, 100000, {23, 0});
  const auto& v = traj.meas_noise;
  const double mean = v.mean();
  double num = 0.0, den = 0.0;
  for (Eigen::Index t = 0; t + 1 < v.size(); ++t) {
    num += (v[t] - mean) * (v[t + 1] - mean);
    den += (v[t] - mean) * (v[t] - mean);
  }
  CHECK(num / den == doctest::Approx(0.99).epsilon(0.0101));
}

TEST_CASE("simulate is deterministic in the handle") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5));
  Trajectory a = simulate(model, 200, {5, 9});
  Trajectory b = simulate(model, 200, {5, 9});
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.latent - b.latent).cwiseAbs().maxCoeff() == 0.0);
  Trajectory c = simulate(model, 200, {5, 10});
  CHECK((a.latent - c.latent).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("augmented recursion replays the original trajectory bit for bit") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5), 0.01);
  AugmentedModel aug = augment(model);
  const RngHandle handle{77, 3};
  const Eigen::Index n = 2, T = 300;

  Trajectory traj = simulate(model, T, handle);

  // Replay the same driver draws through the augmented transition, reading
  // the blocks out of the assembled A_aug.
  Rng rng(handle);
  MvnSampler driver(GaussianSpec(Eigen::VectorXd::Zero(n), model.Q));
  MvnSampler stationary(
      GaussianSpec(Eigen::VectorXd::Zero(n), stationary_noise_cov(model.C, model.Q)));
  const double r = std::sqrt(model.r2);
  const double v_stat = std::sqrt(model.r2 / (1.0 - model.g * model.g));

  Eigen::VectorXd z(5);
  z.head(n) = model.x0;
  z.segment(n, n) = stationary.draw(rng);
  z(2 * n) = v_stat * rng.gaussian();

  const Eigen::MatrixXd A_blk = aug.A.topLeftCorner(n, n);
  const Eigen::MatrixXd C_blk = aug.A.block(n, n, n, n);
  const double g_blk = aug.A(2 * n, 2 * n);
  CHECK(aug.A.block(0, n, n, n).isApprox(Eigen::MatrixXd::Identity(n, n), 0.0));

  double max_dev_full = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(5);
    Eigen::VectorXd x_next = A_blk * z.head(n) + z.segment(n, n);
    w.segment(n, n) = driver.draw(rng);
    w(2 * n) = r * rng.gaussian();

    Eigen::VectorXd z_full = aug.A * z + w;  // dense transition, zero blocks included
    Eigen::VectorXd z_next(5);
    z_next.head(n) = x_next;
    z_next.segment(n, n) = C_blk * z.segment(n, n) + w.segment(n, n);
    z_next(2 * n) = g_blk * z(2 * n) + w(2 * n);
    max_dev_full = std::max(max_dev_full, (z_full - z_next).cwiseAbs().maxCoeff());
    z = z_next;

    const double y_star = aug.H.head(n).dot(z.head(n)) + z(2 * n);
    CHECK(traj.states.row(t) == z.head(n).transpose());       // bitwise
    CHECK(traj.process_noise.row(t) == z.segment(n, n).transpose());
    CHECK(traj.meas_noise[t] == z(2 * n));
    CHECK(traj.latent[t] == y_star);
    CHECK(traj.observed[t] == clamp_to_band(y_star, aug.band));
  }
  CHECK(max_dev_full < 1e-12);
}

TEST_SUITE_END();
