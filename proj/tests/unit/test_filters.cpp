#include <doctest.h>

#include <cmath>

#include "coltkf/errors.hpp"
#include "coltkf/filters.hpp"

using namespace coltkf;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

ColouredStateSpace oscillator(double c, double g, CensorBand band, double q = 0.01,
                              double r2 = 1.0) {
  const double omega = 0.005 * 2.0 * M_PI;
  Eigen::MatrixXd A(2, 2);
  A << std::cos(omega), -std::sin(omega), std::sin(omega), std::cos(omega);
  Eigen::RowVectorXd H(2);
  H << 1.0, 0.5;
  Eigen::VectorXd x0(2);
  x0 << 5.0, 0.0;
  return ColouredStateSpace::with_diagonal_noise(
      A, H, q * Eigen::MatrixXd::Identity(2, 2), r2, Eigen::VectorXd::Constant(2, c), g, band,
      x0, 1e-3 * Eigen::MatrixXd::Identity(2, 2));
}

}  // namespace

TEST_SUITE_BEGIN("filters");

TEST_CASE("predict worked examples") {
  FilterState s{Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity()};

  FilterState same = predict(s, Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero());
  CHECK(same.z.isApprox(s.z, 0.0));
  CHECK(same.P.isApprox(s.P, 0.0));

  Eigen::Matrix2d rot90;
  rot90 << 0, -1, 1, 0;
  CHECK(predict(s, rot90, Eigen::Matrix2d::Zero()).z.isApprox(Eigen::Vector2d(0, 1), 1e-15));

  FilterState grown = predict(s, 2.0 * Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity());
  CHECK(grown.P.isApprox(5.0 * Eigen::Matrix2d::Identity(), 1e-15));

  CHECK_THROWS_AS(predict(s, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 3)),
                  ShapeMismatch);
}

TEST_CASE("predicted_measurement reduces to the linear innovation for an open band") {
  FilterState prior{Eigen::Vector2d(2.0, 1.0), (Eigen::Matrix2d() << 1.5, 0.2, 0.2, 0.8).finished()};
  Eigen::RowVectorXd H(2);
  H << 1.0, 0.5;
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.3, CensorBand());
  CHECK(pm.mean_censored == pm.mean_latent);
  CHECK(pm.var_censored == pm.var_latent);
  CHECK(pm.uncensored_prob == 1.0);
  CHECK(pm.cross_cov.isApprox(prior.P * H.transpose(), 0.0));
  CHECK(pm.mean_latent == doctest::Approx(2.5));
  CHECK(pm.var_latent == doctest::Approx(H * prior.P * H.transpose() + 0.3));
}

TEST_CASE("predicted_measurement matches the censored worked numbers") {
  // prior with H z = 1 and latent variance 2
  FilterState prior{Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  Eigen::RowVectorXd H(1);
  H << 1.0;
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.0, CensorBand(0.5, 2.0));
  CHECK(pm.mean_censored == doctest::Approx(1.1494).epsilon(5e-4));
  CHECK(pm.var_censored == doctest::Approx(0.4003).epsilon(5e-4));
  CHECK(pm.uncensored_prob == doctest::Approx(0.3984).epsilon(5e-4));
}

TEST_CASE("predicted_measurement under deep censoring") {
  FilterState prior{Eigen::VectorXd::Constant(1, 0.0), Eigen::MatrixXd::Constant(1, 1, 0.01)};
  Eigen::RowVectorXd H(1);
  H << 1.0;
  // band 20 standard deviations above the prediction
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.0, CensorBand(2.0, 3.0));
  CHECK(pm.uncensored_prob < 1e-50);
  CHECK(pm.mean_censored == doctest::Approx(2.0).epsilon(1e-9));

  FilterState degenerate{Eigen::VectorXd::Constant(1, 0.0), Eigen::MatrixXd::Zero(1, 1)};
  CHECK_THROWS_AS(predicted_measurement(degenerate, H, 0.0, CensorBand(0, 1)),
                  DegenerateVariance);
}

TEST_CASE("tobit_update zero innovation and linear equivalence") {
  FilterState prior{Eigen::Vector2d(2.0, -1.0),
                    (Eigen::Matrix2d() << 1.0, 0.3, 0.3, 2.0).finished()};
  Eigen::RowVectorXd H(2);
  H << 1.0, 0.5;
  const CensorBand open;
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.7, open);

  UpdateResult identity = tobit_update(prior, pm, pm.mean_censored, open);
  CHECK(identity.state.z.isApprox(prior.z, 1e-15));

  const double y = 3.1;
  UpdateResult tob = tobit_update(prior, pm, y, open);
  UpdateResult lin = linear_update(prior, H, 0.7, y);
  CHECK((tob.state.z - lin.state.z).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((tob.state.P - lin.state.P).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tobit_update scalar censored gain") {
  FilterState prior{Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  Eigen::RowVectorXd H(1);
  H << 1.0;
  const CensorBand band(0.5, 2.0);
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.0, band);
  UpdateResult res = tobit_update(prior, pm, 2.0, band);
  // gain = (P * P^- H) / var_censored, innovation = y - censored mean
  const double expected_shift =
      (0.3984 * 2.0 / 0.4003) * (2.0 - 1.1494);
  CHECK(res.state.z[0] - prior.z[0] == doctest::Approx(expected_shift).epsilon(1e-3));
  CHECK_FALSE(res.gain_floor_hit);
  CHECK_THROWS_AS(tobit_update(prior, pm, 2.5, band), std::invalid_argument);
}

TEST_CASE("linear_update worked example") {
  FilterState prior{Eigen::Vector2d(0.0, 0.0), Eigen::Matrix2d::Identity()};
  Eigen::RowVectorXd H(2);
  H << 1.0, 0.0;
  UpdateResult res = linear_update(prior, H, 1.0, 2.0);
  CHECK(res.state.z.isApprox(Eigen::Vector2d(1.0, 0.0), 1e-15));
  CHECK(res.state.P.isApprox((Eigen::Matrix2d() << 0.5, 0, 0, 1).finished(), 1e-15));

  UpdateResult still = linear_update(prior, H, 1.0, 0.0);
  CHECK(still.state.z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gain floor degrades to the identity update with a flag") {
  FilterState prior{Eigen::VectorXd::Constant(1, 5.0), Eigen::MatrixXd::Constant(1, 1, 0.01)};
  Eigen::RowVectorXd H(1);
  H << 1.0;
  const CensorBand band(-1.0, 1.0);  // prediction 40 sigma above the band
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.0, band);
  CHECK(pm.var_censored < 1e-12);
  UpdateResult res = tobit_update(prior, pm, 1.0, band);
  CHECK(res.gain_floor_hit);
  CHECK(res.state.z.isApprox(prior.z, 0.0));
  CHECK(res.state.P.isApprox(prior.P, 0.0));
}

TEST_CASE("posterior shift is parallel to the cross covariance") {
  FilterState prior{Eigen::Vector3d(0.5, -0.2, 1.0),
                    (Eigen::Matrix3d() << 2, 0.4, 0.1, 0.4, 1, 0.0, 0.1, 0.0, 0.5).finished()};
  Eigen::RowVectorXd H(3);
  H << 1.0, 0.0, 0.5;
  const CensorBand band(-0.5, 1.5);
  PredictedMeasurement pm = predicted_measurement(prior, H, 0.2, band);
  UpdateResult res = tobit_update(prior, pm, 1.2, band);
  Eigen::VectorXd shift = res.state.z - prior.z;
  // rank-one update: shift x cross = 0
  Eigen::VectorXd unit_shift = shift / shift.norm();
  Eigen::VectorXd unit_cross = pm.cross_cov / pm.cross_cov.norm();
  CHECK((unit_shift - unit_cross).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("censored log-likelihood terms") {
  const CensorBand band(-1.0, 1.0);
  // interior: plain Gaussian density
  CHECK(censored_loglik_term(0.3, 0.0, 1.0, band) ==
        doctest::Approx(-0.5 * std::log(2 * M_PI) - 0.5 * 0.09));
  // clamped at the lower limit, prediction at the limit: log 1/2
  CHECK(censored_loglik_term(-1.0, -1.0, 1.0, band) == doctest::Approx(std::log(0.5)));
  CHECK(censored_loglik_term(1.0, 1.0, 1.0, band) == doctest::Approx(std::log(0.5)));
  // deep saturation stays finite
  CHECK(std::isfinite(censored_loglik_term(1.0, -20.0, 1.0, band)));
}

TEST_CASE("run_filter: all three kinds coincide without censoring and colour") {
  ColouredStateSpace model = oscillator(0.0, 0.0, CensorBand());
  Trajectory traj = simulate(model, 500, {31, 0});
  std::vector<double> ys(traj.observed.data(), traj.observed.data() + traj.observed.size());

  FilterTrace akf = run_filter(FilterKind::Akf, model, ys);
  FilterTrace tkfc = run_filter(FilterKind::Tkfc, model, ys);
  FilterTrace coltkf = run_filter(FilterKind::ColTkf, model, ys);

  CHECK((akf.state_estimates - tkfc.state_estimates).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((coltkf.state_estimates - tkfc.state_estimates).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(akf.total_log_lik == doctest::Approx(coltkf.total_log_lik).epsilon(1e-9));
}

TEST_CASE("run_filter keeps covariances symmetric and contracts on uncensored steps") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5));
  Trajectory traj = simulate(model, 300, {37, 0});
  std::vector<double> ys(traj.observed.data(), traj.observed.data() + traj.observed.size());

  FilterTrace trace = run_filter(FilterKind::ColTkf, model, ys);
  REQUIRE(trace.steps.size() == 300);
  for (const FilterStep& step : trace.steps) {
    CHECK((step.post_cov - step.post_cov.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((step.prior_cov - step.prior_cov.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(step.post_cov.diagonal().minCoeff() >= -1e-9);
    if (step.pm.uncensored_prob == 1.0)
      CHECK(step.post_cov.trace() <= step.prior_cov.trace() + 1e-12);
  }

  // open band: every step is uncensored and the update contracts the trace
  ColouredStateSpace open = oscillator(0.9, 0.99, CensorBand());
  Trajectory open_traj = simulate(open, 200, {38, 0});
  std::vector<double> open_ys(open_traj.observed.data(),
                              open_traj.observed.data() + open_traj.observed.size());
  FilterTrace open_trace = run_filter(FilterKind::ColTkf, open, open_ys);
  int contracted = 0;
  for (const FilterStep& step : open_trace.steps) {
    REQUIRE(step.pm.uncensored_prob == 1.0);
    CHECK(step.post_cov.trace() <= step.prior_cov.trace() + 1e-12);
    ++contracted;
  }
  CHECK(contracted == 200);
}

TEST_CASE("deep censoring makes the update approach the identity") {
  // white model pinned far above the band: saturated measurements stop
  // carrying information
  ColouredStateSpace model = oscillator(0.0, 0.0, CensorBand(-1, 1), 1e-4);
  std::vector<double> ys(50, 1.0);
  FilterTrace trace = run_filter(FilterKind::ColTkf, model, ys);
  for (const FilterStep& step : trace.steps) {
    const double innovation = 1.0 - step.pm.mean_censored;
    if (step.pm.uncensored_prob < 1e-30) {
      CHECK(std::abs(innovation) < 1e-9);
      CHECK((step.post_mean - step.prior_mean).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("run_filter records censor classes matching the observations") {
  ColouredStateSpace model = oscillator(0.9, 0.99, CensorBand(-5, 5), 0.01);
  Trajectory traj = simulate(model, 400, {41, 0});
  std::vector<double> ys(traj.observed.data(), traj.observed.data() + traj.observed.size());
  FilterTrace trace = run_filter(FilterKind::ColTkf, model, ys);
  int lower = 0, interior = 0, upper = 0;
  for (double y : ys) {
    if (y <= model.band.lower) ++lower;
    else if (y >= model.band.upper) ++upper;
    else ++interior;
  }
  int t_lower = 0, t_interior = 0, t_upper = 0;
  for (const FilterStep& step : trace.steps) {
    if (step.censor_class == CensorClass::Lower) ++t_lower;
    else if (step.censor_class == CensorClass::Upper) ++t_upper;
    else ++t_interior;
  }
  CHECK(t_lower == lower);
  CHECK(t_interior == interior);
  CHECK(t_upper == upper);
}

TEST_CASE("run_filter validates observations against the band") {
  ColouredStateSpace model = oscillator(0.0, 0.0, CensorBand(-1, 1));
  std::vector<double> ys = {0.0, 1.5};
  CHECK_THROWS_AS(run_filter(FilterKind::ColTkf, model, ys), std::invalid_argument);
}

TEST_CASE("filter kind names round trip") {
  CHECK(parse_filter_kind("akf") == FilterKind::Akf);
  CHECK(parse_filter_kind("TKFc") == FilterKind::Tkfc);
  CHECK(parse_filter_kind("ColTKF") == FilterKind::ColTkf);
  CHECK_THROWS_AS(parse_filter_kind("ekf"), std::invalid_argument);
  CHECK(std::string(filter_kind_name(FilterKind::Akf)) == "AKF");
}

TEST_SUITE_END();
