#include "coltkf/state_space.hpp"

#include <cmath>

#include "coltkf/errors.hpp"

namespace coltkf {
namespace {

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

void check_symmetric_psd(const Eigen::MatrixXd& S, const char* name) {
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  cholesky_factor(S);  // jitter policy decides semidefiniteness
}

}  // namespace

ColouredStateSpace::ColouredStateSpace(Eigen::MatrixXd A_in, Eigen::MatrixXd C_in,
                                       Eigen::RowVectorXd H_in, Eigen::MatrixXd Q_in,
                                       double r2_in, double g_in, CensorBand band_in,
                                       Eigen::VectorXd x0_in, Eigen::MatrixXd P0_in)
    : A(std::move(A_in)),
      C(std::move(C_in)),
      H(std::move(H_in)),
      Q(std::move(Q_in)),
      r2(r2_in),
      g(g_in),
      band(band_in),
      x0(std::move(x0_in)),
      P0(std::move(P0_in)) {
  validate();
}

ColouredStateSpace ColouredStateSpace::with_diagonal_noise(
    Eigen::MatrixXd A, Eigen::RowVectorXd H, Eigen::MatrixXd Q, double r2,
    const Eigen::VectorXd& c_diag, double g, CensorBand band, Eigen::VectorXd x0,
    Eigen::MatrixXd P0) {
  Eigen::MatrixXd C = c_diag.asDiagonal();
  return ColouredStateSpace(std::move(A), std::move(C), std::move(H), std::move(Q), r2, g,
                            band, std::move(x0), std::move(P0));
}

void ColouredStateSpace::validate() const {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.rows() != n || C.cols() != n || Q.rows() != n || Q.cols() != n ||
      P0.rows() != n || P0.cols() != n || H.cols() != n || x0.size() != n)
    throw std::invalid_argument("ColouredStateSpace: inconsistent dimensions");
  if (n < 1) throw std::invalid_argument("ColouredStateSpace: empty state");
  if (!(r2 > 0.0)) throw std::invalid_argument("ColouredStateSpace: r2 must be positive");
  if (!(std::abs(g) < 1.0))
    throw std::invalid_argument("ColouredStateSpace: |g| must be below 1 (stationary AR(1))");
  if (spectral_radius(C) >= 1.0)
    throw std::invalid_argument(
        "ColouredStateSpace: spectral radius of C must be below 1 (stationary AR(1))");
  if (!(band.lower < band.upper))
    throw std::invalid_argument("ColouredStateSpace: censoring band is empty");
  check_symmetric_psd(Q, "Q");
  check_symmetric_psd(P0, "P0");
}

Eigen::MatrixXd stationary_noise_cov(const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = C.rows();
  if (C.isDiagonal(0.0)) {
    Eigen::MatrixXd S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) S(i, j) = Q(i, j) / (1.0 - C(i, i) * C(j, j));
    return S;
  }
  // General case: vec(S) = (I - C (x) C)^{-1} vec(Q). Dimensions here are
  // tiny, so the dense Kronecker solve is fine.
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      K.block(i * n, j * n, n, n) -= C(i, j) * C;
  Eigen::VectorXd q(Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n));
  Eigen::VectorXd s = K.partialPivLu().solve(q);
  Eigen::MatrixXd S(Eigen::Map<const Eigen::MatrixXd>(s.data(), n, n));
  return 0.5 * (S + S.transpose());
}

namespace {

AugmentedModel augment_impl(const ColouredStateSpace& model, const Eigen::MatrixXd& C,
                            double g) {
  const Eigen::Index n = model.dim();
  const Eigen::Index m = 2 * n + 1;
  AugmentedModel aug;
  aug.state_dim = n;
  aug.band = model.band;

  aug.A = Eigen::MatrixXd::Zero(m, m);
  aug.A.topLeftCorner(n, n) = model.A;
  aug.A.block(0, n, n, n) = Eigen::MatrixXd::Identity(n, n);
  aug.A.block(n, n, n, n) = C;
  aug.A(m - 1, m - 1) = g;

  aug.H = Eigen::RowVectorXd::Zero(m);
  aug.H.head(n) = model.H;
  aug.H(m - 1) = 1.0;

  aug.Q = Eigen::MatrixXd::Zero(m, m);
  aug.Q.block(n, n, n, n) = model.Q;
  aug.Q(m - 1, m - 1) = model.r2;

  aug.z0 = Eigen::VectorXd::Zero(m);
  aug.z0.head(n) = model.x0;

  aug.P0 = Eigen::MatrixXd::Zero(m, m);
  aug.P0.topLeftCorner(n, n) = model.P0;
  aug.P0.block(n, n, n, n) = stationary_noise_cov(C, model.Q);
  aug.P0(m - 1, m - 1) = model.r2 / (1.0 - g * g);
  return aug;
}

}  // namespace

AugmentedModel augment(const ColouredStateSpace& model) {
  return augment_impl(model, model.C, model.g);
}

AugmentedModel augment(const ColouredStateSpace& model, const ArParams& params) {
  if (params.c_diag.size() != model.dim())
    throw std::invalid_argument("augment: c_diag has wrong dimension");
  if (!(std::abs(params.g) < 1.0) || params.c_diag.cwiseAbs().maxCoeff() >= 1.0)
    throw std::invalid_argument("augment: AR(1) parameters must lie inside (-1, 1)");
  Eigen::MatrixXd C = params.c_diag.asDiagonal();
  return augment_impl(model, C, params.g);
}

double clamp_to_band(double y_star, const CensorBand& band) {
  if (y_star <= band.lower) return band.lower;
  if (y_star >= band.upper) return band.upper;
  return y_star;
}

Trajectory simulate(const ColouredStateSpace& model, Eigen::Index steps, RngHandle handle) {
  if (steps < 1) throw std::invalid_argument("simulate: need at least one step");
  const Eigen::Index n = model.dim();
  Rng rng(handle);

  MvnSampler driver(GaussianSpec(Eigen::VectorXd::Zero(n), model.Q));
  MvnSampler stationary(GaussianSpec(Eigen::VectorXd::Zero(n),
                                     stationary_noise_cov(model.C, model.Q)));
  const double r = std::sqrt(model.r2);
  const double v_stat = std::sqrt(model.r2 / (1.0 - model.g * model.g));

  Eigen::VectorXd u = stationary.draw(rng);
  double v = v_stat * rng.gaussian();
  Eigen::VectorXd x = model.x0;

  Trajectory traj;
  traj.states.resize(steps, n);
  traj.latent.resize(steps);
  traj.observed.resize(steps);
  traj.process_noise.resize(steps, n);
  traj.meas_noise.resize(steps);

  for (Eigen::Index t = 0; t < steps; ++t) {
    x = model.A * x + u;
    u = model.C * u + driver.draw(rng);
    v = model.g * v + r * rng.gaussian();
    const double y_star = model.H.dot(x) + v;
    traj.states.row(t) = x.transpose();
    traj.process_noise.row(t) = u.transpose();
    traj.meas_noise[t] = v;
    traj.latent[t] = y_star;
    traj.observed[t] = clamp_to_band(y_star, model.band);
  }
  return traj;
}

}  // namespace coltkf
