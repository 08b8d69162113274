#include "coltkf/gaussian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "coltkf/errors.hpp"

namespace coltkf {
namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kSymmetryTol = 1e-12;

bool is_symmetric(const Eigen::MatrixXd& S, double tol) {
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

double std_normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_sf(double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double std_normal_log_cdf(double x) {
  if (x > -8.0) return std::log(std_normal_cdf(x));
  // Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
  double r = 1.0 / (x * x);
  double series = r * (-1.0 + r * (3.0 + r * (-15.0 + r * 105.0)));
  return -0.5 * x * x - std::log(-x / kInvSqrt2Pi) + std::log1p(series);
}

GaussianSpec::GaussianSpec(Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in)
    : mean(std::move(mean_in)), cov(std::move(cov_in)) {
  validate();
}

void GaussianSpec::validate() const {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("GaussianSpec: covariance must be square");
  if (cov.rows() != mean.size())
    throw std::invalid_argument("GaussianSpec: mean/covariance dimension mismatch");
  if (!is_symmetric(cov, kSymmetryTol))
    throw std::invalid_argument("GaussianSpec: covariance not symmetric within 1e-12");
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols())
    throw std::invalid_argument("cholesky_factor: matrix must be square");
  if (!is_symmetric(S, kSymmetryTol))
    throw std::invalid_argument("cholesky_factor: matrix not symmetric within 1e-12");

  const Eigen::Index n = S.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  if (S.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(n, n);

  const double scale = S.diagonal().maxCoeff();
  const double jitters[] = {0.0, 1e-12, 1e-10, 1e-8};
  for (double delta : jitters) {
    Eigen::MatrixXd shifted = S;
    if (delta > 0.0) shifted.diagonal().array() += delta * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd L = llt.matrixL();
    // LLT can report success on an indefinite matrix in rare borderline
    // cases; verify the reconstruction before accepting.
    double err = (L * L.transpose() - S).cwiseAbs().maxCoeff();
    double bound = std::max(1e-9 * S.cwiseAbs().maxCoeff(), delta * scale * 4.0 + 1e-300);
    if (err <= bound && L.allFinite()) return L;
  }
  std::ostringstream msg;
  msg << "cholesky_factor: matrix of size " << n << " is not positive semidefinite (jitter exhausted)";
  throw NotPositiveSemiDefinite(msg.str());
}

MvnSampler::MvnSampler(const GaussianSpec& spec)
    : mean_(spec.mean), chol_(cholesky_factor(spec.cov)) {
  spec.validate();
}

Eigen::VectorXd MvnSampler::draw(Rng& rng) const {
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
  return mean_ + chol_ * z;
}

Eigen::MatrixXd sample_mvn(const GaussianSpec& spec, RngHandle handle, Eigen::Index count) {
  if (count < 1) throw std::invalid_argument("sample_mvn: count must be >= 1");
  MvnSampler sampler(spec);
  Rng rng(handle);
  Eigen::MatrixXd out(count, spec.dim());
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = sampler.draw(rng).transpose();
  return out;
}

}  // namespace coltkf
