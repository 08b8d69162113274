#include "coltkf/censored_moments.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "coltkf/errors.hpp"

namespace coltkf {
namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kSkewVarianceFloor = 1e-250;

void check_variance(double s2) {
  if (!(s2 > kVarianceFloor))
    throw DegenerateVariance("censored moments: variance " + std::to_string(s2) +
                             " is at or below the 1e-12 floor");
}

void check_band(const CensorBand& band) {
  if (!(band.lower < band.upper))
    throw std::invalid_argument("CensorBand: lower must be strictly below upper");
}

// All scalar censored moments in one evaluation. Standardized limits are
// a* = (a-m)/s and b* = (b-m)/s; terms attached to an infinite limit take
// their exact limit values (0) instead of producing inf*0.
struct ScalarMoments {
  double p = 1.0;       // mass strictly inside the band
  double mean = 0.0;    // E[x^c]
  double var = 0.0;     // Var(x^c)
  double mu3 = 0.0;     // third central moment
};

ScalarMoments scalar_moments(double m, double s2, const CensorBand& band) {
  check_variance(s2);
  check_band(band);
  const double s = std::sqrt(s2);

  const bool la = band.lower_finite();
  const bool lb = band.upper_finite();
  const double as = la ? (band.lower - m) / s : 0.0;
  const double bs = lb ? (band.upper - m) / s : 0.0;
  const double cdf_a = la ? std_normal_cdf(as) : 0.0;   // mass clamped to a
  const double sf_b = lb ? std_normal_sf(bs) : 0.0;     // mass clamped to b
  const double pa = la ? std_normal_pdf(as) : 0.0;
  const double pb = lb ? std_normal_pdf(bs) : 0.0;

  ScalarMoments out;
  if (!la && !lb) {
    out.p = 1.0;
    out.mean = m;
    out.var = s2;
    out.mu3 = 0.0;
    return out;
  }

  // Interior mass via whichever tail pair avoids cancellation.
  double p;
  if (!la) p = std_normal_cdf(bs);
  else if (!lb) p = std_normal_sf(as);
  else if (as + bs >= 0.0) p = std_normal_sf(as) - std_normal_sf(bs);
  else p = std_normal_cdf(bs) - std_normal_cdf(as);
  p = std::min(std::max(p, 0.0), 1.0);
  out.p = p;

  double mean = p * m + s * (pa - pb);
  if (la) mean += band.lower * cdf_a;
  if (lb) mean += band.upper * sf_b;
  // The expectation of a clamped variable cannot leave the band.
  if (la) mean = std::max(mean, band.lower);
  if (lb) mean = std::min(mean, band.upper);
  out.mean = mean;

  // Central moments around the censored mean: the truncated-integral pieces
  // use int u^2 phi = P + a* phi(a*) - b* phi(b*) and
  // int u^3 phi = (a*^2+2) phi(a*) - (b*^2+2) phi(b*) over the band.
  const double d = m - mean;
  const double i1 = pa - pb;
  const double i2 = p + (la ? as * pa : 0.0) - (lb ? bs * pb : 0.0);
  const double i3 = (la ? (as * as + 2.0) * pa : 0.0) - (lb ? (bs * bs + 2.0) * pb : 0.0);
  const double da = la ? band.lower - mean : 0.0;
  const double db = lb ? band.upper - mean : 0.0;

  double var = s2 * i2 + 2.0 * d * s * i1 + d * d * p;
  if (la) var += da * da * cdf_a;
  if (lb) var += db * db * sf_b;
  out.var = std::max(var, 0.0);

  double mu3 = s * s2 * i3 + 3.0 * d * s2 * i2 + 3.0 * d * d * s * i1 + d * d * d * p;
  if (la) mu3 += da * da * da * cdf_a;
  if (lb) mu3 += db * db * db * sf_b;
  out.mu3 = mu3;
  return out;
}

}  // namespace

CensorBand::CensorBand(double lower_in, double upper_in) : lower(lower_in), upper(upper_in) {
  check_band(*this);
}

double censored_mgf(const GaussianSpec& spec, Eigen::Index k, const CensorBand& band,
                    const Eigen::VectorXd& t) {
  spec.validate();
  check_band(band);
  if (k < 0 || k >= spec.dim())
    throw std::invalid_argument("censored_mgf: coordinate index out of range");
  if (t.size() != spec.dim())
    throw std::invalid_argument("censored_mgf: t has wrong dimension");

  const double m_k = spec.mean[k];
  const double s2 = spec.cov(k, k);
  check_variance(s2);
  const double s = std::sqrt(s2);

  Eigen::VectorXd t0 = t;
  t0[k] = 0.0;
  const double jk = spec.cov.row(k).dot(t);
  const double j0k = spec.cov.row(k).dot(t0);
  const double quad = t.dot(spec.mean) + 0.5 * t.dot(spec.cov * t);
  const double quad0 = t0.dot(spec.mean) + 0.5 * t0.dot(spec.cov * t0);

  const bool la = band.lower_finite();
  const bool lb = band.upper_finite();

  double interior_mass;
  {
    const double hi = lb ? std_normal_cdf((band.upper - m_k - jk) / s) : 1.0;
    const double lo = la ? std_normal_cdf((band.lower - m_k - jk) / s) : 0.0;
    interior_mass = hi - lo;
  }
  double value = std::exp(quad) * interior_mass;
  if (la)
    value += std::exp(t[k] * band.lower + quad0) * std_normal_cdf((band.lower - m_k - j0k) / s);
  if (lb)
    value += std::exp(t[k] * band.upper + quad0) * std_normal_sf((band.upper - m_k - j0k) / s);
  return value;
}

double uncensored_prob(double m_k, double s2, const CensorBand& band) {
  return scalar_moments(m_k, s2, band).p;
}

double censored_mean(double m_k, double s2, const CensorBand& band) {
  return scalar_moments(m_k, s2, band).mean;
}

double censored_variance(double m_k, double s2, const CensorBand& band) {
  return scalar_moments(m_k, s2, band).var;
}

double censored_third_moment(double m_k, double s2, const CensorBand& band) {
  ScalarMoments sm = scalar_moments(m_k, s2, band);
  // Raw moment assembled from the central ones.
  return sm.mu3 + 3.0 * sm.mean * sm.var + sm.mean * sm.mean * sm.mean;
}

double censored_skewness(double m_k, double s2, const CensorBand& band) {
  ScalarMoments sm = scalar_moments(m_k, s2, band);
  if (sm.var < kSkewVarianceFloor)
    throw ZeroVariance("censored_skewness: censored variance underflowed");
  return sm.mu3 / (sm.var * std::sqrt(sm.var));
}

double censored_cross_cov(double s_ik, double p_uncensored) {
  return p_uncensored * s_ik;
}

CensoredSummary censored_summary(const GaussianSpec& spec, Eigen::Index k,
                                 const CensorBand& band) {
  spec.validate();
  if (k < 0 || k >= spec.dim())
    throw std::invalid_argument("censored_summary: coordinate index out of range");

  ScalarMoments sm = scalar_moments(spec.mean[k], spec.cov(k, k), band);

  CensoredSummary out;
  out.mean = spec.mean;
  out.mean[k] = sm.mean;
  out.cov = spec.cov;  // uncensored block copied bit-for-bit
  for (Eigen::Index i = 0; i < spec.dim(); ++i) {
    if (i == k) continue;
    const double cross = censored_cross_cov(spec.cov(i, k), sm.p);
    out.cov(i, k) = cross;
    out.cov(k, i) = cross;
  }
  out.cov(k, k) = sm.var;
  out.skewness = Eigen::VectorXd::Zero(spec.dim());
  if (sm.var >= kSkewVarianceFloor)
    out.skewness[k] = sm.mu3 / (sm.var * std::sqrt(sm.var));
  out.uncensored_prob = sm.p;
  return out;
}

namespace {

// Raw-moment accumulator for one repetition.
struct RepStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd skew;
  double inside_frac = 0.0;
};

RepStats run_rep(const MvnSampler& sampler, const GaussianSpec& spec, Eigen::Index k,
                 const CensorBand& band, Eigen::Index samples, RngHandle handle) {
  const Eigen::Index n = spec.dim();
  Rng rng(handle);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd sum2 = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd sum3 = Eigen::VectorXd::Zero(n);
  Eigen::Index inside = 0;

  for (Eigen::Index i = 0; i < samples; ++i) {
    Eigen::VectorXd x = sampler.draw(rng);
    double& xk = x[k];
    if (xk > band.lower && xk < band.upper) ++inside;
    if (xk <= band.lower) xk = band.lower;
    if (xk >= band.upper) xk = band.upper;
    sum += x;
    sum2.selfadjointView<Eigen::Lower>().rankUpdate(x);
    sum3 += x.array().cube().matrix();
  }

  const double inv = 1.0 / static_cast<double>(samples);
  RepStats out;
  out.mean = sum * inv;
  Eigen::MatrixXd raw2 = Eigen::MatrixXd(sum2.selfadjointView<Eigen::Lower>()) * inv;
  out.cov = raw2 - out.mean * out.mean.transpose();
  out.skew.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m1 = out.mean[i];
    const double v = out.cov(i, i);
    const double m3 = sum3[i] * inv - 3.0 * m1 * raw2(i, i) + 2.0 * m1 * m1 * m1;
    out.skew[i] = m3 / (v * std::sqrt(v));
  }
  out.inside_frac = static_cast<double>(inside) * inv;
  return out;
}

}  // namespace

McCensoredSummary mc_censored_summary_detail(const GaussianSpec& spec, Eigen::Index k,
                                             const CensorBand& band, Eigen::Index samples,
                                             int reps, RngHandle rng, int threads) {
  spec.validate();
  check_band(band);
  if (k < 0 || k >= spec.dim())
    throw std::invalid_argument("mc_censored_summary: coordinate index out of range");
  if (samples < 10000)
    throw std::invalid_argument("mc_censored_summary: need at least 1e4 samples per rep");
  if (reps < 1) throw std::invalid_argument("mc_censored_summary: reps must be >= 1");

  MvnSampler sampler(spec);
  std::vector<RepStats> stats(reps);

  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, reps));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1))
        stats[r] = run_rep(sampler, spec, k, band, samples, rng.substream(r));
    });
  }
  for (auto& t : pool) t.join();

  const Eigen::Index n = spec.dim();
  McCensoredSummary out;
  out.reps = reps;
  out.estimate.mean = Eigen::VectorXd::Zero(n);
  out.estimate.cov = Eigen::MatrixXd::Zero(n, n);
  out.estimate.skewness = Eigen::VectorXd::Zero(n);
  out.estimate.uncensored_prob = 0.0;
  for (const auto& s : stats) {
    out.estimate.mean += s.mean;
    out.estimate.cov += s.cov;
    out.estimate.skewness += s.skew;
    out.estimate.uncensored_prob += s.inside_frac;
  }
  const double inv = 1.0 / reps;
  out.estimate.mean *= inv;
  out.estimate.cov *= inv;
  out.estimate.skewness *= inv;
  out.estimate.uncensored_prob *= inv;

  out.std_error.mean = Eigen::VectorXd::Zero(n);
  out.std_error.cov = Eigen::MatrixXd::Zero(n, n);
  out.std_error.skewness = Eigen::VectorXd::Zero(n);
  out.std_error.uncensored_prob = 0.0;
  if (reps > 1) {
    for (const auto& s : stats) {
      out.std_error.mean.array() += (s.mean - out.estimate.mean).array().square();
      out.std_error.cov.array() += (s.cov - out.estimate.cov).array().square();
      out.std_error.skewness.array() += (s.skew - out.estimate.skewness).array().square();
      const double dp = s.inside_frac - out.estimate.uncensored_prob;
      out.std_error.uncensored_prob += dp * dp;
    }
    const double scale = 1.0 / (static_cast<double>(reps - 1) * reps);
    out.std_error.mean = (out.std_error.mean * scale).cwiseSqrt();
    out.std_error.cov = (out.std_error.cov * scale).cwiseSqrt();
    out.std_error.skewness = (out.std_error.skewness * scale).cwiseSqrt();
    out.std_error.uncensored_prob = std::sqrt(out.std_error.uncensored_prob * scale);
  }
  return out;
}

CensoredSummary mc_censored_summary(const GaussianSpec& spec, Eigen::Index k,
                                    const CensorBand& band, Eigen::Index samples, int reps,
                                    RngHandle rng) {
  return mc_censored_summary_detail(spec, k, band, samples, reps, rng).estimate;
}

}  // namespace coltkf
