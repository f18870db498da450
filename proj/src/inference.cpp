#include "l2div/inference.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "l2div/rng.hpp"

namespace l2div {

namespace {

const double kSqrt2 = std::sqrt(2.0);
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Acklam's rational approximation on the lower half, |error| < 1.15e-9
// before refinement.
double quantile_lower_half(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double dd[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // one Newton step against the erfc-based CDF
  const double err = normal_cdf(x) - p;
  x -= err / normal_pdf(x);
  return x;
}

double sample_variance(const Eigen::VectorXd& v) {
  // mean of squares minus squared mean, as the plugin form is defined
  const double n = static_cast<double>(v.size());
  double m = 0.0, m2 = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    m += v(i);
    m2 += v(i) * v(i);
  }
  m /= n;
  m2 /= n;
  return m2 - m * m;
}

VarianceEstimate finalize_variance(double sum_of_variances, double h, std::int64_t n,
                                   VarianceForm form) {
  VarianceEstimate out;
  out.h_density = h;
  out.n_used = n;
  out.form = form;
  const double raw = 4.0 * sum_of_variances;
  out.clamped = raw < 0.0;
  out.sigma2_hat = out.clamped ? 0.0 : raw;
  return out;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  return p < 0.5 ? quantile_lower_half(p) : -quantile_lower_half(1.0 - p);
}

VarianceEstimate variance_plugin(const Sample& xv, const Sample& yv, int beta,
                                 const KernelSpec& kernel, double scale) {
  if (xv.cols() != yv.cols())
    throw std::invalid_argument("variance_plugin: samples have different dimensions");
  if (xv.rows() != yv.rows())
    throw std::invalid_argument("variance_plugin: samples must have equal sizes");
  if (xv.rows() < 2) throw std::invalid_argument("variance_plugin: need at least 2 rows");

  const std::int64_t n = xv.rows();
  const int d = static_cast<int>(xv.cols());
  const double h = bandwidth(n, d, beta, BandwidthRule::density, scale);

  const Eigen::VectorXd p_at_x = kde_batch(xv, xv, kernel, h);
  const Eigen::VectorXd q_at_y = kde_batch(yv, yv, kernel, h);
  const Eigen::VectorXd q_at_x = kde_batch(yv, xv, kernel, h);
  const Eigen::VectorXd p_at_y = kde_batch(xv, yv, kernel, h);

  const double sum = sample_variance(p_at_x) + sample_variance(q_at_y) +
                     sample_variance(q_at_x) + sample_variance(p_at_y);
  return finalize_variance(sum, h, n, VarianceForm::empirical_moment);
}

VarianceEstimate variance_plugin_quadrature(const Sample& xv, const Sample& yv, int beta,
                                            const KernelSpec& kernel, double scale,
                                            int grid_points) {
  if (xv.cols() != yv.cols())
    throw std::invalid_argument("variance_plugin: samples have different dimensions");
  if (xv.rows() != yv.rows())
    throw std::invalid_argument("variance_plugin: samples must have equal sizes");
  if (xv.rows() < 2) throw std::invalid_argument("variance_plugin: need at least 2 rows");
  const int d = static_cast<int>(xv.cols());
  if (d > 2)
    throw std::invalid_argument("variance_plugin_quadrature: supported for d <= 2 only");
  if (grid_points < 2) throw std::invalid_argument("variance_plugin: grid too small");

  const std::int64_t n = xv.rows();
  const double h = bandwidth(n, d, beta, BandwidthRule::density, scale);
  const double pad = kernel.base.support_radius() * h;

  // axis-aligned grid covering both samples plus the kernel support
  std::vector<double> lo(d), step(d);
  for (int c = 0; c < d; ++c) {
    const double cmin = std::min(xv.col(c).minCoeff(), yv.col(c).minCoeff()) - pad;
    const double cmax = std::max(xv.col(c).maxCoeff(), yv.col(c).maxCoeff()) + pad;
    lo[c] = cmin;
    step[c] = (cmax - cmin) / (grid_points - 1);
  }

  const Eigen::Index cells = d == 1 ? grid_points
                                    : static_cast<Eigen::Index>(grid_points) * grid_points;
  Sample grid(cells, d);
  if (d == 1) {
    for (int i = 0; i < grid_points; ++i) grid(i, 0) = lo[0] + i * step[0];
  } else {
    Eigen::Index r = 0;
    for (int i = 0; i < grid_points; ++i)
      for (int j = 0; j < grid_points; ++j, ++r) {
        grid(r, 0) = lo[0] + i * step[0];
        grid(r, 1) = lo[1] + j * step[1];
      }
  }

  const Eigen::VectorXd ph = kde_batch(xv, grid, kernel, h);
  const Eigen::VectorXd qh = kde_batch(yv, grid, kernel, h);

  auto weight = [&](Eigen::Index r) {
    double w = 1.0;
    if (d == 1) {
      w = step[0] * ((r == 0 || r == grid_points - 1) ? 0.5 : 1.0);
    } else {
      const int i = static_cast<int>(r / grid_points), j = static_cast<int>(r % grid_points);
      w = step[0] * ((i == 0 || i == grid_points - 1) ? 0.5 : 1.0) * step[1] *
          ((j == 0 || j == grid_points - 1) ? 0.5 : 1.0);
    }
    return w;
  };

  double ip2 = 0, ip3 = 0, iq2 = 0, iq3 = 0, ipq = 0, iq2p = 0, ip2q = 0;
  for (Eigen::Index r = 0; r < cells; ++r) {
    const double w = weight(r), p = ph(r), q = qh(r);
    ip2 += w * p * p;
    ip3 += w * p * p * p;
    iq2 += w * q * q;
    iq3 += w * q * q * q;
    ipq += w * p * q;
    iq2p += w * q * q * p;
    ip2q += w * p * p * q;
  }
  const double sum = (ip3 - ip2 * ip2) + (iq3 - iq2 * iq2) + (iq2p - ipq * ipq) +
                     (ip2q - ipq * ipq);
  return finalize_variance(sum, h, n, VarianceForm::quadrature);
}

ConfidenceInterval confidence_interval(double d_hat, double sigma_hat, std::int64_t n,
                                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("confidence_interval: alpha must lie in (0, 1)");
  if (n < 1) throw std::invalid_argument("confidence_interval: n must be positive");
  if (!(sigma_hat >= 0.0))
    throw std::invalid_argument("confidence_interval: sigma_hat must be nonnegative");

  ConfidenceInterval ci;
  ci.alpha = alpha;
  ci.z = normal_quantile(1.0 - alpha / 2.0);
  ci.d_hat = d_hat;
  ci.sigma_hat = sigma_hat;
  ci.n = n;
  const double half = ci.z * sigma_hat / std::sqrt(static_cast<double>(n));
  ci.lo = d_hat - half;
  ci.hi = d_hat + half;
  return ci;
}

PermutationResult permutation_test(const Sample& x, const Sample& y,
                                   const EstimatorConfig& config, int replicates, double alpha,
                                   std::int64_t seed) {
  if (replicates < 19)
    throw std::invalid_argument(
        "permutation_test: need at least 19 replicates to resolve alpha = 0.05");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("permutation_test: alpha must lie in (0, 1)");
  if (x.rows() != y.rows())
    throw std::invalid_argument("permutation_test: samples must have equal sizes");
  if (x.cols() != y.cols())
    throw std::invalid_argument("permutation_test: samples have different dimensions");

  EstimatorConfig cfg = config;
  cfg.split = false;  // the permutation statistic never splits

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double observed = l2_divergence(x, y, cfg).d_hat;

  Sample pooled(2 * n, d);
  pooled.topRows(n) = x;
  pooled.bottomRows(n) = y;

  std::vector<Eigen::Index> base(static_cast<std::size_t>(2 * n));
  std::iota(base.begin(), base.end(), Eigen::Index{0});

  Sample xb(n, d), yb(n, d);
  int at_least = 0;
  for (int b = 1; b <= replicates; ++b) {
    rng::Engine eng(static_cast<std::uint64_t>(seed + b));
    std::vector<Eigen::Index> idx = base;
    eng.shuffle(std::span<Eigen::Index>(idx));
    for (Eigen::Index i = 0; i < n; ++i) {
      xb.row(i) = pooled.row(idx[static_cast<std::size_t>(i)]);
      yb.row(i) = pooled.row(idx[static_cast<std::size_t>(n + i)]);
    }
    const double stat = l2_divergence(xb, yb, cfg).d_hat;
    if (stat >= observed) ++at_least;  // ties count: conservative
  }

  PermutationResult res;
  res.statistic = observed;
  res.replicates = replicates;
  res.seed = seed;
  res.alpha = alpha;
  res.p_value = (1.0 + at_least) / (replicates + 1.0);
  res.reject = res.p_value <= alpha;
  return res;
}

}  // namespace l2div
