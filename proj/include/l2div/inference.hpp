#pragma once

#include <cstdint>

#include "l2div/estimator.hpp"

namespace l2div {

// Standard normal CDF via erfc.
double normal_cdf(double z);

// Inverse standard normal CDF, absolute error below 1e-9 (rational
// approximation refined with one Newton step against the erfc-based CDF).
double normal_quantile(double p);

enum class VarianceForm { empirical_moment, quadrature };

struct VarianceEstimate {
  double sigma2_hat = 0.0;
  double h_density = 0.0;
  std::int64_t n_used = 0;
  VarianceForm form = VarianceForm::empirical_moment;
  bool clamped = false;  // true when the raw moment difference was negative
};

// Plugin estimate of the asymptotic variance
//   sigma^2 = 4[ Var_p(p) + Var_q(q) + Var_p(q) + Var_q(p) ]
// with kernel density estimates substituted for the unknown densities at the
// density-estimation bandwidth n^(-1/(2*beta+d)). Each variance is the
// empirical second moment minus squared first moment of the fitted density
// evaluated over the corresponding sample. Clamped at zero.
VarianceEstimate variance_plugin(const Sample& xv, const Sample& yv, int beta,
                                 const KernelSpec& kernel, double scale = 1.0);

// Validation form for d <= 2: the same plugin substitution but with the
// moments integrated on a uniform grid (trapezoid rule) instead of averaged
// over the sample.
VarianceEstimate variance_plugin_quadrature(const Sample& xv, const Sample& yv, int beta,
                                            const KernelSpec& kernel, double scale = 1.0,
                                            int grid_points = 2001);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.0;
  double z = 0.0;
  double d_hat = 0.0;
  double sigma_hat = 0.0;
  std::int64_t n = 0;
};

// [d_hat -+ z_{alpha/2} * sigma_hat / sqrt(n)]
ConfidenceInterval confidence_interval(double d_hat, double sigma_hat, std::int64_t n,
                                       double alpha);

struct PermutationResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int replicates = 0;
  std::int64_t seed = 0;
  bool reject = false;
  double alpha = 0.0;
};

// Two-sample permutation test on the no-split divergence statistic. The
// pooled 2n points are repartitioned B times by a seeded Fisher-Yates
// shuffle (replicate b uses engine seed `seed + b`); ties count toward
// rejection of the null and the p-value uses the add-one rule, so
// p >= 1/(B+1).
PermutationResult permutation_test(const Sample& x, const Sample& y,
                                   const EstimatorConfig& config, int replicates, double alpha,
                                   std::int64_t seed);

}  // namespace l2div
