#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "l2div/kernel.hpp"

namespace l2div {

// n x d matrix of observations, one row per point
using Sample = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class BandwidthRule { divergence, density };

// divergence rule: scale * n^(-2/(4*beta+d)); density rule: scale * n^(-1/(2*beta+d))
double bandwidth(std::int64_t n, int d, int beta, BandwidthRule rule, double scale = 1.0);

// (1 / (n (n-1) h^d)) * sum_{i != j} K((X_i - X_j) / h)
double quadratic_term(const Sample& x, const KernelSpec& kernel, double h);

// (1 / (n^2 h^d)) * sum_{i,j} K((X_i - Y_j) / h), diagonal included
double bilinear_term(const Sample& x, const Sample& y, const KernelSpec& kernel, double h);

struct EstimatorConfig {
  int beta = 1;
  bool split = true;
  std::optional<double> bandwidth_override;
  double bandwidth_scale = 1.0;
  KernelSpec kernel;
};

struct DivergenceEstimate {
  double d_hat = 0.0;
  double theta_p = 0.0;
  double theta_q = 0.0;
  double theta_pq = 0.0;
  double h = 0.0;
  std::int64_t n_per_term = 0;
  bool split = false;
};

// Combined estimate theta_p + theta_q - 2*theta_pq. With split=true the
// first halves of X and Y (in given row order) feed the quadratic terms and
// the second halves feed the bilinear term, so that every point is used in
// exactly one term; n_per_term is then X.rows()/2.
DivergenceEstimate l2_divergence(const Sample& x, const Sample& y, const EstimatorConfig& config);

// Kernel density estimate (1/(n h^d)) * sum_i K((x - X_i)/h). Higher-order
// kernels can produce negative values; no truncation is applied.
double kde(const Sample& train, const Eigen::VectorXd& x, const KernelSpec& kernel, double h);

// Batch form: one estimate per row of eval_points, in row order.
Eigen::VectorXd kde_batch(const Sample& train, const Sample& eval_points,
                          const KernelSpec& kernel, double h);

// Non-fatal configuration diagnostics (kernel order too low for beta,
// assumption-violating base, ...).
std::vector<std::string> config_warnings(const EstimatorConfig& config, int d);

}  // namespace l2div
