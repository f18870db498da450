#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "l2div/estimator.hpp"
#include "l2div/oracle.hpp"

namespace l2div {

enum class Experiment { convergence, coverage, normality, berry_esseen, permutation_level };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment experiment);

struct ExperimentConfig {
  Experiment experiment = Experiment::convergence;
  std::vector<int> dims{1};
  std::vector<std::int64_t> n_grid{500, 2000, 8000};
  int trials = 200;
  int beta = 1;
  std::string kernel = "gauss";
  double alpha = 0.10;
  std::int64_t seed = 0;
  double mean_shift = 1.0;  // per-coordinate mean offset between p and q
  double variance = 1.0;
  double bandwidth_scale = 1.0;
  // density-stage scale for the variance plugin; follows bandwidth_scale
  // unless set, so the two smoothing stages can be tuned independently
  std::optional<double> variance_bandwidth_scale;
  int permutation_replicates = 199;
  std::optional<double> sigma_override;  // normality in d > 2

  GaussianSpec setup(int d) const;
};

// key=value lines, '#' comments; `seed` is required.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

struct ReportRow {
  std::string experiment;
  int d = 0;
  std::int64_t n = 0;
  std::optional<double> median_rel_err;
  std::optional<double> iqr_lo;
  std::optional<double> iqr_hi;
  std::optional<double> rescaled_median_rel_err;
  std::optional<double> coverage;
  std::optional<double> coverage_se;
  std::optional<double> ks_distance;
  std::optional<double> sup_cdf_distance;
  std::optional<double> rejection_rate;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;

  // '#'-prefixed config echo, fixed header, one row per (d, n); blank cells
  // for metrics the experiment does not produce. Byte-stable across reruns.
  std::string to_csv() const;
};

enum class Which { first, second };

// n i.i.d. rows from the selected gaussian, deterministic per
// (spec, which, n, seed); `which` selects an independent stream.
Sample sample_gaussian(const GaussianSpec& spec, Which which, std::int64_t n, std::int64_t seed);

// Stateless per-cell trial seed; reordering trials cannot change any number.
std::uint64_t trial_seed(std::int64_t seed, int d, std::int64_t n, int trial);

ExperimentReport run_convergence(const ExperimentConfig& config);
ExperimentReport run_coverage(const ExperimentConfig& config);
ExperimentReport run_normality(const ExperimentConfig& config);
ExperimentReport run_berry_esseen(const ExperimentConfig& config);
ExperimentReport run_permutation_level(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
// `values` and the standard normal CDF.
double ks_distance_to_normal(std::vector<double> values);

}  // namespace l2div
