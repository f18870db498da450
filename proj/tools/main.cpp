#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "l2div/inference.hpp"
#include "l2div/io.hpp"
#include "l2div/simulate.hpp"

namespace {

// Flat JSON object with insertion-ordered keys and doubles printed at 17
// significant digits, so identical invocations produce identical bytes.
class JsonWriter {
 public:
  void add(const std::string& key, double value) { raw(key, l2div::format_g17(value)); }
  void add(const std::string& key, std::int64_t value) { raw(key, std::to_string(value)); }
  void add(const std::string& key, int value) { raw(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { raw(key, value ? "true" : "false"); }
  void add(const std::string& key, const std::string& value) {
    std::string escaped = "\"";
    for (char c : value) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    escaped += '"';
    raw(key, escaped);
  }

  std::string str() const { return "{" + body_ + "}\n"; }

 private:
  void raw(const std::string& key, const std::string& value) {
    if (!body_.empty()) body_ += ", ";
    body_ += "\"" + key + "\": " + value;
  }
  std::string body_;
};

void emit(const std::string& text, const std::string& output_path) {
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output_path);
  if (!out) throw l2div::io_error("cannot open '" + output_path + "' for writing");
  out << text;
  if (!out) throw l2div::io_error("error while writing '" + output_path + "'");
}

struct DataOptions {
  std::string x_path, y_path;
  bool header = false;
};

struct LoadedPair {
  l2div::Sample x, y;
};

LoadedPair load_pair(const DataOptions& data) {
  LoadedPair pair{l2div::read_matrix_csv(data.x_path, data.header),
                  l2div::read_matrix_csv(data.y_path, data.header)};
  if (pair.x.cols() != pair.y.cols())
    throw std::invalid_argument("inputs have different dimensions: " + data.x_path + " has " +
                                std::to_string(pair.x.cols()) + " columns, " + data.y_path +
                                " has " + std::to_string(pair.y.cols()));
  return pair;
}

void add_data_options(CLI::App* cmd, DataOptions& data) {
  cmd->add_option("--x", data.x_path, "CSV sample from the first distribution")->required();
  cmd->add_option("--y", data.y_path, "CSV sample from the second distribution")->required();
  cmd->add_flag("--header", data.header, "skip one header line in each CSV");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void append_estimate(JsonWriter& json, const l2div::DivergenceEstimate& est) {
  json.add("d_hat", est.d_hat);
  json.add("theta_p", est.theta_p);
  json.add("theta_q", est.theta_q);
  json.add("theta_pq", est.theta_pq);
  json.add("h", est.h);
  json.add("n_per_term", est.n_per_term);
  json.add("split", est.split);
}

int run(int argc, char** argv) {
  CLI::App app{"Kernel U-statistic estimation of the squared L2 divergence between two samples"};
  app.require_subcommand(1);

  // ---- estimate ----
  auto* estimate = app.add_subcommand("estimate", "point estimate of the divergence");
  DataOptions est_data;
  add_data_options(estimate, est_data);
  int est_beta = 1;
  std::string est_kernel = "gauss";
  bool est_split = true;
  std::optional<double> est_bandwidth;
  double est_scale = 1.0;
  std::string est_output;
  estimate->add_option("--beta", est_beta, "assumed smoothness");
  estimate->add_option("--kernel", est_kernel, "uniform | gauss | legendre:<order>");
  estimate->add_flag("--split,!--no-split", est_split, "data splitting (default on)");
  estimate->add_option("--bandwidth", est_bandwidth, "bandwidth override");
  estimate->add_option("--scale", est_scale, "bandwidth scale factor");
  estimate->add_option("--output", est_output, "write JSON here instead of stdout");

  // ---- ci ----
  auto* ci_cmd = app.add_subcommand("ci", "asymptotic confidence interval");
  DataOptions ci_data;
  add_data_options(ci_cmd, ci_data);
  int ci_beta = 1;
  std::string ci_kernel = "legendre:2";
  double ci_alpha = 0.10;
  double ci_scale = 1.0;
  std::optional<std::int64_t> ci_var_rows;
  std::string ci_output;
  ci_cmd->add_option("--beta", ci_beta, "assumed smoothness");
  ci_cmd->add_option("--kernel", ci_kernel, "uniform | gauss | legendre:<order>");
  ci_cmd->add_option("--alpha", ci_alpha, "miscoverage level");
  ci_cmd->add_option("--scale", ci_scale, "bandwidth scale factor");
  ci_cmd->add_option("--var-rows", ci_var_rows,
                     "rows reserved for the variance estimate (default: one third)");
  ci_cmd->add_option("--output", ci_output, "write JSON here instead of stdout");

  // ---- twosample ----
  auto* two = app.add_subcommand("twosample", "permutation two-sample test");
  DataOptions two_data;
  add_data_options(two, two_data);
  int two_b = 199;
  double two_alpha = 0.05;
  std::int64_t two_seed = 0;
  int two_beta = 1;
  std::string two_kernel = "gauss";
  double two_scale = 1.0;
  std::string two_output;
  two->add_option("--replicates,-B", two_b, "permutation replicates");
  two->add_option("--alpha", two_alpha, "test level");
  two->add_option("--seed", two_seed, "permutation seed")->required();
  two->add_option("--beta", two_beta, "assumed smoothness");
  two->add_option("--kernel", two_kernel, "uniform | gauss | legendre:<order>");
  two->add_option("--scale", two_scale, "bandwidth scale factor");
  two->add_option("--output", two_output, "write JSON here instead of stdout");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo experiment harness");
  std::string sim_config;
  std::string sim_output;
  sim->add_option("--config", sim_config, "key=value experiment configuration")->required();
  sim->add_option("--output", sim_output, "write CSV here instead of stdout");

  // ---- kernel-check ----
  auto* kc = app.add_subcommand("kernel-check", "kernel moment table");
  std::string kc_kernel;
  int kc_degree = 0;
  int kc_dim = 1;
  kc->add_option("kernel", kc_kernel, "uniform | gauss | legendre:<order>")->required();
  kc->add_option("max_degree", kc_degree, "largest total moment degree")->required();
  kc->add_option("--dim", kc_dim, "product-kernel dimension (<= 2)");

  // ---- oracle ----
  auto* oracle = app.add_subcommand("oracle", "ground-truth functionals");
  bool oracle_gaussian = false;
  int oracle_d = 1;
  double oracle_shift = 1.0;
  double oracle_variance = 1.0;
  std::string oracle_p, oracle_q, oracle_output;
  oracle->add_flag("--gaussian", oracle_gaussian, "closed-form gaussian pair");
  oracle->add_option("--d", oracle_d, "dimension for --gaussian");
  oracle->add_option("--mean-shift", oracle_shift, "per-coordinate mean offset");
  oracle->add_option("--variance", oracle_variance, "shared isotropic variance");
  oracle->add_option("--p", oracle_p, "grid density CSV for p");
  oracle->add_option("--q", oracle_q, "grid density CSV for q");
  oracle->add_option("--output", oracle_output, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (estimate->parsed()) {
    const LoadedPair data = load_pair(est_data);
    l2div::EstimatorConfig cfg;
    cfg.beta = est_beta;
    cfg.split = est_split;
    cfg.bandwidth_override = est_bandwidth;
    cfg.bandwidth_scale = est_scale;
    cfg.kernel = l2div::parse_kernel(est_kernel, static_cast<int>(data.x.cols()));
    print_warnings(l2div::config_warnings(cfg, static_cast<int>(data.x.cols())));
    const l2div::DivergenceEstimate est = l2div::l2_divergence(data.x, data.y, cfg);
    JsonWriter json;
    append_estimate(json, est);
    json.add("n", static_cast<std::int64_t>(data.x.rows()));
    json.add("d", static_cast<std::int64_t>(data.x.cols()));
    json.add("kernel", est_kernel);
    json.add("beta", est_beta);
    json.add("scale", est_scale);
    emit(json.str(), est_output);
    return 0;
  }

  if (ci_cmd->parsed()) {
    const LoadedPair data = load_pair(ci_data);
    const std::int64_t rows = data.x.rows();
    std::int64_t var_rows = 0;
    if (ci_var_rows) {
      var_rows = *ci_var_rows;
    } else if (rows % 3 == 0) {
      var_rows = rows / 3;
    } else {
      throw std::invalid_argument(
          "row count " + std::to_string(rows) +
          " is not divisible by 3; pass --var-rows to choose the variance split");
    }
    if (var_rows < 2 || rows - var_rows < 4)
      throw std::invalid_argument("--var-rows leaves too few rows for estimation");
    const std::int64_t est_rows = rows - var_rows;
    if (est_rows % 2 != 0)
      throw std::invalid_argument("estimation rows must be even for data splitting; adjust "
                                  "--var-rows");

    l2div::EstimatorConfig cfg;
    cfg.beta = ci_beta;
    cfg.split = true;
    cfg.bandwidth_scale = ci_scale;
    cfg.kernel = l2div::parse_kernel(ci_kernel, static_cast<int>(data.x.cols()));
    print_warnings(l2div::config_warnings(cfg, static_cast<int>(data.x.cols())));

    const l2div::Sample x_est = data.x.topRows(est_rows);
    const l2div::Sample y_est = data.y.topRows(est_rows);
    const l2div::Sample x_var = data.x.bottomRows(var_rows);
    const l2div::Sample y_var = data.y.bottomRows(var_rows);

    const l2div::DivergenceEstimate est = l2div::l2_divergence(x_est, y_est, cfg);
    const l2div::VarianceEstimate var =
        l2div::variance_plugin(x_var, y_var, ci_beta, cfg.kernel, ci_scale);
    const l2div::ConfidenceInterval ci = l2div::confidence_interval(
        est.d_hat, std::sqrt(var.sigma2_hat), est.n_per_term, ci_alpha);

    JsonWriter json;
    append_estimate(json, est);
    json.add("sigma2_hat", var.sigma2_hat);
    json.add("sigma_hat", ci.sigma_hat);
    json.add("sigma2_clamped", var.clamped);
    json.add("h_density", var.h_density);
    json.add("estimate_rows", est_rows);
    json.add("variance_rows", var_rows);
    json.add("lo", ci.lo);
    json.add("hi", ci.hi);
    json.add("alpha", ci.alpha);
    json.add("z", ci.z);
    json.add("n", ci.n);
    json.add("d", static_cast<std::int64_t>(data.x.cols()));
    json.add("kernel", ci_kernel);
    json.add("beta", ci_beta);
    json.add("scale", ci_scale);
    emit(json.str(), ci_output);
    return 0;
  }

  if (two->parsed()) {
    const LoadedPair data = load_pair(two_data);
    l2div::EstimatorConfig cfg;
    cfg.beta = two_beta;
    cfg.split = false;
    cfg.bandwidth_scale = two_scale;
    cfg.kernel = l2div::parse_kernel(two_kernel, static_cast<int>(data.x.cols()));
    const l2div::PermutationResult res =
        l2div::permutation_test(data.x, data.y, cfg, two_b, two_alpha, two_seed);
    JsonWriter json;
    json.add("statistic", res.statistic);
    json.add("p_value", res.p_value);
    json.add("replicates", res.replicates);
    json.add("seed", res.seed);
    json.add("reject", res.reject);
    json.add("alpha", res.alpha);
    json.add("n", static_cast<std::int64_t>(data.x.rows()));
    json.add("d", static_cast<std::int64_t>(data.x.cols()));
    json.add("kernel", two_kernel);
    json.add("beta", two_beta);
    json.add("scale", two_scale);
    emit(json.str(), two_output);
    return 0;
  }

  if (sim->parsed()) {
    const l2div::ExperimentConfig config = l2div::load_experiment_config(sim_config);
    const l2div::ExperimentReport report = l2div::run_experiment(config);
    print_warnings(report.warnings);
    emit(report.to_csv(), sim_output);
    return 0;
  }

  if (kc->parsed()) {
    const l2div::KernelSpec kernel = l2div::parse_kernel(kc_kernel, kc_dim);
    const l2div::MomentReport report = l2div::check_moments(kernel, kc_degree);
    std::string out = "powers,moment\n";
    for (const auto& entry : report.entries) {
      std::string powers;
      for (std::size_t i = 0; i < entry.powers.size(); ++i) {
        if (i) powers += ':';
        powers += std::to_string(entry.powers[i]);
      }
      out += powers + ',' + l2div::format_g17(entry.value) + '\n';
    }
    if (kernel.base.assumption_violating())
      std::cerr << "warning: kernel '" << kc_kernel
                << "' does not satisfy the compact-support moment conditions\n";
    emit(out, "");
    return 0;
  }

  if (oracle->parsed()) {
    JsonWriter json;
    if (oracle_gaussian) {
      if (!oracle_p.empty() || !oracle_q.empty())
        throw std::invalid_argument("pass either --gaussian or --p/--q grids, not both");
      l2div::GaussianSpec spec = l2div::GaussianSpec::unit_shift(oracle_d);
      spec.mean2 = Eigen::VectorXd::Constant(oracle_d, oracle_shift);
      spec.variance = oracle_variance;
      const double scale = std::pow(4.0 * std::numbers::pi * oracle_variance, -0.5 * oracle_d);
      const double theta_p = scale;
      const double theta_pq =
          scale * std::exp(-(spec.mean1 - spec.mean2).squaredNorm() / (4.0 * oracle_variance));
      json.add("D", l2div::gaussian_l2(spec));
      json.add("theta_p", theta_p);
      json.add("theta_q", theta_p);
      json.add("theta_pq", theta_pq);
      json.add("d", oracle_d);
      json.add("mean_shift", oracle_shift);
      json.add("variance", oracle_variance);
      if (oracle_d <= 2) {
        const double sd = std::sqrt(oracle_variance);
        const double lo = std::min(0.0, oracle_shift) - 8.0 * sd;
        const double hi = std::max(0.0, oracle_shift) + 8.0 * sd;
        const l2div::Functionals f =
            oracle_d == 1
                ? l2div::quadrature_functionals(
                      l2div::gaussian_grid(0.0, oracle_variance, lo, hi, 8001),
                      l2div::gaussian_grid(oracle_shift, oracle_variance, lo, hi, 8001))
                : l2div::quadrature_functionals(
                      l2div::gaussian_grid_2d(0.0, 0.0, oracle_variance, lo, hi, 801),
                      l2div::gaussian_grid_2d(oracle_shift, oracle_shift, oracle_variance, lo,
                                              hi, 801));
        json.add("sigma2", f.sigma2);
      }
    } else {
      if (oracle_p.empty() || oracle_q.empty())
        throw std::invalid_argument("pass --gaussian, or both --p and --q grid CSVs");
      const l2div::GridDensity p = l2div::read_grid_density_csv(oracle_p);
      const l2div::GridDensity q = l2div::read_grid_density_csv(oracle_q);
      const l2div::Functionals f = l2div::quadrature_functionals(p, q);
      json.add("theta_p", f.theta_p);
      json.add("theta_q", f.theta_q);
      json.add("theta_pq", f.theta_pq);
      json.add("D", f.d);
      json.add("sigma2", f.sigma2);
      json.add("d", p.dim);
    }
    emit(json.str(), oracle_output);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const l2div::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
