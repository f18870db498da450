#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "l2div/inference.hpp"
#include "l2div/io.hpp"
#include "l2div/simulate.hpp"

namespace py = pybind11;

namespace {

l2div::EstimatorConfig make_config(int beta, const std::string& kernel, bool split,
                                   std::optional<double> bandwidth, double scale, int dim) {
  l2div::EstimatorConfig cfg;
  cfg.beta = beta;
  cfg.split = split;
  cfg.bandwidth_override = bandwidth;
  cfg.bandwidth_scale = scale;
  cfg.kernel = l2div::parse_kernel(kernel, dim);
  return cfg;
}

l2div::BandwidthRule parse_rule(const std::string& rule) {
  if (rule == "divergence") return l2div::BandwidthRule::divergence;
  if (rule == "density") return l2div::BandwidthRule::density;
  throw std::invalid_argument("rule must be 'divergence' or 'density'");
}

}  // namespace

PYBIND11_MODULE(_l2div, m) {
  m.doc() = "Kernel U-statistic estimation of the squared L2 divergence";

  py::class_<l2div::DivergenceEstimate>(m, "DivergenceEstimate")
      .def_readonly("d_hat", &l2div::DivergenceEstimate::d_hat)
      .def_readonly("theta_p", &l2div::DivergenceEstimate::theta_p)
      .def_readonly("theta_q", &l2div::DivergenceEstimate::theta_q)
      .def_readonly("theta_pq", &l2div::DivergenceEstimate::theta_pq)
      .def_readonly("h", &l2div::DivergenceEstimate::h)
      .def_readonly("n_per_term", &l2div::DivergenceEstimate::n_per_term)
      .def_readonly("split", &l2div::DivergenceEstimate::split)
      .def("__repr__", [](const l2div::DivergenceEstimate& e) {
        return "DivergenceEstimate(d_hat=" + l2div::format_g17(e.d_hat) +
               ", h=" + l2div::format_g17(e.h) + ")";
      });

  py::class_<l2div::VarianceEstimate>(m, "VarianceEstimate")
      .def_readonly("sigma2_hat", &l2div::VarianceEstimate::sigma2_hat)
      .def_readonly("h_density", &l2div::VarianceEstimate::h_density)
      .def_readonly("n_used", &l2div::VarianceEstimate::n_used)
      .def_readonly("clamped", &l2div::VarianceEstimate::clamped)
      .def_property_readonly("form", [](const l2div::VarianceEstimate& v) {
        return v.form == l2div::VarianceForm::empirical_moment ? "empirical-moment"
                                                               : "quadrature";
      });

  py::class_<l2div::ConfidenceInterval>(m, "ConfidenceInterval")
      .def_readonly("lo", &l2div::ConfidenceInterval::lo)
      .def_readonly("hi", &l2div::ConfidenceInterval::hi)
      .def_readonly("alpha", &l2div::ConfidenceInterval::alpha)
      .def_readonly("z", &l2div::ConfidenceInterval::z)
      .def_readonly("d_hat", &l2div::ConfidenceInterval::d_hat)
      .def_readonly("sigma_hat", &l2div::ConfidenceInterval::sigma_hat)
      .def_readonly("n", &l2div::ConfidenceInterval::n);

  py::class_<l2div::PermutationResult>(m, "PermutationResult")
      .def_readonly("statistic", &l2div::PermutationResult::statistic)
      .def_readonly("p_value", &l2div::PermutationResult::p_value)
      .def_readonly("replicates", &l2div::PermutationResult::replicates)
      .def_readonly("seed", &l2div::PermutationResult::seed)
      .def_readonly("reject", &l2div::PermutationResult::reject)
      .def_readonly("alpha", &l2div::PermutationResult::alpha);

  m.def(
      "bandwidth",
      [](std::int64_t n, int d, int beta, const std::string& rule, double scale) {
        return l2div::bandwidth(n, d, beta, parse_rule(rule), scale);
      },
      py::arg("n"), py::arg("d"), py::arg("beta") = 1, py::arg("rule") = "divergence",
      py::arg("scale") = 1.0);

  m.def(
      "eval_kernel",
      [](const std::string& kernel, const std::vector<double>& x) {
        return l2div::parse_kernel(kernel, static_cast<int>(x.size()))
            .eval(std::span<const double>(x));
      },
      py::arg("kernel"), py::arg("x"));

  m.def(
      "kernel_moments",
      [](const std::string& kernel, int dim, int max_total_degree) {
        std::vector<std::pair<std::vector<int>, double>> out;
        for (const auto& e : l2div::check_moments(l2div::parse_kernel(kernel, dim),
                                                  max_total_degree)
                                 .entries)
          out.emplace_back(e.powers, e.value);
        return out;
      },
      py::arg("kernel"), py::arg("dim") = 1, py::arg("max_total_degree") = 2);

  m.def(
      "quadratic_term",
      [](const l2div::Sample& x, const std::string& kernel, double h) {
        return l2div::quadratic_term(x, l2div::parse_kernel(kernel, static_cast<int>(x.cols())),
                                     h);
      },
      py::arg("x"), py::arg("kernel"), py::arg("h"));

  m.def(
      "bilinear_term",
      [](const l2div::Sample& x, const l2div::Sample& y, const std::string& kernel, double h) {
        return l2div::bilinear_term(x, y,
                                    l2div::parse_kernel(kernel, static_cast<int>(x.cols())), h);
      },
      py::arg("x"), py::arg("y"), py::arg("kernel"), py::arg("h"));

  m.def(
      "l2_divergence",
      [](const l2div::Sample& x, const l2div::Sample& y, int beta, const std::string& kernel,
         bool split, std::optional<double> bandwidth, double scale) {
        return l2div::l2_divergence(
            x, y, make_config(beta, kernel, split, bandwidth, scale, static_cast<int>(x.cols())));
      },
      py::arg("x"), py::arg("y"), py::arg("beta") = 1, py::arg("kernel") = "gauss",
      py::arg("split") = true, py::arg("bandwidth") = std::nullopt, py::arg("scale") = 1.0);

  m.def(
      "kde",
      [](const l2div::Sample& train, const Eigen::VectorXd& x, const std::string& kernel,
         double h) {
        return l2div::kde(train, x, l2div::parse_kernel(kernel, static_cast<int>(train.cols())),
                          h);
      },
      py::arg("train"), py::arg("x"), py::arg("kernel"), py::arg("h"));

  m.def("normal_quantile", &l2div::normal_quantile, py::arg("p"));
  m.def("normal_cdf", &l2div::normal_cdf, py::arg("z"));

  m.def(
      "variance_plugin",
      [](const l2div::Sample& x, const l2div::Sample& y, int beta, const std::string& kernel,
         double scale) {
        return l2div::variance_plugin(
            x, y, beta, l2div::parse_kernel(kernel, static_cast<int>(x.cols())), scale);
      },
      py::arg("x"), py::arg("y"), py::arg("beta") = 1, py::arg("kernel") = "legendre:2",
      py::arg("scale") = 1.0);

  m.def("confidence_interval", &l2div::confidence_interval, py::arg("d_hat"),
        py::arg("sigma_hat"), py::arg("n"), py::arg("alpha") = 0.10);

  m.def(
      "permutation_test",
      [](const l2div::Sample& x, const l2div::Sample& y, int replicates, double alpha,
         std::int64_t seed, int beta, const std::string& kernel, double scale) {
        return l2div::permutation_test(
            x, y, make_config(beta, kernel, false, std::nullopt, scale,
                              static_cast<int>(x.cols())),
            replicates, alpha, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("replicates") = 199, py::arg("alpha") = 0.05,
      py::arg("seed") = 0, py::arg("beta") = 1, py::arg("kernel") = "gauss",
      py::arg("scale") = 1.0);

  m.def(
      "gaussian_l2",
      [](const Eigen::VectorXd& mean1, const Eigen::VectorXd& mean2, double variance) {
        l2div::GaussianSpec spec;
        spec.dim = static_cast<int>(mean1.size());
        spec.mean1 = mean1;
        spec.mean2 = mean2;
        spec.variance = variance;
        return l2div::gaussian_l2(spec);
      },
      py::arg("mean1"), py::arg("mean2"), py::arg("variance") = 1.0);

  m.def(
      "sample_gaussian",
      [](const Eigen::VectorXd& mean, double variance, std::int64_t n, std::int64_t seed,
         int stream) {
        l2div::GaussianSpec spec;
        spec.dim = static_cast<int>(mean.size());
        spec.mean1 = mean;
        spec.mean2 = mean;
        spec.variance = variance;
        return l2div::sample_gaussian(spec, stream == 0 ? l2div::Which::first
                                                        : l2div::Which::second,
                                      n, seed);
      },
      py::arg("mean"), py::arg("variance"), py::arg("n"), py::arg("seed"),
      py::arg("stream") = 0);
}
