#include "l2div/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace l2div {

namespace {

constexpr int kMaxLegendreOrder = 12;

// Monomial coefficients of the Legendre polynomial P_m via the three-term
// recurrence (m+1) P_{m+1} = (2m+1) u P_m - m P_{m-1}. Exact in double for
// the small orders used here.
std::vector<double> legendre_coefficients(int m) {
  std::vector<double> prev{1.0};
  if (m == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int k = 1; k < m; ++k) {
    std::vector<double> next(k + 2, 0.0);
    for (int j = 0; j <= k; ++j) next[j + 1] += (2.0 * k + 1.0) / (k + 1.0) * cur[j];
    for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= static_cast<double>(k) / (k + 1.0) * prev[j];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

// 1-d moment of u^r K(u) over the kernel's support.
double base_moment(const Kernel1D& base, int r, const Quadrature& q) {
  const double radius = base.support_radius();
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double u = radius * q.nodes[i];
    acc += radius * q.weights[i] * std::pow(u, r) * base.eval(u);
  }
  return acc;
}

}  // namespace

Kernel1D make_order_kernel(int order) {
  if (order < 0 || order > kMaxLegendreOrder || order % 2 != 0)
    throw std::invalid_argument("make_order_kernel: order must be even and in [0, 12], got " +
                                std::to_string(order));
  std::vector<double> coeffs(order + 1, 0.0);
  for (int m = 0; m <= order; m += 2) {
    const auto pm = legendre_coefficients(m);
    // phi_m(0) phi_m(u) with phi_m = sqrt((2m+1)/2) P_m
    const double weight = (2.0 * m + 1.0) / 2.0 * pm[0];
    for (std::size_t j = 0; j < pm.size(); ++j) coeffs[j] += weight * pm[j];
  }
  Kernel1D k;
  k.family = KernelFamily::polynomial;
  // the construction is even, so the odd moment order+1 vanishes as well
  k.order = order + 1;
  k.coefficients = std::move(coeffs);
  k.name = order == 0 ? "uniform" : "legendre:" + std::to_string(order);
  return k;
}

Kernel1D uniform_kernel() { return make_order_kernel(0); }

Kernel1D gaussian_kernel() {
  Kernel1D k;
  k.family = KernelFamily::gaussian;
  k.order = 1;
  k.name = "gauss";
  return k;
}

double KernelSpec::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument("kernel eval: expected " + std::to_string(dim) +
                                " coordinates, got " + std::to_string(x.size()));
  double prod = 1.0;
  for (double xi : x) {
    const double f = base.eval(xi);
    if (f == 0.0) return 0.0;
    prod *= f;
  }
  return prod;
}

KernelSpec parse_kernel(const std::string& spec, int dim) {
  if (dim < 1) throw std::invalid_argument("kernel dimension must be positive");
  KernelSpec out;
  out.dim = dim;
  if (spec == "uniform") {
    out.base = uniform_kernel();
  } else if (spec == "gauss") {
    out.base = gaussian_kernel();
  } else if (spec.rfind("legendre:", 0) == 0) {
    const std::string arg = spec.substr(9);
    std::size_t used = 0;
    int order = 0;
    try {
      order = std::stoi(arg, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad kernel order in '" + spec + "'");
    }
    if (used != arg.size()) throw std::invalid_argument("bad kernel order in '" + spec + "'");
    out.base = make_order_kernel(order);
  } else {
    throw std::invalid_argument("unknown kernel '" + spec +
                                "' (expected uniform, gauss, or legendre:<order>)");
  }
  return out;
}

MomentReport check_moments(const KernelSpec& kernel, int max_total_degree) {
  if (kernel.dim > 2)
    throw std::invalid_argument("check_moments supports dim <= 2, got " +
                                std::to_string(kernel.dim));
  if (max_total_degree < 0) throw std::invalid_argument("max_total_degree must be nonnegative");

  const auto q = gauss_legendre(kernel.base.compact_support() ? 48 : 96);

  // cache 1-d moments; product-kernel moments factorize across coordinates
  std::vector<double> m1(max_total_degree + 1);
  for (int r = 0; r <= max_total_degree; ++r) m1[r] = base_moment(kernel.base, r, q);

  MomentReport report;
  for (int total = 0; total <= max_total_degree; ++total) {
    if (kernel.dim == 1) {
      report.entries.push_back({{total}, m1[total]});
    } else {
      for (int r0 = total; r0 >= 0; --r0) report.entries.push_back({{r0, total - r0}, m1[r0] * m1[total - r0]});
    }
  }
  return report;
}

}  // namespace l2div
