#include "l2div/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace l2div {

namespace {

struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

void check_grid(const GridDensity& g, const char* what) {
  if (g.dim != 1 && g.dim != 2)
    throw std::invalid_argument(std::string(what) + ": dim must be 1 or 2");
  for (int axis = 0; axis < g.dim; ++axis) {
    if (g.npts[axis] < 2)
      throw std::invalid_argument(std::string(what) + ": need at least 2 grid points per axis");
    if (!(g.hi[axis] > g.lo[axis]))
      throw std::invalid_argument(std::string(what) + ": grid bounds must satisfy lo < hi");
  }
  if (g.values.size() != g.size())
    throw std::invalid_argument(std::string(what) + ": value count does not match grid");
}

void check_same_grid(const GridDensity& p, const GridDensity& q, const char* what) {
  if (p.dim != q.dim || p.npts != q.npts || p.lo != q.lo || p.hi != q.hi)
    throw std::invalid_argument(std::string(what) + ": densities must share one grid");
}

double trapezoid_weight(const GridDensity& g, std::size_t flat) {
  if (g.dim == 1) {
    const int i = static_cast<int>(flat);
    return g.step(0) * ((i == 0 || i == g.npts[0] - 1) ? 0.5 : 1.0);
  }
  const int i0 = static_cast<int>(flat) / g.npts[1];
  const int i1 = static_cast<int>(flat) % g.npts[1];
  return g.step(0) * ((i0 == 0 || i0 == g.npts[0] - 1) ? 0.5 : 1.0) * g.step(1) *
         ((i1 == 0 || i1 == g.npts[1] - 1) ? 0.5 : 1.0);
}

// integral of w(x) f(values at x) over the grid
template <typename F>
double trapz(const GridDensity& g, F&& term) {
  Kahan acc;
  for (std::size_t i = 0; i < g.values.size(); ++i) acc.add(trapezoid_weight(g, i) * term(i));
  return acc.sum;
}

}  // namespace

GaussianSpec GaussianSpec::unit_shift(int d) {
  GaussianSpec spec;
  spec.dim = d;
  spec.mean1 = Eigen::VectorXd::Zero(d);
  spec.mean2 = Eigen::VectorXd::Ones(d);
  spec.variance = 1.0;
  return spec;
}

double gaussian_l2(const GaussianSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("gaussian_l2: dim must be positive");
  if (spec.mean1.size() != spec.dim || spec.mean2.size() != spec.dim)
    throw std::invalid_argument("gaussian_l2: mean dimensions do not match");
  if (!(spec.variance > 0.0)) throw std::invalid_argument("gaussian_l2: variance must be positive");

  const double shift2 = (spec.mean1 - spec.mean2).squaredNorm();
  const double scale = std::pow(4.0 * std::numbers::pi * spec.variance, -0.5 * spec.dim);
  return 2.0 * scale * (1.0 - std::exp(-shift2 / (4.0 * spec.variance)));
}

std::size_t GridDensity::size() const {
  return static_cast<std::size_t>(npts[0]) * (dim == 2 ? static_cast<std::size_t>(npts[1]) : 1u);
}

double trapezoid_integral(const GridDensity& density) {
  check_grid(density, "trapezoid_integral");
  return trapz(density, [&](std::size_t i) { return density.values[i]; });
}

void validate_density(const GridDensity& density) {
  check_grid(density, "grid density");
  for (double v : density.values)
    if (!(v >= 0.0)) throw std::invalid_argument("grid density: values must be nonnegative");
  const double mass = trapezoid_integral(density);
  if (std::abs(mass - 1.0) > 1e-6)
    throw std::invalid_argument("grid density: trapezoid integral is " + std::to_string(mass) +
                                ", expected 1 within 1e-6");
}

Functionals quadrature_functionals(const GridDensity& p, const GridDensity& q) {
  check_grid(p, "quadrature_functionals");
  check_grid(q, "quadrature_functionals");
  check_same_grid(p, q, "quadrature_functionals");

  const auto& pv = p.values;
  const auto& qv = q.values;
  Functionals f;
  f.theta_p = trapz(p, [&](std::size_t i) { return pv[i] * pv[i]; });
  f.theta_q = trapz(p, [&](std::size_t i) { return qv[i] * qv[i]; });
  f.theta_pq = trapz(p, [&](std::size_t i) { return pv[i] * qv[i]; });
  f.d = f.theta_p + f.theta_q - 2.0 * f.theta_pq;

  const double ip3 = trapz(p, [&](std::size_t i) { return pv[i] * pv[i] * pv[i]; });
  const double iq3 = trapz(p, [&](std::size_t i) { return qv[i] * qv[i] * qv[i]; });
  const double iq2p = trapz(p, [&](std::size_t i) { return qv[i] * qv[i] * pv[i]; });
  const double ip2q = trapz(p, [&](std::size_t i) { return pv[i] * pv[i] * qv[i]; });
  f.sigma2 = 4.0 * ((ip3 - f.theta_p * f.theta_p) + (iq3 - f.theta_q * f.theta_q) +
                    (iq2p - f.theta_pq * f.theta_pq) + (ip2q - f.theta_pq * f.theta_pq));
  return f;
}

GridDensity smoothed_density(const GridDensity& p, const KernelSpec& kernel, double h) {
  check_grid(p, "smoothed_density");
  if (p.dim != 1) throw std::invalid_argument("smoothed_density: supported for d = 1 only");
  if (kernel.dim != 1) throw std::invalid_argument("smoothed_density: kernel must be 1-d");
  if (!(h > 0.0)) throw std::invalid_argument("smoothed_density: bandwidth must be positive");

  const int n = p.npts[0];
  const double step = p.step(0);
  const double window = kernel.base.support_radius() * h * (1.0 + 1e-12);
  const int reach = static_cast<int>(window / step) + 1;

  GridDensity out = p;
  for (int i = 0; i < n; ++i) {
    const double x = p.coord(0, i);
    const int jlo = std::max(0, i - reach);
    const int jhi = std::min(n - 1, i + reach);
    Kahan acc;
    for (int j = jlo; j <= jhi; ++j) {
      const double w = step * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
      acc.add(w * kernel.base.eval((x - p.coord(0, j)) / h) * p.values[j]);
    }
    out.values[static_cast<std::size_t>(i)] = acc.sum / h;
  }
  return out;
}

double expected_estimate(const GridDensity& p, const GridDensity& q, const KernelSpec& kernel,
                         double h, ExpectedTerm which) {
  check_grid(p, "expected_estimate");
  check_grid(q, "expected_estimate");
  check_same_grid(p, q, "expected_estimate");
  if (p.dim != 1) throw std::invalid_argument("expected_estimate: supported for d = 1 only");

  // E = int g(x) [int h^-1 K((x-y)/h) f(y) dy] dx
  const GridDensity& f = p;
  const GridDensity& g = which == ExpectedTerm::theta_p ? p : q;
  const GridDensity conv = smoothed_density(f, kernel, h);
  return trapz(g, [&](std::size_t i) { return g.values[i] * conv.values[i]; });
}

GridDensity gaussian_grid(double mean, double variance, double lo, double hi, int npts) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_grid: variance must be positive");
  if (npts < 2) throw std::invalid_argument("gaussian_grid: need at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("gaussian_grid: need lo < hi");

  GridDensity g;
  g.dim = 1;
  g.lo = {lo, 0.0};
  g.hi = {hi, 0.0};
  g.npts = {npts, 0};
  g.values.resize(static_cast<std::size_t>(npts));
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * variance);
  for (int i = 0; i < npts; ++i) {
    const double x = g.coord(0, i) - mean;
    g.values[static_cast<std::size_t>(i)] = norm * std::exp(-x * x / (2.0 * variance));
  }
  return g;
}

GridDensity gaussian_grid_2d(double mean0, double mean1, double variance, double lo, double hi,
                             int npts_per_axis) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_grid: variance must be positive");
  if (npts_per_axis < 2) throw std::invalid_argument("gaussian_grid: need at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("gaussian_grid: need lo < hi");

  GridDensity g;
  g.dim = 2;
  g.lo = {lo, lo};
  g.hi = {hi, hi};
  g.npts = {npts_per_axis, npts_per_axis};
  g.values.resize(g.size());
  const double norm = 1.0 / (2.0 * std::numbers::pi * variance);
  std::size_t r = 0;
  for (int i = 0; i < npts_per_axis; ++i) {
    const double dx = g.coord(0, i) - mean0;
    for (int j = 0; j < npts_per_axis; ++j, ++r) {
      const double dy = g.coord(1, j) - mean1;
      g.values[r] = norm * std::exp(-(dx * dx + dy * dy) / (2.0 * variance));
    }
  }
  return g;
}

}  // namespace l2div
