#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "l2div/kernel.hpp"

namespace l2div {

// Pair of isotropic gaussians with a shared variance.
struct GaussianSpec {
  int dim = 1;
  Eigen::VectorXd mean1;
  Eigen::VectorXd mean2;
  double variance = 1.0;

  // means (0,...,0) and (1,...,1), unit variance
  static GaussianSpec unit_shift(int d);
};

// Closed-form squared L2 distance between the two gaussians:
//   2 * (4*pi*v)^(-d/2) * (1 - exp(-||mu1 - mu2||^2 / (4v)))
double gaussian_l2(const GaussianSpec& spec);

// Density tabulated on a uniform grid (dim 1 or 2; row-major in 2-d with the
// second axis fastest).
struct GridDensity {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
  std::array<int, 2> npts{0, 0};
  std::vector<double> values;

  double step(int axis) const { return (hi[axis] - lo[axis]) / (npts[axis] - 1); }
  double coord(int axis, int i) const { return lo[axis] + i * step(axis); }
  std::size_t size() const;
};

// Enforces the density invariants: nonnegative values and unit trapezoid
// integral within 1e-6. Applied when loading user-provided grids; internal
// smoothed densities (which may dip negative for higher-order kernels) skip it.
void validate_density(const GridDensity& density);

double trapezoid_integral(const GridDensity& density);

struct Functionals {
  double theta_p = 0.0;
  double theta_q = 0.0;
  double theta_pq = 0.0;
  double d = 0.0;
  double sigma2 = 0.0;
};

// Trapezoid-rule evaluation of the integral functionals of two densities on
// identical grids: theta_p = int p^2, theta_q = int q^2, theta_pq = int p q,
// d = theta_p + theta_q - 2 theta_pq, and
// sigma2 = 4[(int p^3 - theta_p^2) + (int q^3 - theta_q^2)
//            + (int q^2 p - theta_pq^2) + (int p^2 q - theta_pq^2)].
Functionals quadrature_functionals(const GridDensity& p, const GridDensity& q);

// Mean of the kernel density estimate, evaluated on the grid by quadrature
// convolution: pbar(x) = int h^-1 K((x-y)/h) p(y) dy. 1-d only.
GridDensity smoothed_density(const GridDensity& p, const KernelSpec& kernel, double h);

enum class ExpectedTerm { theta_p, theta_pq };

// Sampling-free expectation of the estimator terms,
//   E = int int h^-1 K((x-y)/h) f(y) g(x) dy dx
// with f = g = p for theta_p and f = p, g = q for theta_pq. 1-d only.
double expected_estimate(const GridDensity& p, const GridDensity& q, const KernelSpec& kernel,
                         double h, ExpectedTerm which);

// Gaussian density discretized on [lo, hi]; tails outside the grid are
// dropped, so pick a range wide enough for the stated 1e-6 mass tolerance.
GridDensity gaussian_grid(double mean, double variance, double lo, double hi, int npts);
GridDensity gaussian_grid_2d(double mean0, double mean1, double variance, double lo, double hi,
                             int npts_per_axis);

}  // namespace l2div
