#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace l2div {

enum class KernelFamily { polynomial, gaussian };

namespace detail {
// factor < 4e-17 beyond this; truncating there keeps pair sums prunable
// without visible effect at the tolerances this library works to
inline constexpr double kGaussCut = 8.6;
inline constexpr double kGaussNorm = 0.3989422804014326779;  // 1/sqrt(2*pi)
}  // namespace detail

// Symmetric 1-d smoothing kernel. Polynomial kernels live on (-1,1) and are
// stored by their monomial coefficients (odd entries are exactly zero). The
// gaussian base is the standard normal density; it violates the
// compact-support/vanishing-moment requirements but is kept as an option
// because it is common practice for estimation on smooth densities.
struct Kernel1D {
  KernelFamily family = KernelFamily::polynomial;
  // highest monomial moment that vanishes: integral of u^r K(u) du = 0 for
  // all 1 <= r <= order
  int order = 1;
  // monomial-basis coefficients on (-1,1); empty for the gaussian family
  std::vector<double> coefficients;
  std::string name = "uniform";

  double eval(double u) const {
    if (family == KernelFamily::gaussian) {
      if (std::abs(u) >= detail::kGaussCut) return 0.0;
      return detail::kGaussNorm * std::exp(-0.5 * u * u);
    }
    if (std::abs(u) >= 1.0) return 0.0;
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * u + *it;
    return acc;
  }

  // radius beyond which eval() is exactly zero; used to prune pair sums
  double support_radius() const {
    return family == KernelFamily::gaussian ? detail::kGaussCut : 1.0;
  }

  bool compact_support() const { return family == KernelFamily::polynomial; }

  // true when the base fails the compact-support / vanishing-moment
  // requirements (the gaussian base)
  bool assumption_violating() const { return family == KernelFamily::gaussian; }
};

// Projection kernel over the orthonormal Legendre polynomials on [-1,1]:
// K(u) = sum_{m=0}^{order} phi_m(0) phi_m(u). All monomial moments of degree
// 1..order (and order+1, by symmetry) vanish exactly. `order` must be even
// and at most 12; beyond that the coefficients are too ill-conditioned in
// double precision.
Kernel1D make_order_kernel(int order);

Kernel1D uniform_kernel();
Kernel1D gaussian_kernel();

// Product kernel over `dim` coordinates.
struct KernelSpec {
  Kernel1D base;
  int dim = 1;

  double eval(std::span<const double> x) const;
  const std::string& name() const { return base.name; }
};

// Kernel specification strings: "uniform", "gauss", "legendre:<order>".
KernelSpec parse_kernel(const std::string& spec, int dim);

struct MomentEntry {
  std::vector<int> powers;  // one entry per coordinate
  double value;
};

struct MomentReport {
  std::vector<MomentEntry> entries;  // normalization (all powers 0) first
};

// Mixed monomial moments of the product kernel for every multi-index with
// total degree <= max_total_degree, by fixed-order Gauss-Legendre quadrature
// per axis. Supported for dim <= 2.
MomentReport check_moments(const KernelSpec& kernel, int max_total_degree);

}  // namespace l2div
