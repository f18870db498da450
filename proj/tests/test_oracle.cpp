#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "l2div/estimator.hpp"
#include "l2div/io.hpp"
#include "l2div/oracle.hpp"
#include "l2div/simulate.hpp"

using namespace l2div;

namespace {

GridDensity uniform_density01(int npts) {
  GridDensity g;
  g.dim = 1;
  g.lo = {0.0, 0.0};
  g.hi = {1.0, 0.0};
  g.npts = {npts, 0};
  g.values.assign(static_cast<std::size_t>(npts), 1.0);
  return g;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("closed-form gaussian distance") {
  CHECK(gaussian_l2(GaussianSpec::unit_shift(1)) ==
        doctest::Approx(0.12479829408003389).epsilon(1e-12));
  CHECK(gaussian_l2(GaussianSpec::unit_shift(2)) ==
        doctest::Approx(0.062622590461841428).epsilon(1e-12));
  CHECK(gaussian_l2(GaussianSpec::unit_shift(3)) ==
        doctest::Approx(0.023689043082555505).epsilon(1e-12));

  GaussianSpec same = GaussianSpec::unit_shift(2);
  same.mean2 = same.mean1;
  CHECK(gaussian_l2(same) == 0.0);
}

TEST_CASE("gaussian distance symmetries") {
  GaussianSpec spec = GaussianSpec::unit_shift(3);
  spec.mean1 << 0.2, -1.0, 4.0;
  spec.mean2 << 1.5, 0.0, 3.0;
  spec.variance = 0.7;
  GaussianSpec swapped = spec;
  std::swap(swapped.mean1, swapped.mean2);
  CHECK(gaussian_l2(spec) == gaussian_l2(swapped));

  GaussianSpec shifted = spec;
  shifted.mean1.array() += 11.0;
  shifted.mean2.array() += 11.0;
  CHECK(gaussian_l2(shifted) == doctest::Approx(gaussian_l2(spec)).epsilon(1e-14));
}

TEST_CASE("functionals of identical densities") {
  const GridDensity p = gaussian_grid(0.0, 1.0, -6.0, 6.0, 2001);
  const Functionals f = quadrature_functionals(p, p);
  CHECK(f.d == 0.0);
  CHECK(f.theta_p == f.theta_pq);
  CHECK(f.theta_p == doctest::Approx(0.28209479177387814).epsilon(1e-6));
}

TEST_CASE("functionals of the uniform density") {
  const GridDensity p = uniform_density01(4001);
  validate_density(p);
  const Functionals f = quadrature_functionals(p, p);
  CHECK(f.theta_p == doctest::Approx(1.0).epsilon(1e-12));
  // Var_{x~p}(p(x)) = int p^3 - theta_p^2 = 0 for a constant density
  CHECK(std::abs(f.sigma2) < 1e-9);
}

TEST_CASE("quadrature matches the closed form on the experimental setup") {
  const GridDensity p = gaussian_grid(0.0, 1.0, -6.0, 7.0, 4001);
  const GridDensity q = gaussian_grid(1.0, 1.0, -6.0, 7.0, 4001);
  const Functionals f = quadrature_functionals(p, q);
  const double truth = gaussian_l2(GaussianSpec::unit_shift(1));
  CHECK(std::abs(f.d - truth) < 1e-4);
  CHECK(f.d >= 0.0);
  CHECK(f.sigma2 > 0.0);
  // independently computed with adaptive quadrature
  CHECK(f.sigma2 == doctest::Approx(0.23908189899962756).epsilon(1e-4));

  // grid refinement moves every functional by less than 1e-5
  const GridDensity p2 = gaussian_grid(0.0, 1.0, -6.0, 7.0, 8001);
  const GridDensity q2 = gaussian_grid(1.0, 1.0, -6.0, 7.0, 8001);
  const Functionals f2 = quadrature_functionals(p2, q2);
  CHECK(std::abs(f2.d - f.d) < 1e-5);
  CHECK(std::abs(f2.theta_p - f.theta_p) < 1e-5);
  CHECK(std::abs(f2.sigma2 - f.sigma2) < 1e-5);
}

TEST_CASE("functionals reject mismatched grids") {
  const GridDensity p = gaussian_grid(0.0, 1.0, -6.0, 6.0, 101);
  const GridDensity q = gaussian_grid(0.0, 1.0, -6.0, 6.0, 201);
  CHECK_THROWS_AS(quadrature_functionals(p, q), std::invalid_argument);
}

TEST_CASE("smoothing with a tiny bandwidth is nearly the identity") {
  // grid step well below h so the discrete convolution resolves the kernel
  const GridDensity p = gaussian_grid(0.0, 1.0, -8.0, 8.0, 160001);
  const GridDensity pbar = smoothed_density(p, parse_kernel("gauss", 1), 1e-3);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i)
    max_dev = std::max(max_dev, std::abs(pbar.values[i] - p.values[i]));
  CHECK(max_dev < 1e-3);
}

TEST_CASE("smoothing a constant plateau keeps interior values") {
  const GridDensity p = uniform_density01(8001);
  const double h = 0.1;
  const GridDensity pbar = smoothed_density(p, parse_kernel("uniform", 1), h);
  for (int i = 0; i < p.npts[0]; ++i) {
    const double x = p.coord(0, i);
    if (x > h * 1.5 && x < 1.0 - h * 1.5)
      CHECK(pbar.values[static_cast<std::size_t>(i)] == doctest::Approx(1.0).epsilon(2e-3));
  }
}

TEST_CASE("smoothing bias shrinks quadratically for a second-order base") {
  const GridDensity p = gaussian_grid(0.0, 1.0, -8.0, 8.0, 3201);
  const KernelSpec k = parse_kernel("gauss", 1);
  std::vector<double> hs{0.4, 0.2, 0.1}, l1;
  for (double h : hs) {
    const GridDensity pbar = smoothed_density(p, k, h);
    GridDensity diff = p;
    for (std::size_t i = 0; i < diff.values.size(); ++i)
      diff.values[i] = std::abs(pbar.values[i] - p.values[i]);
    l1.push_back(trapezoid_integral(diff));
  }
  const double slope = loglog_slope(hs, l1);
  CHECK(slope > 1.6);
  CHECK(slope < 2.4);
}

TEST_CASE("higher-order projection kernels carry less integrated bias") {
  // dense grid: the projection kernel's support edge limits the quadrature
  // below ~1e-4 here, well under the second-order kernel's true h^2 bias
  const GridDensity p = gaussian_grid(0.0, 1.0, -8.0, 8.0, 16001);
  const double h = 0.2;
  const double theta_p = quadrature_functionals(p, p).theta_p;
  auto bias = [&](const char* kernel) {
    return std::abs(
        expected_estimate(p, p, parse_kernel(kernel, 1), h, ExpectedTerm::theta_p) - theta_p);
  };
  CHECK(bias("legendre:2") < 0.25 * bias("gauss"));
}

TEST_CASE("expected estimate matches its gaussian closed form") {
  // with a gaussian base, E[theta_p estimator] = 1/sqrt(2 pi (2 + h^2))
  const GridDensity p = gaussian_grid(0.0, 1.0, -8.0, 8.0, 8001);
  const KernelSpec k = parse_kernel("gauss", 1);
  for (double h : {0.4, 0.1}) {
    const double expect = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * (2.0 + h * h));
    CHECK(expected_estimate(p, p, k, h, ExpectedTerm::theta_p) ==
          doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("expected-estimate bias scales as h^2 for a second-order base") {
  const GridDensity p = gaussian_grid(0.0, 1.0, -8.0, 8.0, 3201);
  const KernelSpec k = parse_kernel("gauss", 1);
  const double theta_p = quadrature_functionals(p, p).theta_p;
  std::vector<double> hs{0.4, 0.2, 0.1, 0.05}, bias;
  for (double h : hs)
    bias.push_back(std::abs(expected_estimate(p, p, k, h, ExpectedTerm::theta_p) - theta_p));
  const double slope = loglog_slope(hs, bias);
  CHECK(slope > 1.6);
  CHECK(slope < 2.4);
}

TEST_CASE("smoothed variance functionals approach the raw ones") {
  // sigma-bar^2: the variance functionals with the smoothed densities
  // substituted, reached by composing smoothed_density with
  // quadrature_functionals; it converges to sigma^2 as h shrinks
  const GridDensity p = gaussian_grid(0.0, 1.0, -8.0, 9.0, 8001);
  const GridDensity q = gaussian_grid(1.0, 1.0, -8.0, 9.0, 8001);
  const double sigma2 = quadrature_functionals(p, q).sigma2;
  const KernelSpec k = parse_kernel("gauss", 1);
  auto sigma_bar2 = [&](double h) {
    return quadrature_functionals(smoothed_density(p, k, h), smoothed_density(q, k, h)).sigma2;
  };
  CHECK(std::abs(sigma_bar2(0.05) - sigma2) < 0.01 * sigma2);
  CHECK(std::abs(sigma_bar2(0.4) - sigma2) > std::abs(sigma_bar2(0.1) - sigma2));
}

TEST_CASE("expected estimate of identical densities coincides across terms") {
  const GridDensity p = gaussian_grid(0.0, 1.0, -6.0, 6.0, 2001);
  const double a = expected_estimate(p, p, parse_kernel("legendre:2", 1), 0.3,
                                     ExpectedTerm::theta_p);
  const double b = expected_estimate(p, p, parse_kernel("legendre:2", 1), 0.3,
                                     ExpectedTerm::theta_pq);
  CHECK(a == b);
}

TEST_CASE("expected estimate of the uniform density approaches one") {
  const GridDensity p = uniform_density01(8001);
  const double e = expected_estimate(p, p, parse_kernel("uniform", 1), 0.01,
                                     ExpectedTerm::theta_p);
  CHECK(std::abs(e - 1.0) < 0.05);
}

TEST_CASE("expected estimate agrees with a Monte Carlo average") {
  const GridDensity pg = gaussian_grid(0.0, 1.0, -8.0, 8.0, 4001);
  const KernelSpec k = parse_kernel("gauss", 1);
  const double h = 0.2;
  const double expect = expected_estimate(pg, pg, k, h, ExpectedTerm::theta_p);

  const GaussianSpec spec = GaussianSpec::unit_shift(1);
  const int trials = 2000;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Sample x = sample_gaussian(spec, Which::first, 100, 1000 + t);
    const double v = quadratic_term(x, k, h);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sumsq / trials - mean * mean) / trials);
  CHECK(std::abs(mean - expect) < 3.0 * se);
}

TEST_CASE("smoothing and expectation reject unsupported dimensions") {
  const GridDensity p2 = gaussian_grid_2d(0.0, 0.0, 1.0, -6.0, 6.0, 101);
  CHECK_THROWS_AS(smoothed_density(p2, parse_kernel("uniform", 1), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(expected_estimate(p2, p2, parse_kernel("uniform", 1), 0.1,
                                    ExpectedTerm::theta_p),
                  std::invalid_argument);
}

TEST_CASE("2-d quadrature matches the closed form") {
  const GridDensity p = gaussian_grid_2d(0.0, 0.0, 1.0, -6.0, 7.0, 401);
  const GridDensity q = gaussian_grid_2d(1.0, 1.0, 1.0, -6.0, 7.0, 401);
  const Functionals f = quadrature_functionals(p, q);
  CHECK(std::abs(f.d - gaussian_l2(GaussianSpec::unit_shift(2))) < 1e-3);
  CHECK(f.sigma2 > 0.0);
}

TEST_CASE("gaussian grids are valid densities") {
  const GridDensity g = gaussian_grid(0.0, 1.0, -7.0, 7.0, 1001);
  validate_density(g);
  CHECK(trapezoid_integral(g) == doctest::Approx(1.0).epsilon(1e-7));
  const GridDensity g2 = gaussian_grid_2d(0.5, -0.5, 2.0, -12.0, 12.0, 301);
  validate_density(g2);
}

TEST_CASE("density invariants are enforced") {
  GridDensity bad = uniform_density01(101);
  bad.values[3] = -0.5;
  CHECK_THROWS_AS(validate_density(bad), std::invalid_argument);
  GridDensity off = uniform_density01(101);
  for (auto& v : off.values) v = 1.5;
  CHECK_THROWS_AS(validate_density(off), std::invalid_argument);
}

TEST_CASE("grid density CSV round trip") {
  const auto path = temp_file("l2div_grid_test.csv");
  {
    const GridDensity g = gaussian_grid(0.0, 1.0, -6.0, 6.0, 501);
    std::ofstream out(path);
    out << "x,density\n";
    for (int i = 0; i < g.npts[0]; ++i)
      out << format_g17(g.coord(0, i)) << ',' << format_g17(g.values[static_cast<std::size_t>(i)])
          << '\n';
  }
  const GridDensity loaded = read_grid_density_csv(path.string());
  CHECK(loaded.dim == 1);
  CHECK(loaded.npts[0] == 501);
  CHECK(loaded.lo[0] == -6.0);
  CHECK(loaded.hi[0] == 6.0);
  CHECK(loaded.values[250] == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("grid density CSV problems are reported") {
  const auto path = temp_file("l2div_grid_bad.csv");
  {
    std::ofstream out(path);
    out << "x,density\n0,1\n0.5,1\n1.7,1\n";  // non-uniform spacing
  }
  CHECK_THROWS_AS(read_grid_density_csv(path.string()), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "density\n1\n";  // wrong header
  }
  CHECK_THROWS_AS(read_grid_density_csv(path.string()), std::invalid_argument);
  CHECK_THROWS_AS(read_grid_density_csv("/nonexistent/l2div.csv"), io_error);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
