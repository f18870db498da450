#pragma once

// Independent reference implementations of the pair sums: plain nested loops
// over every ordered pair, no sorting, no pruning, no compensated summation.
// These are the oracles the optimized estimator paths are checked against.

#include <cmath>

#include "l2div/estimator.hpp"

namespace reference {

inline double kernel_at(const l2div::KernelSpec& kernel, const l2div::Sample& a,
                        Eigen::Index i, const l2div::Sample& b, Eigen::Index j, double h) {
  double prod = 1.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) prod *= kernel.base.eval((a(i, c) - b(j, c)) / h);
  return prod;
}

inline double quadratic_term(const l2div::Sample& x, const l2div::KernelSpec& kernel, double h) {
  const Eigen::Index n = x.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      sum += kernel_at(kernel, x, i, x, j, h);
    }
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1) *
                std::pow(h, static_cast<int>(x.cols())));
}

inline double bilinear_term(const l2div::Sample& x, const l2div::Sample& y,
                            const l2div::KernelSpec& kernel, double h) {
  const Eigen::Index n = x.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) sum += kernel_at(kernel, x, i, y, j, h);
  return sum / (static_cast<double>(n) * static_cast<double>(n) *
                std::pow(h, static_cast<int>(x.cols())));
}

}  // namespace reference
