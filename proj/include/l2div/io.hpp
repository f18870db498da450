#pragma once

#include <stdexcept>
#include <string>

#include "l2div/estimator.hpp"
#include "l2div/oracle.hpp"

namespace l2div {

// Filesystem-level failures (missing file, unreadable stream). Format and
// validation problems throw std::invalid_argument with a file:line prefix.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric CSV without header by default; `header` skips one leading line.
// Rows must be rectangular; cells accept scientific notation.
Sample read_matrix_csv(const std::string& path, bool header = false);

void write_matrix_csv(const std::string& path, const Sample& matrix);

// GridDensity CSV with header "x,density" (1-d) or "x,y,density" (2-d, the
// y axis varying fastest). The lattice must be uniform and complete; the
// density invariants are checked on load.
GridDensity read_grid_density_csv(const std::string& path);

// Shortest fixed-format float used in all machine-readable output: 17
// significant digits round-trip doubles exactly.
std::string format_g17(double value);

}  // namespace l2div
