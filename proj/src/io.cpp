#include "l2div/io.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <vector>

namespace l2div {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_cell(const std::string& cell, const std::string& path, int line_no) {
  const std::string loc = path + ":" + std::to_string(line_no);
  if (cell.empty()) throw std::invalid_argument(loc + ": empty cell");
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size())
    throw std::invalid_argument(loc + ": cannot parse '" + cell + "' as a number");
  if (!std::isfinite(v))
    throw std::invalid_argument(loc + ": non-finite value '" + cell + "'");
  return v;
}

struct RawCsv {
  std::vector<std::vector<double>> rows;
  int cols = 0;
};

RawCsv read_numeric_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");

  RawCsv raw;
  std::string line;
  int line_no = 0;
  bool skip_header = header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (skip_header) {
      skip_header = false;
      continue;
    }
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& cell : fields) row.push_back(parse_cell(cell, path, line_no));
    if (raw.rows.empty()) {
      raw.cols = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != raw.cols) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(raw.cols) + " columns, got " +
                                  std::to_string(row.size()));
    }
    raw.rows.push_back(std::move(row));
  }
  if (in.bad()) throw io_error("error while reading '" + path + "'");
  if (raw.rows.empty()) throw std::invalid_argument(path + ": no data rows");
  return raw;
}

}  // namespace

Sample read_matrix_csv(const std::string& path, bool header) {
  const RawCsv raw = read_numeric_csv(path, header);
  Sample m(static_cast<Eigen::Index>(raw.rows.size()), raw.cols);
  for (std::size_t i = 0; i < raw.rows.size(); ++i)
    for (int j = 0; j < raw.cols; ++j) m(static_cast<Eigen::Index>(i), j) = raw.rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const Sample& matrix) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_g17(matrix(i, j));
    }
    out << '\n';
  }
  if (!out) throw io_error("error while writing '" + path + "'");
}

GridDensity read_grid_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument(path + ": missing header");
  std::string squashed;
  for (char ch : header)
    if (ch != ' ' && ch != '\t' && ch != '\r')
      squashed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  int dim = 0;
  if (squashed == "x,density") {
    dim = 1;
  } else if (squashed == "x,y,density") {
    dim = 2;
  } else {
    throw std::invalid_argument(path + ":1: header must be 'x,density' or 'x,y,density'");
  }
  in.close();

  const RawCsv raw = read_numeric_csv(path, /*header=*/true);
  if (raw.cols != dim + 1)
    throw std::invalid_argument(path + ": expected " + std::to_string(dim + 1) + " columns");

  const auto check_uniform = [&](const std::vector<double>& xs, const char* axis) {
    const double step = xs[1] - xs[0];
    if (!(step > 0.0))
      throw std::invalid_argument(path + ": " + axis + " coordinates must increase");
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double s = xs[i] - xs[i - 1];
      if (std::abs(s - step) > 1e-9 * std::max(std::abs(step), 1.0))
        throw std::invalid_argument(path + ": non-uniform " + std::string(axis) + " grid");
    }
  };

  GridDensity g;
  g.dim = dim;
  if (dim == 1) {
    std::vector<double> xs(raw.rows.size());
    g.values.resize(raw.rows.size());
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
      xs[i] = raw.rows[i][0];
      g.values[i] = raw.rows[i][1];
    }
    if (xs.size() < 2) throw std::invalid_argument(path + ": need at least 2 grid points");
    check_uniform(xs, "x");
    g.lo = {xs.front(), 0.0};
    g.hi = {xs.back(), 0.0};
    g.npts = {static_cast<int>(xs.size()), 0};
  } else {
    // complete lattice, x slowest and y fastest
    std::size_t n1 = 1;
    while (n1 < raw.rows.size() && raw.rows[n1][0] == raw.rows[0][0]) ++n1;
    if (n1 < 2 || raw.rows.size() % n1 != 0)
      throw std::invalid_argument(path + ": rows do not form a complete x-major lattice");
    const std::size_t n0 = raw.rows.size() / n1;
    if (n0 < 2) throw std::invalid_argument(path + ": need at least 2 grid points per axis");

    std::vector<double> xs(n0), ys(n1);
    g.values.resize(raw.rows.size());
    for (std::size_t i = 0; i < n0; ++i) xs[i] = raw.rows[i * n1][0];
    for (std::size_t j = 0; j < n1; ++j) ys[j] = raw.rows[j][1];
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n1; ++j) {
        const auto& row = raw.rows[i * n1 + j];
        if (row[0] != xs[i] || row[1] != ys[j])
          throw std::invalid_argument(path + ":" + std::to_string(i * n1 + j + 2) +
                                      ": rows do not form a complete x-major lattice");
        g.values[i * n1 + j] = row[2];
      }
    check_uniform(xs, "x");
    check_uniform(ys, "y");
    g.lo = {xs.front(), ys.front()};
    g.hi = {xs.back(), ys.back()};
    g.npts = {static_cast<int>(n0), static_cast<int>(n1)};
  }
  validate_density(g);
  return g;
}

std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace l2div
