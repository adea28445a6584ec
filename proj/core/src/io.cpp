#include "bosatom/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "csv.hpp"

namespace bosatom {

namespace {

constexpr const char* kMagic = "# bosatom density v1";

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidArgument("density dump: bad number for " + what + ": '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidArgument("density dump: bad integer for " + what);
  return v;
}

}  // namespace

std::string format_double(double x) { return detail::format_double(x); }

void write_density(std::ostream& os, const Density2D& rho, const Metadata& meta) {
  rho.validate();
  const Grid2D& g = *rho.grid;
  os << kMagic << '\n';
  os << "r_max=" << format_double(g.r_max()) << '\n';
  os << "z_max=" << format_double(g.z_max()) << '\n';
  os << "n_r=" << g.n_r() << '\n';
  os << "n_z=" << g.n_z() << '\n';
  for (const auto& [k, v] : meta) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw InvalidArgument("density dump: metadata must be single-line key=value");
    os << k << '=' << v << '\n';
  }
  os << "# data\n";
  for (int i = 0; i < g.n_r(); ++i) {
    for (int j = 0; j < g.n_z(); ++j) os << (j ? "," : "") << format_double(rho.values[g.index(i, j)]);
    os << '\n';
  }
}

DensityDump read_density(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw InvalidArgument("density dump: missing header");
  double r_max = 0.0, z_max = 0.0;
  int n_r = 0, n_z = 0;
  DensityDump out;
  bool data = false;
  while (std::getline(is, line)) {
    if (line == "# data") {
      data = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("density dump: malformed header line '" + line + "'");
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "r_max") r_max = parse_double(val, key);
    else if (key == "z_max") z_max = parse_double(val, key);
    else if (key == "n_r") n_r = parse_int(val, key);
    else if (key == "n_z") n_z = parse_int(val, key);
    else out.metadata.emplace_back(key, val);
  }
  if (!data) throw InvalidArgument("density dump: missing data section");
  auto grid = build_grid(r_max, z_max, n_r, n_z);
  std::vector<double> values(grid->size());
  for (int i = 0; i < n_r; ++i) {
    if (!std::getline(is, line)) throw InvalidArgument("density dump: truncated data");
    std::istringstream row(line);
    std::string cell;
    int j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= n_z) throw InvalidArgument("density dump: row too long");
      values[grid->index(i, j++)] = parse_double(cell, "rho");
    }
    if (j != n_z) throw InvalidArgument("density dump: row too short");
  }
  out.density = Density2D(grid, std::move(values));
  out.density.validate();
  return out;
}

void write_density_file(const std::string& path, const Density2D& rho, const Metadata& meta) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open '" + path + "' for writing");
  write_density(os, rho, meta);
  if (!os) throw InvalidArgument("write to '" + path + "' failed");
}

DensityDump read_density_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open '" + path + "'");
  return read_density(is);
}

}  // namespace bosatom
