#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bosatom/grid.hpp"

namespace bosatom {

/// Free-form key=value annotations written ahead of a density dump.
using Metadata = std::vector<std::pair<std::string, std::string>>;

struct DensityDump {
  Density2D density;
  Metadata metadata;  ///< everything in the header except the grid keys
};

/// Text dump: "# bosatom density v1", key=value lines (r_max, z_max, n_r, n_z,
/// then `meta`), "# data", then one CSV row of n_z values per radial node.
/// Numbers use 17 significant digits, so a read/write pair is bit-exact.
void write_density(std::ostream& os, const Density2D& rho, const Metadata& meta = {});
DensityDump read_density(std::istream& is);

void write_density_file(const std::string& path, const Density2D& rho, const Metadata& meta = {});
DensityDump read_density_file(const std::string& path);

/// "%.17g"
std::string format_double(double x);

}  // namespace bosatom
