#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "bosatom/io.hpp"

using namespace bosatom;

TEST_CASE("density dump round trip is bit exact") {
  auto g = build_grid(7.5, 3.25, 17, 33);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Density2D rho(g);
  for (double& v : rho.values) v = d(rng) * std::pow(10.0, -20.0 * d(rng));
  rho.values[5] = 0.0;
  rho.values[6] = 1.0 / 3.0;

  std::stringstream ss;
  write_density(ss, rho, {{"lambda", "1"}, {"note", "a b c"}});
  const DensityDump back = read_density(ss);
  CHECK(*back.density.grid == *g);
  REQUIRE(back.density.values.size() == rho.values.size());
  for (std::size_t k = 0; k < rho.values.size(); ++k) REQUIRE(back.density.values[k] == rho.values[k]);
  REQUIRE(back.metadata.size() == 2);
  CHECK(back.metadata[0] == std::pair<std::string, std::string>{"lambda", "1"});
  CHECK(back.metadata[1].second == "a b c");
}

TEST_CASE("file round trip") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "bosatom-io-test.txt";
  auto g = build_grid(2.0, 2.0, 9, 17);
  Density2D rho(g, sample(*g, [](double r, double z) { return std::exp(-r - z * z); }));
  write_density_file(p.string(), rho);
  const auto back = read_density_file(p.string());
  CHECK(back.density.values == rho.values);
  fs::remove(p);
  CHECK_THROWS(read_density_file(p.string()));
}

TEST_CASE("malformed dumps are rejected") {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return read_density(is);
  };
  const std::string head = "# bosatom density v1\nr_max=1\nz_max=1\nn_r=8\nn_z=9\n# data\n";
  std::string rows;
  for (int i = 0; i < 8; ++i) rows += "0,0,0,0,0,0,0,0,0\n";
  CHECK_NOTHROW(parse(head + rows));
  CHECK_THROWS_AS(parse("# something else\n" + rows), InvalidArgument);
  CHECK_THROWS_AS(parse(head + rows.substr(0, rows.size() - 18)), InvalidArgument);
  CHECK_THROWS_AS(parse(head + "0,0,x,0,0,0,0,0,0\n" + rows.substr(18)), InvalidArgument);
  CHECK_THROWS_AS(parse(head + "0,0,-1,0,0,0,0,0,0\n" + rows.substr(18)), InvalidArgument);
  CHECK_THROWS_AS(parse("# bosatom density v1\nr_max=1\nn_r=8\nn_z=9\n# data\n" + rows), InvalidArgument);
}

TEST_CASE("seventeen significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
