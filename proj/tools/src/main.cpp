#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "config.hpp"

using namespace bosatom::cli;
using nlohmann::json;

namespace {

struct Flags {
  std::optional<double> lambda, beta, zeta, alpha, rmax, zmax, tol;
  std::optional<int> nr, nz, max_iter, jobs;
  std::optional<std::string> out, config;
  bool quick = false;
  std::vector<std::string> sets;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--lambda", f.lambda, "total charge N/Z");
  sub->add_option("--beta", f.beta, "field strength B/Z^2");
  sub->add_option("--zeta", f.zeta, "nuclear-charge multiplier");
  sub->add_option("--alpha", f.alpha, "repulsion multiplier");
  sub->add_option("--grid-nr", f.nr, "radial nodes");
  sub->add_option("--grid-nz", f.nz, "axial nodes (odd)");
  sub->add_option("--rmax", f.rmax, "radial box size");
  sub->add_option("--zmax", f.zmax, "axial half-length");
  sub->add_option("--tol", f.tol, "residual tolerance");
  sub->add_option("--max-iter", f.max_iter, "iteration cap");
  sub->add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_flag("--quick", f.quick, "smaller grids for verify");
  sub->add_option("--set", f.sets, "override any config key: key=value (repeatable)");
}

json flag_overrides(const Flags& f) {
  json j = json::object();
  auto put = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  put("lambda", f.lambda);
  put("beta", f.beta);
  put("zeta", f.zeta);
  put("alpha", f.alpha);
  put("grid.nr", f.nr);
  put("grid.nz", f.nz);
  put("grid.rmax", f.rmax);
  put("grid.zmax", f.zmax);
  put("solver.tol", f.tol);
  put("solver.max_iter", f.max_iter);
  put("jobs", f.jobs);
  put("out", f.out);
  if (f.quick) j["quick"] = true;
  return j;
}

int fail(int code, const std::string& kind, const std::string& msg) {
  std::cerr << error_record(kind, code, msg).dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic Hartree atom solvers"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"solve", "hs", "confined", "scan-beta", "scan-lambda", "critical", "scaling-audit", "verify"};
  const char* help[] = {
      "minimize the 2-D functional and check identities",
      "one-dimensional hyper-strong problem",
      "lowest-Landau-band confined problem",
      "energy along a field ladder",
      "energy along a charge ladder",
      "critical charge at one or more field strengths",
      "extended-functional scaling relation",
      "run the acceptance criteria",
  };
  for (int k = 0; k < 8; ++k) add_flags(app.add_subcommand(names[k], help[k]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfigError, "config", e.what());
  }

  RunConfig cfg;
  json flat = default_config_json();
  try {
    const Command command = parse_command(app.get_subcommands().front()->get_name());
    if (flags.config) merge_config(flat, load_config_file(*flags.config), *flags.config);
    for (const auto& s : flags.sets) {
      auto [key, value] = parse_assignment(s);
      merge_config(flat, json{{key, value}}, "--set");
    }
    merge_config(flat, flag_overrides(flags), "command line");
    cfg = resolve(command, flat);
  } catch (const ConfigError& e) {
    return fail(kConfigError, "config", e.what());
  }

  const Outcome o = run(cfg, flat, std::cerr);
  std::cout << o.summary.dump(2) << '\n';
  if (o.exit_code != kOk && o.summary.contains("error")) std::cerr << json{{"error", o.summary["error"]}}.dump() << '\n';
  return o.exit_code;
}
