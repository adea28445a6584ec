#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "bosatom/io.hpp"
#include "bosatom/regimes.hpp"
#include "verify.hpp"

namespace bosatom::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Thrown once a solver gives up; carries the record into the summary.
struct NotConverged {
  std::string message;
  double residual = 0.0;
  int iterations = 0;
};

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"statement", c.statement},
                   {"pass", c.pass},
                   {"value", finite_or_null(c.value)},
                   {"bound", finite_or_null(c.bound)},
                   {"informational", c.informational}});
  return arr;
}

json energy_json(const EnergyBreakdown& e) {
  return {{"E", e.E}, {"K", e.K}, {"A", e.A}, {"R", e.R}, {"mu", finite_or_null(e.mu)}};
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_checks_csv(const fs::path& path, const std::vector<Check>& checks) {
  std::ofstream os(path);
  os << "check,pass,value,bound,informational,statement\n";
  for (const auto& c : checks)
    os << csv_quote(c.name) << ',' << (c.pass ? 1 : 0) << ',' << format_double(c.value) << ','
       << format_double(c.bound) << ',' << (c.informational ? 1 : 0) << ',' << csv_quote(c.statement) << '\n';
}

class Runner {
public:
  Runner(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log), out_(cfg.out) {}

  json run() {
    switch (cfg_.command) {
      case Command::Solve: return solve();
      case Command::Hs: return hs();
      case Command::Confined: return confined();
      case Command::ScanBeta: return scan_beta();
      case Command::ScanLambda: return scan_lambda();
      case Command::Critical: return critical();
      case Command::ScalingAudit: return scaling();
      case Command::Verify: return verify();
    }
    return json::object();
  }

  const std::vector<Check>& checks() const { return checks_; }
  const json& artifacts() const { return artifacts_; }
  bool solver_failure() const { return solver_failure_; }

private:
  MHContext context() const {
    const auto& g = cfg_.grid;
    return MHContext(build_grid(g.r_max, g.z_max, g.n_r, g.n_z));
  }

  fs::path artifact(const std::string& name) {
    artifacts_.push_back(name);
    return out_ / name;
  }

  void take(const ScanResult& r) { checks_.insert(checks_.end(), r.checks.begin(), r.checks.end()); }

  void add(std::string name, std::string statement, bool pass, double value, double bound) {
    checks_.push_back({std::move(name), std::move(statement), pass, value, bound, false});
  }

  void note(std::string name, std::string statement, double value) {
    checks_.push_back({std::move(name), std::move(statement), true, value, std::nan(""), true});
  }

  void write_scan(const std::string& name, const ScanResult& r) {
    std::ofstream os(artifact(name));
    write_scan_csv(os, r);
  }

  json scan_json(const ScanResult& r) const {
    json pts = json::array();
    for (const auto& p : r.points) {
      json e = energy_json(p.energy);
      e[r.axis] = p.parameter;
      e["residual"] = p.residual;
      e["iterations"] = p.iterations;
      e["converged"] = p.converged;
      e["clamped"] = p.clamped;
      for (const auto& [k, v] : p.extra) e[k] = finite_or_null(v);
      pts.push_back(std::move(e));
    }
    return {{"axis", r.axis}, {"points", pts}};
  }

  ContextFactory factory() const {
    auto ctx = std::make_shared<const MHContext>(context());
    return [ctx](const MHParams&) { return *ctx; };
  }

  // ------------------------------------------------------------------ solve

  json solve() {
    const MHContext ctx = context();
    log_ << "solving on " << cfg_.grid.n_r << "x" << cfg_.grid.n_z << " grid\n";
    const Solution sol = minimize(cfg_.params, ctx, cfg_.solver);
    if (!sol.converged)
      throw NotConverged{"2-D minimization did not reach the residual tolerance", sol.residual, sol.iterations};

    IdentityOptions id;
    id.moment = cfg_.moment;
    id.hydrogen = cfg_.hydrogen;
    id.derivative = cfg_.derivative;
    id.at_critical = sol.critical_charge.has_value();
    take(identity_suite(sol, ctx, cfg_.solver, id));

    json result{{"energy", energy_json(sol.breakdown)},
                {"residual", sol.residual},
                {"iterations", sol.iterations},
                {"mass", sol.mass},
                {"boundary_fraction", sol.boundary_fraction},
                {"clamped", sol.critical_charge.has_value()}};
    if (sol.critical_charge) result["critical_charge"] = *sol.critical_charge;

    if (!cfg_.params.is_plain()) {
      const ScanResult audit = scaling_audit({{cfg_.params, 1e-3}}, ctx, cfg_.solver, 1);
      take(audit);
    }

    if (cfg_.dump_density) {
      const Metadata meta{{"lambda", format_double(cfg_.params.lambda)},
                          {"beta", format_double(cfg_.params.beta)},
                          {"zeta", format_double(cfg_.params.zeta)},
                          {"alpha", format_double(cfg_.params.alpha)},
                          {"E", format_double(sol.breakdown.E)}};
      const fs::path path = artifact("density.txt");
      write_density_file(path.string(), sol.density, meta);
      const DensityDump back = read_density_file(path.string());
      const MHContext ctx2(back.density.grid, ctx.kernel_ptr());
      const EnergyBreakdown again = evaluate(back.density, cfg_.params, ctx2);
      const double diff = std::abs(again.E - sol.breakdown.E) / std::max(1.0, std::abs(sol.breakdown.E));
      add("density_roundtrip", "energy re-evaluated from the written density matches the solver energy",
          diff <= 1e-12, diff, 1e-12);
    }

    ScanResult table;
    table.axis = "lambda";
    ScanPoint p;
    p.parameter = cfg_.params.lambda;
    p.energy = sol.breakdown;
    p.residual = sol.residual;
    p.iterations = sol.iterations;
    p.converged = sol.converged;
    p.clamped = sol.critical_charge.has_value();
    p.extra = {{"beta", cfg_.params.beta},
               {"zeta", cfg_.params.zeta},
               {"alpha", cfg_.params.alpha},
               {"mass", sol.mass},
               {"critical_charge", sol.critical_charge.value_or(std::nan(""))}};
    table.points.push_back(p);
    write_scan("solution.csv", table);
    return result;
  }

  // ------------------------------------------------------------------ hs

  json hs() {
    const HSParams p{cfg_.params.lambda, cfg_.params.zeta, cfg_.params.alpha};
    const HSResult r = hs_minimize(p, cfg_.hs_grid);
    json result{{"energy", energy_json(r.energy)},
                {"residual", r.residual},
                {"iterations", r.iterations},
                {"bound_charge", r.bound_charge},
                {"clamped", r.clamped}};

    // E(lambda; zeta, alpha) = (zeta^3/alpha) E(alpha lambda / zeta) and
    // rho(z) = (zeta^2/alpha) rho_1(zeta z).
    std::vector<HSEnergyRow> rows;
    if (p.alpha > 0.0) {
      const double a = p.zeta * p.zeta / p.alpha, lam = p.alpha * p.lambda / p.zeta;
      const double exact = p.zeta * a * hs_energy_exact(lam).E;
      const double diff = std::abs(r.energy.E - exact);
      add("hs_energy_agreement", "numeric one-dimensional energy matches the closed form",
          diff <= 1e-4 * std::max(1.0, std::abs(exact)), diff, 1e-4 * std::max(1.0, std::abs(exact)));
      result["exact_energy"] = exact;
      HSDensity ex{r.density.z_nodes, {}};
      for (double z : ex.z_nodes) ex.values.push_back(a * hs_exact_density(lam, p.zeta * z));
      std::ofstream os(artifact("hs_profile.csv"));
      write_hs_profile_csv(os, ex, r.density);
      rows.push_back({p.lambda, exact, r.energy});
    } else {
      rows.push_back({p.lambda, std::nan(""), r.energy});
    }
    std::ofstream os(artifact("hs_energy.csv"));
    write_hs_energy_csv(os, rows);

    const HSResidual res = hs_linear_residual(r.density, r.bound_charge);
    note("hs_linear_residual", "residual of the one-dimensional mean-field equation", res.residual);
    return result;
  }

  // ------------------------------------------------------------------ confined

  json confined() {
    const ConfinedParams p{cfg_.params.lambda, cfg_.params.beta, cfg_.params.zeta, cfg_.params.alpha};
    const ConfinedResult r = confined_minimize(p, cfg_.confined_grid);
    double hs = std::nan("");
    if (p.alpha > 0.0)
      hs = p.zeta * p.zeta * p.zeta / p.alpha * hs_energy_exact(p.alpha * p.lambda / p.zeta).E;
    note("confined_gap", "E_conf / L^2 minus the hyper-strong energy", r.scaled_energy - hs);

    std::ofstream os(artifact("confined.csv"));
    write_confined_csv(os, {{p.beta, r.L, r.energy.E, r.scaled_energy, hs}});
    std::ofstream prof(artifact("confined_profile.csv"));
    prof << "u,rho\n";
    for (std::size_t k = 0; k < r.density.z_nodes.size(); ++k)
      prof << format_double(r.density.z_nodes[k]) << ',' << format_double(r.density.values[k]) << '\n';

    return {{"energy", energy_json(r.energy)},
            {"L", r.L},
            {"scaled_energy", r.scaled_energy},
            {"hs_energy", finite_or_null(hs)},
            {"K_psi", r.K_psi},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"bound_charge", r.bound_charge},
            {"clamped", r.clamped}};
  }

  // ------------------------------------------------------------------ scans

  std::string beta_mode() const {
    if (cfg_.scan_mode != "auto") return cfg_.scan_mode;
    const auto& v = cfg_.scan_values;
    if (v.empty()) return "grid";
    bool small = true, large = true;
    for (double b : v) {
      small = small && b > 0.0 && b <= 0.2;
      large = large && b >= 10.0;
    }
    return small ? "small" : large ? "large" : "grid";
  }

  json scan_beta() {
    const std::string mode = beta_mode();
    std::vector<double> values = cfg_.scan_values;
    ScanResult r;
    if (mode == "small") {
      if (values.empty()) values = {0.01, 0.02, 0.05};
      r = small_beta_check(cfg_.params.lambda, values, context(), cfg_.solver, cfg_.jobs);
    } else if (mode == "large") {
      if (values.empty()) values = {1e2, 1e3, 1e4};
      r = large_beta_check(cfg_.params.lambda, values, cfg_.jobs, {cfg_.confined_grid, {}});
    } else {
      if (values.empty()) values = {0.0, 0.5, 1.0, 2.0, 5.0};
      r = beta_scan(cfg_.params, values, factory(), cfg_.solver, cfg_.jobs);
    }
    take(r);
    write_scan("scan.csv", r);
    json j = scan_json(r);
    j["mode"] = mode;
    return j;
  }

  json scan_lambda() {
    std::vector<double> values = cfg_.scan_values;
    if (values.empty())
      for (int k = 1; k <= 8; ++k) values.push_back(0.25 * k);
    const ScanResult r = lambda_scan(cfg_.params, values, context(), cfg_.solver, cfg_.jobs);
    take(r);
    write_scan("scan.csv", r);
    return scan_json(r);
  }

  json critical() {
    std::vector<double> betas = cfg_.critical_betas;
    if (betas.empty()) betas = {cfg_.params.beta};
    const ScanResult r = critical_scan(betas, factory(), cfg_.solver, cfg_.jobs);
    take(r);
    write_scan("critical.csv", r);
    return scan_json(r);
  }

  json scaling() {
    std::vector<ScalingSample> samples;
    const auto& p = cfg_.params;
    if (p.lambda != 1.0 || p.beta != 0.0 || !p.is_plain())
      samples.push_back({p, 1e-3});
    else
      samples = {{{1.0, 0.0, 2.0, 1.0}, 1e-3}, {{1.0, 4.0, 2.0, 2.0}, 1e-3}, {{1.0, 0.0, 1.0, 1.0}, 1e-3}};
    const ScanResult r = scaling_audit(samples, context(), cfg_.solver, cfg_.jobs);
    take(r);
    write_scan("scaling.csv", r);
    return scan_json(r);
  }

  // ------------------------------------------------------------------ verify

  json verify() {
    const auto results = run_verify({cfg_.quick, cfg_.jobs, cfg_.solver}, &log_);
    {
      std::ofstream os(artifact("verify.csv"));
      write_verify_csv(os, results);
    }
    json crit = json::array();
    for (const auto& r : results) {
      json c{{"criterion", r.id},
             {"title", r.title},
             {"pass", r.passed()},
             {"seconds", r.seconds},
             {"checks", checks_json(r.result.checks)}};
      if (!r.error.empty()) c["error"] = r.error;
      crit.push_back(std::move(c));
      if (r.solver_failure) solver_failure_ = true;
      for (auto ch : r.result.checks) {
        ch.name = "criterion " + std::to_string(r.id) + ": " + ch.name;
        checks_.push_back(std::move(ch));
      }
      if (!r.error.empty())
        checks_.push_back({"criterion " + std::to_string(r.id) + ": evaluation", r.error, false, std::nan(""),
                           std::nan(""), false});
    }
    return {{"criteria", crit}};
  }

  const RunConfig& cfg_;
  std::ostream& log_;
  fs::path out_;
  std::vector<Check> checks_;
  json artifacts_ = json::array();
  bool solver_failure_ = false;
};

}  // namespace

json error_record(const std::string& kind, int exit_code, const std::string& message) {
  return {{"error", {{"kind", kind}, {"exit_code", exit_code}, {"message", message}}}};
}

Outcome run(const RunConfig& cfg, const json& resolved, std::ostream& log) {
  Outcome o;
  o.summary = {{"command", to_string(cfg.command)}, {"config", resolved}};
  const auto t0 = std::chrono::steady_clock::now();

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) {
    o.exit_code = kConfigError;
    o.summary.update(error_record("config", kConfigError, "cannot create output directory '" + cfg.out +
                                                              "': " + ec.message()));
    o.summary["status"] = "config-error";
    return o;
  }

  Runner runner(cfg, log);
  try {
    o.summary["result"] = runner.run();
  } catch (const NotConverged& e) {
    o.exit_code = kNotConverged;
    auto rec = error_record("not-converged", kNotConverged, e.message);
    rec["error"]["residual"] = e.residual;
    rec["error"]["iterations"] = e.iterations;
    o.summary.update(rec);
  } catch (const SolverError& e) {
    o.exit_code = kNotConverged;
    auto rec = error_record("not-converged", kNotConverged, e.what());
    rec["error"]["residual"] = finite_or_null(e.residual());
    rec["error"]["iterations"] = e.iterations();
    o.summary.update(rec);
  } catch (const ConfigError& e) {
    o.exit_code = kConfigError;
    o.summary.update(error_record("config", kConfigError, e.what()));
  } catch (const InvalidArgument& e) {
    o.exit_code = kConfigError;
    o.summary.update(error_record("config", kConfigError, e.what()));
  }

  const auto& checks = runner.checks();
  o.summary["checks"] = checks_json(checks);
  if (!checks.empty()) write_checks_csv(fs::path(cfg.out) / "checks.csv", checks);
  json artifacts = runner.artifacts();
  if (!checks.empty()) artifacts.push_back("checks.csv");
  artifacts.push_back("summary.json");
  o.summary["artifacts"] = artifacts;

  if (o.exit_code == kOk) {
    std::vector<std::string> failed;
    for (const auto& c : checks)
      if (!c.pass && !c.informational) failed.push_back(c.name);
    if (runner.solver_failure()) {
      o.exit_code = kNotConverged;
      o.summary.update(error_record("not-converged", kNotConverged, "a criterion failed to converge"));
    } else if (!failed.empty()) {
      o.exit_code = kCheckFailed;
      auto rec = error_record("check-failed", kCheckFailed, std::to_string(failed.size()) + " check(s) failed");
      rec["error"]["failed"] = failed;
      o.summary.update(rec);
    }
  }
  static const char* kStatus[] = {"ok", "check-failed", "not-converged", "config-error"};
  o.summary["status"] = kStatus[o.exit_code];
  o.summary["exit_code"] = o.exit_code;
  o.summary["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream os(fs::path(cfg.out) / "summary.json");
  os << o.summary.dump(2) << '\n';
  return o;
}

}  // namespace bosatom::cli
