#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"

namespace {

using sasaki::cli::ConfigError;
using sasaki::cli::RunConfig;

struct FlagValues {
  std::string config_file;
  int nt = 0;
  std::vector<int> grid;
  double eps_start = 0, eps_min = 0, eps_factor = 0, newton_tol = 0, m_init = 0;
  int max_newton = 0;
  std::string linear_solver;
  std::string boundary_kind;
  double phi0 = 0, phi1 = 0, amplitude = 0;
  int frequency = 0, max_mode = 0;
  std::uint64_t seed = 0;
  std::string phi0_file, phi1_file;
  std::string rhs_kind;
  double rhs_value = 0, rhs_amplitude = 0;
  int rhs_frequency = 0;
  std::string out_dir;
  std::string level;
  double bound = 0;
  int threads = 0;
};

struct Subcommand {
  CLI::App* cmd = nullptr;
  FlagValues v;
  std::map<std::string, CLI::Option*> opts;

  void add_common(CLI::App* c) {
    cmd = c;
    opts["config"] = c->add_option("--config", v.config_file,
                                   "JSON config file; explicit flags override its values");
    opts["nt"] = c->add_option("--nt", v.nt, "time intervals");
    opts["grid"] = c->add_option("--grid", v.grid, "per-axis node counts, e.g. 16,16")
                       ->delimiter(',');
    opts["eps_start"] = c->add_option("--eps-start", v.eps_start, "continuity start");
    opts["eps_min"] = c->add_option("--eps-min", v.eps_min, "final regularization");
    opts["eps_factor"] = c->add_option("--eps-factor", v.eps_factor, "schedule factor");
    opts["newton_tol"] = c->add_option("--newton-tol", v.newton_tol, "residual tolerance");
    opts["max_newton"] = c->add_option("--max-newton", v.max_newton, "iteration cap");
    opts["m_init"] = c->add_option("--m-init", v.m_init, "subsolution constant");
    opts["linear_solver"] =
        c->add_option("--linear-solver", v.linear_solver, "bicgstab or sparselu");
    opts["boundary_kind"] = c->add_option("--boundary-kind", v.boundary_kind,
                                          "constants, cosine, random-bandlimited, file");
    opts["phi0"] = c->add_option("--phi0", v.phi0, "constant boundary value at t=0");
    opts["phi1"] = c->add_option("--phi1", v.phi1, "constant boundary value at t=1");
    opts["amplitude"] = c->add_option("--amplitude", v.amplitude, "generator amplitude");
    opts["frequency"] = c->add_option("--frequency", v.frequency, "generator frequency");
    opts["seed"] = c->add_option("--seed", v.seed, "generator seed");
    opts["max_mode"] = c->add_option("--max-mode", v.max_mode, "band limit");
    opts["phi0_file"] = c->add_option("--phi0-file", v.phi0_file, "field dump for t=0");
    opts["phi1_file"] = c->add_option("--phi1-file", v.phi1_file, "field dump for t=1");
    opts["rhs_kind"] = c->add_option("--rhs-kind", v.rhs_kind, "constant or cosine");
    opts["rhs_value"] = c->add_option("--rhs-value", v.rhs_value, "rhs base value");
    opts["rhs_amplitude"] = c->add_option("--rhs-amplitude", v.rhs_amplitude, "rhs wobble");
    opts["rhs_frequency"] = c->add_option("--rhs-frequency", v.rhs_frequency, "rhs frequency");
    opts["out_dir"] = c->add_option("--out-dir", v.out_dir, "artifact directory");
    opts["threads"] = c->add_option("--threads", v.threads, "worker cap (0 = auto)");
  }

  bool given(const char* name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  void apply(RunConfig& cfg) const {
    if (given("nt")) cfg.nt = v.nt;
    if (given("grid")) cfg.grid = v.grid;
    if (given("eps_start")) cfg.solver.eps_start = v.eps_start;
    if (given("eps_min")) cfg.solver.eps_min = v.eps_min;
    if (given("eps_factor")) cfg.solver.eps_factor = v.eps_factor;
    if (given("newton_tol")) cfg.solver.newton_tol = v.newton_tol;
    if (given("max_newton")) cfg.solver.max_newton = v.max_newton;
    if (given("m_init")) cfg.solver.m_init = v.m_init;
    if (given("linear_solver")) {
      if (v.linear_solver == "bicgstab") {
        cfg.solver.linear_solver = sasaki::LinearSolver::bicgstab_ilut;
      } else if (v.linear_solver == "sparselu") {
        cfg.solver.linear_solver = sasaki::LinearSolver::sparse_lu;
      } else {
        throw ConfigError("linear_solver", "expected \"bicgstab\" or \"sparselu\"");
      }
    }
    if (given("boundary_kind")) cfg.boundary.kind = v.boundary_kind;
    if (given("phi0")) cfg.boundary.phi0 = v.phi0;
    if (given("phi1")) cfg.boundary.phi1 = v.phi1;
    if (given("amplitude")) cfg.boundary.amplitude = v.amplitude;
    if (given("frequency")) cfg.boundary.frequency = v.frequency;
    if (given("seed")) cfg.boundary.seed = v.seed;
    if (given("max_mode")) cfg.boundary.max_mode = v.max_mode;
    if (given("phi0_file")) cfg.boundary.phi0_file = v.phi0_file;
    if (given("phi1_file")) cfg.boundary.phi1_file = v.phi1_file;
    if (given("rhs_kind")) cfg.rhs.kind = v.rhs_kind;
    if (given("rhs_value")) cfg.rhs.value = v.rhs_value;
    if (given("rhs_amplitude")) cfg.rhs.amplitude = v.rhs_amplitude;
    if (given("rhs_frequency")) cfg.rhs.frequency = v.rhs_frequency;
    if (given("out_dir")) cfg.out_dir = v.out_dir;
    if (given("level")) cfg.level = v.level;
    if (given("bound")) cfg.identity_bound = v.bound;
    if (given("threads")) cfg.threads = v.threads;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epsilon-approximate geodesics in the space of Sasakian metrics"};
  app.require_subcommand(1);

  Subcommand solve, dist, verify, identity;
  solve.add_common(app.add_subcommand("solve", "solve the regularized geodesic equation"));
  dist.add_common(app.add_subcommand("distance", "geodesic distance between boundary data"));
  verify.add_common(app.add_subcommand("verify", "run the verification suite"));
  verify.opts["level"] = verify.cmd->add_option("--level", verify.v.level, "quick or full");
  identity.add_common(
      app.add_subcommand("identity-check", "cone/time determinant-identity discrepancy"));
  identity.opts["bound"] =
      identity.cmd->add_option("--bound", identity.v.bound, "fail (exit 2) above this value");

  CLI11_PARSE(app, argc, argv);

  Subcommand* active = nullptr;
  const char* name = nullptr;
  if (solve.cmd->parsed()) active = &solve, name = "solve";
  if (dist.cmd->parsed()) active = &dist, name = "distance";
  if (verify.cmd->parsed()) active = &verify, name = "verify";
  if (identity.cmd->parsed()) active = &identity, name = "identity-check";

  try {
    RunConfig cfg;
    if (active->given("config")) {
      cfg = sasaki::cli::parse_config_file(active->v.config_file, /*check=*/false);
    }
    cfg.command = name;  // the subcommand wins over any config-file command
    active->apply(cfg);
    sasaki::cli::validate(cfg);
    if (cfg.threads > 0) {
      const std::string t = std::to_string(cfg.threads);
      setenv("SASAKI_THREADS", t.c_str(), 1);
    }
    return sasaki::cli::run(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 64;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
