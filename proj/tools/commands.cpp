#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "artifacts.hpp"
#include "sasaki/generators.hpp"

namespace sasaki::cli {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Problem {
  TransverseModel model;
  SpatialField phi0;
  SpatialField phi1;
  SpatialField rhs;
};

Problem build_problem(const RunConfig& cfg) {
  Problem p{TransverseModel::flat_torus(cfg.transverse_dimension(), cfg.grid),
            SpatialField{}, SpatialField{}, SpatialField{}};
  const TransverseModel& model = p.model;

  const BoundarySpec& b = cfg.boundary;
  if (b.kind == "constants") {
    p.phi0 = SpatialField(model.nodes(), b.phi0);
    p.phi1 = SpatialField(model.nodes(), b.phi1);
  } else if (b.kind == "cosine") {
    p.phi0 = SpatialField(model.nodes(), 0.0);
    p.phi1 = cosine_field(model, b.amplitude, b.frequency);
  } else if (b.kind == "random-bandlimited") {
    p.phi0 = random_bandlimited_field(model, b.seed, b.amplitude, b.max_mode);
    p.phi1 = random_bandlimited_field(model, b.seed + 1, b.amplitude, b.max_mode);
  } else {  // file
    p.phi0 = read_field_dump(b.phi0_file, cfg.grid);
    p.phi1 = read_field_dump(b.phi1_file, cfg.grid);
  }

  if (cfg.rhs.kind == "constant") {
    p.rhs = SpatialField(model.nodes(), cfg.rhs.value);
  } else {
    p.rhs = SpatialField(model.nodes(), cfg.rhs.value);
    for (std::int64_t i = 0; i < model.nodes(); ++i) {
      p.rhs[i] += cfg.rhs.amplitude *
                  std::cos(kTwoPi * cfg.rhs.frequency * model.grid.position(i, 0));
    }
  }

  if (!metric_matrix(p.phi0, model).admissible || !metric_matrix(p.phi1, model).admissible) {
    throw ConfigError("boundary", "boundary data is not an admissible metric on this grid");
  }
  return p;
}

std::string artifact(const RunConfig& cfg, const char* name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

int run_solve(const RunConfig& cfg) {
  Problem p = build_problem(cfg);
  const GeodesicSolution sol =
      solve_geodesic(p.phi0, p.phi1, cfg.nt, cfg.solver, p.model, &p.rhs);
  write_json(solve_report_json(sol.report, cfg.nt, cfg.grid), artifact(cfg, "solve_report.json"));
  if (!sol.report.converged) {
    std::fprintf(stderr, "solve: continuity stage failed to converge (see solve_report.json)\n");
    return 1;
  }
  write_solution_dump(sol.path, cfg.grid, artifact(cfg, "solution.dump"));
  write_diagnostics_csv(diagnose_path(sol.path, p.model), artifact(cfg, "diagnostics.csv"));
  return 0;
}

int run_distance(const RunConfig& cfg) {
  Problem p = build_problem(cfg);
  double d = 0.0;
  try {
    d = distance(p.phi0, p.phi1, cfg.nt, cfg.solver, p.model);
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "distance: %s\n", e.what());
    return 1;
  }
  nlohmann::ordered_json doc;
  doc["distance"] = d;
  doc["nt"] = cfg.nt;
  doc["grid"] = cfg.grid;
  doc["eps_min"] = cfg.solver.eps_min;
  write_json(doc, artifact(cfg, "distance.json"));
  return 0;
}

int run_verify(const RunConfig& cfg) {
  const TransverseModel model =
      TransverseModel::flat_torus(cfg.transverse_dimension(), cfg.grid);
  const VerifyLevel level = (cfg.level == "full") ? VerifyLevel::full : VerifyLevel::quick;
  const std::vector<CheckResult> results = run_suite(level, model, cfg.solver);
  write_json(check_results_json(cfg.level, results), artifact(cfg, "verify_report.json"));
  for (const CheckResult& r : results) {
    std::printf("[%s] %-40s measured=%-12.4g bound=%.4g\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.measured, r.bound);
    if (!r.pass) std::printf("       %s\n", r.context.c_str());
  }
  for (const CheckResult& r : results) {
    if (!r.pass) return 2;
  }
  return 0;
}

int run_identity_check(const RunConfig& cfg) {
  Problem p = build_problem(cfg);
  const GeodesicSolution sol =
      solve_geodesic(p.phi0, p.phi1, cfg.nt, cfg.solver, p.model, &p.rhs);
  if (!sol.report.converged) {
    std::fprintf(stderr, "identity-check: solve failed to converge\n");
    return 1;
  }
  const double disc = cone_identity_check(sol.path, cfg.solver.eps_min, p.rhs, p.model);
  nlohmann::ordered_json doc;
  doc["discrepancy"] = disc;
  doc["nt"] = cfg.nt;
  doc["grid"] = cfg.grid;
  doc["eps"] = cfg.solver.eps_min;
  if (cfg.identity_bound > 0.0) doc["bound"] = cfg.identity_bound;
  write_json(doc, artifact(cfg, "identity_check.json"));
  std::printf("cone identity discrepancy: %.6g\n", disc);
  if (cfg.identity_bound > 0.0 && disc > cfg.identity_bound) return 2;
  return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.command == "solve") return run_solve(cfg);
  if (cfg.command == "distance") return run_distance(cfg);
  if (cfg.command == "verify") return run_verify(cfg);
  return run_identity_check(cfg);
}

}  // namespace sasaki::cli
