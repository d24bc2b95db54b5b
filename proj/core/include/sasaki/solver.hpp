#pragma once

#include <span>
#include <vector>

#include "sasaki/cone.hpp"
#include "sasaki/geometry.hpp"

namespace sasaki {

/// Backend for the Newton linear systems. Both are deterministic; the
/// ILUT-preconditioned BiCGSTAB solve (inner tolerance 1e-12) is the default,
/// with direct sparse LU behind the same interface and as the fallback when
/// the iteration stalls.
enum class LinearSolver { bicgstab_ilut, sparse_lu };

struct SolverConfig {
  double eps_start = 1.0;
  double eps_min = 1e-3;
  double eps_factor = 0.5;     ///< geometric continuity schedule
  double newton_tol = 1e-9;    ///< on max |R| over interior nodes
  int max_newton = 50;
  double backtrack_factor = 0.5;
  double min_step = 1e-6;
  double m_init = 1.0;         ///< subsolution time-convexity constant
  int m_doublings_max = 20;
  LinearSolver linear_solver = LinearSolver::bicgstab_ilut;

  void validate() const;  ///< throws std::invalid_argument on bad values
};

struct StageReport {
  double eps = 0.0;
  int iterations = 0;
  double final_residual = 0.0;  ///< re-evaluated on the stage result
  double min_schur = 0.0;
  double sup_abs_phitt = 0.0;
  double sup_abs_lap = 0.0;
  double sup_c2w = 0.0;         ///< sup |phi_tt| + |lap| over interior nodes
};

struct SolveReport {
  bool converged = false;
  std::vector<StageReport> stages;
  double m_subsolution = 0.0;  ///< m actually used by the initializer
  double wall_seconds = 0.0;
};

struct Subsolution {
  PotentialPath path;
  double m = 0.0;
};

/// Time-variable subsolution phi0(t) = (1-t) a + t b + m t(t-1). Starting
/// from m_init, m is doubled until A(phi0) is strictly positive and, when
/// min_rhs > 0, until Q rho_phi >= min_rhs pointwise (so the path is a true
/// subsolution of the stage-eps equation). Throws when the cap is reached.
Subsolution build_subsolution(const SpatialField& phi0, const SpatialField& phi1, int nt,
                              double m_init, const TransverseModel& model,
                              const SpatialField* min_rhs = nullptr, int doublings_max = 20);

/// Linear comparison solve on the cone grid:
///   (r^2/4) rho_rr + (1/2) h^{ij} rho_{ij} + (n+1) = 0,
/// Dirichlet rho(1,.) = phi0, rho(3/2,.) = phi1 + 4 log(3/2), periodic in
/// space. Returns the unlift of rho. Used for comparison tests only.
PotentialPath solve_supersolution(const SpatialField& phi0, const SpatialField& phi1, int nt,
                                  const TransverseModel& model);

struct NewtonStats {
  double residual_before = 0.0;
  double residual_after = 0.0;
  double step = 0.0;       ///< accepted fraction of the Newton direction
  int backtracks = 0;
};

/// One damped Newton step on the log-determinant residual: solves the exact
/// linearization J delta = -R and backtracks until the update keeps A > 0 and
/// reduces max |R|. Boundary slices are never touched. Throws when the line
/// search hits its floor or the linear system is singular.
NewtonStats newton_step(PotentialPath& path, double eps, const SpatialField& f,
                        const TransverseModel& model, const SolverConfig& cfg);

struct GeodesicSolution {
  PotentialPath path;
  SolveReport report;
};

/// Continuity solve from eps_start down to eps_min with warm starts; the
/// returned path satisfies max |R| <= newton_tol at eps_min with A > 0
/// everywhere. Boundary data must define admissible metrics. A stage failure
/// is reported through the convergence flag, not an exception.
GeodesicSolution solve_geodesic(const SpatialField& phi0, const SpatialField& phi1, int nt,
                                const SolverConfig& cfg, const TransverseModel& model,
                                const SpatialField* rhs = nullptr);

/// Solve from several distinct subsolution seeds and return the max pairwise
/// sup distance between the results. Throws if any solve fails.
double check_uniqueness(const SpatialField& phi0, const SpatialField& phi1, int nt,
                        const SolverConfig& cfg, const TransverseModel& model,
                        std::span<const double> seeds);

}  // namespace sasaki
