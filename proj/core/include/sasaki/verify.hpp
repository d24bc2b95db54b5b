#pragma once

#include <span>
#include <string>
#include <vector>

#include "sasaki/geometry.hpp"
#include "sasaki/solver.hpp"

namespace sasaki {

enum class VerifyLevel { quick, full };

/// One named theorem-check. Bound and measurement are recomputed from
/// scratch on every run; negative-control entries pass when the underlying
/// check correctly rejects a corrupted input.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string context;
};

/// Executes the fixed check list, in order: block-determinant identity;
/// cone/time equivalence; homogeneous closed-form solve; sandwich bounds;
/// slope bounds; uniqueness; d^2 I/dt^2 = eps; energy drift; K-energy
/// convexity and Hessian identity; metric axioms (positivity, symmetry,
/// triangle); eps-uniform C^2_w trend; plus negative controls.
/// Failures are results, never exceptions. The full level also sweeps eps
/// down to 1e-3 everywhere and runs the grid-refinement halving checks.
std::vector<CheckResult> run_suite(VerifyLevel level, const TransverseModel& model,
                                   const SolverConfig& cfg);

/// Truncation scale of the discretization at this grid: the largest closed-
/// form error over the homogeneous solve and the supersolution ODE. Used to
/// pin comparison tolerances (bounds are 10x this value).
double measured_truncation(int nt, const TransverseModel& model, double eps);

/// Truncation estimate for the discrete d^2 I/dt^2 = eps identity with
/// f = 1: a dt^2 midpoint term plus the O(dx^2) stencil mismatch, sized by
/// the measured gradient energy of the path.
double aubin_yau_truncation(const PotentialPath& path, double eps,
                            const TransverseModel& model);

struct RefinementRow {
  int nt = 0;
  double error = 0.0;
};

struct RefinementResult {
  std::string problem;
  std::vector<RefinementRow> rows;
  double observed_order = 0.0;  ///< log2(err_h / err_{h/2}) of the finest pair
};

/// Convergence study for problem "homogeneous" (errors against closed forms:
/// the supersolution ODE and the cone identity, which carry the measurable
/// truncation) or "wavy" (Richardson self-comparison against a once-refined
/// time grid). Requires at least two levels.
RefinementResult refinement_study(const std::string& problem, std::span<const int> nt_levels,
                                  const TransverseModel& model, const SolverConfig& cfg);

}  // namespace sasaki
