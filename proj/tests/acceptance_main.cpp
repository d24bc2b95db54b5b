// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Every tolerance is pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sasaki/cone.hpp"
#include "sasaki/functionals.hpp"
#include "sasaki/generators.hpp"
#include "sasaki/geometry.hpp"
#include "sasaki/solver.hpp"
#include "sasaki/verify.hpp"

using namespace sasaki;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(const char* id, const char* what, bool pass, double measured, double bound,
            double seconds, double budget) {
  const bool in_budget = seconds <= budget;
  const bool ok = pass && in_budget;
  if (!ok) ++g_failures;
  std::printf("[%s] %-4s %-38s measured=%-12.4g bound=%-10.4g time=%.2fs/%.0fs\n",
              ok ? "PASS" : "FAIL", id, what, measured, bound, seconds, budget);
  if (!in_budget) std::printf("       ^ exceeded the runtime budget\n");
}

double homogeneous_value(double a, double b, double eps, double t) {
  return a + (b - a) * t + 0.5 * eps * t * (t - 1.0);
}

double sup_error_vs_homogeneous(const PotentialPath& p, double a, double b, double eps) {
  double worst = 0.0;
  for (int k = 0; k <= p.nt; ++k) {
    const double expect = homogeneous_value(a, b, eps, p.time(k));
    for (std::int64_t i = 0; i < p.slices[static_cast<std::size_t>(k)].size(); ++i) {
      worst = std::max(worst, std::abs(p.slices[static_cast<std::size_t>(k)][i] - expect));
    }
  }
  return worst;
}

PotentialPath straight_line(const SpatialField& a, const SpatialField& b, int nt) {
  PotentialPath p;
  p.nt = nt;
  p.slices.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) {
    const double t = static_cast<double>(k) / nt;
    SpatialField s(a.size());
    for (std::int64_t i = 0; i < a.size(); ++i) s[i] = (1.0 - t) * a[i] + t * b[i];
    p.slices[static_cast<std::size_t>(k)] = std::move(s);
  }
  return p;
}

// 1. Closed-form regularized geodesic.
void criterion_closed_form() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {4, 4});
  SolverConfig cfg;
  cfg.eps_min = 0.1;
  SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
  const GeodesicSolution sol = solve_geodesic(a, b, 32, cfg, model);
  const double err =
      sol.report.converged ? sup_error_vs_homogeneous(sol.path, 0.0, 1.0, 0.1) : 1e99;
  report("C1", "closed-form geodesic 0->1, eps=0.1", err <= 1e-8, err, 1e-8, timer.seconds(),
         1.0);
}

// 2. Block-determinant identity on 1e4 random admissible nodes.
void criterion_determinant() {
  Timer timer;
  std::mt19937_64 rng(20240901);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int n : {1, 2}) {
    const int dim = n + 1;
    for (int sample = 0; sample < 5000; ++sample) {
      Eigen::MatrixXcd B(dim, dim);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) B(i, j) = Complex(gauss(rng), gauss(rng));
      }
      const Eigen::MatrixXcd A = B * B.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(dim, dim);
      const double direct = A.determinant().real();
      const Eigen::MatrixXcd H = A.topLeftCorner(n, n);
      const Eigen::VectorXcd c = A.topRightCorner(n, 1);
      const double schur = A(dim - 1, dim - 1).real() - c.dot(H.inverse() * c).real();
      const double block = H.determinant().real() * schur;
      worst = std::max(worst, std::abs(direct - block) / (1.0 + std::abs(direct)));
    }
  }
  report("C2", "block determinant identity (n=1,2)", worst <= 1e-12, worst, 1e-12,
         timer.seconds(), 1.0);
}

// 3. Cone/time equivalence with second-order shrink.
void criterion_cone_equivalence() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {4, 4});
  SolverConfig cfg;
  cfg.eps_min = 0.1;
  SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
  const SpatialField f(model.nodes(), 1.0);
  const GeodesicSolution s64 = solve_geodesic(a, b, 64, cfg, model);
  const GeodesicSolution s128 = solve_geodesic(a, b, 128, cfg, model);
  double disc64 = 1e99, ratio = 0.0;
  if (s64.report.converged && s128.report.converged) {
    disc64 = cone_identity_check(s64.path, 0.1, f, model);
    const double disc128 = cone_identity_check(s128.path, 0.1, f, model);
    ratio = disc64 / std::max(disc128, 1e-300);
  }
  const bool pass = disc64 <= 1e-3 && ratio >= 3.5;
  report("C3", "cone/time equivalence nt=64 (+shrink)", pass, disc64, 1e-3, timer.seconds(),
         10.0);
}

// 4. Sandwich and slope bounds at 10x measured truncation.
void criterion_sandwich_slopes() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {16, 16});
  const int nt = 32;
  const double eps = 1e-2;
  SolverConfig cfg;
  cfg.eps_min = eps;
  const double tau = measured_truncation(nt, model, eps);
  const double bound = 10.0 * tau;

  double sandwich = 0.0, slopes = 0.0;
  SpatialField zero(model.nodes(), 0.0);
  SpatialField one(model.nodes(), 1.0);
  const SpatialField wavy = cosine_field(model, 0.05);
  const SpatialField* problems[] = {&one, &wavy};
  for (const SpatialField* phi1 : problems) {
    const GeodesicSolution sol = solve_geodesic(zero, *phi1, nt, cfg, model);
    if (!sol.report.converged) {
      sandwich = 1e99;
      break;
    }
    const PotentialPath sub =
        build_subsolution(zero, *phi1, nt, sol.report.m_subsolution, model, nullptr, 0).path;
    const PotentialPath super = solve_supersolution(zero, *phi1, nt, model);
    for (int k = 0; k <= nt; ++k) {
      const std::size_t m = static_cast<std::size_t>(k);
      for (std::int64_t i = 0; i < model.nodes(); ++i) {
        sandwich = std::max(sandwich, sub.slices[m][i] - sol.path.slices[m][i]);
        sandwich = std::max(sandwich, sol.path.slices[m][i] - super.slices[m][i]);
      }
    }
    const double dt = sol.path.dt();
    for (std::int64_t i = 0; i < model.nodes(); ++i) {
      const double fwd = (sol.path.slices[1][i] - sol.path.slices[0][i]) / dt;
      const double bwd = (sol.path.slices[static_cast<std::size_t>(nt)][i] -
                          sol.path.slices[static_cast<std::size_t>(nt) - 1][i]) /
                         dt;
      const double gap = (*phi1)[i] - zero[i];
      slopes = std::max(slopes, fwd - gap);
      slopes = std::max(slopes, gap - bwd);
    }
  }
  const double worst = std::max(sandwich, slopes);
  report("C4", "sandwich + slope bounds, eps=1e-2", worst <= bound, worst, bound,
         timer.seconds(), 30.0);
}

// 5. eps-uniform C^2_w trend.
void criterion_c2w_trend() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {16, 16});
  const int nt = 32;
  SpatialField zero(model.nodes(), 0.0);
  const SpatialField wavy = cosine_field(model, 0.05);
  SolverConfig cfg;
  cfg.eps_min = 1e-2;
  const GeodesicSolution coarse = solve_geodesic(zero, wavy, nt, cfg, model);
  cfg.eps_min = 1e-3;
  const GeodesicSolution fine = solve_geodesic(zero, wavy, nt, cfg, model);
  double ratio = 1e99;
  if (coarse.report.converged && fine.report.converged) {
    ratio = fine.report.stages.back().sup_c2w / coarse.report.stages.back().sup_c2w;
  }
  report("C5", "C2_w trend eps 1e-3 vs 1e-2 (< 1.10)", ratio < 1.10, ratio, 1.10,
         timer.seconds(), 120.0);
}

// 6. Energy drift bound with fitted constant.
void criterion_energy_drift() {
  Timer timer;
  auto scalar = TransverseModel::flat_torus(1, {4, 4});
  auto model = TransverseModel::flat_torus(1, {12, 12});
  const int nt = 32;
  auto drift = [&](const TransverseModel& m, const SpatialField& a, const SpatialField& b,
                   double eps) {
    SolverConfig cfg;
    cfg.eps_min = eps;
    const GeodesicSolution sol = solve_geodesic(a, b, nt, cfg, m);
    if (!sol.report.converged) return 1e99;
    const std::vector<double> e = path_energy(sol.path, m);
    double d = 0.0;
    for (double v : e) d = std::max(d, std::abs(v - e.front()));
    return d;
  };

  SpatialField z4(scalar.nodes(), 0.0), o4(scalar.nodes(), 1.0);
  const double c_homog = drift(scalar, z4, o4, 0.1) / 0.1;
  bool pass = std::abs(c_homog - 2.0) <= 1e-6;

  SpatialField zero(model.nodes(), 0.0);
  const SpatialField wavy = cosine_field(model, 0.05);
  const double c_wavy = drift(model, zero, wavy, 0.1) / 0.1;
  double worst_ratio = 0.0;
  for (double eps : {0.05, 0.025}) {
    worst_ratio = std::max(worst_ratio, drift(scalar, z4, o4, eps) / (c_homog * eps));
    worst_ratio = std::max(worst_ratio, drift(model, zero, wavy, eps) / (c_wavy * eps));
  }
  pass = pass && worst_ratio <= 1.1;
  report("C6", "energy drift <= C eps (fit at 0.1)", pass, worst_ratio, 1.1, timer.seconds(),
         60.0);
}

// 7. Second difference of I equals eps.
void criterion_aubin_yau() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {16, 16});
  const int nt = 32;
  const double eps = 1e-2;
  SolverConfig cfg;
  cfg.eps_min = eps;
  SpatialField zero(model.nodes(), 0.0);
  const GeodesicSolution sol = solve_geodesic(zero, cosine_field(model, 0.05), nt, cfg, model);
  double worst = 1e99, bound = 0.0;
  if (sol.report.converged) {
    std::vector<double> ivals;
    for (const SpatialField& s : sol.path.slices) ivals.push_back(i_functional(s, model));
    const double dt = sol.path.dt();
    bound = 5.0 * aubin_yau_truncation(sol.path, eps, model);
    worst = 0.0;
    for (std::size_t k = 1; k + 1 < ivals.size(); ++k) {
      worst = std::max(worst,
                       std::abs((ivals[k + 1] - 2.0 * ivals[k] + ivals[k - 1]) / (dt * dt) - eps));
    }
  }
  report("C7", "d2 I/dt2 = eps at every interior slice", worst <= bound, worst, bound,
         timer.seconds(), 30.0);
}

// 8. K-energy convexity and Hessian identity refinement.
void criterion_k_energy() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {16, 16});
  const int nt = 16;
  const double eps = 1e-2;
  SolverConfig cfg;
  cfg.eps_min = eps;
  SpatialField zero(model.nodes(), 0.0);
  const GeodesicSolution sol = solve_geodesic(zero, cosine_field(model, 0.05), nt, cfg, model);
  bool pass = sol.report.converged;
  double min_second = 1e99;
  if (pass) {
    const std::vector<double> mu = k_energy(sol.path, model);
    const double dt = sol.path.dt();
    min_second = 0.0;
    for (std::size_t k = 1; k + 1 < mu.size(); ++k) {
      min_second = std::min(min_second, (mu[k + 1] - 2.0 * mu[k] + mu[k - 1]) / (dt * dt));
    }
    pass = min_second >= -(1e-3 + eps);
  }

  double defect[2] = {0.0, 0.0};
  int idx = 0;
  for (int scale : {1, 2}) {
    auto m = TransverseModel::flat_torus(1, {16 * scale, 16 * scale});
    SpatialField z(m.nodes(), 0.0);
    const PotentialPath line = straight_line(z, cosine_field(m, 0.05), nt * scale);
    double worst = 0.0;
    for (double d : k_energy_hessian_check(line, m)) worst = std::max(worst, std::abs(d));
    defect[idx++] = worst;
  }
  const double ratio = defect[0] / std::max(defect[1], 1e-300);
  pass = pass && ratio >= 3.0;
  report("C8", "K-energy convexity + Hessian identity", pass,
         std::min(min_second, ratio), 3.0, timer.seconds(), 120.0);
}

// 9. Metric axioms.
void criterion_metric_axioms() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {12, 12});
  const int nt = 16;
  SolverConfig cfg;
  cfg.eps_min = 1e-3;

  const SpatialField base = cosine_field(model, 0.03);
  SpatialField shifted = base;
  for (std::int64_t i = 0; i < shifted.size(); ++i) shifted[i] += 2.0;
  const double d_shift = distance(base, shifted, nt, cfg, model);
  bool pass = std::abs(d_shift - 2.0) <= 1e-3;

  const SpatialField sa = random_bandlimited_field(model, 71, 0.03);
  const SpatialField sb = random_bandlimited_field(model, 72, 0.03);
  const double fwd = distance(sa, sb, nt, cfg, model);
  const double bwd = distance(sb, sa, nt, cfg, model);
  pass = pass && std::abs(fwd - bwd) <= 2e-6;

  double worst_gap = -1e99;
  for (int tr = 0; tr < 5; ++tr) {
    const std::uint64_t s = 500 + 3 * static_cast<std::uint64_t>(tr);
    const SpatialField a = random_bandlimited_field(model, s, 0.03);
    const SpatialField b = random_bandlimited_field(model, s + 1, 0.03);
    const SpatialField c = random_bandlimited_field(model, s + 2, 0.03);
    worst_gap = std::max(worst_gap, distance(a, c, nt, cfg, model) -
                                        distance(a, b, nt, cfg, model) -
                                        distance(b, c, nt, cfg, model));
  }
  pass = pass && worst_gap <= 3e-3;

  double min_d = 1e99;
  for (int p = 0; p < 5; ++p) {
    const std::uint64_t s = 600 + 2 * static_cast<std::uint64_t>(p);
    const SpatialField a = random_bandlimited_field(model, s, 0.03);
    const SpatialField b = random_bandlimited_field(model, s + 1, 0.03);
    min_d = std::min(min_d, distance(a, b, nt, cfg, model));
  }
  pass = pass && min_d > 1e-3;

  report("C9", "metric axioms (|C|, sym, triangle, >0)", pass, std::abs(d_shift - 2.0), 1e-3,
         timer.seconds(), 300.0);
}

// 10. Uniqueness across initializations.
void criterion_uniqueness() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {16, 16});
  SolverConfig cfg;
  cfg.eps_min = 1e-3;
  SpatialField zero(model.nodes(), 0.0);
  const double seeds[] = {1.0, 4.0};
  double diff = 1e99;
  try {
    diff = check_uniqueness(zero, cosine_field(model, 0.05), 16, cfg, model, seeds);
  } catch (const std::exception&) {
  }
  const double bound = 10.0 * cfg.newton_tol;
  report("C10", "uniqueness across seeds m in {1,4}", diff <= bound, diff, bound,
         timer.seconds(), 60.0);
}

// 11. verify quick suite.
void criterion_quick_suite() {
  Timer timer;
  auto model = TransverseModel::flat_torus(1, {16, 16});
  SolverConfig cfg;
  const std::vector<CheckResult> results = run_suite(VerifyLevel::quick, model, cfg);
  int failed = 0;
  bool saw_negative = false;
  for (const CheckResult& r : results) {
    if (!r.pass) {
      ++failed;
      std::printf("       suite check failed: %s measured=%g bound=%g\n", r.name.c_str(),
                  r.measured, r.bound);
    }
    if (r.name.find("negative_control") != std::string::npos) saw_negative = true;
  }
  const bool pass = failed == 0 && saw_negative;
  report("C11", "verify quick suite on 17x16^2", pass, static_cast<double>(failed), 0.0,
         timer.seconds(), 60.0);
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");
  criterion_closed_form();
  criterion_determinant();
  criterion_cone_equivalence();
  criterion_sandwich_slopes();
  criterion_c2w_trend();
  criterion_energy_drift();
  criterion_aubin_yau();
  criterion_k_energy();
  criterion_metric_axioms();
  criterion_uniqueness();
  criterion_quick_suite();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
