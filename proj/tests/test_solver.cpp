#include <doctest.h>

#include <cmath>

#include "sasaki/cone.hpp"
#include "sasaki/generators.hpp"
#include "sasaki/solver.hpp"

using namespace sasaki;

namespace {

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

}  // namespace

TEST_CASE("build_subsolution") {
  auto model = TransverseModel::flat_torus(1, {16, 4});

  SUBCASE("constant data is positive at m = 1 with the documented midpoint value") {
    SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
    const Subsolution sub = build_subsolution(a, b, 8, 1.0, model);
    CHECK(sub.m == 1.0);
    CHECK(sub.path.slices[4][0] == doctest::Approx(0.25).epsilon(1e-15));
    const SpacetimeMatrices mats = assemble_node_matrices(sub.path, 4, model);
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      CHECK(mats.positive[static_cast<std::size_t>(node)]);
      CHECK(mats.phi_tt[static_cast<std::size_t>(node)] == doctest::Approx(2.0).epsilon(1e-12));
    }
  }

  SUBCASE("wavy data keeps the Schur complement positive at the returned m") {
    SpatialField a(model.nodes(), 0.0);
    const SpatialField b = cosine_field(model, 0.05);
    const Subsolution sub = build_subsolution(a, b, 16, 1.0, model);
    for (int k = 1; k <= 15; ++k) {
      const SpacetimeMatrices mats = assemble_node_matrices(sub.path, k, model);
      for (std::int64_t node = 0; node < model.nodes(); ++node) {
        CHECK(mats.schur[static_cast<std::size_t>(node)] > 0.0);
      }
    }
  }
}

TEST_CASE("solve_supersolution closed form for homogeneous data") {
  // rho_hat(t) = 4 log(1 + t/2) - 4 t log(3/2); rho_hat(1/2) ~ 0.0816.
  auto model = TransverseModel::flat_torus(1, {8, 4});
  const int nt = 32;
  SpatialField zero(model.nodes(), 0.0);
  const PotentialPath super = solve_supersolution(zero, zero, nt, model);

  CHECK(std::abs(super.slices.front()[0]) <= 1e-14);
  CHECK(std::abs(super.slices.back()[0]) <= 1e-14);
  for (int k = 0; k <= nt; ++k) {
    const double t = super.time(k);
    const double expect = 4.0 * std::log(1.0 + 0.5 * t) - 4.0 * t * std::log(1.5);
    for (std::int64_t i = 0; i < model.nodes(); ++i) {
      CHECK(super.slices[static_cast<std::size_t>(k)][i] ==
            doctest::Approx(expect).epsilon(0).scale(1).epsilon(2e-4));
      CHECK(super.slices[static_cast<std::size_t>(k)][i] >= -1e-12);
    }
  }
  CHECK(super.slices[16][0] == doctest::Approx(0.0816).epsilon(5e-3));
}

TEST_CASE("newton_step") {
  auto model = TransverseModel::flat_torus(1, {16, 4});
  const SpatialField f(model.nodes(), 1.0);
  SolverConfig cfg;

  SUBCASE("a solved path takes a null step") {
    PotentialPath p;
    p.nt = 8;
    p.slices.resize(9);
    const double eps = 0.25;
    for (int k = 0; k <= 8; ++k) {
      p.slices[static_cast<std::size_t>(k)] =
          SpatialField(model.nodes(), homogeneous_value(0.0, 1.0, eps, p.time(k)));
    }
    const NewtonStats st = newton_step(p, eps, f, model, cfg);
    CHECK(st.step == 0.0);
    CHECK(st.residual_after <= 1e-12);
  }

  SUBCASE("homogeneous start converges to phi_tt = eps within 12 iterations") {
    SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
    Subsolution sub = build_subsolution(a, b, 32, 1.0, model);
    const double eps = 0.1;
    int iters = 0;
    double res = evaluate_path(sub.path, eps, f, model).max_abs_residual;
    while (res > cfg.newton_tol && iters < 12) {
      res = newton_step(sub.path, eps, f, model, cfg).residual_after;
      ++iters;
    }
    CHECK(res <= cfg.newton_tol);
    CHECK(iters <= 12);
    CHECK(sup_error_vs_homogeneous(sub.path, 0.0, 1.0, eps) <= 1e-9);
  }

  SUBCASE("residual decreases on every accepted step and converges quadratically") {
    const SpatialField phi1 = cosine_field(model, 0.05);
    SpatialField phi0(model.nodes(), 0.0);
    Subsolution sub = build_subsolution(phi0, phi1, 8, 1.0, model);
    const double eps = 0.5;
    double prev = evaluate_path(sub.path, eps, f, model).max_abs_residual;
    double last_drop = 0.0;
    for (int i = 0; i < 8 && prev > 1e-13; ++i) {
      const NewtonStats st = newton_step(sub.path, eps, f, model, cfg);
      CHECK(st.residual_after < prev);
      last_drop = st.residual_after / std::max(prev, 1e-300);
      prev = st.residual_after;
    }
    CHECK(prev <= 1e-9);
    CHECK(last_drop <= 1e-2);  // far better than a linear rate near the root
  }
}

TEST_CASE("solve_geodesic closed forms") {
  auto model = TransverseModel::flat_torus(1, {8, 4});
  SolverConfig cfg;

  SUBCASE("0 -> 1 at eps = 0.1 matches t + 0.05 t(t-1)") {
    cfg.eps_min = 0.1;
    SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
    const GeodesicSolution sol = solve_geodesic(a, b, 32, cfg, model);
    REQUIRE(sol.report.converged);
    CHECK(sol.path.slices[16][0] == doctest::Approx(0.4875).epsilon(1e-9));
    CHECK(sup_error_vs_homogeneous(sol.path, 0.0, 1.0, 0.1) <= 1e-8);
  }

  SUBCASE("0 -> 0 gives (eps/2) t(t-1) with midpoint -eps/8") {
    cfg.eps_min = 0.2;
    SpatialField a(model.nodes(), 0.0);
    const GeodesicSolution sol = solve_geodesic(a, a, 16, cfg, model);
    REQUIRE(sol.report.converged);
    CHECK(sol.path.slices[8][0] == doctest::Approx(-0.2 / 8.0).epsilon(1e-9));
  }

  SUBCASE("constant-shift data recovers the linear geodesic plus the eps parabola") {
    // For spatially constant phi0 the correction (eps/2) t(t-1) is exact;
    // rho_phi = 1 makes phi_tt = eps hold pointwise.
    cfg.eps_min = 0.05;
    SpatialField a(model.nodes(), 0.3);
    SpatialField b(model.nodes(), 2.3);
    const GeodesicSolution sol = solve_geodesic(a, b, 16, cfg, model);
    REQUIRE(sol.report.converged);
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k) {
      const double t = sol.path.time(k);
      for (std::int64_t i = 0; i < model.nodes(); ++i) {
        const double expect = 0.3 + 2.0 * t + 0.5 * 0.05 * t * (t - 1.0);
        worst = std::max(worst, std::abs(sol.path.slices[static_cast<std::size_t>(k)][i] - expect));
      }
    }
    CHECK(worst <= 1e-8);

    // Wavy phi0: the linear geodesic phi0 + t C is recovered as eps -> 0,
    // the gap being the O(eps) regularization parabola.
    cfg.eps_min = 1e-3;
    const SpatialField wa = cosine_field(model, 0.03);
    SpatialField wb = wa;
    for (std::int64_t i = 0; i < wb.size(); ++i) wb[i] += 2.0;
    const GeodesicSolution wavy = solve_geodesic(wa, wb, 16, cfg, model);
    REQUIRE(wavy.report.converged);
    double gap = 0.0;
    for (int k = 0; k <= 16; ++k) {
      const double t = wavy.path.time(k);
      for (std::int64_t i = 0; i < model.nodes(); ++i) {
        gap = std::max(gap, std::abs(wavy.path.slices[static_cast<std::size_t>(k)][i] -
                                     (wa[i] + 2.0 * t)));
      }
    }
    CHECK(gap <= 2.5e-4);  // ~ eps/8 with the measure-density modulation
  }

  SUBCASE("inadmissible boundary data is rejected") {
    const SpatialField bad = cosine_field(model, 0.2);
    SpatialField zero(model.nodes(), 0.0);
    CHECK_THROWS_AS(solve_geodesic(zero, bad, 8, cfg, model), std::invalid_argument);
  }

  SUBCASE("stage diagnostics are recorded per eps") {
    cfg.eps_min = 0.25;
    SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
    const GeodesicSolution sol = solve_geodesic(a, b, 8, cfg, model);
    REQUIRE(sol.report.converged);
    REQUIRE(sol.report.stages.size() == 3);  // eps = 1, 0.5, 0.25
    CHECK(sol.report.stages.front().eps == 1.0);
    CHECK(sol.report.stages.back().eps == 0.25);
    for (const StageReport& st : sol.report.stages) {
      CHECK(st.final_residual <= cfg.newton_tol);
      CHECK(st.min_schur > 0.0);
    }
  }
}

TEST_CASE("monotone regularization gap for homogeneous data") {
  // phi_eps(t) - phi_eps'(t) = ((eps - eps')/2) t(t-1): sup = |eps - eps'|/8.
  auto model = TransverseModel::flat_torus(1, {8, 4});
  SolverConfig cfg;
  SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
  cfg.eps_min = 0.1;
  const GeodesicSolution s1 = solve_geodesic(a, b, 16, cfg, model);
  cfg.eps_min = 0.05;
  const GeodesicSolution s2 = solve_geodesic(a, b, 16, cfg, model);
  REQUIRE(s1.report.converged);
  REQUIRE(s2.report.converged);
  double sup = 0.0;
  for (int k = 0; k <= 16; ++k) {
    for (std::int64_t i = 0; i < model.nodes(); ++i) {
      sup = std::max(sup, std::abs(s1.path.slices[static_cast<std::size_t>(k)][i] -
                                   s2.path.slices[static_cast<std::size_t>(k)][i]));
    }
  }
  CHECK(sup == doctest::Approx(0.05 / 8.0).epsilon(1e-7));
}

TEST_CASE("check_uniqueness") {
  auto model = TransverseModel::flat_torus(1, {12, 4});
  SolverConfig cfg;
  cfg.eps_min = 1e-2;

  SUBCASE("identical seeds give zero discrepancy") {
    SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
    const double seeds[] = {1.0, 1.0};
    CHECK(check_uniqueness(a, b, 8, cfg, model, seeds) == 0.0);
  }

  SUBCASE("homogeneous data, seeds 1 and 4") {
    SpatialField a(model.nodes(), 0.0), b(model.nodes(), 1.0);
    const double seeds[] = {1.0, 4.0};
    CHECK(check_uniqueness(a, b, 16, cfg, model, seeds) <= 1e-8);
  }

  SUBCASE("wavy data, two seeds agree within 10x newton_tol") {
    SpatialField a(model.nodes(), 0.0);
    const SpatialField b = cosine_field(model, 0.05);
    const double seeds[] = {1.0, 4.0};
    CHECK(check_uniqueness(a, b, 12, cfg, model, seeds) <= 10.0 * cfg.newton_tol);
  }
}
