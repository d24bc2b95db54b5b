#include <doctest.h>

#include <cmath>
#include <random>

#include "sasaki/cone.hpp"
#include "sasaki/generators.hpp"
#include "sasaki/solver.hpp"

using namespace sasaki;

namespace {

constexpr double kPi = 3.14159265358979323846;

// phi(t) = a + (b-a) t + (eps/2) t (t-1), the closed-form regularized geodesic
// for homogeneous data.
PotentialPath homogeneous_path(const TransverseModel& model, int nt, double a, double b,
                               double eps) {
  PotentialPath p;
  p.nt = nt;
  p.slices.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) {
    const double t = p.time(k);
    p.slices[static_cast<std::size_t>(k)] =
        SpatialField(model.nodes(), a + (b - a) * t + 0.5 * eps * t * (t - 1.0));
  }
  return p;
}

PotentialPath path_from_profile(const TransverseModel& model, int nt,
                                const std::vector<SpatialField>& slices) {
  PotentialPath p;
  p.nt = nt;
  p.slices = slices;
  return p;
}

}  // namespace

TEST_CASE("assemble_node_matrices") {
  auto model = TransverseModel::flat_torus(1, {32, 4});
  const int nt = 8;

  SUBCASE("zero path is degenerate: A = diag(h, 0)") {
    const PotentialPath p = PotentialPath::constant(nt, model, 0.0);
    const SpacetimeMatrices mats = assemble_node_matrices(p, 3, model);
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      CHECK(mats.map(node)(0, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(std::abs(mats.map(node)(0, 1)) <= 1e-15);
      CHECK(std::abs(mats.map(node)(1, 1)) <= 1e-15);
      CHECK(std::abs(mats.block_determinant(node)) <= 1e-15);
      CHECK_FALSE(mats.positive[static_cast<std::size_t>(node)]);
    }
  }

  SUBCASE("phi = t^2 gives A = diag(h, 1) and det A = det h") {
    std::vector<SpatialField> slices;
    for (int k = 0; k <= nt; ++k) {
      const double t = static_cast<double>(k) / nt;
      slices.emplace_back(model.nodes(), t * t);
    }
    const PotentialPath p = path_from_profile(model, nt, slices);
    const SpacetimeMatrices mats = assemble_node_matrices(p, 4, model);
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      CHECK(mats.map(node)(1, 1).real() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(mats.block_determinant(node) ==
            doctest::Approx(model.det_h[static_cast<std::size_t>(node)]).epsilon(1e-12));
      CHECK(mats.positive[static_cast<std::size_t>(node)]);
    }
  }

  SUBCASE("phi = t cos(2 pi x) is non-admissible with det A = -(1/4)|phi_tz|^2") {
    std::vector<SpatialField> slices;
    const SpatialField c = cosine_field(model, 1.0);
    for (int k = 0; k <= nt; ++k) {
      const double t = static_cast<double>(k) / nt;
      SpatialField s(model.nodes());
      for (std::int64_t i = 0; i < s.size(); ++i) s[i] = t * c[i];
      slices.push_back(std::move(s));
    }
    const PotentialPath p = path_from_profile(model, nt, slices);
    const SpacetimeMatrices mats = assemble_node_matrices(p, 1, model);
    bool flagged = false;
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      const double x = model.grid.position(node, 0);
      const double exact = -0.25 * kPi * kPi * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * x);
      CHECK(mats.det_a[static_cast<std::size_t>(node)] ==
            doctest::Approx(exact).epsilon(0.02).scale(1.0));
      if (!mats.positive[static_cast<std::size_t>(node)]) flagged = true;
    }
    CHECK(flagged);
  }

  SUBCASE("index bounds") {
    const PotentialPath p = PotentialPath::constant(nt, model, 0.0);
    CHECK_THROWS_AS(assemble_node_matrices(p, 0, model), std::out_of_range);
    CHECK_THROWS_AS(assemble_node_matrices(p, nt, model), std::out_of_range);
  }
}

TEST_CASE("block determinant identity on random admissible nodes") {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int n : {1, 2}) {
    const int dim = n + 1;
    for (int sample = 0; sample < 2000; ++sample) {
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
      CHECK(std::abs(direct - block) <= 1e-12 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("admissibility implies discrete time-convexity and the slope chain") {
  auto model = TransverseModel::flat_torus(1, {16, 4});
  const int nt = 16;
  const SpatialField phi1 = random_bandlimited_field(model, 31, 0.03);
  const SpatialField phi0(model.nodes(), 0.0);
  const Subsolution sub = build_subsolution(phi0, phi1, nt, 1.0, model);

  for (int k = 1; k <= nt - 1; ++k) {
    const SpacetimeMatrices mats = assemble_node_matrices(sub.path, k, model);
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      REQUIRE(mats.positive[static_cast<std::size_t>(node)]);
      CHECK(mats.phi_tt[static_cast<std::size_t>(node)] > 0.0);
    }
  }
  const double dt = sub.path.dt();
  for (std::int64_t i = 0; i < model.nodes(); ++i) {
    const double fwd = (sub.path.slices[1][i] - sub.path.slices[0][i]) / dt;
    const double bwd = (sub.path.slices[static_cast<std::size_t>(nt)][i] -
                        sub.path.slices[static_cast<std::size_t>(nt) - 1][i]) /
                       dt;
    const double gap = phi1[i] - phi0[i];
    CHECK(fwd <= gap + 1e-13);
    CHECK(gap <= bwd + 1e-13);
  }
}

TEST_CASE("ma_residual") {
  auto model = TransverseModel::flat_torus(1, {16, 4});
  const int nt = 8;
  const SpatialField f(model.nodes(), 1.0);

  SUBCASE("closed-form homogeneous solution has zero residual") {
    const double eps = 0.37;
    const PotentialPath p = homogeneous_path(model, nt, 0.0, 1.0, eps);
    const std::vector<double> r = ma_residual(p, eps, f, model);
    for (double v : r) CHECK(std::abs(v) <= 1e-12);
  }

  SUBCASE("phi_tt = 2 at eps = 2 solves; at eps = 1 the residual is log 2") {
    std::vector<SpatialField> slices;
    for (int k = 0; k <= nt; ++k) {
      const double t = static_cast<double>(k) / nt;
      slices.emplace_back(model.nodes(), t * t);
    }
    const PotentialPath p = path_from_profile(model, nt, slices);
    for (double v : ma_residual(p, 2.0, f, model)) CHECK(std::abs(v) <= 1e-12);
    for (double v : ma_residual(p, 1.0, f, model)) {
      CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
  }

  SUBCASE("error paths") {
    const PotentialPath p = PotentialPath::constant(nt, model, 0.0);  // degenerate
    CHECK_THROWS_AS(ma_residual(p, 1.0, f, model), std::invalid_argument);
    const PotentialPath good = homogeneous_path(model, nt, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(ma_residual(good, 0.0, f, model), std::invalid_argument);
    SpatialField bad_f(model.nodes(), 1.0);
    bad_f[3] = -1.0;
    CHECK_THROWS_AS(ma_residual(good, 1.0, bad_f, model), std::invalid_argument);
  }
}

TEST_CASE("lift and unlift") {
  auto model = TransverseModel::flat_torus(1, {8, 4});
  const int nt = 6;

  SUBCASE("zero path lifts to 4 log r with the documented top value") {
    const PotentialPath p = PotentialPath::constant(nt, model, 0.0);
    const ConeGrid cone = lift(p);
    CHECK(cone.r.front() == doctest::Approx(1.0));
    CHECK(cone.r.back() == doctest::Approx(1.5));
    CHECK(cone.psi.back()[0] == doctest::Approx(1.6218604).epsilon(1e-7));
    CHECK(cone.psi.back()[0] == doctest::Approx(4.0 * std::log(1.5)).epsilon(1e-15));
  }

  SUBCASE("unit boundary slice obeys psi = phi1 + 4 log(3/2)") {
    PotentialPath p = PotentialPath::constant(nt, model, 0.0);
    p.slices.back() = SpatialField(model.nodes(), 1.0);
    const ConeGrid cone = lift(p);
    CHECK(cone.psi.back()[0] == doctest::Approx(1.0 + 4.0 * std::log(1.5)).epsilon(1e-15));
  }

  SUBCASE("round trip is the identity to machine precision") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PotentialPath p = PotentialPath::constant(nt, model, 0.0);
    for (auto& slice : p.slices) {
      for (std::int64_t i = 0; i < slice.size(); ++i) slice[i] = u(rng);
    }
    const PotentialPath q = unlift(lift(p));
    for (int k = 0; k <= nt; ++k) {
      for (std::int64_t i = 0; i < model.nodes(); ++i) {
        CHECK(std::abs(q.slices[static_cast<std::size_t>(k)][i] -
                       p.slices[static_cast<std::size_t>(k)][i]) <= 1e-14);
      }
    }
  }
}

TEST_CASE("cone_identity_check") {
  auto model = TransverseModel::flat_torus(1, {8, 4});
  const SpatialField f(model.nodes(), 1.0);

  SUBCASE("homogeneous eps-solution at nt = 64 stays below 1e-3 and refines ~4x") {
    const double eps = 0.1;
    const double d64 = cone_identity_check(homogeneous_path(model, 64, 0.0, 1.0, eps), eps, f,
                                           model);
    const double d128 = cone_identity_check(homogeneous_path(model, 128, 0.0, 1.0, eps), eps, f,
                                            model);
    CHECK(d64 <= 1e-3);
    CHECK(d64 / d128 >= 3.5);
  }

  SUBCASE("zero path: both sides vanish to truncation") {
    PotentialPath p = PotentialPath::constant(32, model, 0.0);
    const double d = cone_identity_check(p, 1.0, f, model);
    CHECK(d <= 1e-3);
  }

  SUBCASE("random admissible smooth path refines ~4x") {
    const SpatialField phi1 = random_bandlimited_field(model, 77, 0.03);
    const SpatialField phi0(model.nodes(), 0.0);
    double disc[2];
    int idx = 0;
    for (int nt : {32, 64}) {
      const Subsolution sub = build_subsolution(phi0, phi1, nt, 1.0, model);
      disc[idx++] = cone_identity_check(sub.path, 1.0, f, model);
    }
    CHECK(disc[0] / disc[1] >= 3.0);
  }
}
