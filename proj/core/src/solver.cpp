#include "sasaki/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "small_hermitian.hpp"

namespace sasaki {

namespace {

using Triplet = Eigen::Triplet<double>;

// Column coefficients of one residual row; rows have ~20 entries, so linear
// lookup beats a map.
struct RowAccumulator {
  std::vector<std::pair<std::int64_t, double>> entries;

  void add(std::int64_t col, double val) {
    if (val == 0.0) return;
    for (auto& e : entries) {
      if (e.first == col) {
        e.second += val;
        return;
      }
    }
    entries.emplace_back(col, val);
  }
  void clear() { entries.clear(); }
};

// Columns live on interior slices only; boundary slices are Dirichlet data.
inline std::int64_t column_index(int k, std::int64_t node, std::int64_t nodes) {
  return static_cast<std::int64_t>(k - 1) * nodes + node;
}

// Second-derivative stencil of d_a d_b into `row`, scaled by `scale`; columns
// on slice k of the unknown vector. Slice must be interior or the call is a
// no-op (handled by the caller via rhs adjustments when needed).
void add_d2_stencil(RowAccumulator& row, const Grid& g, std::int64_t node, int a, int b,
                    double scale, int k, std::int64_t nodes) {
  const std::int64_t base = static_cast<std::int64_t>(k - 1) * nodes;
  if (a == b) {
    const double h = g.spacing(a);
    const double w = scale / (h * h);
    row.add(base + g.shift(node, a, 1), w);
    row.add(base + node, -2.0 * w);
    row.add(base + g.shift(node, a, -1), w);
    return;
  }
  const double w = scale / (4.0 * g.spacing(a) * g.spacing(b));
  row.add(base + g.shift(g.shift(node, a, 1), b, 1), w);
  row.add(base + g.shift(g.shift(node, a, 1), b, -1), -w);
  row.add(base + g.shift(g.shift(node, a, -1), b, 1), -w);
  row.add(base + g.shift(g.shift(node, a, -1), b, -1), w);
}

// Contributions of Re( sum_{ij} w[i][j] * (CHess u)[j][i] ) where the complex
// Hessian entry is u_{j ibar} = (1/4)(dx_j dx_i + dy_j dy_i) u
//                             + (i/4)(dx_j dy_i - dy_j dx_i) u.
void add_hessian_contraction(RowAccumulator& row, const Grid& g, int n, std::int64_t node,
                             const Complex* w, int k, std::int64_t nodes) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Complex wij = w[i * n + j];
      const double re = 0.25 * wij.real();
      const double im = 0.25 * wij.imag();
      const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
      if (re != 0.0) {
        add_d2_stencil(row, g, node, xj, xi, re, k, nodes);
        add_d2_stencil(row, g, node, yj, yi, re, k, nodes);
      }
      if (i != j && im != 0.0) {
        add_d2_stencil(row, g, node, xj, yi, -im, k, nodes);
        add_d2_stencil(row, g, node, yj, xi, im, k, nodes);
      }
    }
  }
}

// First-derivative stencil of Re(c * Dz_i u) on slice k, where
// Dz_i = (1/2)(dx_i - i dy_i). Expands to (Re(c)/2) dx_i + (Im(c)/2) dy_i.
void add_dz_stencil(RowAccumulator& row, const Grid& g, std::int64_t node, int i, Complex c,
                    int k, std::int64_t nodes) {
  const std::int64_t base = static_cast<std::int64_t>(k - 1) * nodes;
  const int xi = 2 * i, yi = 2 * i + 1;
  const double wx = 0.5 * c.real() / (2.0 * g.spacing(xi));
  const double wy = 0.5 * c.imag() / (2.0 * g.spacing(yi));
  row.add(base + g.shift(node, xi, 1), wx);
  row.add(base + g.shift(node, xi, -1), -wx);
  row.add(base + g.shift(node, yi, 1), wy);
  row.add(base + g.shift(node, yi, -1), -wy);
}

SpatialField axpy_slice(const SpatialField& base, double alpha, const double* delta,
                        std::int64_t nodes) {
  SpatialField out = base;
  for (std::int64_t i = 0; i < nodes; ++i) out[i] += alpha * delta[i];
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(eps_min > 0.0) || !(eps_start >= eps_min)) {
    throw std::invalid_argument("SolverConfig: need eps_start >= eps_min > 0");
  }
  if (!(eps_factor > 0.0) || !(eps_factor < 1.0)) {
    throw std::invalid_argument("SolverConfig: eps_factor must lie in (0, 1)");
  }
  if (!(newton_tol > 0.0)) throw std::invalid_argument("SolverConfig: newton_tol must be > 0");
  if (max_newton < 1) throw std::invalid_argument("SolverConfig: max_newton must be >= 1");
  if (!(backtrack_factor > 0.0) || !(backtrack_factor < 1.0)) {
    throw std::invalid_argument("SolverConfig: backtrack_factor must lie in (0, 1)");
  }
  if (!(min_step > 0.0)) throw std::invalid_argument("SolverConfig: min_step must be > 0");
  if (!(m_init > 0.0)) throw std::invalid_argument("SolverConfig: m_init must be > 0");
}

Subsolution build_subsolution(const SpatialField& phi0, const SpatialField& phi1, int nt,
                              double m_init, const TransverseModel& model,
                              const SpatialField* min_rhs, int doublings_max) {
  if (phi0.size() != model.nodes() || phi1.size() != model.nodes()) {
    throw std::invalid_argument("build_subsolution: boundary field size mismatch");
  }
  if (nt < 2) throw std::invalid_argument("build_subsolution: nt must be >= 2");
  if (!(m_init > 0.0)) throw std::invalid_argument("build_subsolution: m must be positive");

  double m = m_init;
  for (int attempt = 0; attempt <= doublings_max; ++attempt, m *= 2.0) {
    PotentialPath path;
    path.nt = nt;
    path.slices.resize(static_cast<std::size_t>(nt) + 1);
    for (int k = 0; k <= nt; ++k) {
      const double t = path.time(k);
      SpatialField s(model.nodes());
      for (std::int64_t i = 0; i < model.nodes(); ++i) {
        s[i] = (1.0 - t) * phi0[i] + t * phi1[i] + m * t * (t - 1.0);
      }
      path.slices[static_cast<std::size_t>(k)] = std::move(s);
    }

    bool ok = true;
    for (int k = 1; k <= nt - 1 && ok; ++k) {
      const SpacetimeMatrices mats = assemble_node_matrices(path, k, model);
      for (std::int64_t node = 0; node < model.nodes(); ++node) {
        if (!mats.positive[static_cast<std::size_t>(node)]) {
          ok = false;
          break;
        }
        if (min_rhs != nullptr) {
          const double q_rho = 2.0 * mats.block_determinant(node) /
                               model.det_h[static_cast<std::size_t>(node)];
          if (q_rho < (*min_rhs)[node]) {
            ok = false;
            break;
          }
        }
      }
    }
    if (ok) return Subsolution{std::move(path), m};
  }
  throw std::runtime_error(
      "build_subsolution: positivity unreachable at the doubling cap "
      "(boundary data too rough for the grid)");
}

PotentialPath solve_supersolution(const SpatialField& phi0, const SpatialField& phi1, int nt,
                                  const TransverseModel& model) {
  if (phi0.size() != model.nodes() || phi1.size() != model.nodes()) {
    throw std::invalid_argument("solve_supersolution: boundary field size mismatch");
  }
  if (nt < 2) throw std::invalid_argument("solve_supersolution: nt must be >= 2");

  const std::int64_t N = model.nodes();
  const int interior = nt - 1;
  const std::int64_t unknowns = static_cast<std::int64_t>(interior) * N;
  const double dr = 0.5 / nt;  // r_k = 1 + t_k / 2

  SpatialField rho_bottom = phi0;
  SpatialField rho_top = phi1;
  const double top_offset = 4.0 * std::log(1.5);
  for (std::int64_t i = 0; i < N; ++i) rho_top[i] += top_offset;

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 16);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);

  RowAccumulator row;
  for (int k = 1; k <= interior; ++k) {
    const double r = 1.0 + 0.5 * (static_cast<double>(k) / nt);
    const double cr = 0.25 * r * r / (dr * dr);
    for (std::int64_t node = 0; node < N; ++node) {
      row.clear();
      const std::int64_t ri = column_index(k, node, N);

      row.add(ri, -2.0 * cr);
      if (k - 1 >= 1) {
        row.add(column_index(k - 1, node, N), cr);
      } else {
        rhs(ri) -= cr * rho_bottom[node];
      }
      if (k + 1 <= interior) {
        row.add(column_index(k + 1, node, N), cr);
      } else {
        rhs(ri) -= cr * rho_top[node];
      }

      // (1/2) h^{ij} rho_{ij} with the background metric.
      std::vector<Complex> w(static_cast<std::size_t>(model.n) * model.n);
      const Complex* hinv = model.h_inv.block(node);
      for (int e = 0; e < model.n * model.n; ++e) w[static_cast<std::size_t>(e)] = 0.5 * hinv[e];
      add_hessian_contraction(row, model.grid, model.n, node, w.data(), k, N);

      rhs(ri) -= static_cast<double>(model.n + 1);
      for (const auto& e : row.entries) {
        triplets.emplace_back(static_cast<int>(ri), static_cast<int>(e.first), e.second);
      }
    }
  }

  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("solve_supersolution: linear solve failed");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("solve_supersolution: linear solve failed");
  }

  ConeGrid cone;
  cone.r.resize(static_cast<std::size_t>(nt) + 1);
  cone.psi.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) {
    cone.r[static_cast<std::size_t>(k)] = 1.0 + 0.5 * (static_cast<double>(k) / nt);
    SpatialField s(N);
    if (k == 0) {
      s = rho_bottom;
    } else if (k == nt) {
      s = rho_top;
    } else {
      for (std::int64_t node = 0; node < N; ++node) s[node] = sol(column_index(k, node, N));
    }
    cone.psi[static_cast<std::size_t>(k)] = std::move(s);
  }
  return unlift(cone);
}

namespace {

// One damped Newton step; `ev` holds the evaluation at the current iterate on
// entry and the evaluation at the accepted iterate on return.
NewtonStats newton_step_impl(PotentialPath& path, double eps, const SpatialField& f,
                             const TransverseModel& model, const SolverConfig& cfg,
                             PathEvaluation& ev) {
  if (!ev.positive) {
    throw std::invalid_argument("newton_step: A(phi) is not positive at the current iterate");
  }
  NewtonStats stats;
  stats.residual_before = ev.max_abs_residual;
  if (ev.max_abs_residual <= 1e-15) {
    stats.residual_after = ev.max_abs_residual;
    return stats;
  }

  const std::int64_t N = model.nodes();
  const int interior = path.nt - 1;
  const std::int64_t unknowns = static_cast<std::int64_t>(interior) * N;
  const double dt = path.dt();
  const int n = model.n;
  const int dim = n + 1;

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 20);
  Eigen::VectorXd rhs(unknowns);

  RowAccumulator row;
  Complex chol[25], winv[25], col[5], work[5], w_spatial[16];
  for (int k = 1; k <= interior; ++k) {
    const SpacetimeMatrices mats = assemble_node_matrices(path, k, model);
    const double* res = ev.residual.data() + static_cast<std::size_t>(k - 1) * N;
    for (std::int64_t node = 0; node < N; ++node) {
      row.clear();
      const std::int64_t ri = column_index(k, node, N);
      rhs(ri) = -res[node];

      // dR = tr(A^{-1} dA); dA is linear in the FD derivatives of delta.
      // A > 0 at every Newton iterate, so Cholesky inversion applies.
      if (!detail::cholesky(dim, mats.block(node), chol)) {
        throw std::runtime_error("newton_step: iterate lost positivity");
      }
      detail::cholesky_inverse(dim, chol, winv, col, work);

      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w_spatial[i * n + j] = 0.5 * winv[i * dim + j];
      }
      add_hessian_contraction(row, model.grid, n, node, w_spatial, k, N);

      // Mixed entries: 2 Re( W[n][i] * (1/(4 dt)) Dz_i (delta_{k+1} - delta_{k-1}) ).
      for (int i = 0; i < n; ++i) {
        const Complex c = 2.0 * winv[(dim - 1) * dim + i] / (4.0 * dt);
        if (k + 1 <= interior) add_dz_stencil(row, model.grid, node, i, c, k + 1, N);
        if (k - 1 >= 1) add_dz_stencil(row, model.grid, node, i, -c, k - 1, N);
      }

      // Corner entry: W[n][n] * (1/2) * delta_tt.
      const double wc = 0.5 * winv[(dim - 1) * dim + (dim - 1)].real() / (dt * dt);
      row.add(column_index(k, node, N), -2.0 * wc);
      if (k + 1 <= interior) row.add(column_index(k + 1, node, N), wc);
      if (k - 1 >= 1) row.add(column_index(k - 1, node, N), wc);

      for (const auto& e : row.entries) {
        triplets.emplace_back(static_cast<int>(ri), static_cast<int>(e.first), e.second);
      }
    }
  }

  Eigen::SparseMatrix<double> J(unknowns, unknowns);
  J.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd delta;
  bool solved = false;
  if (cfg.linear_solver == LinearSolver::bicgstab_ilut) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> krylov;
    krylov.preconditioner().setDroptol(1e-4);
    krylov.preconditioner().setFillfactor(10);
    krylov.setTolerance(1e-12);
    krylov.setMaxIterations(400);
    krylov.compute(J);
    if (krylov.info() == Eigen::Success) {
      delta = krylov.solve(rhs);
      solved = (krylov.info() == Eigen::Success);
    }
  }
  if (!solved) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("newton_step: singular linear system");
    }
    delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("newton_step: linear solve failed");
    }
  }

  double alpha = 1.0;
  while (alpha >= cfg.min_step) {
    PotentialPath candidate = path;
    for (int k = 1; k <= interior; ++k) {
      candidate.slices[static_cast<std::size_t>(k)] =
          axpy_slice(path.slices[static_cast<std::size_t>(k)], alpha,
                     delta.data() + static_cast<std::int64_t>(k - 1) * N, N);
    }
    PathEvaluation after = evaluate_path(candidate, eps, f, model);
    if (after.positive && (after.max_abs_residual < stats.residual_before ||
                           after.max_abs_residual <= 1e-15)) {
      path = std::move(candidate);
      stats.residual_after = after.max_abs_residual;
      stats.step = alpha;
      ev = std::move(after);
      return stats;
    }
    alpha *= cfg.backtrack_factor;
    ++stats.backtracks;
  }
  throw std::runtime_error("newton_step: line search floor reached");
}

}  // namespace

NewtonStats newton_step(PotentialPath& path, double eps, const SpatialField& f,
                        const TransverseModel& model, const SolverConfig& cfg) {
  PathEvaluation ev = evaluate_path(path, eps, f, model);
  return newton_step_impl(path, eps, f, model, cfg, ev);
}

GeodesicSolution solve_geodesic(const SpatialField& phi0, const SpatialField& phi1, int nt,
                                const SolverConfig& cfg, const TransverseModel& model,
                                const SpatialField* rhs) {
  cfg.validate();
  if (!metric_matrix(phi0, model).admissible || !metric_matrix(phi1, model).admissible) {
    throw std::invalid_argument("solve_geodesic: boundary data is not an admissible metric");
  }
  const SpatialField f = (rhs != nullptr) ? *rhs : constant_field(model, 1.0);

  const auto t0 = std::chrono::steady_clock::now();
  GeodesicSolution out;

  SpatialField min_rhs(model.nodes());
  for (std::int64_t i = 0; i < model.nodes(); ++i) min_rhs[i] = cfg.eps_start * f[i];
  Subsolution sub =
      build_subsolution(phi0, phi1, nt, cfg.m_init, model, &min_rhs, cfg.m_doublings_max);
  out.path = std::move(sub.path);
  out.report.m_subsolution = sub.m;

  double eps = cfg.eps_start;
  bool all_converged = true;
  while (true) {
    StageReport stage;
    stage.eps = eps;
    bool stage_ok = false;
    PathEvaluation ev = evaluate_path(out.path, eps, f, model);
    try {
      for (int it = 0; it < cfg.max_newton; ++it) {
        if (!ev.positive) break;
        if (ev.max_abs_residual <= cfg.newton_tol) {
          stage_ok = true;
          break;
        }
        newton_step_impl(out.path, eps, f, model, cfg, ev);
        stage.iterations = it + 1;
      }
      stage_ok = stage_ok || (ev.positive && ev.max_abs_residual <= cfg.newton_tol);
    } catch (const std::runtime_error&) {
      stage_ok = false;  // line search floor; report, do not propagate
      ev = evaluate_path(out.path, eps, f, model);
    }

    // Stage diagnostics are re-evaluated on the path itself, never trusted
    // from the iteration history.
    const PathEvaluation final_ev = evaluate_path(out.path, eps, f, model);
    const C2wDiagnostics c2w = c2w_diagnostics(out.path, model);
    stage.final_residual = final_ev.max_abs_residual;
    stage.min_schur = final_ev.min_schur;
    stage.sup_abs_phitt = final_ev.sup_abs_phitt;
    stage.sup_abs_lap = c2w.sup_abs_lap;
    stage.sup_c2w = c2w.sup_c2w;
    out.report.stages.push_back(stage);

    if (!stage_ok) {
      all_converged = false;
      break;
    }
    if (eps <= cfg.eps_min) break;
    eps = std::max(eps * cfg.eps_factor, cfg.eps_min);
  }

  out.report.converged = all_converged;
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

double check_uniqueness(const SpatialField& phi0, const SpatialField& phi1, int nt,
                        const SolverConfig& cfg, const TransverseModel& model,
                        std::span<const double> seeds) {
  if (seeds.empty()) throw std::invalid_argument("check_uniqueness: no seeds");
  std::vector<PotentialPath> paths;
  paths.reserve(seeds.size());
  for (double m : seeds) {
    SolverConfig seeded = cfg;
    seeded.m_init = m;
    GeodesicSolution sol = solve_geodesic(phi0, phi1, nt, seeded, model);
    if (!sol.report.converged) {
      throw std::runtime_error("check_uniqueness: a seeded solve failed to converge");
    }
    paths.push_back(std::move(sol.path));
  }
  double max_diff = 0.0;
  for (std::size_t a = 0; a < paths.size(); ++a) {
    for (std::size_t b = a + 1; b < paths.size(); ++b) {
      for (int k = 0; k <= nt; ++k) {
        const SpatialField& fa = paths[a].slices[static_cast<std::size_t>(k)];
        const SpatialField& fb = paths[b].slices[static_cast<std::size_t>(k)];
        for (std::int64_t i = 0; i < fa.size(); ++i) {
          max_diff = std::max(max_diff, std::abs(fa[i] - fb[i]));
        }
      }
    }
  }
  return max_diff;
}

}  // namespace sasaki
