#include "sasaki/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sasaki/parallel.hpp"
#include "small_hermitian.hpp"

namespace sasaki {

namespace {

void check_interior(const PotentialPath& path, int k) {
  if (k < 1 || k > path.nt - 1) {
    throw std::out_of_range("time index is not an interior slice");
  }
}

void check_rhs(double eps, const SpatialField& f, const TransverseModel& model) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (f.size() != model.nodes()) throw std::invalid_argument("rhs field size mismatch");
  for (std::int64_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0)) throw std::invalid_argument("rhs field must be positive everywhere");
  }
}

// Shared assembly: spatial block from `hess_source`, time entries from
// first/second differences with spacing `step`. Used for both the time grid
// (step = dt) and the radial grid (step = dr, plus the explicit corner term).
struct BlockInputs {
  const MatrixField* h_phi;          // spatial block, already h + hess/2
  const std::vector<Complex>* mixed; // d/dz_i of the step-central derivative
  const SpatialField* second;        // second difference field
  double corner_shift = 0.0;         // added to the (n+1, n+1) entry
};

SpacetimeMatrices assemble_blocks(const BlockInputs& in, const TransverseModel& model) {
  const int n = model.n;
  if (n > 4) throw std::invalid_argument("space-time assembly supports n <= 4");
  const int dim = n + 1;
  SpacetimeMatrices out;
  out.n = n;
  out.nodes = model.nodes();
  out.a.assign(static_cast<std::size_t>(out.nodes) * dim * dim, Complex(0, 0));
  out.det_hphi.assign(static_cast<std::size_t>(out.nodes), 0.0);
  out.schur.assign(static_cast<std::size_t>(out.nodes), 0.0);
  out.det_a.assign(static_cast<std::size_t>(out.nodes), 0.0);
  out.positive.assign(static_cast<std::size_t>(out.nodes), 0);
  out.phi_tt.assign(static_cast<std::size_t>(out.nodes), 0.0);

  parallel_for(0, out.nodes, [&](std::int64_t node) {
    Complex* blk = out.block(node);
    const Complex* hp = in.h_phi->block(node);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) blk[i * dim + j] = hp[i * n + j];
    }
    for (int i = 0; i < n; ++i) {
      const Complex m = 0.5 * (*in.mixed)[static_cast<std::size_t>(node) * n + i];
      blk[i * dim + n] = m;
      blk[n * dim + i] = std::conj(m);
    }
    const double corner = 0.5 * (*in.second)[node] + in.corner_shift;
    blk[n * dim + n] = Complex(corner, 0.0);
    out.phi_tt[static_cast<std::size_t>(node)] = (*in.second)[node];

    Complex chol[16], c[4], work[4];
    const bool spatial_pd = detail::cholesky(n, hp, chol);
    double det = 0.0;
    double schur = -std::numeric_limits<double>::infinity();
    if (spatial_pd) {
      det = detail::cholesky_det(n, chol);
      for (int i = 0; i < n; ++i) c[i] = blk[i * dim + n];
      schur = corner - detail::cholesky_quadform(n, chol, c, work);
      out.det_a[static_cast<std::size_t>(node)] = det * schur;
    } else {
      det = detail::hermitian_det(n, hp);
      out.det_a[static_cast<std::size_t>(node)] = detail::hermitian_det(dim, blk);
    }
    out.det_hphi[static_cast<std::size_t>(node)] = det;
    out.schur[static_cast<std::size_t>(node)] = schur;
    out.positive[static_cast<std::size_t>(node)] = (spatial_pd && schur > 0.0) ? 1 : 0;
  });
  return out;
}

SpatialField central_time_derivative(const PotentialPath& path, int k, double step) {
  const SpatialField& plus = path.slices[static_cast<std::size_t>(k + 1)];
  const SpatialField& minus = path.slices[static_cast<std::size_t>(k - 1)];
  SpatialField out(plus.size());
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out[i] = (plus[i] - minus[i]) / (2.0 * step);
  }
  return out;
}

SpatialField second_time_difference(const PotentialPath& path, int k, double step) {
  const SpatialField& plus = path.slices[static_cast<std::size_t>(k + 1)];
  const SpatialField& mid = path.slices[static_cast<std::size_t>(k)];
  const SpatialField& minus = path.slices[static_cast<std::size_t>(k - 1)];
  SpatialField out(plus.size());
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out[i] = (plus[i] - 2.0 * mid[i] + minus[i]) / (step * step);
  }
  return out;
}

}  // namespace

PotentialPath PotentialPath::constant(int nt, const TransverseModel& model, double value) {
  if (nt < 2) throw std::invalid_argument("PotentialPath: nt must be >= 2");
  PotentialPath p;
  p.nt = nt;
  p.slices.assign(static_cast<std::size_t>(nt) + 1, SpatialField(model.nodes(), value));
  return p;
}

SpacetimeMatrices assemble_node_matrices(const PotentialPath& path, int k,
                                         const TransverseModel& model) {
  check_interior(path, k);
  const double dt = path.dt();
  const MetricResult metric = metric_matrix(path.slices[static_cast<std::size_t>(k)], model);
  const SpatialField phi_t = central_time_derivative(path, k, dt);
  const std::vector<Complex> mixed = complex_gradient(phi_t, model);
  const SpatialField phi_tt = second_time_difference(path, k, dt);
  BlockInputs in{&metric.h_phi, &mixed, &phi_tt, 0.0};
  return assemble_blocks(in, model);
}

PathEvaluation evaluate_path(const PotentialPath& path, double eps, const SpatialField& f,
                             const TransverseModel& model) {
  check_rhs(eps, f, model);
  PathEvaluation ev;
  ev.positive = true;
  ev.min_schur = std::numeric_limits<double>::infinity();
  ev.residual.assign(static_cast<std::size_t>(path.nt - 1) * model.nodes(), 0.0);
  for (int k = 1; k <= path.nt - 1; ++k) {
    const SpacetimeMatrices mats = assemble_node_matrices(path, k, model);
    double* res = ev.residual.data() + static_cast<std::size_t>(k - 1) * model.nodes();
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      if (!mats.positive[static_cast<std::size_t>(node)]) {
        ev.positive = false;
        return ev;
      }
      const double target = 0.5 * eps * f[node] * model.det_h[static_cast<std::size_t>(node)];
      res[node] = std::log(mats.block_determinant(node)) - std::log(target);
      ev.max_abs_residual = std::max(ev.max_abs_residual, std::abs(res[node]));
      ev.min_schur = std::min(ev.min_schur, mats.schur[static_cast<std::size_t>(node)]);
      const double tt = std::abs(mats.phi_tt[static_cast<std::size_t>(node)]);
      ev.sup_abs_phitt = std::max(ev.sup_abs_phitt, tt);
    }
  }
  return ev;
}

C2wDiagnostics c2w_diagnostics(const PotentialPath& path, const TransverseModel& model) {
  C2wDiagnostics d;
  for (int k = 0; k <= path.nt; ++k) {
    const SpatialField lap = transverse_laplacian(path.slices[static_cast<std::size_t>(k)], model);
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      d.sup_abs_lap = std::max(d.sup_abs_lap, std::abs(lap[node]));
    }
  }
  for (int k = 1; k <= path.nt - 1; ++k) {
    const SpatialField lap = transverse_laplacian(path.slices[static_cast<std::size_t>(k)], model);
    const SpatialField tt = second_time_difference(path, k, path.dt());
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      d.sup_c2w = std::max(d.sup_c2w, std::abs(tt[node]) + std::abs(lap[node]));
    }
  }
  return d;
}

std::vector<double> ma_residual(const PotentialPath& path, double eps, const SpatialField& f,
                                const TransverseModel& model) {
  PathEvaluation ev = evaluate_path(path, eps, f, model);
  if (!ev.positive) {
    throw std::invalid_argument("ma_residual: A(phi) is not positive at some interior node");
  }
  return std::move(ev.residual);
}

ConeGrid lift(const PotentialPath& path) {
  ConeGrid cone;
  cone.r.resize(static_cast<std::size_t>(path.nt) + 1);
  cone.psi.resize(static_cast<std::size_t>(path.nt) + 1);
  for (int k = 0; k <= path.nt; ++k) {
    const double r = 1.0 + 0.5 * path.time(k);
    cone.r[static_cast<std::size_t>(k)] = r;
    const double offset = 4.0 * std::log(r);
    SpatialField psi = path.slices[static_cast<std::size_t>(k)];
    for (std::int64_t i = 0; i < psi.size(); ++i) psi[i] += offset;
    cone.psi[static_cast<std::size_t>(k)] = std::move(psi);
  }
  return cone;
}

PotentialPath unlift(const ConeGrid& cone) {
  PotentialPath path;
  path.nt = static_cast<int>(cone.r.size()) - 1;
  path.slices.resize(cone.r.size());
  for (std::size_t k = 0; k < cone.r.size(); ++k) {
    const double offset = 4.0 * std::log(cone.r[k]);
    SpatialField phi = cone.psi[k];
    for (std::int64_t i = 0; i < phi.size(); ++i) phi[i] -= offset;
    path.slices[k] = std::move(phi);
  }
  return path;
}

double cone_identity_check(const PotentialPath& path, double eps, const SpatialField& f,
                           const TransverseModel& model) {
  return cone_identity_discrepancy(lift(path), path, eps, f, model);
}

double cone_identity_discrepancy(const ConeGrid& cone, const PotentialPath& path, double eps,
                                 const SpatialField& f, const TransverseModel& model) {
  check_rhs(eps, f, model);
  if (cone.r.size() != path.slices.size()) {
    throw std::invalid_argument("cone_identity_discrepancy: grid size mismatch");
  }
  const double dr = cone.dr();
  double max_disc = 0.0;
  PotentialPath cone_as_path;  // reuse the time-difference helpers on the r grid
  cone_as_path.nt = path.nt;
  cone_as_path.slices = cone.psi;

  for (int k = 1; k <= path.nt - 1; ++k) {
    const double r = cone.r[static_cast<std::size_t>(k)];

    // Left side: direct determinant of the cone matrix assembled from psi.
    MetricResult psi_metric = metric_matrix(cone.psi[static_cast<std::size_t>(k)], model);
    const SpatialField psi_r = central_time_derivative(cone_as_path, k, dr);
    std::vector<Complex> psi_mixed = complex_gradient(psi_r, model);
    for (Complex& c : psi_mixed) c *= 0.5;  // off-diagonal entry is psi_{r i}/4
    SpatialField psi_rr = second_time_difference(cone_as_path, k, dr);
    SpatialField quarter_rr(psi_rr.size());
    for (std::int64_t i = 0; i < psi_rr.size(); ++i) quarter_rr[i] = 0.25 * psi_rr[i];
    BlockInputs in{&psi_metric.h_phi, &psi_mixed, &quarter_rr, 0.5 / (r * r)};
    const SpacetimeMatrices cone_mats = assemble_blocks(in, model);

    // Right side: time-variable quantities.
    const SpacetimeMatrices time_mats = assemble_node_matrices(path, k, model);

    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      // Both sides are plain determinants; the identity holds (and is
      // checked) also on degenerate configurations such as the zero path.
      const double det_h = model.det_h[static_cast<std::size_t>(node)];
      const double lhs =
          2.0 * r * r * detail::hermitian_det(model.n + 1, cone_mats.block(node)) / det_h;
      const double rhs = 2.0 * r * r * time_mats.det_a[static_cast<std::size_t>(node)] / det_h;
      const double denom = std::max(std::abs(rhs), eps * f[node]);
      max_disc = std::max(max_disc, std::abs(lhs - rhs) / denom);
    }
  }
  return max_disc;
}

SpatialField transverse_laplacian(const SpatialField& field, const TransverseModel& model) {
  if (field.size() != model.nodes()) {
    throw std::invalid_argument("transverse_laplacian: field size mismatch");
  }
  SpatialField out(model.nodes());
  const Grid& g = model.grid;
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    double acc = 0.0;
    for (int a = 0; a < g.axes(); ++a) {
      const double h = g.spacing(a);
      acc += (field[g.shift(node, a, 1)] - 2.0 * field[node] + field[g.shift(node, a, -1)]) /
             (h * h);
    }
    out[node] = acc;
  });
  return out;
}

SpatialField constant_field(const TransverseModel& model, double value) {
  return SpatialField(model.nodes(), value);
}

}  // namespace sasaki
