#include "sasaki/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "sasaki/parallel.hpp"
#include "small_hermitian.hpp"

namespace sasaki {

namespace {

void check_field(const SpatialField& f, const TransverseModel& model, const char* what) {
  if (f.size() != model.nodes()) {
    throw std::invalid_argument(std::string(what) +
                                ": field size does not match the model grid");
  }
}

// Central first difference along a real axis.
inline double d1(const SpatialField& f, const Grid& g, std::int64_t node, int axis) {
  const double h = g.spacing(axis);
  return (f[g.shift(node, axis, 1)] - f[g.shift(node, axis, -1)]) / (2.0 * h);
}

// Central second difference; mixed derivatives use the four-corner stencil.
inline double d2(const SpatialField& f, const Grid& g, std::int64_t node, int a, int b) {
  if (a == b) {
    const double h = g.spacing(a);
    return (f[g.shift(node, a, 1)] - 2.0 * f[node] + f[g.shift(node, a, -1)]) / (h * h);
  }
  const double ha = g.spacing(a);
  const double hb = g.spacing(b);
  const std::int64_t pp = g.shift(g.shift(node, a, 1), b, 1);
  const std::int64_t pm = g.shift(g.shift(node, a, 1), b, -1);
  const std::int64_t mp = g.shift(g.shift(node, a, -1), b, 1);
  const std::int64_t mm = g.shift(g.shift(node, a, -1), b, -1);
  return (f[pp] - f[pm] - f[mp] + f[mm]) / (4.0 * ha * hb);
}

}  // namespace

Grid Grid::make(std::vector<int> dims_in) {
  Grid g;
  g.dims = std::move(dims_in);
  if (g.dims.empty()) throw std::invalid_argument("Grid: no axes");
  for (int d : g.dims) {
    if (d < 3) throw std::invalid_argument("Grid: every axis needs at least 3 nodes");
  }
  g.strides.assign(g.dims.size(), 1);
  for (int a = static_cast<int>(g.dims.size()) - 2; a >= 0; --a) {
    g.strides[static_cast<std::size_t>(a)] =
        g.strides[static_cast<std::size_t>(a) + 1] * g.dims[static_cast<std::size_t>(a) + 1];
  }
  g.total = g.strides[0] * g.dims[0];
  return g;
}

TransverseModel TransverseModel::flat_torus(int n, std::vector<int> dims) {
  if (n < 1 || n > 4) {
    throw std::invalid_argument("TransverseModel: supported transverse dimension is 1..4");
  }
  if (static_cast<int>(dims.size()) != 2 * n) {
    throw std::invalid_argument("TransverseModel: expected 2n grid axes");
  }
  TransverseModel m;
  m.n = n;
  m.grid = Grid::make(std::move(dims));
  const std::int64_t N = m.grid.total;
  m.h = MatrixField(n, N);
  m.h_inv = MatrixField(n, N);
  m.det_h.assign(static_cast<std::size_t>(N), std::pow(0.5, n));
  m.density.assign(static_cast<std::size_t>(N), 1.0);  // det(2h) = 1 for h = Id/2
  m.weights.assign(static_cast<std::size_t>(N), 1.0 / static_cast<double>(N));
  for (std::int64_t node = 0; node < N; ++node) {
    for (int i = 0; i < n; ++i) {
      m.h.at(node, i, i) = Complex(0.5, 0.0);
      m.h_inv.at(node, i, i) = Complex(2.0, 0.0);
    }
  }
  return m;
}

double TransverseModel::integrate_background(const SpatialField& u) const {
  check_field(u, *this, "integrate_background");
  double acc = 0.0;
  for (std::int64_t node = 0; node < nodes(); ++node) acc += mu0(node) * u[node];
  return acc;
}

double integrate_measure(const SpatialField& u, const SpatialField& rho_phi,
                         const TransverseModel& model) {
  check_field(u, model, "integrate_measure");
  check_field(rho_phi, model, "integrate_measure");
  double acc = 0.0;
  for (std::int64_t node = 0; node < model.nodes(); ++node) {
    acc += model.mu0(node) * rho_phi[node] * u[node];
  }
  return acc;
}

std::vector<Complex> complex_gradient(const SpatialField& field, const TransverseModel& model) {
  check_field(field, model, "complex_gradient");
  const int n = model.n;
  std::vector<Complex> out(static_cast<std::size_t>(model.nodes()) * n);
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    for (int i = 0; i < n; ++i) {
      const double dx = d1(field, model.grid, node, 2 * i);
      const double dy = d1(field, model.grid, node, 2 * i + 1);
      out[static_cast<std::size_t>(node) * n + i] = 0.5 * Complex(dx, -dy);
    }
  });
  return out;
}

MatrixField complex_hessian(const SpatialField& field, const TransverseModel& model) {
  check_field(field, model, "complex_hessian");
  const int n = model.n;
  MatrixField out(n, model.nodes());
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double re = 0.25 * (d2(field, model.grid, node, 2 * i, 2 * j) +
                                  d2(field, model.grid, node, 2 * i + 1, 2 * j + 1));
        double im = 0.0;
        if (i != j) {
          im = 0.25 * (d2(field, model.grid, node, 2 * i, 2 * j + 1) -
                       d2(field, model.grid, node, 2 * i + 1, 2 * j));
        }
        out.at(node, i, j) = Complex(re, im);
        if (i != j) out.at(node, j, i) = Complex(re, -im);
      }
    }
  });
  return out;
}

MetricResult metric_matrix(const SpatialField& phi, const TransverseModel& model) {
  MetricResult res;
  res.h_phi = complex_hessian(phi, model);
  const int n = model.n;
  std::vector<unsigned char> pd(static_cast<std::size_t>(model.nodes()), 0);
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    Complex* blk = res.h_phi.block(node);
    const Complex* hb = model.h.block(node);
    for (int e = 0; e < n * n; ++e) blk[e] = hb[e] + 0.5 * blk[e];
    Complex chol[16];
    pd[static_cast<std::size_t>(node)] = detail::cholesky(n, blk, chol) ? 1 : 0;
  });
  res.admissible = true;
  for (unsigned char ok : pd) {
    if (!ok) {
      res.admissible = false;
      break;
    }
  }
  return res;
}

SpatialField gradient_pairing(const SpatialField& a, const SpatialField& b,
                              const SpatialField& phi, const TransverseModel& model) {
  check_field(a, model, "gradient_pairing");
  check_field(b, model, "gradient_pairing");
  const MetricResult metric = metric_matrix(phi, model);
  if (!metric.admissible) {
    throw std::invalid_argument("gradient_pairing: h_phi is not positive definite");
  }
  const int n = model.n;
  const auto ga = complex_gradient(a, model);
  const auto gb = complex_gradient(b, model);
  SpatialField out(model.nodes());
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    Complex chol[16], x[4];
    detail::cholesky(n, metric.h_phi.block(node), chol);
    detail::cholesky_solve(n, chol, ga.data() + static_cast<std::size_t>(node) * n, x);
    double acc = 0.0;  // b^dagger h_phi^{-1} a + c.c.
    for (int i = 0; i < n; ++i) {
      acc += (std::conj(gb[static_cast<std::size_t>(node) * n + i]) * x[i]).real();
    }
    out[node] = 2.0 * acc;
  });
  return out;
}

SpatialField measure_density(const SpatialField& phi, const TransverseModel& model) {
  const MetricResult metric = metric_matrix(phi, model);
  SpatialField out(model.nodes());
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    const double det = detail::hermitian_det(model.n, metric.h_phi.block(node));
    out[node] = det / model.det_h[static_cast<std::size_t>(node)];
  });
  return out;
}

SpatialField transverse_scalar_curvature(const SpatialField& phi, const TransverseModel& model) {
  const MetricResult metric = metric_matrix(phi, model);
  if (!metric.admissible) {
    throw std::invalid_argument("transverse_scalar_curvature: h_phi is not positive definite");
  }
  SpatialField log_det(model.nodes());
  for (std::int64_t node = 0; node < model.nodes(); ++node) {
    const double det = detail::hermitian_det(model.n, metric.h_phi.block(node));
    if (!(det > 0.0)) {
      throw std::invalid_argument("transverse_scalar_curvature: det(h_phi) <= 0");
    }
    log_det[node] = std::log(det);
  }
  const MatrixField L = complex_hessian(log_det, model);
  const int n = model.n;
  SpatialField out(model.nodes());
  parallel_for(0, model.nodes(), [&](std::int64_t node) {
    Complex chol[16], col[4], x[4];
    detail::cholesky(n, metric.h_phi.block(node), chol);
    double trace = 0.0;  // tr(h_phi^{-1} L), column by column
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) col[i] = L.at(node, i, j);
      detail::cholesky_solve(n, chol, col, x);
      trace += x[j].real();
    }
    out[node] = -trace;
  });
  return out;
}

}  // namespace sasaki
