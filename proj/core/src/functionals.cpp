#include "sasaki/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace sasaki {

namespace {

using EMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

double binom(int n, int p) { return factorial(n) / (factorial(p) * factorial(n - p)); }

// Coefficients of det(G + s B) in s, via evaluation at s = 0..n and a small
// Vandermonde solve. Exact for the polynomial of degree n.
Eigen::VectorXd det_pencil_coefficients(const EMatrix& G, const EMatrix& B) {
  const int n = static_cast<int>(G.rows());
  Eigen::VectorXd values(n + 1);
  for (int s = 0; s <= n; ++s) {
    values(s) = (G + static_cast<double>(s) * B).determinant().real();
  }
  Eigen::MatrixXd V(n + 1, n + 1);
  for (int s = 0; s <= n; ++s) {
    double pw = 1.0;
    for (int p = 0; p <= n; ++p) {
      V(s, p) = pw;
      pw *= static_cast<double>(s);
    }
  }
  return V.fullPivLu().solve(values);
}

void check_path(const PotentialPath& path, const TransverseModel& model, const char* what) {
  if (path.nt < 2 || path.slices.size() != static_cast<std::size_t>(path.nt) + 1) {
    throw std::invalid_argument(std::string(what) + ": malformed path");
  }
  for (const SpatialField& s : path.slices) {
    if (s.size() != model.nodes()) {
      throw std::invalid_argument(std::string(what) + ": slice size does not match the model");
    }
  }
}

struct SliceGeometry {
  MetricResult metric;
  SpatialField rho;
  SpatialField scalar;
};

SliceGeometry slice_geometry(const SpatialField& phi, const TransverseModel& model,
                             const char* what) {
  SliceGeometry g;
  g.metric = metric_matrix(phi, model);
  if (!g.metric.admissible) {
    throw std::invalid_argument(std::string(what) + ": inadmissible slice");
  }
  g.rho = measure_density(phi, model);
  g.scalar = transverse_scalar_curvature(phi, model);
  return g;
}

}  // namespace

std::vector<SpatialField> time_derivative(const PotentialPath& path) {
  const double dt = path.dt();
  const int nt = path.nt;
  std::vector<SpatialField> out(static_cast<std::size_t>(nt) + 1);
  const std::int64_t N = path.slices[0].size();
  auto& s = path.slices;
  for (int k = 0; k <= nt; ++k) {
    SpatialField d(N);
    if (k == 0) {
      for (std::int64_t i = 0; i < N; ++i) {
        d[i] = (-3.0 * s[0][i] + 4.0 * s[1][i] - s[2][i]) / (2.0 * dt);
      }
    } else if (k == nt) {
      const std::size_t m = static_cast<std::size_t>(nt);
      for (std::int64_t i = 0; i < N; ++i) {
        d[i] = (3.0 * s[m][i] - 4.0 * s[m - 1][i] + s[m - 2][i]) / (2.0 * dt);
      }
    } else {
      const std::size_t m = static_cast<std::size_t>(k);
      for (std::int64_t i = 0; i < N; ++i) {
        d[i] = (s[m + 1][i] - s[m - 1][i]) / (2.0 * dt);
      }
    }
    out[static_cast<std::size_t>(k)] = std::move(d);
  }
  return out;
}

std::vector<SpatialField> second_time_derivative(const PotentialPath& path) {
  const double dt = path.dt();
  const int nt = path.nt;
  const std::int64_t N = path.slices[0].size();
  auto& s = path.slices;
  std::vector<SpatialField> out(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) {
    SpatialField d(N);
    if (k >= 1 && k <= nt - 1) {
      const std::size_t m = static_cast<std::size_t>(k);
      for (std::int64_t i = 0; i < N; ++i) {
        d[i] = (s[m + 1][i] - 2.0 * s[m][i] + s[m - 1][i]) / (dt * dt);
      }
    } else if (nt >= 3) {
      // second-order one-sided stencil for boundary diagnostics
      const bool lo = (k == 0);
      const std::size_t a = lo ? 0 : static_cast<std::size_t>(nt);
      const auto idx = [&](int off) { return lo ? a + off : a - off; };
      for (std::int64_t i = 0; i < N; ++i) {
        d[i] = (2.0 * s[idx(0)][i] - 5.0 * s[idx(1)][i] + 4.0 * s[idx(2)][i] - s[idx(3)][i]) /
               (dt * dt);
      }
    } else {
      for (std::int64_t i = 0; i < N; ++i) {
        d[i] = (s[2][i] - 2.0 * s[1][i] + s[0][i]) / (dt * dt);
      }
    }
    out[static_cast<std::size_t>(k)] = std::move(d);
  }
  return out;
}

double i_functional(const SpatialField& phi, const TransverseModel& model) {
  if (phi.size() != model.nodes()) {
    throw std::invalid_argument("i_functional: field size mismatch");
  }
  const int n = model.n;
  const MatrixField hess = complex_hessian(phi, model);
  std::vector<double> coeff(static_cast<std::size_t>(n) + 1);
  for (int p = 0; p <= n; ++p) {
    coeff[static_cast<std::size_t>(p)] = factorial(n) / (factorial(p + 1) * factorial(n - p));
  }
  double total = 0.0;
  EMatrix G(n, n), B(n, n);
  for (std::int64_t node = 0; node < model.nodes(); ++node) {
    G = 2.0 * model.h.map(node);
    B = hess.map(node);
    const Eigen::VectorXd pencil = det_pencil_coefficients(G, B);
    const double det_g = pencil(0);
    double e_sum = 0.0;
    for (int p = 0; p <= n; ++p) {
      const double e_p = pencil(p) / (binom(n, p) * det_g);
      e_sum += coeff[static_cast<std::size_t>(p)] * e_p;
    }
    total += model.mu0(node) * phi[node] * e_sum;
  }
  return total;
}

double s_bar_at(const SpatialField& phi, const TransverseModel& model) {
  const SpatialField rho = measure_density(phi, model);
  const SpatialField st = transverse_scalar_curvature(phi, model);
  double num = 0.0, den = 0.0;
  for (std::int64_t node = 0; node < model.nodes(); ++node) {
    num += model.mu0(node) * rho[node] * st[node];
    den += model.mu0(node) * rho[node];
  }
  return num / den;
}

double s_bar(const TransverseModel& model) {
  return s_bar_at(SpatialField(model.nodes(), 0.0), model);
}

std::vector<double> k_energy(const PotentialPath& path, const TransverseModel& model) {
  check_path(path, model, "k_energy");
  const double sbar = s_bar(model);
  const std::vector<SpatialField> deriv = time_derivative(path);
  std::vector<double> integrand(static_cast<std::size_t>(path.nt) + 1);
  for (int k = 0; k <= path.nt; ++k) {
    const SliceGeometry g = slice_geometry(path.slices[static_cast<std::size_t>(k)], model,
                                           "k_energy");
    double acc = 0.0;
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      acc -= model.mu0(node) * g.rho[node] * deriv[static_cast<std::size_t>(k)][node] *
             (g.scalar[node] - sbar);
    }
    integrand[static_cast<std::size_t>(k)] = acc;
  }
  std::vector<double> mu(static_cast<std::size_t>(path.nt) + 1, 0.0);
  const double dt = path.dt();
  for (int k = 1; k <= path.nt; ++k) {
    mu[static_cast<std::size_t>(k)] =
        mu[static_cast<std::size_t>(k) - 1] +
        0.5 * dt * (integrand[static_cast<std::size_t>(k) - 1] + integrand[static_cast<std::size_t>(k)]);
  }
  return mu;
}

SpatialField cov_derivative(const PotentialPath& psi_along, const PotentialPath& path, int k,
                            const TransverseModel& model) {
  check_path(path, model, "cov_derivative");
  check_path(psi_along, model, "cov_derivative");
  if (k < 1 || k > path.nt - 1) {
    throw std::out_of_range("cov_derivative: boundary slice");
  }
  const double dt = path.dt();
  const std::int64_t N = model.nodes();
  SpatialField psi_t(N);
  for (std::int64_t i = 0; i < N; ++i) {
    psi_t[i] = (psi_along.slices[static_cast<std::size_t>(k) + 1][i] -
                psi_along.slices[static_cast<std::size_t>(k) - 1][i]) /
               (2.0 * dt);
  }
  SpatialField phi_dot(N);
  for (std::int64_t i = 0; i < N; ++i) {
    phi_dot[i] = (path.slices[static_cast<std::size_t>(k) + 1][i] -
                  path.slices[static_cast<std::size_t>(k) - 1][i]) /
                 (2.0 * dt);
  }
  const SpatialField pairing = gradient_pairing(psi_along.slices[static_cast<std::size_t>(k)],
                                                phi_dot,
                                                path.slices[static_cast<std::size_t>(k)], model);
  SpatialField out(N);
  for (std::int64_t i = 0; i < N; ++i) out[i] = psi_t[i] - 0.25 * pairing[i];
  return out;
}

SpatialField dbar_v_norm_sq(const SpatialField& psi, const SpatialField& phi,
                            const TransverseModel& model) {
  if (psi.size() != model.nodes()) {
    throw std::invalid_argument("dbar_v_norm_sq: field size mismatch");
  }
  const MetricResult metric = metric_matrix(phi, model);
  if (!metric.admissible) {
    throw std::invalid_argument("dbar_v_norm_sq: h_phi is not positive definite");
  }
  const int n = model.n;
  const std::int64_t N = model.nodes();
  const std::vector<Complex> grad = complex_gradient(psi, model);

  // Hamiltonian components with the index raised: F^i = (h_phi)^{ij} psi_{jbar}
  // = conj( h_phi^{-1} grad(psi) ) for real psi.
  std::vector<Complex> F(static_cast<std::size_t>(N) * n);
  for (std::int64_t node = 0; node < N; ++node) {
    Eigen::LLT<EMatrix> llt(metric.h_phi.map(node));
    Eigen::VectorXcd g(n);
    for (int i = 0; i < n; ++i) g(i) = grad[static_cast<std::size_t>(node) * n + i];
    const Eigen::VectorXcd x = llt.solve(g);
    for (int i = 0; i < n; ++i) F[static_cast<std::size_t>(node) * n + i] = std::conj(x(i));
  }

  // T^i_k = d_{zbar^k} F^i by central differences on the complex field.
  const Grid& grid = model.grid;
  SpatialField out(N);
  EMatrix T(n, n);
  for (std::int64_t node = 0; node < N; ++node) {
    for (int i = 0; i < n; ++i) {
      for (int kk = 0; kk < n; ++kk) {
        const int ax = 2 * kk, ay = 2 * kk + 1;
        const Complex dx = (F[static_cast<std::size_t>(grid.shift(node, ax, 1)) * n + i] -
                            F[static_cast<std::size_t>(grid.shift(node, ax, -1)) * n + i]) /
                           (2.0 * grid.spacing(ax));
        const Complex dy = (F[static_cast<std::size_t>(grid.shift(node, ay, 1)) * n + i] -
                            F[static_cast<std::size_t>(grid.shift(node, ay, -1)) * n + i]) /
                           (2.0 * grid.spacing(ay));
        T(i, kk) = 0.5 * (dx + Complex(0.0, 1.0) * dy);
      }
    }
    Eigen::LLT<EMatrix> llt(metric.h_phi.map(node));
    const EMatrix W = T * llt.solve(EMatrix(T.adjoint()));  // T h^{-1} T^dagger
    Complex acc(0.0, 0.0);
    const auto H = metric.h_phi.map(node);
    for (int s = 0; s < n; ++s) {
      for (int i = 0; i < n; ++i) acc += H(s, i) * W(s, i);
    }
    out[node] = acc.real();
  }
  return out;
}

std::vector<double> k_energy_hessian_check(const PotentialPath& path,
                                           const TransverseModel& model) {
  check_path(path, model, "k_energy_hessian_check");
  const double sbar = s_bar(model);
  const std::vector<double> mu = k_energy(path, model);
  PotentialPath psi_along;
  psi_along.nt = path.nt;
  psi_along.slices = time_derivative(path);

  const double dt = path.dt();
  std::vector<double> defect(static_cast<std::size_t>(path.nt) - 1);
  for (int k = 1; k <= path.nt - 1; ++k) {
    const SliceGeometry g = slice_geometry(path.slices[static_cast<std::size_t>(k)], model,
                                           "k_energy_hessian_check");
    const SpatialField D = cov_derivative(psi_along, path, k, model);
    const SpatialField dbar = dbar_v_norm_sq(psi_along.slices[static_cast<std::size_t>(k)],
                                             path.slices[static_cast<std::size_t>(k)], model);
    double rhs = 0.0;
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      const double dmu = model.mu0(node) * g.rho[node];
      rhs += dmu * (-D[node] * (g.scalar[node] - sbar) + 0.5 * dbar[node]);
    }
    const double lhs = (mu[static_cast<std::size_t>(k) + 1] - 2.0 * mu[static_cast<std::size_t>(k)] +
                        mu[static_cast<std::size_t>(k) - 1]) /
                       (dt * dt);
    defect[static_cast<std::size_t>(k) - 1] = lhs - rhs;
  }
  return defect;
}

std::vector<double> path_energy(const PotentialPath& path, const TransverseModel& model) {
  check_path(path, model, "path_energy");
  const std::vector<SpatialField> deriv = time_derivative(path);
  std::vector<double> energy(static_cast<std::size_t>(path.nt) + 1);
  for (int k = 0; k <= path.nt; ++k) {
    const SpatialField rho = measure_density(path.slices[static_cast<std::size_t>(k)], model);
    double acc = 0.0;
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      const double d = deriv[static_cast<std::size_t>(k)][node];
      acc += model.mu0(node) * rho[node] * d * d;
    }
    energy[static_cast<std::size_t>(k)] = acc;
  }
  return energy;
}

double geodesic_length(const PotentialPath& path, const TransverseModel& model) {
  const std::vector<double> energy = path_energy(path, model);
  const double dt = path.dt();
  double len = 0.0;
  for (int k = 0; k < path.nt; ++k) {
    len += 0.5 * dt *
           (std::sqrt(std::max(0.0, energy[static_cast<std::size_t>(k)])) +
            std::sqrt(std::max(0.0, energy[static_cast<std::size_t>(k) + 1])));
  }
  return len;
}

double distance(const SpatialField& phi0, const SpatialField& phi1, int nt,
                const SolverConfig& cfg, const TransverseModel& model) {
  GeodesicSolution sol = solve_geodesic(phi0, phi1, nt, cfg, model);
  if (!sol.report.converged) {
    throw std::runtime_error("distance: geodesic solve did not converge");
  }
  return geodesic_length(sol.path, model);
}

std::vector<SpatialField> geodesic_defect(const PotentialPath& path,
                                          const TransverseModel& model) {
  check_path(path, model, "geodesic_defect");
  const std::vector<SpatialField> deriv = time_derivative(path);
  const std::vector<SpatialField> second = second_time_derivative(path);
  std::vector<SpatialField> out(static_cast<std::size_t>(path.nt) + 1);
  for (int k = 0; k <= path.nt; ++k) {
    const SpatialField pairing =
        gradient_pairing(deriv[static_cast<std::size_t>(k)], deriv[static_cast<std::size_t>(k)],
                         path.slices[static_cast<std::size_t>(k)], model);
    SpatialField q(model.nodes());
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      q[node] = second[static_cast<std::size_t>(k)][node] - 0.25 * pairing[node];
    }
    out[static_cast<std::size_t>(k)] = std::move(q);
  }
  return out;
}

PathDiagnostics diagnose_path(const PotentialPath& path, const TransverseModel& model) {
  check_path(path, model, "diagnose_path");
  PathDiagnostics d;
  const int nt = path.nt;
  d.t.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) d.t[static_cast<std::size_t>(k)] = path.time(k);
  d.energy = path_energy(path, model);
  d.k_energy = k_energy(path, model);
  d.i_functional.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) {
    d.i_functional[static_cast<std::size_t>(k)] =
        i_functional(path.slices[static_cast<std::size_t>(k)], model);
  }
  const std::vector<SpatialField> q = geodesic_defect(path, model);
  const std::vector<SpatialField> second = second_time_derivative(path);
  d.q_mean.resize(static_cast<std::size_t>(nt) + 1);
  d.q_max.resize(static_cast<std::size_t>(nt) + 1);
  d.sup_abs_phitt.resize(static_cast<std::size_t>(nt) + 1);
  d.sup_abs_lap.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) {
    const std::size_t m = static_cast<std::size_t>(k);
    double mean = 0.0, mx = -std::numeric_limits<double>::infinity();
    double tt = 0.0;
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      mean += model.mu0(node) * q[m][node];
      mx = std::max(mx, q[m][node]);
      tt = std::max(tt, std::abs(second[m][node]));
    }
    const SpatialField lap = transverse_laplacian(path.slices[m], model);
    double lp = 0.0;
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      lp = std::max(lp, std::abs(lap[node]));
    }
    d.q_mean[m] = mean;
    d.q_max[m] = mx;
    d.sup_abs_phitt[m] = tt;
    d.sup_abs_lap[m] = lp;
  }
  d.length = geodesic_length(path, model);
  d.s_bar = s_bar(model);
  return d;
}

}  // namespace sasaki
