#pragma once

#include <vector>

#include "sasaki/geometry.hpp"

namespace sasaki {

/// phi(t, .) on an (nt+1)-slice uniform time grid, t_k = k/nt. Slices 0 and
/// nt carry the Dirichlet data and are never modified by solvers.
struct PotentialPath {
  int nt = 0;
  std::vector<SpatialField> slices;

  double dt() const { return 1.0 / nt; }
  double time(int k) const { return static_cast<double>(k) / nt; }

  static PotentialPath constant(int nt, const TransverseModel& model, double value = 0.0);
};

/// The (n+1) x (n+1) Hermitian space-time matrices A(phi) at every spatial
/// node of one interior time slice:
///   A_{ij}     = (h_phi)_{ij}            (i, j <= n)
///   A_{i,n+1}  = (1/2) phi_{t i}
///   A_{n+1,n+1}= (1/2) phi_tt
/// Time derivatives are central differences over slices k-1, k, k+1.
struct SpacetimeMatrices {
  int n = 0;                ///< transverse dimension; blocks are (n+1)^2
  std::int64_t nodes = 0;
  std::vector<Complex> a;   ///< node-major (n+1)^2 blocks, row-major
  std::vector<double> det_hphi;        ///< det of the spatial block
  std::vector<double> schur;           ///< (1/2)phi_tt - (1/4) u^* h_phi^{-1} u
  std::vector<double> det_a;           ///< det A (direct when the block route degenerates)
  std::vector<unsigned char> positive; ///< A > 0 (spatial block PD and Schur > 0)
  std::vector<double> phi_tt;

  int dim() const { return n + 1; }
  Complex* block(std::int64_t node) {
    return a.data() + static_cast<std::size_t>(node) * dim() * dim();
  }
  const Complex* block(std::int64_t node) const {
    return a.data() + static_cast<std::size_t>(node) * dim() * dim();
  }
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  map(std::int64_t node) const {
    return {block(node), dim(), dim()};
  }
  /// det A via the Schur factorization route, det(h_phi) * schur.
  double block_determinant(std::int64_t node) const {
    return det_hphi[static_cast<std::size_t>(node)] * schur[static_cast<std::size_t>(node)];
  }
};

/// Assemble A(phi) at interior time index k (1 <= k <= nt-1).
/// Throws std::out_of_range for a boundary or invalid index.
SpacetimeMatrices assemble_node_matrices(const PotentialPath& path, int k,
                                         const TransverseModel& model);

/// Everything the damped Newton iteration needs from one path sweep.
/// `positive` is a non-throwing admissibility probe; the residual entries are
/// only meaningful when it is true.
struct PathEvaluation {
  bool positive = false;
  double max_abs_residual = 0.0;
  std::vector<double> residual;  ///< (nt-1) * nodes values, interior-slice-major
  double min_schur = 0.0;
  double sup_abs_phitt = 0.0;    ///< over interior slices
};

PathEvaluation evaluate_path(const PotentialPath& path, double eps, const SpatialField& f,
                             const TransverseModel& model);

/// Second-derivative diagnostics in the C^2_w norm: kept out of the Newton
/// hot path and computed once per continuity stage.
struct C2wDiagnostics {
  double sup_abs_lap = 0.0;  ///< transverse Laplacian, over all slices
  double sup_c2w = 0.0;      ///< sup over interior nodes of |phi_tt| + |lap|
};

C2wDiagnostics c2w_diagnostics(const PotentialPath& path, const TransverseModel& model);

/// Log-form Monge-Ampere residual per interior node:
///   R = log det A - log((eps/2) f det h),
/// zero exactly when (phi_tt - (1/4)|d_B phi_t|^2) d mu_phi = eps f d mu_0
/// holds discretely. Throws std::invalid_argument on eps <= 0, f <= 0, or a
/// non-positive A (the signal that a line search must shrink).
std::vector<double> ma_residual(const PotentialPath& path, double eps, const SpatialField& f,
                                const TransverseModel& model);

/// The Kaehler-cone picture of a path: radial samples r_k = 1 + t_k/2 and the
/// lifted potential psi(r_k, .) = phi(t_k, .) + 4 log r_k.
struct ConeGrid {
  std::vector<double> r;
  std::vector<SpatialField> psi;

  double dr() const { return (r.back() - r.front()) / static_cast<double>(r.size() - 1); }
};

ConeGrid lift(const PotentialPath& path);
PotentialPath unlift(const ConeGrid& cone);

/// Cross-check of the time formulation against the cone formulation:
/// evaluates both sides of
///   (Omega_psi)^{n+1} / omega^{n+1} = r^2 (phi_tt - (1/4)|d_B phi_t|^2) det(h_phi)/det(h)
/// at every interior node -- the left side from a direct (n+1)x(n+1)
/// determinant assembled out of psi with radial stencils, the right side from
/// time-variable quantities -- and returns the max pointwise relative
/// discrepancy. Throws on a non-positive time-side configuration.
double cone_identity_check(const PotentialPath& path, double eps, const SpatialField& f,
                           const TransverseModel& model);

/// Same discrepancy with an explicitly supplied cone grid; the public check
/// passes lift(path). Feeding a tampered psi here is the negative control
/// that shows the identity tolerance is non-vacuous.
double cone_identity_discrepancy(const ConeGrid& cone, const PotentialPath& path, double eps,
                                 const SpatialField& f, const TransverseModel& model);

/// Transverse Laplacian sum_a d^2/dx_a^2 of one slice (flat background).
SpatialField transverse_laplacian(const SpatialField& field, const TransverseModel& model);

/// Constant field f = value on the model grid (the default right-hand side).
SpatialField constant_field(const TransverseModel& model, double value = 1.0);

}  // namespace sasaki
