#pragma once

#include <vector>

#include "sasaki/cone.hpp"
#include "sasaki/geometry.hpp"
#include "sasaki/solver.hpp"

namespace sasaki {

/// Aubin-Yau type functional
///   I(phi) = sum_p n!/((p+1)!(n-p)!) \int phi e_p d mu_0,
/// where e_p is the density of eta ^ (d eta)^{n-p} ^ (i dd phi)^p relative to
/// eta ^ (d eta)^n (for n = 1, e_1 = phi_{zz} / (2 h_{zz})). Normalized so
/// that I(c) = c and d I / dt = \int phi_dot d mu_phi along paths.
double i_functional(const SpatialField& phi, const TransverseModel& model);

/// Average transverse scalar curvature of the basic Kaehler class, evaluated
/// at the given potential (the value is class-invariant up to truncation).
double s_bar_at(const SpatialField& phi, const TransverseModel& model);

/// S-bar of the model (evaluated at phi = 0; identically 0 on the flat torus).
double s_bar(const TransverseModel& model);

/// K-energy per slice by trapezoidal integration of
///   d mu / dt = -(phi_dot, S^T - S_bar)_phi,  mu(0) = 0.
/// phi_dot is central in the interior and one-sided second order at the ends.
/// Throws std::invalid_argument on an inadmissible slice.
std::vector<double> k_energy(const PotentialPath& path, const TransverseModel& model);

/// Covariant derivative along the path of a field psi(t, .) given slice-wise:
///   D_{phi_dot} psi = psi_t - (1/4) <d_B psi, d_B phi_dot>_{g_phi}
/// at interior slice k. Throws std::out_of_range on a boundary slice.
SpatialField cov_derivative(const PotentialPath& psi_along, const PotentialPath& path, int k,
                            const TransverseModel& model);

/// Squared norm of dbar_B of the Hamiltonian field of psi w.r.t. eta_phi:
///   T^i_k = d_{zbar^k} ( (h_phi)^{ij} psi_{jbar} ),
///   |T|^2 = (h_phi)_{si} (h_phi)^{km} T^s_m conj(T^i_k).
/// Vanishes exactly when the field is transversally holomorphic.
SpatialField dbar_v_norm_sq(const SpatialField& psi, const SpatialField& phi,
                            const TransverseModel& model);

/// Defect of the K-energy Hessian identity per interior slice:
///   delta_k = D2_t mu(t_k) - [ -(D_{phi_dot} phi_dot, S^T - S_bar)_phi
///                              + (1/2) \int |dbar_B V(phi_dot)|^2 d mu_phi ].
std::vector<double> k_energy_hessian_check(const PotentialPath& path,
                                           const TransverseModel& model);

/// Path energy E(t_k) = \int phi_dot^2 d mu_phi per slice.
std::vector<double> path_energy(const PotentialPath& path, const TransverseModel& model);

/// Length = \int_0^1 sqrt(E) dt by the trapezoid rule.
double geodesic_length(const PotentialPath& path, const TransverseModel& model);

/// Geodesic distance: length of the eps_min solution of solve_geodesic.
/// Deterministic given the config. Throws std::runtime_error on solver failure.
double distance(const SpatialField& phi0, const SpatialField& phi1, int nt,
                const SolverConfig& cfg, const TransverseModel& model);

/// Geodesic defect Q = phi_tt - (1/4)|d_B phi_dot|^2 per slice (one-sided
/// second differences at the two boundary slices).
std::vector<SpatialField> geodesic_defect(const PotentialPath& path,
                                          const TransverseModel& model);

/// Per-slice time series used by the diagnostics CSV, plus path scalars.
struct PathDiagnostics {
  std::vector<double> t;
  std::vector<double> energy;
  std::vector<double> i_functional;
  std::vector<double> k_energy;
  std::vector<double> q_mean;
  std::vector<double> q_max;
  std::vector<double> sup_abs_phitt;
  std::vector<double> sup_abs_lap;
  double length = 0.0;
  double s_bar = 0.0;
};

PathDiagnostics diagnose_path(const PotentialPath& path, const TransverseModel& model);

/// phi_dot at every slice: central differences in the interior, one-sided
/// second-order stencils at k = 0 and k = nt.
std::vector<SpatialField> time_derivative(const PotentialPath& path);

/// phi_tt at every slice; one-sided (4-point) at the boundary slices.
std::vector<SpatialField> second_time_derivative(const PotentialPath& path);

}  // namespace sasaki
