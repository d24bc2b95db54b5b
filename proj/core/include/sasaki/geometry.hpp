#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace sasaki {

using Complex = std::complex<double>;

/// Periodic grid over the 2n real coordinates of the transverse torus.
/// Axis 2i carries Re(z^i), axis 2i+1 carries Im(z^i); every axis has unit
/// period. Node storage is row-major with axis 0 outermost.
struct Grid {
  std::vector<int> dims;
  std::vector<std::int64_t> strides;
  std::int64_t total = 0;

  static Grid make(std::vector<int> dims);

  int axes() const { return static_cast<int>(dims.size()); }
  double spacing(int axis) const { return 1.0 / dims[static_cast<std::size_t>(axis)]; }

  int coord(std::int64_t node, int axis) const {
    return static_cast<int>((node / strides[static_cast<std::size_t>(axis)]) %
                            dims[static_cast<std::size_t>(axis)]);
  }

  /// Periodic neighbor of `node` displaced by `offset` steps along `axis`.
  std::int64_t shift(std::int64_t node, int axis, int offset) const {
    const int d = dims[static_cast<std::size_t>(axis)];
    const std::int64_t s = strides[static_cast<std::size_t>(axis)];
    const int c = coord(node, axis);
    int cc = (c + offset) % d;
    if (cc < 0) cc += d;
    return node + static_cast<std::int64_t>(cc - c) * s;
  }

  /// Real coordinate of a node along an axis, in [0, 1).
  double position(std::int64_t node, int axis) const {
    return coord(node, axis) * spacing(axis);
  }

  bool operator==(const Grid& o) const { return dims == o.dims; }
};

/// A real basic function sampled on the transverse grid. Fields carry no
/// Reeb-direction coordinate, so basic-ness is structural.
struct SpatialField {
  std::vector<double> v;

  SpatialField() = default;
  explicit SpatialField(std::int64_t size, double fill = 0.0)
      : v(static_cast<std::size_t>(size), fill) {}

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  double& operator[](std::int64_t i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return v[static_cast<std::size_t>(i)]; }
};

/// Per-node n x n complex matrices in one flat buffer (node-major, then
/// row-major within the block).
struct MatrixField {
  int n = 0;
  std::int64_t nodes = 0;
  std::vector<Complex> a;

  MatrixField() = default;
  MatrixField(int n_, std::int64_t nodes_)
      : n(n_), nodes(nodes_), a(static_cast<std::size_t>(nodes_) * n_ * n_) {}

  Complex* block(std::int64_t node) {
    return a.data() + static_cast<std::size_t>(node) * n * n;
  }
  const Complex* block(std::int64_t node) const {
    return a.data() + static_cast<std::size_t>(node) * n * n;
  }
  Complex& at(std::int64_t node, int i, int j) { return block(node)[i * n + j]; }
  Complex at(std::int64_t node, int i, int j) const { return block(node)[i * n + j]; }

  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  map(std::int64_t node) const {
    return {block(node), n, n};
  }
};

/// Background transverse Kaehler model on the flat torus: h_{ij} per node,
/// quadrature normalized so the background volume is exactly 1.
///
/// The shipped model is flat (constant h = (1/2) Id, unit periods), which
/// makes the background scalar curvature vanish; h is still stored per node
/// so curved models can be added without touching the interface.
struct TransverseModel {
  int n = 1;
  Grid grid;
  MatrixField h;                 ///< h_{ij} per node, Hermitian positive definite
  std::vector<double> weights;   ///< uniform quadrature weight per node
  std::vector<double> density;   ///< det(2h) per node; 1 on the flat model
  std::vector<double> det_h;     ///< det(h) per node
  MatrixField h_inv;             ///< h^{-1} per node

  static TransverseModel flat_torus(int n, std::vector<int> dims);

  std::int64_t nodes() const { return grid.total; }

  /// Background measure of one node: weight * density (sums to 1).
  double mu0(std::int64_t node) const {
    return weights[static_cast<std::size_t>(node)] * density[static_cast<std::size_t>(node)];
  }

  /// Discrete background integral of u against eta ^ (d eta)^n.
  double integrate_background(const SpatialField& u) const;
};

/// First complex derivatives of a field: d/dz^i = (1/2)(d/dx_i - i d/dy_i)
/// by central differences. Output is node-major with n entries per node.
std::vector<Complex> complex_gradient(const SpatialField& field, const TransverseModel& model);

/// Complex Hessian phi_{ij} by real second-order central differences:
///   phi_{ij} = (1/4)(dx_i dx_j + dy_i dy_j) phi + (i/4)(dx_i dy_j - dy_i dx_j) phi.
/// The upper triangle is computed and mirrored, so each block is exactly
/// Hermitian. Throws std::invalid_argument on a field/model size mismatch.
MatrixField complex_hessian(const SpatialField& field, const TransverseModel& model);

struct MetricResult {
  MatrixField h_phi;        ///< h + (1/2) phi_{ij} per node
  bool admissible = false;  ///< true iff h_phi is positive definite everywhere
};

/// Deformed transverse metric h_phi = h + (1/2) phi_{ij}. Non-admissibility
/// is reported through the flag, never as an error.
MetricResult metric_matrix(const SpatialField& phi, const TransverseModel& model);

/// Pointwise pairing <d_B a, d_B b>_{g_phi} = (h_phi)^{ij}(a_i b_jbar + b_i a_jbar).
/// With a == b this is |d_B a|^2 = 2 (h_phi)^{ij} a_i a_jbar, the constant
/// fixed by consistency with the space-time block-determinant identity.
/// Throws std::invalid_argument when h_phi is not admissible.
SpatialField gradient_pairing(const SpatialField& a, const SpatialField& b,
                              const SpatialField& phi, const TransverseModel& model);

/// Measure density rho_phi = det(h_phi)/det(h); integrates to the total mass
/// of d mu_phi against the background quadrature.
SpatialField measure_density(const SpatialField& phi, const TransverseModel& model);

/// Transverse scalar curvature S^T = -(h_phi)^{ij} (log det h_phi)_{ij}.
/// The contraction is taken against g^T = 2 h_phi, which for n = 1 reduces to
/// S^T = -(log det h_phi)_{zzbar} / (h_phi)_{zzbar}; this normalization is the
/// one under which the K-energy Hessian identity holds discretely.
/// Throws std::invalid_argument when h_phi is not admissible.
SpatialField transverse_scalar_curvature(const SpatialField& phi, const TransverseModel& model);

/// Integral of u against d mu_phi = rho_phi * (background measure).
double integrate_measure(const SpatialField& u, const SpatialField& rho_phi,
                         const TransverseModel& model);

}  // namespace sasaki
