#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <json.hpp>

namespace nehari {

/// Nodal values on the interior nodes of a Grid.
using Field = std::vector<double>;

enum class DomainKind { interval, rectangle, disk, annulus };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Geometry and resolution of a discretized domain.
///
/// Intervals live on (0, length). Rectangles are centered at the origin so
/// that coordinate reflections map the grid onto itself. Polar domains use
/// `nr` radial cells with offset radii and `ntheta` angular nodes at
/// theta_l = 2*pi*l/ntheta.
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  double length = 1.0;
  double length_x = 1.0;
  double length_y = 1.0;
  double r_inner = 0.0;
  double r_outer = 1.0;
  int nx = 64;
  int ny = 64;
  int nr = 32;
  int ntheta = 32;

  static DomainSpec interval(double length, int n);
  static DomainSpec rectangle(double lx, double ly, int nx, int ny);
  static DomainSpec disk(double radius, int nr, int ntheta);
  static DomainSpec annulus(double r_in, double r_out, int nr, int ntheta);

  bool is_polar() const {
    return kind == DomainKind::disk || kind == DomainKind::annulus;
  }
  /// Throws InvalidGeometry describing the first violated constraint.
  void validate() const;

  bool operator==(const DomainSpec&) const = default;
};

nlohmann::json to_json(const DomainSpec& spec);
DomainSpec domain_spec_from_json(const nlohmann::json& j);

/// Immutable finite-difference / finite-volume discretization of a domain
/// with homogeneous Dirichlet data.
///
/// Node ordering: interval by x; rectangle row-major in y then x
/// (index = iy*nx + ix); polar ring-major (index = j*ntheta + l).
/// The discrete operator -Delta_h is symmetric in the weighted inner product
/// <f,g>_w = sum_i w_i f_i g_i.
class Grid {
 public:
  explicit Grid(const DomainSpec& spec);

  const DomainSpec& spec() const noexcept { return spec_; }
  DomainKind kind() const noexcept { return spec_.kind; }
  bool is_polar() const noexcept { return spec_.is_polar(); }
  int dimension() const noexcept {
    return spec_.kind == DomainKind::interval ? 1 : 2;
  }
  std::size_t size() const noexcept { return weights_.size(); }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const double> weights() const noexcept { return weights_; }
  /// Distance of each node to the origin.
  std::span<const double> radius() const noexcept { return radius_; }

  // Polar layout
  int rings() const noexcept { return spec_.nr; }
  int angles() const noexcept { return spec_.ntheta; }
  double dr() const noexcept { return dr_; }
  double dtheta() const noexcept { return dtheta_; }
  double ring_radius(int j) const { return ring_r_[static_cast<std::size_t>(j)]; }
  double angle(int l) const;
  std::size_t polar_index(int j, int l) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(spec_.ntheta) +
           static_cast<std::size_t>(l);
  }

  // Cartesian layout
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }

  /// out = -Delta_h f. Sizes must match size().
  void apply_neg_laplacian(std::span<const double> f, std::span<double> out) const;
  /// <-Delta_h f, f>_w summed edge by edge; avoids the cancellation of the
  /// stencil form.
  double dirichlet_form(std::span<const double> f) const;
  /// Diagonal entries of -Delta_h.
  std::span<const double> diagonal() const noexcept { return diag_; }
  /// W * (-Delta_h) as a symmetric sparse matrix (W = diag(weights)).
  Eigen::SparseMatrix<double> weighted_operator() const;

  double area() const;  // analytic measure of the continuous domain

 private:
  void build_interval();
  void build_rectangle();
  void build_polar();

  DomainSpec spec_;
  std::vector<double> x_, y_, radius_, weights_, diag_;
  std::vector<double> ring_r_;
  // per-ring polar stencil coefficients
  std::vector<double> coef_out_, coef_in_, coef_ang_;
  double dr_ = 0.0, dtheta_ = 0.0, hx_ = 0.0, hy_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(const DomainSpec& spec);

/// -Delta_h f as a new Field.
Field apply_neg_laplacian(const Grid& grid, const Field& f);

double integrate(const Grid& grid, const Field& f);
double inner(const Grid& grid, const Field& f, const Field& g);
double norm(const Grid& grid, const Field& f);

/// Throws GridMismatch unless f.size() == grid.size().
void require_on_grid(const Grid& grid, std::span<const double> f,
                     const std::string& name);

struct CgResult {
  Field x;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct CgOptions {
  double tolerance = 1e-10;  // on ||Ax - b||_w / ||b||_w
  int max_iterations = 20000;
  bool jacobi = true;
};

/// Solves (c*(-Delta_h) + V + sigma) x = rhs by Jacobi-preconditioned
/// conjugate gradients without assembling the matrix.
/// Throws IndefiniteOperator on non-positive curvature and
/// ConvergenceFailure when the iteration cap is reached.
CgResult shifted_poisson_solve(const Grid& grid, double c, const Field& potential,
                               double sigma, const Field& rhs,
                               const CgOptions& options = {});

/// Recommended shift: 1 + max(0, -min V).
double safe_shift(const Field& potential);

struct EigenEstimate {
  double value = 0.0;
  Field vector;  // w-normalized, positive
  double relative_residual = 0.0;
  int iterations = 0;
};

/// Smallest eigenvalue of -Delta_h by inverse power iteration with CG inner
/// solves. Throws ConvergenceFailure if the eigenresidual stays above
/// `tolerance` after `max_iterations` outer steps.
EigenEstimate lambda1_estimate(const Grid& grid, double tolerance = 1e-8,
                               int max_iterations = 500);

/// Cached sparse Cholesky of W*(c*(-Delta_h) + V + sigma); used where the
/// same shifted operator is inverted many times.
class ShiftedPoissonFactor {
 public:
  ShiftedPoissonFactor(const Grid& grid, double c, const Field& potential,
                       double sigma);
  ~ShiftedPoissonFactor();
  ShiftedPoissonFactor(ShiftedPoissonFactor&&) noexcept;
  ShiftedPoissonFactor& operator=(ShiftedPoissonFactor&&) noexcept;

  Field solve(const Field& rhs) const;
  /// Refactor with a new potential, reusing the symbolic analysis.
  void update(const Field& potential, double sigma);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

nlohmann::json grid_to_json(const Grid& grid);

/// CSV dump of node coordinates: index,x,weight (interval),
/// index,x,y,weight (rectangle) or index,r,theta,weight (polar).
void write_nodes_csv(const Grid& grid, std::ostream& out);

}  // namespace nehari
