#include "nehari/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

constexpr double kPi = std::numbers::pi;

void check_resolution(int n, const char* name) {
  if (n < 4) {
    throw InvalidGeometry(std::string(name) + " must be >= 4, got " + std::to_string(n));
  }
}

void check_length(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidGeometry(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::disk: return "disk";
    case DomainKind::annulus: return "annulus";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "interval") return DomainKind::interval;
  if (name == "rectangle") return DomainKind::rectangle;
  if (name == "disk") return DomainKind::disk;
  if (name == "annulus") return DomainKind::annulus;
  throw InvalidArgument("unknown domain kind '" + name + "'");
}

DomainSpec DomainSpec::interval(double length, int n) {
  DomainSpec s;
  s.kind = DomainKind::interval;
  s.length = length;
  s.nx = n;
  return s;
}

DomainSpec DomainSpec::rectangle(double lx, double ly, int nx, int ny) {
  DomainSpec s;
  s.kind = DomainKind::rectangle;
  s.length_x = lx;
  s.length_y = ly;
  s.nx = nx;
  s.ny = ny;
  return s;
}

DomainSpec DomainSpec::disk(double radius, int nr, int ntheta) {
  DomainSpec s;
  s.kind = DomainKind::disk;
  s.r_inner = 0.0;
  s.r_outer = radius;
  s.nr = nr;
  s.ntheta = ntheta;
  return s;
}

DomainSpec DomainSpec::annulus(double r_in, double r_out, int nr, int ntheta) {
  DomainSpec s;
  s.kind = DomainKind::annulus;
  s.r_inner = r_in;
  s.r_outer = r_out;
  s.nr = nr;
  s.ntheta = ntheta;
  return s;
}

void DomainSpec::validate() const {
  switch (kind) {
    case DomainKind::interval:
      check_length(length, "interval length");
      check_resolution(nx, "n");
      break;
    case DomainKind::rectangle:
      check_length(length_x, "rectangle length_x");
      check_length(length_y, "rectangle length_y");
      check_resolution(nx, "nx");
      check_resolution(ny, "ny");
      break;
    case DomainKind::disk:
      check_length(r_outer, "disk radius");
      break;
    case DomainKind::annulus:
      check_length(r_inner, "annulus r_in");
      check_length(r_outer, "annulus r_out");
      if (!(r_inner < r_outer)) {
        throw InvalidGeometry("annulus requires r_in < r_out");
      }
      break;
  }
  if (is_polar()) {
    check_resolution(nr, "nr");
    if (ntheta < 8 || ntheta % 2 != 0) {
      throw InvalidGeometry("ntheta must be even and >= 8, got " + std::to_string(ntheta));
    }
  }
}

nlohmann::json to_json(const DomainSpec& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case DomainKind::interval:
      j["length"] = s.length;
      j["n"] = s.nx;
      break;
    case DomainKind::rectangle:
      j["length_x"] = s.length_x;
      j["length_y"] = s.length_y;
      j["nx"] = s.nx;
      j["ny"] = s.ny;
      break;
    case DomainKind::disk:
      j["radius"] = s.r_outer;
      j["nr"] = s.nr;
      j["ntheta"] = s.ntheta;
      break;
    case DomainKind::annulus:
      j["r_in"] = s.r_inner;
      j["r_out"] = s.r_outer;
      j["nr"] = s.nr;
      j["ntheta"] = s.ntheta;
      break;
  }
  return j;
}

DomainSpec domain_spec_from_json(const nlohmann::json& j) {
  const auto kind = domain_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case DomainKind::interval:
      return DomainSpec::interval(j.at("length").get<double>(), j.at("n").get<int>());
    case DomainKind::rectangle:
      return DomainSpec::rectangle(j.at("length_x").get<double>(), j.at("length_y").get<double>(),
                                   j.at("nx").get<int>(), j.at("ny").get<int>());
    case DomainKind::disk:
      return DomainSpec::disk(j.at("radius").get<double>(), j.at("nr").get<int>(),
                              j.at("ntheta").get<int>());
    case DomainKind::annulus:
      return DomainSpec::annulus(j.at("r_in").get<double>(), j.at("r_out").get<double>(),
                                 j.at("nr").get<int>(), j.at("ntheta").get<int>());
  }
  throw InvalidArgument("unreachable domain kind");
}

Grid::Grid(const DomainSpec& spec) : spec_(spec) {
  spec_.validate();
  switch (spec_.kind) {
    case DomainKind::interval: build_interval(); break;
    case DomainKind::rectangle: build_rectangle(); break;
    case DomainKind::disk:
    case DomainKind::annulus: build_polar(); break;
  }
}

void Grid::build_interval() {
  const int n = spec_.nx;
  hx_ = spec_.length / (n + 1);
  x_.resize(n);
  y_.assign(n, 0.0);
  radius_.resize(n);
  weights_.assign(n, hx_);
  diag_.assign(n, 2.0 / (hx_ * hx_));
  for (int i = 0; i < n; ++i) {
    x_[i] = (i + 1) * hx_;
    radius_[i] = std::abs(x_[i]);
  }
}

void Grid::build_rectangle() {
  const int nx = spec_.nx, ny = spec_.ny;
  hx_ = spec_.length_x / (nx + 1);
  hy_ = spec_.length_y / (ny + 1);
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  x_.resize(n);
  y_.resize(n);
  radius_.resize(n);
  weights_.assign(n, hx_ * hy_);
  diag_.assign(n, 2.0 / (hx_ * hx_) + 2.0 / (hy_ * hy_));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iy) * nx + ix;
      // symmetric node placement about the origin
      x_[k] = 0.5 * hx_ * (2 * ix - (nx - 1));
      y_[k] = 0.5 * hy_ * (2 * iy - (ny - 1));
      radius_[k] = std::hypot(x_[k], y_[k]);
    }
  }
}

void Grid::build_polar() {
  const int nr = spec_.nr, nt = spec_.ntheta;
  const double r_in = spec_.kind == DomainKind::disk ? 0.0 : spec_.r_inner;
  dr_ = (spec_.r_outer - r_in) / nr;
  dtheta_ = 2.0 * kPi / nt;
  ring_r_.resize(nr);
  coef_out_.resize(nr);
  coef_in_.resize(nr);
  coef_ang_.resize(nr);
  for (int j = 0; j < nr; ++j) {
    const double r = r_in + (j + 0.5) * dr_;
    const double r_plus = r_in + (j + 1) * dr_;
    const double r_minus = r_in + j * dr_;
    ring_r_[j] = r;
    coef_out_[j] = r_plus / (r * dr_ * dr_);
    coef_in_[j] = r_minus / (r * dr_ * dr_);
    coef_ang_[j] = 1.0 / (r * r * dtheta_ * dtheta_);
  }
  const std::size_t n = static_cast<std::size_t>(nr) * nt;
  x_.resize(n);
  y_.resize(n);
  radius_.resize(n);
  weights_.resize(n);
  diag_.resize(n);
  for (int j = 0; j < nr; ++j) {
    // Dirichlet faces use the ghost value -u, doubling the face coefficient
    double d = 2.0 * coef_ang_[j];
    d += (j == nr - 1) ? 2.0 * coef_out_[j] : coef_out_[j];
    if (j == 0) {
      d += spec_.kind == DomainKind::annulus ? 2.0 * coef_in_[j] : 0.0;
    } else {
      d += coef_in_[j];
    }
    for (int l = 0; l < nt; ++l) {
      const std::size_t k = polar_index(j, l);
      const double th = angle(l);
      x_[k] = ring_r_[j] * std::cos(th);
      y_[k] = ring_r_[j] * std::sin(th);
      radius_[k] = ring_r_[j];
      weights_[k] = ring_r_[j] * dr_ * dtheta_;
      diag_[k] = d;
    }
  }
}

double Grid::angle(int l) const { return 2.0 * kPi * l / spec_.ntheta; }

double Grid::area() const {
  switch (spec_.kind) {
    case DomainKind::interval: return spec_.length;
    case DomainKind::rectangle: return spec_.length_x * spec_.length_y;
    case DomainKind::disk: return kPi * spec_.r_outer * spec_.r_outer;
    case DomainKind::annulus:
      return kPi * (spec_.r_outer * spec_.r_outer - spec_.r_inner * spec_.r_inner);
  }
  return 0.0;
}

void Grid::apply_neg_laplacian(std::span<const double> f, std::span<double> out) const {
  require_on_grid(*this, f, "input");
  require_on_grid(*this, out, "output");
  switch (spec_.kind) {
    case DomainKind::interval: {
      const int n = spec_.nx;
      const double inv_h2 = 1.0 / (hx_ * hx_);
      for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? f[i - 1] : 0.0;
        const double right = i + 1 < n ? f[i + 1] : 0.0;
        out[i] = (2.0 * f[i] - (left + right)) * inv_h2;
      }
      return;
    }
    case DomainKind::rectangle: {
      const int nx = spec_.nx, ny = spec_.ny;
      const double ax = 1.0 / (hx_ * hx_), ay = 1.0 / (hy_ * hy_);
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
          const std::size_t k = static_cast<std::size_t>(iy) * nx + ix;
          const double w = ix > 0 ? f[k - 1] : 0.0;
          const double e = ix + 1 < nx ? f[k + 1] : 0.0;
          const double s = iy > 0 ? f[k - nx] : 0.0;
          const double nn = iy + 1 < ny ? f[k + nx] : 0.0;
          out[k] = (2.0 * f[k] - (w + e)) * ax + (2.0 * f[k] - (s + nn)) * ay;
        }
      }
      return;
    }
    case DomainKind::disk:
    case DomainKind::annulus: {
      const int nr = spec_.nr, nt = spec_.ntheta;
      const bool annulus = spec_.kind == DomainKind::annulus;
      for (int j = 0; j < nr; ++j) {
        const double co = coef_out_[j], ci = coef_in_[j], ca = coef_ang_[j];
        for (int l = 0; l < nt; ++l) {
          const std::size_t k = polar_index(j, l);
          const double u = f[k];
          const double outer = j + 1 < nr ? f[k + nt] : -u;
          double inner_term = 0.0;
          if (j > 0) {
            inner_term = ci * (u - f[k - nt]);
          } else if (annulus) {
            inner_term = ci * (2.0 * u);
          }
          const double lm = f[polar_index(j, l == 0 ? nt - 1 : l - 1)];
          const double lp = f[polar_index(j, l == nt - 1 ? 0 : l + 1)];
          out[k] = co * (u - outer) + inner_term + ca * (2.0 * u - (lm + lp));
        }
      }
      return;
    }
  }
}

double Grid::dirichlet_form(std::span<const double> f) const {
  require_on_grid(*this, f, "input");
  double s = 0.0;
  switch (spec_.kind) {
    case DomainKind::interval: {
      const std::size_t n = f.size();
      const double a = 1.0 / hx_;
      s = f[0] * f[0] + f[n - 1] * f[n - 1];
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = f[i] - f[i + 1];
        s += d * d;
      }
      return a * s;
    }
    case DomainKind::rectangle: {
      const int nx = spec_.nx, ny = spec_.ny;
      const double ax = hy_ / hx_, ay = hx_ / hy_;
      double sx = 0.0, sy = 0.0;
      for (int iy = 0; iy < ny; ++iy) {
        const std::size_t row = static_cast<std::size_t>(iy) * nx;
        sx += f[row] * f[row] + f[row + nx - 1] * f[row + nx - 1];
        for (int ix = 0; ix + 1 < nx; ++ix) {
          const double d = f[row + ix] - f[row + ix + 1];
          sx += d * d;
        }
      }
      const std::size_t last = static_cast<std::size_t>(ny - 1) * nx;
      for (int ix = 0; ix < nx; ++ix) {
        sy += f[ix] * f[ix] + f[last + ix] * f[last + ix];
        for (int iy = 0; iy + 1 < ny; ++iy) {
          const std::size_t k = static_cast<std::size_t>(iy) * nx + ix;
          const double d = f[k] - f[k + nx];
          sy += d * d;
        }
      }
      return ax * sx + ay * sy;
    }
    case DomainKind::disk:
    case DomainKind::annulus: {
      const int nr = spec_.nr, nt = spec_.ntheta;
      for (int j = 0; j < nr; ++j) {
        const double w = weights_[polar_index(j, 0)];
        double ang = 0.0, rad = 0.0;
        for (int l = 0; l < nt; ++l) {
          const std::size_t k = polar_index(j, l);
          const double d = f[k] - f[polar_index(j, l == nt - 1 ? 0 : l + 1)];
          ang += d * d;
          if (j + 1 < nr) {
            const double e = f[k] - f[k + nt];
            rad += e * e;
          } else {
            rad += 2.0 * f[k] * f[k];
          }
          if (j == 0 && spec_.kind == DomainKind::annulus) rad += (2.0 * coef_in_[0] / coef_out_[0]) * f[k] * f[k];
        }
        s += w * (coef_ang_[j] * ang + coef_out_[j] * rad);
      }
      return s;
    }
  }
  return s;
}

Eigen::SparseMatrix<double> Grid::weighted_operator() const {
  using Triplet = Eigen::Triplet<double>;
  const std::size_t n = size();
  std::vector<Triplet> entries;
  entries.reserve(5 * n);
  auto add = [&](std::size_t r, std::size_t c, double v) {
    entries.emplace_back(static_cast<int>(r), static_cast<int>(c), weights_[r] * v);
  };
  for (std::size_t k = 0; k < n; ++k) add(k, k, diag_[k]);
  switch (spec_.kind) {
    case DomainKind::interval: {
      const double a = 1.0 / (hx_ * hx_);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        add(k, k + 1, -a);
        add(k + 1, k, -a);
      }
      break;
    }
    case DomainKind::rectangle: {
      const std::size_t nx = static_cast<std::size_t>(spec_.nx);
      const double ax = 1.0 / (hx_ * hx_), ay = 1.0 / (hy_ * hy_);
      for (std::size_t k = 0; k < n; ++k) {
        if ((k % nx) + 1 < nx) {
          add(k, k + 1, -ax);
          add(k + 1, k, -ax);
        }
        if (k + nx < n) {
          add(k, k + nx, -ay);
          add(k + nx, k, -ay);
        }
      }
      break;
    }
    case DomainKind::disk:
    case DomainKind::annulus: {
      const int nr = spec_.nr, nt = spec_.ntheta;
      for (int j = 0; j < nr; ++j) {
        for (int l = 0; l < nt; ++l) {
          const std::size_t k = polar_index(j, l);
          add(k, polar_index(j, (l + 1) % nt), -coef_ang_[j]);
          add(k, polar_index(j, (l + nt - 1) % nt), -coef_ang_[j]);
          if (j + 1 < nr) add(k, k + nt, -coef_out_[j]);
          if (j > 0) add(k, k - nt, -coef_in_[j]);
        }
      }
      break;
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

GridPtr build_grid(const DomainSpec& spec) { return std::make_shared<const Grid>(spec); }

Field apply_neg_laplacian(const Grid& grid, const Field& f) {
  Field out(grid.size());
  grid.apply_neg_laplacian(f, out);
  return out;
}

void require_on_grid(const Grid& grid, std::span<const double> f, const std::string& name) {
  if (f.size() != grid.size()) {
    throw GridMismatch(name + " has " + std::to_string(f.size()) + " values, grid has " +
                       std::to_string(grid.size()) + " nodes");
  }
}

double integrate(const Grid& grid, const Field& f) {
  require_on_grid(grid, f, "integrand");
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

double inner(const Grid& grid, const Field& f, const Field& g) {
  require_on_grid(grid, f, "left operand");
  require_on_grid(grid, g, "right operand");
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * g[i];
  return s;
}

double norm(const Grid& grid, const Field& f) { return std::sqrt(inner(grid, f, f)); }

namespace {

// Preconditioned CG for c*(-Delta_h) + diag(shift), self-adjoint in <.,.>_w.
CgResult conjugate_gradient(const Grid& grid, double c, const Field& shift, const Field& rhs,
                            const CgOptions& opt) {
  const std::size_t n = grid.size();
  CgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm(grid, rhs);
  if (bnorm == 0.0) return res;

  Field jac(n, 1.0);
  if (opt.jacobi) {
    const auto d = grid.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = c * d[i] + shift[i];
      jac[i] = v > 0.0 ? 1.0 / v : 1.0;
    }
  }
  Field r = rhs, z(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = jac[i] * r[i];
  p = z;
  double rz = inner(grid, r, z);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    grid.apply_neg_laplacian(p, ap);
    for (std::size_t i = 0; i < n; ++i) ap[i] = c * ap[i] + shift[i] * p[i];
    const double curvature = inner(grid, p, ap);
    if (!(curvature > 0.0)) {
      throw IndefiniteOperator("conjugate gradient breakdown", it, curvature);
    }
    const double alpha = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    res.iterations = it;
    res.relative_residual = norm(grid, r) / bnorm;
    if (res.relative_residual <= opt.tolerance) return res;
    for (std::size_t i = 0; i < n; ++i) z[i] = jac[i] * r[i];
    const double rz_new = inner(grid, r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceFailure("conjugate gradient did not converge", res.iterations,
                           res.relative_residual);
}

}  // namespace

CgResult shifted_poisson_solve(const Grid& grid, double c, const Field& potential, double sigma,
                               const Field& rhs, const CgOptions& options) {
  require_on_grid(grid, potential, "potential");
  require_on_grid(grid, rhs, "rhs");
  if (!(c > 0.0)) throw InvalidArgument("shifted_poisson_solve: c must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("shifted_poisson_solve: sigma must be positive");
  Field shift(grid.size());
  for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = potential[i] + sigma;
  return conjugate_gradient(grid, c, shift, rhs, options);
}

double safe_shift(const Field& potential) {
  double vmin = 0.0;
  for (double v : potential) vmin = std::min(vmin, v);
  return 1.0 - vmin;
}

EigenEstimate lambda1_estimate(const Grid& grid, double tolerance, int max_iterations) {
  const std::size_t n = grid.size();
  const Field zero(n, 0.0);
  CgOptions inner_opt;
  inner_opt.tolerance = std::min(1e-12, 1e-4 * tolerance);
  inner_opt.max_iterations = 200000;

  EigenEstimate est;
  Field v(n, 1.0), av(n);
  double nv = norm(grid, v);
  for (auto& x : v) x /= nv;
  for (int it = 1; it <= max_iterations; ++it) {
    Field y = conjugate_gradient(grid, 1.0, zero, v, inner_opt).x;
    const double ny = norm(grid, y);
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / ny;
    grid.apply_neg_laplacian(v, av);
    const double lambda = inner(grid, v, av);
    double r2 = 0.0;
    const auto w = grid.weights();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = av[i] - lambda * v[i];
      r2 += w[i] * d * d;
    }
    est.value = lambda;
    est.relative_residual = std::sqrt(r2) / lambda;
    est.iterations = it;
    if (est.relative_residual < tolerance) {
      est.vector = v;
      return est;
    }
  }
  throw ConvergenceFailure("inverse power iteration did not converge", est.iterations,
                           est.relative_residual);
}

struct ShiftedPoissonFactor::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseMatrix<double> base;  // c * W * (-Delta_h)
  Eigen::SparseMatrix<double> work;
  Eigen::VectorXd weights;

  void factor(const Field& potential, double sigma) {
    work = base;
    for (Eigen::Index k = 0; k < weights.size(); ++k)
      work.coeffRef(k, k) += weights[k] * (potential[static_cast<std::size_t>(k)] + sigma);
    ldlt.factorize(work);
    if (ldlt.info() != Eigen::Success) {
      throw IndefiniteOperator("sparse factorization failed", 0, 0.0);
    }
    const auto d = ldlt.vectorD();
    if (d.minCoeff() <= 0.0) {
      throw IndefiniteOperator("shifted operator is not positive definite", 0, d.minCoeff());
    }
  }
};

ShiftedPoissonFactor::ShiftedPoissonFactor(const Grid& grid, double c, const Field& potential,
                                           double sigma)
    : impl_(std::make_unique<Impl>()) {
  require_on_grid(grid, potential, "potential");
  impl_->base = c * grid.weighted_operator();
  const auto w = grid.weights();
  impl_->weights.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) impl_->weights[static_cast<Eigen::Index>(i)] = w[i];
  impl_->ldlt.analyzePattern(impl_->base);
  impl_->factor(potential, sigma);
}

void ShiftedPoissonFactor::update(const Field& potential, double sigma) {
  if (static_cast<Eigen::Index>(potential.size()) != impl_->weights.size()) {
    throw GridMismatch("factor update: potential size mismatch");
  }
  impl_->factor(potential, sigma);
}

ShiftedPoissonFactor::~ShiftedPoissonFactor() = default;
ShiftedPoissonFactor::ShiftedPoissonFactor(ShiftedPoissonFactor&&) noexcept = default;
ShiftedPoissonFactor& ShiftedPoissonFactor::operator=(ShiftedPoissonFactor&&) noexcept = default;

Field ShiftedPoissonFactor::solve(const Field& rhs) const {
  const auto n = impl_->weights.size();
  if (static_cast<Eigen::Index>(rhs.size()) != n) {
    throw GridMismatch("factor solve: rhs size mismatch");
  }
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = impl_->weights[i] * rhs[static_cast<std::size_t>(i)];
  Eigen::VectorXd x = impl_->ldlt.solve(b);
  return Field(x.data(), x.data() + n);
}

nlohmann::json grid_to_json(const Grid& grid) {
  nlohmann::json j = to_json(grid.spec());
  j["nodes"] = grid.size();
  return j;
}

void write_nodes_csv(const Grid& grid, std::ostream& out) {
  const auto x = grid.x();
  const auto y = grid.y();
  const auto w = grid.weights();
  out.precision(17);
  switch (grid.kind()) {
    case DomainKind::interval:
      out << "index,x,weight\n";
      for (std::size_t i = 0; i < grid.size(); ++i) out << i << ',' << x[i] << ',' << w[i] << '\n';
      break;
    case DomainKind::rectangle:
      out << "index,x,y,weight\n";
      for (std::size_t i = 0; i < grid.size(); ++i)
        out << i << ',' << x[i] << ',' << y[i] << ',' << w[i] << '\n';
      break;
    default:
      out << "index,r,theta,weight\n";
      for (int j = 0; j < grid.rings(); ++j)
        for (int l = 0; l < grid.angles(); ++l) {
          const auto k = grid.polar_index(j, l);
          out << k << ',' << grid.ring_radius(j) << ',' << grid.angle(l) << ',' << w[k] << '\n';
        }
      break;
  }
}

}  // namespace nehari
