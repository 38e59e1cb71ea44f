#include "nehari/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nehari/errors.hpp"

namespace nehari {

void Problem::validate() const {
  if (!grid) throw InvalidArgument("problem has no grid");
  if (!model) throw InvalidArgument("problem has no model");
  const auto k = diffusion.size();
  if (k == 0) throw InvalidArgument("problem needs k >= 1 components");
  if (model->components() != k)
    throw InvalidArgument("model has " + std::to_string(model->components()) +
                          " components, problem has " + std::to_string(k));
  if (potentials.size() != k) throw InvalidArgument("one potential per component required");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(diffusion[i] > 0.0) || !std::isfinite(diffusion[i]))
      throw InvalidArgument("diffusion constants must be positive");
    require_on_grid(*grid, potentials[i], "potential " + std::to_string(i + 1));
  }
}

Problem make_problem(GridPtr grid, NonlinearityPtr model, const std::vector<Potential>& potentials,
                     std::vector<double> diffusion) {
  Problem p;
  p.grid = std::move(grid);
  p.model = std::move(model);
  if (!p.grid) throw InvalidArgument("problem has no grid");
  for (const auto& v : potentials) p.potentials.push_back(v.realize(*p.grid));
  p.diffusion = std::move(diffusion);
  p.validate();
  return p;
}

void require_state(const Problem& problem, const State& u) {
  if (u.size() != problem.components())
    throw GridMismatch("state has " + std::to_string(u.size()) + " components, expected " +
                       std::to_string(problem.components()));
  for (std::size_t i = 0; i < u.size(); ++i)
    require_on_grid(*problem.grid, u[i], "component " + std::to_string(i + 1));
}

namespace {

// node-major |u|
std::vector<double> gather_abs(const State& u, std::size_t n) {
  const auto k = u.size();
  std::vector<double> a(n * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t m = 0; m < n; ++m) a[m * k + i] = std::abs(u[i][m]);
  return a;
}

double quadratic_part(const Problem& problem, const Field& ui, std::size_t i) {
  const Grid& g = *problem.grid;
  const auto w = g.weights();
  const auto& v = problem.potentials[i];
  double s = 0.0;
  for (std::size_t m = 0; m < ui.size(); ++m) s += w[m] * v[m] * ui[m] * ui[m];
  return problem.diffusion[i] * g.dirichlet_form(ui) + s;
}

}  // namespace

std::vector<double> component_norms_sq(const Problem& problem, const State& u) {
  require_state(problem, u);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = quadratic_part(problem, u[i], i);
  return out;
}

double energy(const Problem& problem, const State& u) {
  const auto norms = component_norms_sq(problem, u);
  const auto n = problem.grid->size();
  const auto k = u.size();
  const auto w = problem.grid->weights();
  const auto a = gather_abs(u, n);
  double nonlinear = 0.0;
  for (std::size_t m = 0; m < n; ++m)
    nonlinear += w[m] * problem.model->value(std::span<const double>(a.data() + m * k, k));
  return 0.5 * std::accumulate(norms.begin(), norms.end(), 0.0) - nonlinear;
}

State energy_gradient(const Problem& problem, const State& u) {
  require_state(problem, u);
  const Grid& g = *problem.grid;
  const auto n = g.size();
  const auto k = u.size();
  State out(k, Field(n));
  for (std::size_t i = 0; i < k; ++i) {
    g.apply_neg_laplacian(u[i], out[i]);
    for (std::size_t m = 0; m < n; ++m)
      out[i][m] = problem.diffusion[i] * out[i][m] + problem.potentials[i][m] * u[i][m];
  }
  const auto a = gather_abs(u, n);
  std::vector<double> grad(k);
  for (std::size_t m = 0; m < n; ++m) {
    problem.model->gradient(std::span<const double>(a.data() + m * k, k), grad);
    // P_i at a signed point is sign(u_i) P_i(|u|)
    for (std::size_t i = 0; i < k; ++i)
      out[i][m] -= (u[i][m] < 0.0 ? -grad[i] : grad[i]);
  }
  return out;
}

std::vector<double> nehari_residuals(const Problem& problem, const State& u) {
  auto norms = component_norms_sq(problem, u);
  const auto n = problem.grid->size();
  const auto k = u.size();
  for (std::size_t i = 0; i < k; ++i)
    if (!(norms[i] > kNormFloor * kNormFloor))
      throw DegenerateState("component " + std::to_string(i + 1) + " vanishes", i);
  const auto w = problem.grid->weights();
  const auto a = gather_abs(u, n);
  std::vector<double> grad(k);
  for (std::size_t m = 0; m < n; ++m) {
    problem.model->gradient(std::span<const double>(a.data() + m * k, k), grad);
    for (std::size_t i = 0; i < k; ++i) norms[i] -= w[m] * grad[i] * a[m * k + i];
  }
  return norms;
}

std::vector<State> constraint_gradients(const Problem& problem, const State& u) {
  require_state(problem, u);
  const Grid& g = *problem.grid;
  const auto n = g.size();
  const auto k = u.size();
  std::vector<State> out(k, State(k, Field(n, 0.0)));
  for (std::size_t i = 0; i < k; ++i) {
    Field& d = out[i][i];
    g.apply_neg_laplacian(u[i], d);
    for (std::size_t m = 0; m < n; ++m)
      d[m] = 2.0 * (problem.diffusion[i] * d[m] + problem.potentials[i][m] * u[i][m]);
  }
  const auto a = gather_abs(u, n);
  std::vector<double> grad(k), hess(k * k);
  for (std::size_t m = 0; m < n; ++m) {
    const std::span<const double> am(a.data() + m * k, k);
    problem.model->gradient(am, grad);
    problem.model->hessian(am, hess);
    for (std::size_t i = 0; i < k; ++i) {
      const double si = u[i][m] < 0.0 ? -1.0 : 1.0;
      out[i][i][m] -= si * grad[i];
      for (std::size_t j = 0; j < k; ++j) {
        const double sj = u[j][m] < 0.0 ? -1.0 : 1.0;
        out[i][j][m] -= sj * hess[i * k + j] * a[m * k + i];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- scaling map

ScalingMap::ScalingMap(const Problem& problem, const State& u) : problem_(&problem) {
  norms_sq_ = component_norms_sq(problem, u);
  for (std::size_t i = 0; i < norms_sq_.size(); ++i)
    if (!(norms_sq_[i] > kNormFloor * kNormFloor))
      throw DegenerateState("component " + std::to_string(i + 1) + " vanishes", i);
  abs_ = gather_abs(u, problem.grid->size());
}

double ScalingMap::value(const Eigen::VectorXd& t) const {
  const auto k = components();
  const auto n = problem_->grid->size();
  const auto w = problem_->grid->weights();
  double quad = 0.0;
  for (std::size_t i = 0; i < k; ++i) quad += 0.5 * t[static_cast<Eigen::Index>(i)] *
                                               t[static_cast<Eigen::Index>(i)] * norms_sq_[i];
  std::vector<double> p(k);
  double nonlinear = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < k; ++i)
      p[i] = std::abs(t[static_cast<Eigen::Index>(i)]) * abs_[m * k + i];
    nonlinear += w[m] * problem_->model->value(p);
  }
  return quad - nonlinear;
}

PhiBundle ScalingMap::bundle(const Eigen::VectorXd& t) const {
  const auto k = components();
  const auto ki = static_cast<Eigen::Index>(k);
  const auto n = problem_->grid->size();
  const auto w = problem_->grid->weights();
  PhiBundle out;
  out.gradient = Eigen::VectorXd::Zero(ki);
  out.hessian = Eigen::MatrixXd::Zero(ki, ki);
  std::vector<double> p(k), grad(k), hess(k * k), sgn(k);
  double nonlinear = 0.0;
  for (std::size_t i = 0; i < k; ++i) sgn[i] = t[static_cast<Eigen::Index>(i)] < 0.0 ? -1.0 : 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double* am = abs_.data() + m * k;
    for (std::size_t i = 0; i < k; ++i) p[i] = std::abs(t[static_cast<Eigen::Index>(i)]) * am[i];
    nonlinear += w[m] * problem_->model->value(p);
    problem_->model->gradient(p, grad);
    problem_->model->hessian(p, hess);
    for (std::size_t i = 0; i < k; ++i) {
      out.gradient[static_cast<Eigen::Index>(i)] += w[m] * grad[i] * am[i];
      for (std::size_t j = 0; j < k; ++j)
        out.hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            w[m] * hess[i * k + j] * am[i] * am[j];
    }
  }
  out.value = -nonlinear;
  for (std::size_t i = 0; i < k; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.value += 0.5 * t[ii] * t[ii] * norms_sq_[i];
    out.gradient[ii] = t[ii] * norms_sq_[i] - sgn[i] * out.gradient[ii];
    for (std::size_t j = 0; j < k; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out.hessian(ii, jj) = (i == j ? norms_sq_[i] : 0.0) - sgn[i] * sgn[j] * out.hessian(ii, jj);
    }
  }
  return out;
}

PhiBundle phi_bundle(const Problem& problem, const State& u, const Eigen::VectorXd& t) {
  if (static_cast<std::size_t>(t.size()) != problem.components())
    throw InvalidArgument("phi_bundle: t has wrong dimension");
  return ScalingMap(problem, u).bundle(t);
}

// ---------------------------------------------------------------- projection

nlohmann::json to_json(const NehariDiagnostics& d) {
  return nlohmann::json{{"energy", d.energy},
                        {"residuals", d.residuals},
                        {"norms", d.norms},
                        {"hessian_max_eig", d.hessian_max_eig},
                        {"lower_bound_slack", d.lower_bound_slack}};
}

namespace {

double max_eig(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Newton direction for maximizing phi; positive curvature directions are
// flipped so that the step is always an ascent direction.
Eigen::VectorXd ascent_step(const PhiBundle& b, double scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b.hessian + b.hessian.transpose()));
  Eigen::VectorXd lam = es.eigenvalues();
  const double floor = 1e-8 * scale;
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = -std::max(std::abs(lam[i]), floor);
  const Eigen::MatrixXd& q = es.eigenvectors();
  return -(q * (q.transpose() * b.gradient).cwiseQuotient(lam));
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool converged(const PhiBundle& b, const Eigen::VectorXd& t, const std::vector<double>& nsq,
               const NehariOptions& opt) {
  double scale = 0.0;
  bool per_component = true;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double tn = t[i] * nsq[static_cast<std::size_t>(i)];
    scale += tn;
    // F_i(t o u) = t_i * dphi/dt_i
    if (std::abs(b.gradient[i]) > opt.manifold_tolerance * tn) per_component = false;
  }
  return per_component && b.gradient.norm() <= opt.newton_tolerance * scale;
}

}  // namespace

double nehari_defect(const Problem& problem, const State& u) {
  const auto f = nehari_residuals(problem, u);
  const auto nsq = component_norms_sq(problem, u);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(f[i]) / nsq[i]);
  return worst;
}

NehariProjection project_to_nehari(const Problem& problem, const State& u,
                                   const NehariOptions& opt, std::optional<Eigen::VectorXd> t0) {
  const ScalingMap phi(problem, u);
  const auto k = phi.components();
  const auto& nsq = phi.norms_sq();
  const double nscale = *std::max_element(nsq.begin(), nsq.end());

  Eigen::VectorXd t = t0.value_or(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)));
  if (static_cast<std::size_t>(t.size()) != k)
    throw InvalidArgument("project_to_nehari: t0 has wrong dimension");
  if ((t.array() <= 0.0).any()) throw InvalidArgument("project_to_nehari: t0 must be positive");

  std::vector<std::vector<double>> trajectory{to_vec(t)};
  PhiBundle b = phi.bundle(t);
  int it = 0;
  bool done = converged(b, t, nsq, opt);
  while (!done) {
    if (it >= opt.max_iterations)
      throw ProjectionFailure("iteration cap reached (|grad phi| = " +
                                  std::to_string(b.gradient.norm()) + ")",
                              std::move(trajectory));
    ++it;
    const Eigen::VectorXd step = ascent_step(b, nscale);
    double tau = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, tau *= 0.5) {
      const Eigen::VectorXd trial = t + tau * step;
      if ((trial.array() <= 0.0).any()) continue;
      PhiBundle bt = phi.bundle(trial);
      if (bt.value > b.value || bt.gradient.norm() < b.gradient.norm()) {
        t = trial;
        b = std::move(bt);
        accepted = true;
        break;
      }
    }
    trajectory.push_back(to_vec(t));
    if (!accepted)
      throw ProjectionFailure("step halving exhausted", std::move(trajectory));
    if ((t.array() > opt.escape_bound).any() || (t.array() < 1.0 / opt.escape_bound).any())
      throw ProjectionFailure("scaling escaped to the cone boundary or infinity",
                              std::move(trajectory));
    done = converged(b, t, nsq, opt);
  }

  // One pure Newton polish step; the residual is already inside tolerance.
  if (max_eig(b.hessian) < 0.0) {
    const Eigen::VectorXd trial = t - b.hessian.ldlt().solve(b.gradient);
    if ((trial.array() > 0.0).all()) {
      PhiBundle bt = phi.bundle(trial);
      if (bt.gradient.norm() <= b.gradient.norm()) {
        t = trial;
        b = std::move(bt);
      }
    }
  }

  const double top = max_eig(b.hessian);
  if (!(top < 0.0))
    throw ProjectionFailure("limit is not a nondegenerate maximum (largest Hessian eigenvalue " +
                                std::to_string(top) + ")",
                            std::move(trajectory));

  NehariProjection out;
  out.t = t;
  out.iterations = it;
  out.state.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.state[i] = u[i];
    for (auto& x : out.state[i]) x = t[static_cast<Eigen::Index>(i)] * std::abs(x);
  }
  auto& d = out.diagnostics;
  d.energy = energy(problem, out.state);
  d.residuals = nehari_residuals(problem, out.state);
  const auto norms = component_norms_sq(problem, out.state);
  double sum = 0.0;
  for (double x : norms) {
    d.norms.push_back(std::sqrt(std::max(0.0, x)));
    sum += x;
  }
  d.hessian_max_eig = top;
  const double alpha = problem.model->growth_exponent() - 2.0;
  d.lower_bound_slack = d.energy - (0.5 - 1.0 / (2.0 + alpha)) * sum;
  return out;
}

double lower_bound_check(const Problem& problem, const State& u, double alpha, double tolerance) {
  const double defect = nehari_defect(problem, u);
  if (defect > tolerance)
    throw NotOnNehari("relative defect " + std::to_string(defect) + " exceeds " +
                      std::to_string(tolerance));
  const auto norms = component_norms_sq(problem, u);
  const double sum = std::accumulate(norms.begin(), norms.end(), 0.0);
  return energy(problem, u) - (0.5 - 1.0 / (2.0 + alpha)) * sum;
}

// ---------------------------------------------------------------- membership

std::string to_string(Membership m) {
  switch (m) {
    case Membership::analytic_yes: return "analytic_yes";
    case Membership::sampled_yes: return "sampled_yes";
    case Membership::sampled_no: return "sampled_no";
  }
  return "unknown";
}

namespace {

std::vector<std::vector<double>> ray_directions(std::size_t k) {
  const std::vector<double> levels = k <= 4 ? std::vector<double>{1.0, 2.0, 4.0}
                                            : std::vector<double>{1.0, 2.0};
  std::size_t total = 1;
  for (std::size_t i = 0; i < k && total <= 1024; ++i) total *= levels.size();
  total = std::min<std::size_t>(total, 1024);
  std::vector<std::vector<double>> out;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> d(k);
    std::size_t rest = idx;
    double nrm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      d[i] = levels[rest % levels.size()];
      rest /= levels.size();
      nrm += d[i] * d[i];
    }
    for (auto& x : d) x /= std::sqrt(nrm);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

MembershipResult membership_in_M(const Problem& problem, const State& u,
                                 double manifold_tolerance) {
  require_state(problem, u);
  if (const auto* pm = dynamic_cast<const PowerModel*>(problem.model.get())) {
    if (pm->params().violations().empty()) {
      try {
        if (nehari_defect(problem, u) <= manifold_tolerance)
          return {Membership::analytic_yes, "power family on the Nehari set", {}};
      } catch (const DegenerateState&) {
      }
    }
  }
  const ScalingMap phi(problem, u);
  const auto k = phi.components();
  const double radii[3] = {10.0, 100.0, 1000.0};
  for (const auto& d : ray_directions(k)) {
    double prev = 0.0;
    bool ok = true;
    for (int r = 0; r < 3 && ok; ++r) {
      Eigen::VectorXd t(static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < k; ++i) t[static_cast<Eigen::Index>(i)] = radii[r] * d[i];
      const double v = phi.value(t);
      if (r > 0 && !(v < prev)) ok = false;
      prev = v;
    }
    if (ok && !(prev < -1.0)) ok = false;
    if (!ok) return {Membership::sampled_no, "phi does not decrease to -inf along a sampled ray", d};
  }
  return {Membership::sampled_yes, "phi decreasing below -1 on all sampled rays", {}};
}

// ---------------------------------------------------------------- unit diffusion

State UnitDiffusion::forward(const State& u) const {
  State v = u;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (auto& x : v[i]) x *= scales[i];
  return v;
}

State UnitDiffusion::backward(const State& v) const {
  State u = v;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (auto& x : u[i]) x /= scales[i];
  return u;
}

UnitDiffusion rescale_unit_diffusion(const Problem& problem) {
  problem.validate();
  const auto k = problem.components();
  UnitDiffusion out;
  out.scales.resize(k);
  std::vector<double> inv(k);
  bool identity = true;
  for (std::size_t i = 0; i < k; ++i) {
    out.scales[i] = std::sqrt(problem.diffusion[i]);
    inv[i] = 1.0 / out.scales[i];
    identity = identity && problem.diffusion[i] == 1.0;
  }
  out.problem = problem;
  if (identity) return out;
  out.problem.model = std::make_shared<ScaledNonlinearity>(problem.model, inv);
  for (std::size_t i = 0; i < k; ++i) {
    for (auto& x : out.problem.potentials[i]) x /= problem.diffusion[i];
    out.problem.diffusion[i] = 1.0;
  }
  return out;
}

}  // namespace nehari
