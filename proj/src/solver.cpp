#include "nehari/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "nehari/errors.hpp"

namespace nehari {

std::string to_string(StartKind kind) {
  switch (kind) {
    case StartKind::radial: return "radial";
    case StartKind::segregated: return "segregated";
    case StartKind::random_bumps: return "random_bumps";
    case StartKind::supplied: return "supplied";
  }
  return "unknown";
}

std::vector<StartKind> plan_starts(std::size_t k, int count) {
  std::vector<StartKind> out;
  if (count >= 1) out.push_back(StartKind::radial);
  if (k >= 2 && count >= 2) out.push_back(StartKind::segregated);
  while (static_cast<int>(out.size()) < count) out.push_back(StartKind::random_bumps);
  return out;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth positive profile vanishing on the boundary.
Field boundary_profile(const Grid& g) {
  const auto& s = g.spec();
  const auto x = g.x();
  const auto y = g.y();
  const auto r = g.radius();
  Field out(g.size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    switch (s.kind) {
      case DomainKind::interval: out[m] = std::sin(kPi * x[m] / s.length); break;
      case DomainKind::rectangle:
        out[m] = std::cos(kPi * x[m] / s.length_x) * std::cos(kPi * y[m] / s.length_y);
        break;
      case DomainKind::disk: out[m] = std::cos(0.5 * kPi * r[m] / s.r_outer); break;
      case DomainKind::annulus:
        out[m] = std::sin(kPi * (r[m] - s.r_inner) / (s.r_outer - s.r_inner));
        break;
    }
    out[m] = std::max(out[m], 0.0);
  }
  return out;
}

// Polar angle of each node; the interval uses 0 right of the midpoint, pi left.
Field node_angles(const Grid& g) {
  Field out(g.size());
  if (g.is_polar()) {
    for (int j = 0; j < g.rings(); ++j)
      for (int l = 0; l < g.angles(); ++l) out[g.polar_index(j, l)] = g.angle(l);
  } else if (g.kind() == DomainKind::rectangle) {
    const auto x = g.x();
    const auto y = g.y();
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = std::atan2(y[m], x[m]);
  } else {
    const auto x = g.x();
    for (std::size_t m = 0; m < out.size(); ++m)
      out[m] = x[m] > 0.5 * g.spec().length ? 0.0 : kPi;
  }
  return out;
}

}  // namespace

State initial_state(const Problem& problem, StartKind kind, std::uint64_t seed, int index) {
  return initial_state(*problem.grid, problem.components(), kind, seed, index);
}

State initial_state(const Grid& g, std::size_t k, StartKind kind, std::uint64_t seed, int index) {
  const auto n = g.size();
  const Field base = boundary_profile(g);
  State u(k, Field(n, 0.0));
  switch (kind) {
    case StartKind::radial:
    case StartKind::supplied:
      for (auto& f : u) f = base;
      break;
    case StartKind::segregated: {
      const Field theta = node_angles(g);
      for (std::size_t i = 0; i < k; ++i) {
        const double center = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(k);
        for (std::size_t m = 0; m < n; ++m)
          u[i][m] = base[m] * (std::max(0.0, std::cos(theta[m] - center)) + 0.02);
      }
      break;
    }
    case StartKind::random_bumps: {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(index)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const auto x = g.x();
      const auto y = g.y();
      const auto& s = g.spec();
      double width = 0.0;
      switch (s.kind) {
        case DomainKind::interval: width = 0.15 * s.length; break;
        case DomainKind::rectangle: width = 0.15 * std::min(s.length_x, s.length_y); break;
        default: width = 0.3 * s.r_outer; break;
      }
      for (std::size_t i = 0; i < k; ++i) {
        for (int b = 0; b < 2; ++b) {
          double cx = 0.0, cy = 0.0;
          switch (s.kind) {
            case DomainKind::interval: cx = s.length * (0.1 + 0.8 * unit(rng)); break;
            case DomainKind::rectangle:
              cx = s.length_x * (unit(rng) - 0.5) * 0.8;
              cy = s.length_y * (unit(rng) - 0.5) * 0.8;
              break;
            default: {
              const double rr = s.r_inner + (s.r_outer - s.r_inner) * (0.1 + 0.8 * unit(rng));
              const double th = 2.0 * kPi * unit(rng);
              cx = rr * std::cos(th);
              cy = rr * std::sin(th);
              break;
            }
          }
          const double amp = 0.5 + unit(rng);
          for (std::size_t m = 0; m < n; ++m) {
            const double dx = x[m] - cx;
            const double dy = g.dimension() == 2 ? y[m] - cy : 0.0;
            u[i][m] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
          }
        }
        for (std::size_t m = 0; m < n; ++m) u[i][m] = base[m] * (u[i][m] + 0.01);
      }
      break;
    }
  }
  return u;
}

// ---------------------------------------------------------------- residuals

MultiplierFit multiplier_residual(const Problem& problem, const State& u, double tolerance) {
  const double defect = nehari_defect(problem, u);
  if (defect > tolerance)
    throw NotOnNehari("relative defect " + std::to_string(defect) + " exceeds " +
                      std::to_string(tolerance));
  const Grid& grid = *problem.grid;
  const auto k = problem.components();
  const auto ki = static_cast<Eigen::Index>(k);
  const State g = energy_gradient(problem, u);
  const auto dF = constraint_gradients(problem, u);

  auto dot = [&](const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += inner(grid, a[j], b[j]);
    return s;
  };
  Eigen::MatrixXd gram(ki, ki);
  Eigen::VectorXd rhs(ki);
  for (std::size_t i = 0; i < k; ++i) {
    rhs[static_cast<Eigen::Index>(i)] = dot(g, dF[i]);
    for (std::size_t j = 0; j < k; ++j)
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dot(dF[i], dF[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo < 1e-12 * hi)
    throw RankDeficient("constraint gradients are numerically dependent (Gram eigenvalues " +
                        std::to_string(lo) + ", " + std::to_string(hi) + ")");
  const Eigen::VectorXd lam = gram.ldlt().solve(rhs);

  MultiplierFit fit;
  fit.lambda.assign(lam.data(), lam.data() + ki);
  double r2 = 0.0, u2 = 0.0;
  const auto w = grid.weights();
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t m = 0; m < grid.size(); ++m) {
      double r = g[j][m];
      for (std::size_t i = 0; i < k; ++i) r -= fit.lambda[i] * dF[i][j][m];
      r2 += w[m] * r * r;
      u2 += w[m] * u[j][m] * u[j][m];
    }
  }
  fit.fit_residual = std::sqrt(r2) / std::max(1.0, std::sqrt(u2));
  return fit;
}

std::vector<double> discrete_pde_residual(const Problem& problem, const State& u) {
  const State g = energy_gradient(problem, u);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = norm(*problem.grid, g[i]) / std::max(1.0, norm(*problem.grid, u[i]));
  return out;
}

// ---------------------------------------------------------------- descent

namespace {

struct RunResult {
  StartHistory history;
  NehariProjection projection;
  bool ok = false;
};

struct Descent {
  const Problem& problem;
  const SolverOptions& opt;

  // K_i = c_i(-Lap) + max(V_i, 0) + 1 (+ max(0, -P_ii(u)) when adaptive)
  std::vector<ShiftedPoissonFactor> make_factors() const {
    std::vector<ShiftedPoissonFactor> out;
    if (!opt.preconditioned) return out;
    for (std::size_t i = 0; i < problem.components(); ++i)
      out.emplace_back(*problem.grid, problem.diffusion[i], positive_potential(i), 1.0);
    return out;
  }

  Field positive_potential(std::size_t i) const {
    Field v = problem.potentials[i];
    for (auto& x : v) x = std::max(x, 0.0);
    return v;
  }

  void refresh(std::vector<ShiftedPoissonFactor>& factors, const State& u) const {
    if (factors.empty() || !opt.adaptive_preconditioner) return;
    const auto k = problem.components();
    const auto n = problem.grid->size();
    std::vector<Field> pot(k);
    for (std::size_t i = 0; i < k; ++i) pot[i] = positive_potential(i);
    std::vector<double> a(k), h(k * k);
    for (std::size_t m = 0; m < n; ++m) {
      for (std::size_t i = 0; i < k; ++i) a[i] = std::abs(u[i][m]);
      problem.model->hessian(a, h);
      for (std::size_t i = 0; i < k; ++i) pot[i][m] += std::max(0.0, -h[i * k + i]);
    }
    for (std::size_t i = 0; i < k; ++i) factors[i].update(pot[i], 1.0);
  }

  State apply_precond(const std::vector<ShiftedPoissonFactor>& factors, const State& g) const {
    if (factors.empty()) return g;
    State out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = factors[i].solve(g[i]);
    return out;
  }

  double dot(const State& a, const State& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += inner(*problem.grid, a[i], b[i]);
    return s;
  }

  RunResult run(const State& start, int index, StartKind kind) const {
    RunResult res;
    auto& h = res.history;
    h.start_index = index;
    h.kind = kind;
    try {
      auto factors = make_factors();
      res.projection = project_to_nehari(problem, start, opt.nehari);
      State u = res.projection.state;
      double e = res.projection.diagnostics.energy;
      h.energy_trace.push_back(e);
      State g_prev, d;
      double gz_prev = 0.0;
      for (int it = 0;; ++it) {
        const State g = energy_gradient(problem, u);
        const MultiplierFit fit = multiplier_residual(problem, u, 1e-6);
        h.final_gradient = fit.fit_residual;
        h.iterations = it;
        h.energy = e;
        if (fit.fit_residual < opt.tolerance) {
          h.status = "converged";
          res.ok = true;
          return res;
        }
        if (it >= opt.max_outer_iterations) {
          h.status = "max_iterations";
          h.message = "projected gradient " + std::to_string(fit.fit_residual);
          return res;
        }
        refresh(factors, u);
        const State z = apply_precond(factors, g);
        const double gz = dot(g, z);
        double beta = 0.0;
        if (opt.conjugate && !g_prev.empty() && gz_prev > 0.0) {
          double num = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t m = 0; m < g[i].size(); ++m)
              num += problem.grid->weights()[m] * (g[i][m] - g_prev[i][m]) * z[i][m];
          beta = std::max(0.0, num / gz_prev);
        }
        if (d.empty() || beta == 0.0) {
          d = z;
          for (auto& f : d)
            for (auto& x : f) x = -x;
        } else {
          for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t m = 0; m < d[i].size(); ++m) d[i][m] = -z[i][m] + beta * d[i][m];
        }
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
          d = z;
          for (auto& f : d)
            for (auto& x : f) x = -x;
          slope = -gz;
        }
        g_prev = g;
        gz_prev = gz;

        const double jitter = 1e-13 * std::max(1.0, std::abs(e));
        double tau = opt.initial_step;
        bool accepted = false;
        for (int b = 0; b <= opt.max_backtracks; ++b, tau *= opt.backtracking) {
          State trial = u;
          for (std::size_t i = 0; i < trial.size(); ++i)
            for (std::size_t m = 0; m < trial[i].size(); ++m)
              trial[i][m] = std::abs(trial[i][m] + tau * d[i][m]);
          try {
            NehariProjection p = project_to_nehari(problem, trial, opt.nehari);
            const double en = p.diagnostics.energy;
            if (en <= e + opt.armijo * tau * slope + jitter) {
              u = std::move(p.state);
              e = en;
              p.state = u;
              res.projection = std::move(p);
              accepted = true;
              break;
            }
          } catch (const ProjectionFailure&) {
          } catch (const DegenerateState&) {
          }
        }
        if (!accepted) {
          h.status = "failed";
          h.message = "line search exhausted at projected gradient " +
                      std::to_string(fit.fit_residual);
          return res;
        }
        h.energy_trace.push_back(e);
      }
    } catch (const Error& ex) {
      h.status = "failed";
      h.message = ex.what();
    }
    return res;
  }
};

}  // namespace

Solution solve_ground_state(const Problem& problem, const SolverOptions& opt) {
  problem.validate();
  if (opt.start_count < 1 && opt.initial_states.empty())
    throw InvalidArgument("start_count must be >= 1");
  if (!(opt.tolerance > 0.0) || !(opt.initial_step > 0.0) || !(opt.backtracking > 0.0) ||
      !(opt.backtracking < 1.0) || !(opt.armijo > 0.0))
    throw InvalidArgument("solver tolerances and step controls must be positive");

  Solution sol;
  {
    const auto report = check_assumptions(*problem.model, *problem.grid, problem.potentials,
                                          problem.diffusion);
    sol.assumption_failures = report.failures();
    if (!sol.assumption_failures.empty()) {
      if (!opt.waive_assumptions) {
        std::string list;
        for (const auto& f : sol.assumption_failures) list += (list.empty() ? "" : ", ") + f;
        throw AssumptionFailure("assumptions fail: " + list);
      }
      sol.assumptions_waived = true;
    }
  }

  const Descent descent{problem, opt};

  std::vector<State> starts;
  std::vector<StartKind> kinds;
  if (!opt.initial_states.empty()) {
    for (const auto& s : opt.initial_states) {
      require_state(problem, s);
      starts.push_back(s);
      kinds.push_back(StartKind::supplied);
    }
  } else {
    kinds = plan_starts(problem.components(), opt.start_count);
    for (std::size_t i = 0; i < kinds.size(); ++i)
      starts.push_back(initial_state(problem, kinds[i], opt.seed, static_cast<int>(i)));
  }

  std::vector<RunResult> results(starts.size());
  const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(starts.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i)
      results[i] = descent.run(starts[i], static_cast<int>(i), kinds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < starts.size(); i = next++)
          results[i] = descent.run(starts[i], static_cast<int>(i), kinds[i]);
      });
    for (auto& t : pool) t.join();
  }

  int best = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    sol.start_histories.push_back(results[i].history);
    if (!results[i].ok) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const double eb = results[static_cast<std::size_t>(best)].history.energy;
    const double ei = results[i].history.energy;
    if (ei < eb - 1e-10 * (1.0 + std::abs(eb))) best = static_cast<int>(i);
  }
  if (best < 0) {
    std::vector<std::string> traces;
    for (const auto& h : sol.start_histories)
      traces.push_back("start " + std::to_string(h.start_index) + " (" + to_string(h.kind) +
                       "): " + h.status + " " + h.message);
    throw SolverFailure("no start converged", std::move(traces));
  }

  const auto& win = results[static_cast<std::size_t>(best)];
  sol.state = win.projection.state;
  sol.energy = win.projection.diagnostics.energy;
  sol.nehari = win.projection.diagnostics;
  sol.start_index = best;
  sol.iterations = win.history.iterations;
  sol.multipliers = multiplier_residual(problem, sol.state);
  sol.pde_residual = discrete_pde_residual(problem, sol.state);
  for (const auto& f : sol.state) sol.interior_min.push_back(*std::min_element(f.begin(), f.end()));
  return sol;
}

// ---------------------------------------------------------------- diagnostics

DiagnosticsReport diagnostics_bundle(const Problem& problem, const Solution& sol) {
  DiagnosticsReport d;
  d.positive = true;
  for (const auto& f : sol.state) {
    const double lo = f.empty() ? 0.0 : *std::min_element(f.begin(), f.end());
    d.interior_min.push_back(lo);
    if (!(lo > 0.0)) d.positive = false;
  }
  if (!d.positive) d.flags.push_back("positivity");

  const double alpha = problem.model->growth_exponent() - 2.0;
  const auto nsq = component_norms_sq(problem, sol.state);
  double sum = 0.0;
  d.norm_floor_ok = true;
  for (double x : nsq) {
    d.norms.push_back(std::sqrt(std::max(0.0, x)));
    sum += x;
    if (!(std::sqrt(std::max(0.0, x)) >= 1e-6)) d.norm_floor_ok = false;
  }
  if (!d.norm_floor_ok) d.flags.push_back("norm_floor");
  d.lower_bound_slack = energy(problem, sol.state) - (0.5 - 1.0 / (2.0 + alpha)) * sum;
  d.lower_bound_ok = d.lower_bound_slack >= -1e-10;
  if (!d.lower_bound_ok) d.flags.push_back("lower_bound");

  try {
    const auto k = static_cast<Eigen::Index>(problem.components());
    const PhiBundle b = phi_bundle(problem, sol.state, Eigen::VectorXd::Ones(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.hessian, Eigen::EigenvaluesOnly);
    d.hessian_max_eig = es.eigenvalues().maxCoeff();
    d.hessian_negative = d.hessian_max_eig < 0.0;
    d.membership = membership_in_M(problem, sol.state).verdict;
  } catch (const DegenerateState&) {
    d.hessian_negative = false;
    d.membership = Membership::sampled_no;
  }
  if (!d.hessian_negative) d.flags.push_back("hessian");
  if (d.membership == Membership::sampled_no) d.flags.push_back("membership");
  return d;
}

MinimaxCheck minimax_lattice_check(const Problem& problem, const State& u,
                                   const Eigen::VectorXd& t_star, int points, int per_unit) {
  const auto k = problem.components();
  if (static_cast<std::size_t>(t_star.size()) != k)
    throw InvalidArgument("minimax_lattice_check: t_star has wrong dimension");
  if (points < 1 || per_unit < 1 || per_unit > points)
    throw InvalidArgument("minimax_lattice_check: need 1 <= per_unit <= points");
  double total = 1.0;
  for (std::size_t i = 0; i < k; ++i) total *= points;
  if (total > 1e6) throw InvalidArgument("minimax_lattice_check: lattice too large");

  const ScalingMap phi(problem, u);
  MinimaxCheck out;
  out.star_index = per_unit;
  out.lattice_max = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(k, 1);
  Eigen::VectorXd t(static_cast<Eigen::Index>(k));
  for (;;) {
    for (std::size_t i = 0; i < k; ++i)
      t[static_cast<Eigen::Index>(i)] =
          t_star[static_cast<Eigen::Index>(i)] * static_cast<double>(idx[i]) / per_unit;
    const double v = phi.value(t);
    if (v > out.lattice_max) {
      out.lattice_max = v;
      out.argmax = idx;
    }
    std::size_t pos = 0;
    while (pos < k && ++idx[pos] > points) idx[pos++] = 1;
    if (pos == k) break;
  }
  out.energy = phi.value(t_star);
  out.contains_star = true;
  for (int a : out.argmax)
    if (std::abs(a - per_unit) > 1) out.contains_star = false;
  return out;
}

// ---------------------------------------------------------------- json

nlohmann::json to_json(const MultiplierFit& fit) {
  return {{"lambda", fit.lambda}, {"fit_residual", fit.fit_residual}};
}

nlohmann::json to_json(const StartHistory& h) {
  return {{"start_index", h.start_index},
          {"kind", to_string(h.kind)},
          {"status", h.status},
          {"energy", h.energy},
          {"iterations", h.iterations},
          {"final_gradient", h.final_gradient},
          {"message", h.message}};
}

nlohmann::json to_json(const DiagnosticsReport& d) {
  return {{"interior_min", d.interior_min},
          {"positive", d.positive},
          {"lower_bound_slack", d.lower_bound_slack},
          {"lower_bound_ok", d.lower_bound_ok},
          {"norms", d.norms},
          {"norm_floor_ok", d.norm_floor_ok},
          {"hessian_max_eig", d.hessian_max_eig},
          {"hessian_negative", d.hessian_negative},
          {"membership", to_string(d.membership)},
          {"flags", d.flags}};
}

nlohmann::json to_json(const Solution& s) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : s.start_histories) hist.push_back(to_json(h));
  return {{"energy", s.energy},
          {"nehari", to_json(s.nehari)},
          {"multipliers", to_json(s.multipliers)},
          {"pde_residual", s.pde_residual},
          {"interior_min", s.interior_min},
          {"start_index", s.start_index},
          {"iterations", s.iterations},
          {"assumptions_waived", s.assumptions_waived},
          {"assumption_failures", s.assumption_failures},
          {"start_histories", std::move(hist)}};
}

}  // namespace nehari
