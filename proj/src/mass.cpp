#include "nehari/mass.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "nehari/errors.hpp"
#include "nehari/solver.hpp"

namespace nehari {

namespace {

void require_pair(const Grid& grid, const MassState& s) {
  require_on_grid(grid, s.u, "u");
  require_on_grid(grid, s.v, "v");
}

double wsum(const Grid& grid, const Field& a, const Field& b) { return inner(grid, a, b); }

// w-gradient of I in the first slot: -Lap a + a^3 + beta a b^2
Field partial_gradient(const Grid& grid, const Field& a, const Field& b, double beta) {
  Field g = apply_neg_laplacian(grid, a);
  for (std::size_t m = 0; m < g.size(); ++m) g[m] += a[m] * a[m] * a[m] + beta * a[m] * b[m] * b[m];
  return g;
}

Field frozen_potential(const Field& a, const Field& b, double beta) {
  Field p(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) p[m] = a[m] * a[m] + beta * b[m] * b[m];
  return p;
}

double coupling(const Grid& grid, const MassState& s) {
  const auto w = grid.weights();
  double c = 0.0;
  for (std::size_t m = 0; m < s.u.size(); ++m) c += w[m] * s.u[m] * s.u[m] * s.v[m] * s.v[m];
  return c;
}

struct FlowResult {
  MassState state;
  MassRun run;
};

FlowResult run_flow(const Grid& grid, double beta, MassState s, const MassOptions& opt) {
  FlowResult res;
  MassRun& h = res.run;
  s = project_mass(grid, s);
  double e = I_energy(grid, s, beta);
  constexpr double kShift = 1.0;
  ShiftedPoissonFactor ku(grid, 1.0, frozen_potential(s.u, s.v, beta), kShift);
  ShiftedPoissonFactor kv(grid, 1.0, frozen_potential(s.v, s.u, beta), kShift);
  h.status = "max_iterations";
  for (int it = 0;; ++it) {
    const Field gu = partial_gradient(grid, s.u, s.v, beta);
    const Field gv = partial_gradient(grid, s.v, s.u, beta);
    const double lu = wsum(grid, gu, s.u), lv = wsum(grid, gv, s.v);
    double r2 = 0.0;
    const auto w = grid.weights();
    for (std::size_t m = 0; m < gu.size(); ++m) {
      const double a = gu[m] - lu * s.u[m], b = gv[m] - lv * s.v[m];
      r2 += w[m] * (a * a + b * b);
    }
    h.tangential_gradient = std::sqrt(r2);
    h.iterations = it;
    h.energy = e;
    if (h.tangential_gradient < opt.tolerance) {
      h.status = "converged";
      break;
    }
    if (it >= opt.max_iterations) break;

    ku.update(frozen_potential(s.u, s.v, beta), kShift);
    kv.update(frozen_potential(s.v, s.u, beta), kShift);
    auto direction = [&](const ShiftedPoissonFactor& k, const Field& g, const Field& a) {
      Field z = k.solve(g);
      const Field y = k.solve(a);
      const double c = wsum(grid, z, a) / wsum(grid, y, a);
      for (std::size_t m = 0; m < z.size(); ++m) z[m] -= c * y[m];
      return z;
    };
    const Field du = direction(ku, gu, s.u);
    const Field dv = direction(kv, gv, s.v);

    const double jitter = 1e-12 * std::max(1.0, std::abs(e));
    double tau = opt.tau;
    bool accepted = false;
    for (int b = 0; b <= opt.max_halvings; ++b, tau *= 0.5) {
      MassState t{s.u, s.v};
      for (std::size_t m = 0; m < t.u.size(); ++m) {
        t.u[m] = std::abs(t.u[m] - tau * du[m]);
        t.v[m] = std::abs(t.v[m] - tau * dv[m]);
      }
      try {
        t = project_mass(grid, t);
      } catch (const DegenerateState&) {
        continue;
      }
      const double en = I_energy(grid, t, beta);
      if (en <= e + jitter) {
        s = std::move(t);
        e = en;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      h.status = "stalled";
      break;
    }
    h.energy_trace.push_back(e);
  }
  res.state = std::move(s);
  return res;
}

}  // namespace

std::pair<double, double> masses(const Grid& grid, const MassState& s) {
  require_pair(grid, s);
  return {wsum(grid, s.u, s.u), wsum(grid, s.v, s.v)};
}

double I_energy(const Grid& grid, const MassState& s, double beta) {
  require_pair(grid, s);
  const auto w = grid.weights();
  double quartic = 0.0;
  for (std::size_t m = 0; m < s.u.size(); ++m) {
    const double a = s.u[m] * s.u[m], b = s.v[m] * s.v[m];
    quartic += w[m] * (0.25 * (a * a + b * b) + 0.5 * beta * a * b);
  }
  return 0.5 * (grid.dirichlet_form(s.u) + grid.dirichlet_form(s.v)) + quartic;
}

MassState project_mass(const Grid& grid, const MassState& s) {
  require_pair(grid, s);
  MassState out = s;
  for (auto* f : {&out.u, &out.v}) {
    const double n = norm(grid, *f);
    if (!(n > 0.0) || !std::isfinite(n))
      throw DegenerateState("zero component cannot be normalized", f == &out.u ? 0 : 1);
    for (auto& x : *f) x /= n;
  }
  return out;
}

MultiplierPair mass_multipliers(const Grid& grid, const MassState& s, double beta) {
  require_pair(grid, s);
  const auto w = grid.weights();
  double qu = 0.0, qv = 0.0, c = 0.0;
  for (std::size_t m = 0; m < s.u.size(); ++m) {
    const double a = s.u[m] * s.u[m], b = s.v[m] * s.v[m];
    qu += w[m] * a * a;
    qv += w[m] * b * b;
    c += w[m] * a * b;
  }
  return {grid.dirichlet_form(s.u) + qu + beta * c, grid.dirichlet_form(s.v) + qv + beta * c};
}

std::pair<double, double> mass_stationarity(const Grid& grid, const MassState& s, double beta,
                                            const MultiplierPair& mp) {
  require_pair(grid, s);
  auto res = [&](const Field& a, const Field& b, double l) {
    Field r = partial_gradient(grid, a, b, beta);
    for (std::size_t m = 0; m < r.size(); ++m) r[m] -= l * a[m];
    const double na = norm(grid, a);
    return na > 0.0 ? norm(grid, r) / na : 0.0;
  };
  return {res(s.u, s.v, mp.lambda), res(s.v, s.u, mp.mu)};
}

MassSolution solve_mass_ground_state(const Grid& grid, double beta, const MassOptions& opts) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("mass problem needs beta > 0");
  std::vector<MassState> starts = opts.initial_states;
  if (starts.empty()) {
    const State seg = initial_state(grid, 2, StartKind::segregated, 0, 0);
    const State sym = initial_state(grid, 2, StartKind::radial, 0, 1);
    starts.push_back({seg[0], seg[1]});
    starts.push_back({sym[0], sym[1]});
  }
  for (const auto& s : starts) require_pair(grid, s);

  std::vector<FlowResult> results(starts.size());
  auto run = [&](std::size_t i) {
    try {
      results[i] = run_flow(grid, beta, starts[i], opts);
    } catch (const Error& ex) {
      results[i].run.status = std::string("failed: ") + ex.what();
    }
  };
  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(starts.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < starts.size();
             i += static_cast<std::size_t>(workers))
          run(i);
      });
    for (auto& th : pool) th.join();
  }

  MassSolution sol;
  for (std::size_t i = 0; i < results.size(); ++i) {
    sol.runs.push_back(results[i].run);
    if (results[i].run.status != "converged") continue;
    const double e = results[i].run.energy;
    if (sol.start_index < 0 || e < sol.energy - 1e-10 * (1.0 + std::abs(sol.energy))) {
      sol.start_index = static_cast<int>(i);
      sol.energy = e;
    }
  }
  if (sol.start_index < 0) {
    std::vector<std::string> traces;
    for (const auto& r : sol.runs)
      traces.push_back(r.status + " after " + std::to_string(r.iterations) +
                       " iterations, tangential gradient " +
                       std::to_string(r.tangential_gradient));
    throw SolverFailure("mass-constrained flow did not converge", std::move(traces));
  }
  sol.state = results[static_cast<std::size_t>(sol.start_index)].state;
  sol.energy = I_energy(grid, sol.state, beta);
  std::tie(sol.mass_u, sol.mass_v) = masses(grid, sol.state);
  sol.multipliers = mass_multipliers(grid, sol.state, beta);
  std::tie(sol.residual_u, sol.residual_v) =
      mass_stationarity(grid, sol.state, beta, sol.multipliers);
  sol.coupling_integral = coupling(grid, sol.state);
  return sol;
}

MassPolarization mass_polarization_check(const Grid& grid, const MassState& s, double beta,
                                         const HalfSpace& h) {
  require_pair(grid, s);
  const MassState p{polarize(s.u, h), polarize(s.v, h.complement())};
  MassPolarization r;
  std::tie(r.mass_u, r.mass_v) = masses(grid, p);
  const auto [mu, mv] = masses(grid, s);
  r.masses_ok = std::abs(r.mass_u - mu) <= 1e-12 * std::max(1.0, mu) &&
                std::abs(r.mass_v - mv) <= 1e-12 * std::max(1.0, mv);
  r.energy_polarized = I_energy(grid, p, beta);
  r.energy_original = I_energy(grid, s, beta);
  r.energy_ok = r.energy_polarized <= r.energy_original + 1e-12;
  r.coupling_difference = std::abs(coupling(grid, p) - coupling(grid, s));
  return r;
}

nlohmann::json to_json(const MassRun& r) {
  return {{"status", r.status},
          {"energy", r.energy},
          {"iterations", r.iterations},
          {"tangential_gradient", r.tangential_gradient}};
}

nlohmann::json to_json(const MassSolution& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r));
  return {{"I_energy", s.energy},
          {"lambda", s.multipliers.lambda},
          {"mu", s.multipliers.mu},
          {"masses", {s.mass_u, s.mass_v}},
          {"stationarity_residual", {s.residual_u, s.residual_v}},
          {"coupling_integral", s.coupling_integral},
          {"start_index", s.start_index},
          {"runs", runs}};
}

nlohmann::json to_json(const MassPolarization& p) {
  return {{"masses", {p.mass_u, p.mass_v}},
          {"energy_polarized", p.energy_polarized},
          {"energy_original", p.energy_original},
          {"coupling_difference", p.coupling_difference},
          {"masses_ok", p.masses_ok},
          {"energy_ok", p.energy_ok}};
}

}  // namespace nehari
