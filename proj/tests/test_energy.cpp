#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nehari/energy.hpp"
#include "nehari/errors.hpp"
#include "oracles.hpp"

using namespace nehari;

namespace {

Problem cubic_pair(GridPtr g, double beta, std::vector<double> c = {1.0, 1.0},
                   double v0 = 0.0) {
  return make_problem(g, std::make_shared<PowerModel>(symmetric_cubic_pair(beta)),
                      {Potential::constant(v0), Potential::constant(v0)}, std::move(c));
}

double quartic(const Grid& g, const Field& u) {
  Field q(u.size());
  for (std::size_t m = 0; m < u.size(); ++m) q[m] = std::pow(u[m], 4);
  return integrate(g, q);
}

State random_state(const Grid& g, std::size_t k, std::mt19937_64& rng) {
  State s;
  for (std::size_t i = 0; i < k; ++i) s.push_back(oracle::random_positive(g.size(), rng));
  return s;
}

}  // namespace

TEST_CASE("energy gradient against finite differences") {
  std::mt19937_64 rng(11);
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 8));
  const auto pr = cubic_pair(g, 1.5, {1.0, 0.7}, 0.3);
  const State u = random_state(*g, 2, rng);
  const State grad = energy_gradient(pr, u);
  for (int c = 0; c < 5; ++c) {
    const State d = random_state(*g, 2, rng);
    const double eps = 1e-6;
    State up = u, um = u;
    for (int i = 0; i < 2; ++i)
      for (std::size_t m = 0; m < g->size(); ++m) {
        up[i][m] += eps * d[i][m];
        um[i][m] -= eps * d[i][m];
      }
    const double fd = (energy(pr, up) - energy(pr, um)) / (2 * eps);
    const double an = inner(*g, grad[0], d[0]) + inner(*g, grad[1], d[1]);
    CHECK(an == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("scaling map derivatives") {
  std::mt19937_64 rng(12);
  const auto g = build_grid(DomainSpec::interval(1.0, 20));
  const auto pr = cubic_pair(g, 0.8);
  const State u = random_state(*g, 2, rng);
  const ScalingMap phi(pr, u);
  Eigen::VectorXd t(2);
  t << 0.7, 1.4;
  const auto b = phi.bundle(t);
  CHECK(b.value == doctest::Approx(phi.value(t)));
  const double eps = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd tp = t, tm = t;
    tp[i] += eps;
    tm[i] -= eps;
    CHECK(b.gradient[i] == doctest::Approx((phi.value(tp) - phi.value(tm)) / (2 * eps)).epsilon(1e-6));
    const auto gp = phi.bundle(tp).gradient, gm = phi.bundle(tm).gradient;
    for (int j = 0; j < 2; ++j)
      CHECK(b.hessian(j, i) == doctest::Approx((gp[j] - gm[j]) / (2 * eps)).epsilon(1e-6));
  }
  // phi(t) = E(t u)
  State tu = u;
  for (int i = 0; i < 2; ++i)
    for (auto& x : tu[i]) x *= t[i];
  CHECK(b.value == doctest::Approx(energy(pr, tu)).epsilon(1e-13));
}

TEST_CASE("decoupled projection has closed form") {
  std::mt19937_64 rng(13);
  const auto g = build_grid(DomainSpec::disk(1.0, 8, 8));
  const auto pr = cubic_pair(g, 0.0, {1.0, 2.0}, 0.5);
  const State u = random_state(*g, 2, rng);
  const auto n2 = component_norms_sq(pr, u);
  const auto proj = project_to_nehari(pr, u);
  for (int i = 0; i < 2; ++i) {
    const double t = std::sqrt(n2[i] / quartic(*g, u[i]));
    CHECK(proj.t[i] == doctest::Approx(t).epsilon(1e-10));
  }
  const auto r = nehari_residuals(pr, proj.state);
  const auto m2 = component_norms_sq(pr, proj.state);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(r[i]) <= 1e-9 * m2[i]);
  CHECK(proj.diagnostics.hessian_max_eig < 0.0);
  // E = (1/2 - 1/4) sum ||u_i||^2 on the Nehari set
  CHECK(proj.diagnostics.energy == doctest::Approx(0.25 * (m2[0] + m2[1])).epsilon(1e-9));
}

TEST_CASE("coupled projection and lower bound") {
  std::mt19937_64 rng(14);
  const auto g = build_grid(DomainSpec::disk(1.0, 8, 8));
  const auto pr = cubic_pair(g, 3.0);
  // mostly segregated supports keep the pair projectable
  State u(2, Field(g->size(), 0.0));
  for (int j = 0; j < 8; ++j)
    for (int l = 0; l < 8; ++l) {
      const double r = g->ring_radius(j) * (1.0 - g->ring_radius(j));
      u[l < 4 ? 0 : 1][g->polar_index(j, l)] = r * (1.0 + 0.1 * (l % 4));
      u[l < 4 ? 1 : 0][g->polar_index(j, l)] = 0.01 * r;
    }
  const auto proj = project_to_nehari(pr, u);
  CHECK(nehari_defect(pr, proj.state) < 1e-9);
  // homogeneous model: the alpha = p - 2 bound is an equality
  const double slack = lower_bound_check(pr, proj.state, 2.0);
  CHECK(std::abs(slack) <= 1e-9 * std::max(1.0, proj.diagnostics.energy));
  CHECK_THROWS_AS(lower_bound_check(pr, u, 2.0), NotOnNehari);
  CHECK(membership_in_M(pr, proj.state).verdict == Membership::analytic_yes);
}

TEST_CASE("power p = 6 single component") {
  std::mt19937_64 rng(15);
  const auto g = build_grid(DomainSpec::interval(1.0, 30));
  PowerCouplingParams p;
  p.k = 1;
  p.p = 6.0;
  p.lambda = {2.0};
  p.q = {2.0};
  p.beta = {{0.0}};
  const auto pr = make_problem(g, std::make_shared<PowerModel>(p), {Potential::constant(0.0)}, {1.0});
  const State u = random_state(*g, 1, rng);
  Field u6(u[0].size());
  for (std::size_t m = 0; m < u6.size(); ++m) u6[m] = 2.0 * std::pow(u[0][m], 6);
  const double t = std::pow(component_norms_sq(pr, u)[0] / integrate(*g, u6), 0.25);
  CHECK(project_to_nehari(pr, u).t[0] == doctest::Approx(t).epsilon(1e-10));
}

TEST_CASE("degenerate and mismatched states") {
  const auto g = build_grid(DomainSpec::interval(1.0, 10));
  const auto pr = cubic_pair(g, 1.0);
  State u{Field(10, 0.5), Field(10, 0.0)};
  CHECK_THROWS_AS(nehari_residuals(pr, u), DegenerateState);
  CHECK_THROWS_AS(project_to_nehari(pr, u), DegenerateState);
  CHECK_THROWS_AS(require_state(pr, State{Field(10, 0.5)}), GridMismatch);
  CHECK_THROWS_AS(require_state(pr, State{Field(10, 0.5), Field(9, 0.5)}), GridMismatch);
}

TEST_CASE("strong coupling of overlapping fields leaves M") {
  const auto g = build_grid(DomainSpec::interval(1.0, 20));
  const auto pr = cubic_pair(g, 5.0);
  Field s(g->size());
  for (std::size_t m = 0; m < s.size(); ++m) s[m] = std::sin(std::numbers::pi * g->x()[m]);
  const State u{s, s};
  // P(t u, t u) = (1/2 - 5/2) t^4 s^4 < 0: phi is unbounded above on the diagonal
  CHECK_THROWS_AS(project_to_nehari(pr, u), ProjectionFailure);
  CHECK(membership_in_M(pr, u).verdict == Membership::sampled_no);
}

TEST_CASE("unit diffusion rescaling preserves the energy") {
  std::mt19937_64 rng(16);
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 8));
  const auto pr = cubic_pair(g, 1.2, {0.5, 3.0}, 0.2);
  const auto ud = rescale_unit_diffusion(pr);
  for (double c : ud.problem.diffusion) CHECK(c == 1.0);
  const State u = random_state(*g, 2, rng);
  const State v = ud.forward(u);
  CHECK(energy(ud.problem, v) == doctest::Approx(energy(pr, u)).epsilon(1e-12));
  const State back = ud.backward(v);
  for (int i = 0; i < 2; ++i)
    for (std::size_t m = 0; m < g->size(); ++m) CHECK(back[i][m] == doctest::Approx(u[i][m]));
  const auto r1 = nehari_residuals(pr, u), r2 = nehari_residuals(ud.problem, v);
  for (int i = 0; i < 2; ++i) CHECK(r2[i] == doctest::Approx(r1[i]).epsilon(1e-11));
}
