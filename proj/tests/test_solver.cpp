#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nehari/errors.hpp"
#include "nehari/solver.hpp"
#include "oracles.hpp"

using namespace nehari;

namespace {

Problem cubic(GridPtr g, double beta, std::vector<double> c) {
  return make_problem(g, std::make_shared<PowerModel>(symmetric_cubic_pair(beta)),
                      {Potential::constant(0.0), Potential::constant(0.0)}, std::move(c));
}

Problem scalar(GridPtr g) {
  return make_problem(g, std::make_shared<PowerModel>(cubic_preset({1.0}, {{0.0}})),
                      {Potential::constant(0.0)}, {1.0});
}

}  // namespace

TEST_CASE("start plan") {
  CHECK(plan_starts(2, 3) ==
        std::vector<StartKind>{StartKind::radial, StartKind::segregated, StartKind::random_bumps});
  CHECK(plan_starts(1, 2) == std::vector<StartKind>{StartKind::radial, StartKind::random_bumps});
  const auto g = build_grid(DomainSpec::disk(1.0, 8, 8));
  const auto a = initial_state(*g, 2, StartKind::random_bumps, 7, 2);
  const auto b = initial_state(*g, 2, StartKind::random_bumps, 7, 2);
  const auto c = initial_state(*g, 2, StartKind::random_bumps, 8, 2);
  CHECK(a == b);
  CHECK(a != c);
  for (const auto& f : a)
    for (double x : f) CHECK(x >= 0.0);
}

TEST_CASE("scalar cubic on the interval matches shooting") {
  const auto g = build_grid(DomainSpec::interval(1.0, 255));
  const auto sol = solve_ground_state(scalar(g));
  const auto ref = oracle::shoot_cubic();
  CHECK(std::abs(sol.energy - ref.energy) / ref.energy < 2e-4);
  CHECK(sol.pde_residual[0] < 1e-8);
  CHECK(sol.interior_min[0] > 0.0);
  // symmetric about the midpoint
  for (std::size_t m = 0; m < g->size(); ++m)
    CHECK(sol.state[0][m] == doctest::Approx(sol.state[0][g->size() - 1 - m]).epsilon(1e-6));
}

TEST_CASE("decoupled pair is a sum of scalar problems") {
  const auto g = build_grid(DomainSpec::interval(1.0, 63));
  const double e1 = solve_ground_state(scalar(g)).energy;
  // u_2 = sqrt(c) w solves -c u'' = u^3, energy c^2 E(w)
  const auto sol = solve_ground_state(cubic(g, 0.0, {1.0, 2.0}), {.waive_assumptions = true});
  CHECK(sol.energy == doctest::Approx(5.0 * e1).epsilon(1e-8));
  CHECK(sol.multipliers.fit_residual < 1e-8);
  for (double l : sol.multipliers.lambda) CHECK(std::abs(l) < 1e-6);
}

TEST_CASE("coupled disk solve") {
  const auto g = build_grid(DomainSpec::disk(1.0, 12, 16));
  SolverOptions opt;
  opt.seed = 3;
  const auto pr = cubic(g, 10.0, {1.0, 1.0});
  const auto a = solve_ground_state(pr, opt);
  CHECK(a.start_histories.size() == 3);
  CHECK(a.nehari.lower_bound_slack >= -1e-9 * std::max(1.0, a.energy));
  for (double r : a.pde_residual) CHECK(r < 1e-8);
  const auto d = diagnostics_bundle(pr, a);
  CHECK(d.flags.empty());
  CHECK(d.hessian_negative);
  // every converged start sits at or above the reported minimum
  for (const auto& h : a.start_histories)
    if (h.status == "converged") CHECK(h.energy >= a.energy - 1e-10 * (1 + std::abs(a.energy)));
  const auto b = solve_ground_state(pr, opt);
  CHECK(a.energy == b.energy);
  CHECK(a.state == b.state);

  Eigen::VectorXd one = Eigen::VectorXd::Ones(2);
  const auto mm = minimax_lattice_check(pr, a.state, one, 40, 20);
  CHECK(mm.contains_star);
  CHECK(mm.lattice_max <= a.energy * (1 + 1e-12));
}

TEST_CASE("assumption gate") {
  const auto g = build_grid(DomainSpec::interval(1.0, 31));
  auto params = symmetric_cubic_pair(1.0);
  params.p = 3.0;
  const auto pr = make_problem(g, std::make_shared<PowerModel>(params),
                               {Potential::constant(0.0), Potential::constant(0.0)}, {1.0, 1.0});
  CHECK_THROWS_AS(solve_ground_state(pr), AssumptionFailure);
}

TEST_CASE("multiplier fit off the manifold") {
  const auto g = build_grid(DomainSpec::interval(1.0, 31));
  const auto pr = scalar(g);
  State u{Field(g->size(), 1.0)};
  CHECK_THROWS_AS(multiplier_residual(pr, u), NotOnNehari);
  const auto p = project_to_nehari(pr, u);
  CHECK_NOTHROW(multiplier_residual(pr, p.state));
  CHECK(discrete_pde_residual(pr, p.state)[0] > 1e-3);
}
