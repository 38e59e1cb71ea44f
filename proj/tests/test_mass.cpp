#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nehari/errors.hpp"
#include "nehari/mass.hpp"
#include "nehari/polarization.hpp"
#include "oracles.hpp"

using namespace nehari;

TEST_CASE("mass projection") {
  std::mt19937_64 rng(31);
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 8));
  MassState s{oracle::random_positive(g->size(), rng), oracle::random_positive(g->size(), rng)};
  for (auto& x : s.v) x *= 7.0;
  const auto p = project_mass(*g, s);
  const auto [mu, mv] = masses(*g, p);
  CHECK(mu == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mv == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.u[3] / p.u[5] == doctest::Approx(s.u[3] / s.u[5]));
  CHECK_THROWS_AS(project_mass(*g, MassState{s.u, Field(g->size(), 0.0)}), DegenerateState);
}

TEST_CASE("energy closed form for constant fields") {
  const auto g = build_grid(DomainSpec::interval(1.0, 16));
  const MassState s{Field(16, 0.0), Field(16, 0.0)};
  CHECK(I_energy(*g, s, 1.0) == 0.0);
  // sin(pi x) on the grid: Dirichlet form from the operator
  Field f(16);
  for (std::size_t m = 0; m < 16; ++m) f[m] = std::sin(std::numbers::pi * g->x()[m]);
  const MassState t{f, f};
  Field f4(16);
  for (std::size_t m = 0; m < 16; ++m) f4[m] = std::pow(f[m], 4);
  const double beta = 2.0;
  const double ref = g->dirichlet_form(f) + 0.5 * integrate(*g, f4) + 0.5 * beta * integrate(*g, f4);
  CHECK(I_energy(*g, t, beta) == doctest::Approx(ref));
  const auto m = mass_multipliers(*g, t, beta);
  CHECK(m.lambda == doctest::Approx(m.mu));
}

TEST_CASE("weak coupling on the interval is symmetric") {
  const auto g = build_grid(DomainSpec::interval(1.0, 63));
  const auto sol = solve_mass_ground_state(*g, 0.5);
  CHECK(sol.mass_u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.mass_v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.multipliers.lambda == doctest::Approx(sol.multipliers.mu).epsilon(1e-6));
  for (std::size_t m = 0; m < g->size(); ++m)
    CHECK(sol.state.u[m] == doctest::Approx(sol.state.v[m]).epsilon(1e-5).scale(1.0));
  CHECK(sol.residual_u < 1e-7);
  CHECK(sol.residual_v < 1e-7);
  for (const auto& r : sol.runs)
    for (std::size_t i = 1; i < r.energy_trace.size(); ++i)
      CHECK(r.energy_trace[i] <= r.energy_trace[i - 1] + 1e-12);
}

TEST_CASE("strong coupling segregates") {
  const auto g = build_grid(DomainSpec::interval(1.0, 63));
  const auto weak = solve_mass_ground_state(*g, 0.5);
  const auto strong = solve_mass_ground_state(*g, 50.0);
  CHECK(strong.coupling_integral < 0.2 * weak.coupling_integral);
  CHECK(strong.energy > weak.energy);
}

TEST_CASE("polarized pair keeps its masses") {
  std::mt19937_64 rng(32);
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 8));
  const MassState s = project_mass(
      *g, MassState{oracle::random_positive(g->size(), rng), oracle::random_positive(g->size(), rng)});
  for (const auto& h : half_space_family(*g)) {
    const auto p = mass_polarization_check(*g, s, 4.0, h);
    CHECK(p.masses_ok);
    CHECK(p.energy_ok);
    CHECK(p.mass_u == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(p.energy_polarized <= p.energy_original * (1 + 1e-12));
  }
}
