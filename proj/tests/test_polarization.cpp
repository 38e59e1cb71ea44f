#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nehari/errors.hpp"
#include "nehari/polarization.hpp"
#include "oracles.hpp"

using namespace nehari;

namespace {

constexpr double kPi = std::numbers::pi;

Field profile(const Grid& g, double (*ang)(double), double shift = 0.0) {
  Field f(g.size());
  for (int j = 0; j < g.rings(); ++j) {
    const double r = g.ring_radius(j);
    for (int l = 0; l < g.angles(); ++l)
      f[g.polar_index(j, l)] = r * (1.0 - r) * ang(g.angle(l) - shift);
  }
  return f;
}

double one(double) { return 1.0; }
double cardioid(double t) { return 1.0 + std::cos(t); }

}  // namespace

TEST_CASE("half-space family") {
  const auto g = build_grid(DomainSpec::disk(1.0, 4, 8));
  const auto fam = half_space_family(*g);
  CHECK(fam.size() == 8);
  for (std::size_t m = 0; m < fam.size(); ++m)
    CHECK(fam[m].normal_angle == doctest::Approx(2 * kPi * m / 8));
  for (const auto& h : fam) {
    std::size_t boundary = 0;
    for (std::size_t n = 0; n < g->size(); ++n) {
      CHECK(h.reflect(h.reflect(n)) == n);
      if (h.map.side[n] == Side::on_boundary) {
        ++boundary;
        CHECK(h.reflect(n) == n);
      } else {
        CHECK(h.map.side[h.reflect(n)] != h.map.side[n]);
      }
    }
    CHECK(boundary % g->rings() == 0);
    const auto c = h.complement();
    for (std::size_t n = 0; n < g->size(); ++n)
      if (h.map.side[n] == Side::in_h) CHECK(c.map.side[n] == Side::in_complement);
  }
  CHECK_THROWS_AS(half_space_family(*build_grid(DomainSpec::interval(1.0, 8))), InvalidGeometry);
  CHECK(half_space_family(*build_grid(DomainSpec::rectangle(1.0, 1.0, 6, 6))).size() == 8);
  CHECK(half_space_family(*build_grid(DomainSpec::rectangle(1.0, 2.0, 6, 8))).size() == 4);
}

TEST_CASE("polarization of a two-point field") {
  const auto g = build_grid(DomainSpec::disk(1.0, 4, 8));
  const auto h = half_space_family(*g)[0];
  std::size_t a = g->size();
  for (std::size_t n = 0; n < g->size(); ++n)
    if (h.map.side[n] == Side::in_h) {
      a = n;
      break;
    }
  REQUIRE(a < g->size());
  const std::size_t b = h.reflect(a);
  Field f(g->size(), 0.0);
  f[a] = 1.0;
  f[b] = 2.0;
  const Field p = polarize(f, h);
  CHECK(p[a] == 2.0);
  CHECK(p[b] == 1.0);
  CHECK(polarize(p, h) == p);
  CHECK(dominance_status(p, h).status == Dominance::dominant);
  CHECK(dominance_status(f, h).status == Dominance::subordinate);
  Field both = f;
  both[a] = 3.0;
  const std::size_t c = (a + 1) % g->size();
  if (h.map.side[c] == Side::in_h) {
    both[h.reflect(c)] = 5.0;
    CHECK(dominance_status(both, h).status == Dominance::neither);
  }
  const auto radial = dominance_status(Field(g->size(), 1.0), h);
  CHECK(radial.degenerate);
}

TEST_CASE("polarization preserves integrals and order") {
  std::mt19937_64 rng(21);
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 12));
  for (const auto& h : half_space_family(*g)) {
    const Field f = oracle::random_positive(g->size(), rng);
    const Field p = polarize(f, h);
    CHECK(integrate(*g, p) == doctest::Approx(integrate(*g, f)).epsilon(1e-13));
    Field sq(f.size()), psq(f.size());
    for (std::size_t m = 0; m < f.size(); ++m) {
      sq[m] = f[m] * f[m];
      psq[m] = p[m] * p[m];
    }
    CHECK(integrate(*g, psq) == doctest::Approx(integrate(*g, sq)).epsilon(1e-13));
    // the Dirichlet form does not increase
    CHECK(g->dirichlet_form(p) <= g->dirichlet_form(f) * (1 + 1e-12));
  }
}

TEST_CASE("two-point inequality") {
  const std::vector<double> vals{0.0, 0.3, 1.0, 2.5};
  CHECK(two_point_inequality_scan(PowerModel(symmetric_cubic_pair(2.0)), vals) <= 1e-12);
  CHECK(two_point_inequality_scan(PowerModel(symmetric_cubic_pair(0.0)), vals) <= 1e-12);
  CHECK_THROWS_AS(two_point_inequality_scan(PowerModel(cubic_preset({1.0}, {{0.0}})), vals),
                  InvalidArgument);
}

TEST_CASE("opposite polarization does not raise the energy") {
  std::mt19937_64 rng(22);
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 8));
  const auto pr = make_problem(g, std::make_shared<PowerModel>(symmetric_cubic_pair(3.0)),
                               {Potential::constant(0.0), Potential::constant(0.0)}, {1.0, 1.0});
  for (const auto& h : half_space_family(*g)) {
    const State uv{oracle::random_positive(g->size(), rng), oracle::random_positive(g->size(), rng)};
    const auto e = polarized_energy_compare(pr, uv, h);
    CHECK(e.polarized <= e.original + 1e-12 * std::abs(e.original));
    CHECK(e.quadratic_polarized <= e.quadratic_original * (1 + 1e-12));
  }
}

TEST_CASE("foliated Schwarz metrics") {
  const auto g = build_grid(DomainSpec::disk(1.0, 8, 16));
  const auto rad = foliated_schwarz_metrics(*g, profile(*g, one));
  CHECK(rad.degenerate);
  CHECK(radial_deviation(*g, profile(*g, one)) < 1e-14);

  const auto c = foliated_schwarz_metrics(*g, profile(*g, cardioid));
  CHECK_FALSE(c.degenerate);
  CHECK(c.axis_angle == doctest::Approx(0.0).scale(1.0));
  CHECK(c.axial_asymmetry < 1e-14);
  CHECK(c.monotonicity_violation < 1e-14);
  CHECK(c.rings.size() == 8);

  // rotation by three grid steps moves the axis with it
  const double shift = 3 * 2 * kPi / 16;
  const auto r = foliated_schwarz_metrics(*g, profile(*g, cardioid, shift));
  CHECK(r.axis_angle == doctest::Approx(shift));
  CHECK(r.axial_asymmetry < 1e-14);

  // two bumps break monotonicity
  const auto bumps = foliated_schwarz_metrics(
      *g, profile(*g, [](double t) { return 1.5 + std::cos(2 * t) + 0.1 * std::cos(t); }));
  CHECK(bumps.monotonicity_violation > 0.1);
  std::ostringstream csv;
  write_ring_profiles_csv(c, csv);
  CHECK(csv.str().find('\n') != std::string::npos);
  CHECK(to_json(c)["degenerate"] == false);
}

TEST_CASE("antipodality") {
  const auto g = build_grid(DomainSpec::disk(1.0, 6, 16));
  const auto u = foliated_schwarz_metrics(*g, profile(*g, cardioid));
  const auto v = foliated_schwarz_metrics(*g, profile(*g, cardioid, kPi));
  const auto w = foliated_schwarz_metrics(*g, profile(*g, cardioid, kPi / 2));
  CHECK(antipodality_check(u, v).deviation < 1e-12);
  CHECK(antipodality_check(u, w).deviation == doctest::Approx(kPi / 2));
  CHECK(antipodality_check(u, u).deviation == doctest::Approx(kPi));
  const auto rad = foliated_schwarz_metrics(*g, profile(*g, one));
  CHECK_FALSE(antipodality_check(u, rad).applicable);
}
