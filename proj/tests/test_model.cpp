#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"
#include "nehari/model.hpp"
#include "oracles.hpp"

using namespace nehari;

namespace {

PowerCouplingParams three_component() {
  PowerCouplingParams p;
  p.k = 3;
  p.p = 5.0;
  p.lambda = {1.0, 2.0, 0.5};
  p.q = {2.0, 2.5, 2.0};
  p.beta = {{0.0, 0.3, 1.0}, {0.3, 0.0, 0.2}, {1.0, 0.2, 0.0}};
  return p;
}

// central differences of value and gradient
void check_derivatives(const Nonlinearity& m, std::vector<double> u) {
  const std::size_t k = m.components();
  std::vector<double> g(k), h(k * k), gp(k), gm(k);
  m.gradient(u, g);
  m.hessian(u, h);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < k; ++i) {
    auto up = u, um = u;
    up[i] += eps;
    um[i] -= eps;
    const double fd = (m.value(up) - m.value(um)) / (2 * eps);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
    m.gradient(up, gp);
    m.gradient(um, gm);
    for (std::size_t j = 0; j < k; ++j)
      CHECK(h[j * k + i] == doctest::Approx((gp[j] - gm[j]) / (2 * eps)).epsilon(1e-6).scale(1.0));
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) CHECK(h[i * k + j] == doctest::Approx(h[j * k + i]));
}

}  // namespace

TEST_CASE("power model derivatives") {
  std::mt19937_64 rng(5);
  const PowerModel cubic(symmetric_cubic_pair(3.0));
  const PowerModel three(three_component());
  for (int c = 0; c < 25; ++c) {
    check_derivatives(cubic, oracle::random_positive(2, rng, 0.2, 2.0));
    check_derivatives(three, oracle::random_positive(3, rng, 0.2, 2.0));
  }
}

TEST_CASE("cubic pair closed form") {
  const double beta = 2.0;
  const PowerModel m(symmetric_cubic_pair(beta));
  const double u = 0.7, v = 1.3;
  const std::vector<double> x{u, v};
  CHECK(m.value(x) ==
        doctest::Approx(0.25 * std::pow(u, 4) + 0.25 * std::pow(v, 4) - 0.5 * beta * u * u * v * v));
  std::vector<double> g(2);
  m.gradient(x, g);
  CHECK(g[0] == doctest::Approx(u * u * u - beta * u * v * v));
  CHECK(g[1] == doctest::Approx(v * v * v - beta * u * u * v));
  CHECK(m.growth_exponent() == 4.0);
}

TEST_CASE("separated form agrees with the power model") {
  std::mt19937_64 rng(6);
  const auto params = three_component();
  const PowerModel a(params);
  const auto b = separated_power_model(params);
  for (int c = 0; c < 20; ++c) {
    const auto u = oracle::random_positive(3, rng, 0.05, 3.0);
    CHECK(b->value(u) == doctest::Approx(a.value(u)).epsilon(1e-13));
    std::vector<double> ga(3), gb(3), ha(9), hb(9);
    a.gradient(u, ga);
    b->gradient(u, gb);
    a.hessian(u, ha);
    b->hessian(u, hb);
    for (int i = 0; i < 3; ++i) CHECK(gb[i] == doctest::Approx(ga[i]).epsilon(1e-12));
    for (int i = 0; i < 9; ++i) CHECK(hb[i] == doctest::Approx(ha[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("scaled nonlinearity") {
  auto base = std::make_shared<PowerModel>(symmetric_cubic_pair(1.0));
  const ScaledNonlinearity s(base, {2.0, 0.5});
  const std::vector<double> v{0.3, 1.1};
  CHECK(s.value(v) == doctest::Approx(base->value(std::vector<double>{0.6, 0.55})));
  check_derivatives(s, v);
}

TEST_CASE("even extension and M matrix") {
  const PowerModel m(symmetric_cubic_pair(1.5));
  const auto pos = eval_P(m, std::vector<double>{0.4, 0.9});
  const auto neg = eval_P(m, std::vector<double>{-0.4, 0.9});
  CHECK(pos.value == neg.value);
  CHECK(pos.gradient.isApprox(neg.gradient));
  CHECK_THROWS_AS(eval_P(m, std::vector<double>{NAN, 1.0}), InvalidArgument);

  const std::vector<double> u{0.4, 0.9};
  const double alpha = 2.0;
  const auto mm = matrix_M_alpha(m, u, alpha);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ref = (i == j ? (1 + alpha) * pos.gradient[i] * u[i] : 0.0) -
                         pos.hessian(i, j) * u[i] * u[j];
      CHECK(mm(i, j) == doctest::Approx(ref).scale(1.0));
    }
}

TEST_CASE("gershgorin test") {
  Eigen::MatrixXd a(2, 2);
  a << -2.0, 1.0, 1.0, -1.0;
  CHECK(gershgorin_nsd(a));
  a << -2.0, 1.0, 1.0, -0.5;
  CHECK_FALSE(gershgorin_nsd(a));
  a << -2.0, 1.0, 0.0, -2.0;
  CHECK_THROWS(gershgorin_nsd(a));
}

TEST_CASE("parameter violations") {
  CHECK(symmetric_cubic_pair(1.0).violations().empty());
  auto p = symmetric_cubic_pair(1.0);
  p.p = 3.0;
  CHECK_FALSE(p.violations().empty());
  p = symmetric_cubic_pair(1.0);
  p.lambda[1] = -1.0;
  CHECK_FALSE(p.violations().empty());
  CHECK(power_params_from_json(to_json(three_component())) == three_component());
}

TEST_CASE("assumption report") {
  const auto g = build_grid(DomainSpec::disk(1.0, 8, 8));
  const std::vector<Field> zero(2, Field(g->size(), 0.0));
  const std::vector<double> c{1.0, 1.0};

  const auto ok = check_assumptions(PowerModel(symmetric_cubic_pair(10.0)), *g, zero, c);
  CHECK(ok.all_pass());
  CHECK(ok.at("P0").method == CheckMethod::closed_form);
  CHECK(ok.alpha == doctest::Approx(2.0));

  auto bad = symmetric_cubic_pair(1.0);
  bad.p = 3.0;
  const auto r = check_assumptions(PowerModel(bad), *g, zero, c);
  CHECK_FALSE(r.all_pass());
  CHECK(r.at("eq4").verdict == Verdict::fail);

  const auto sampled =
      check_assumptions(*separated_power_model(symmetric_cubic_pair(1.0)), *g, zero, c);
  CHECK(sampled.at("a3").method == CheckMethod::sampled);
  CHECK(sampled.at("eq4").verdict == Verdict::not_applicable);
  CHECK(sampled.failures().empty());

  const std::vector<double> negative{1.0, -1.0};
  CHECK_THROWS_AS(check_assumptions(PowerModel(symmetric_cubic_pair(1.0)), *g, zero, negative),
                  InvalidArgument);
  // V below -lambda1 breaks coercivity
  const std::vector<Field> deep(2, Field(g->size(), -100.0));
  CHECK(check_assumptions(PowerModel(symmetric_cubic_pair(1.0)), *g, deep, c).at("P0").verdict ==
        Verdict::fail);
}

TEST_CASE("potentials") {
  const auto g = build_grid(DomainSpec::disk(1.0, 4, 8));
  const auto v = Potential::radial_quadratic(1.0, 2.0).realize(*g);
  for (int j = 0; j < 4; ++j) {
    const double r = g->ring_radius(j);
    for (int l = 0; l < 8; ++l) CHECK(v[g->polar_index(j, l)] == doctest::Approx(1.0 + 2.0 * r * r));
  }
  const auto t = Potential::tabulated({0.0, 1.0}, {0.0, 2.0}).realize(*g);
  CHECK(t[g->polar_index(1, 3)] == doctest::Approx(2.0 * g->ring_radius(1)));
  for (const auto& p : {Potential::constant(3.0), Potential::radial_quadratic(0.5, 1.0),
                        Potential::tabulated({0.0, 1.0}, {1.0, 0.0})})
    CHECK(potential_from_json(to_json(p)) == p);
}

TEST_CASE("cone lattice") {
  const auto pts = cone_lattice(2);
  CHECK(pts.size() == 17 * 17);
  for (const auto& p : pts)
    for (double x : p) CHECK((x >= 1e-3 * (1 - 1e-12) && x <= 1e3 * (1 + 1e-12)));
  CHECK(cone_lattice(5, 1000).size() <= 1000);
}
