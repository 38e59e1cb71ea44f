#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"
#include "oracles.hpp"

using namespace nehari;

namespace {

std::vector<DomainSpec> all_kinds() {
  return {DomainSpec::interval(1.0, 17), DomainSpec::rectangle(1.0, 2.0, 9, 11),
          DomainSpec::disk(1.0, 8, 12), DomainSpec::annulus(0.5, 1.5, 7, 10)};
}

}  // namespace

TEST_CASE("interval nodes") {
  const auto g = build_grid(DomainSpec::interval(1.0, 4));
  REQUIRE(g->size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(g->x()[i] == doctest::Approx(0.2 * (i + 1)).epsilon(1e-15));
}

TEST_CASE("disk offset radii") {
  const auto g = build_grid(DomainSpec::disk(1.0, 4, 8));
  CHECK(g->size() == 32);
  const double r[] = {0.125, 0.375, 0.625, 0.875};
  for (int j = 0; j < 4; ++j) CHECK(g->ring_radius(j) == doctest::Approx(r[j]).epsilon(1e-15));
}

TEST_CASE("invalid geometry") {
  CHECK_THROWS_AS(build_grid(DomainSpec::annulus(1.0, 0.5, 8, 8)), InvalidGeometry);
  CHECK_THROWS_AS(build_grid(DomainSpec::disk(-1.0, 8, 8)), InvalidGeometry);
  CHECK_THROWS_AS(build_grid(DomainSpec::disk(1.0, 8, 7)), InvalidGeometry);
  CHECK_THROWS_AS(build_grid(DomainSpec::interval(1.0, 3)), InvalidGeometry);
}

TEST_CASE("quadratic is exact on the interval stencil") {
  const auto g = build_grid(DomainSpec::interval(1.0, 31));
  Field f(g->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = g->x()[i] * (1.0 - g->x()[i]);
  for (double v : apply_neg_laplacian(*g, f)) CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("operator matches dense assembly, is w-symmetric and positive") {
  std::mt19937_64 rng(1);
  for (const auto& spec : all_kinds()) {
    const auto g = build_grid(spec);
    const Eigen::MatrixXd a = oracle::dense_operator(*g);
    const auto w = g->weights();
    Eigen::MatrixXd wa = a;
    for (Eigen::Index i = 0; i < wa.rows(); ++i) wa.row(i) *= w[static_cast<std::size_t>(i)];
    CHECK((wa - wa.transpose()).norm() <= 1e-12 * wa.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (wa + wa.transpose()));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    const Eigen::MatrixXd sparse = Eigen::MatrixXd(g->weighted_operator());
    CHECK((sparse - wa).norm() <= 1e-12 * wa.norm());
    for (int c = 0; c < 20; ++c) {
      const Field f = oracle::random_positive(g->size(), rng, -1.0, 1.0);
      const Field af = apply_neg_laplacian(*g, f);
      const Eigen::VectorXd ref = a * Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
      const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(af.data(), af.size());
      CHECK((got - ref).norm() <= 1e-12 * ref.norm());
      // edge form of the quadratic form
      CHECK(g->dirichlet_form(f) == doctest::Approx(inner(*g, af, f)).epsilon(1e-11));
    }
  }
}

TEST_CASE("quadrature") {
  const auto zero = build_grid(DomainSpec::disk(1.0, 8, 8));
  CHECK(integrate(*zero, Field(zero->size(), 0.0)) == 0.0);
  // annular cells tile the disk exactly
  for (int n : {16, 32, 64}) {
    const auto g = build_grid(DomainSpec::disk(1.0, n, n));
    const double err = std::abs(integrate(*g, Field(g->size(), 1.0)) - std::numbers::pi);
    CHECK(err / std::numbers::pi < 1e-12);
  }
  // antisymmetric under theta -> theta + pi
  const auto g = build_grid(DomainSpec::disk(1.0, 8, 16));
  Field f(g->size());
  for (int j = 0; j < 8; ++j)
    for (int l = 0; l < 16; ++l) f[g->polar_index(j, l)] = std::cos(g->angle(l)) * (j + 1);
  CHECK(std::abs(integrate(*g, f)) < 1e-14);
  for (double w : g->weights()) CHECK(w > 0.0);
}

TEST_CASE("first eigenvalue") {
  const auto line = build_grid(DomainSpec::interval(1.0, 256));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(lambda1_estimate(*line).value - pi2) / pi2 < 1e-3);
  const auto disk = build_grid(DomainSpec::disk(1.0, 48, 48));
  const double j2 = oracle::kJ01 * oracle::kJ01;
  CHECK(std::abs(lambda1_estimate(*disk).value - j2) / j2 < 5e-3);
  const auto small = build_grid(DomainSpec::interval(1.0, 63));
  const auto big = build_grid(DomainSpec::interval(2.0, 63));
  CHECK(lambda1_estimate(*big).value ==
        doctest::Approx(lambda1_estimate(*small).value / 4.0).epsilon(1e-8));
}

TEST_CASE("shifted Poisson solves") {
  std::mt19937_64 rng(2);
  for (const auto& spec : all_kinds()) {
    const auto g = build_grid(spec);
    const Field v = oracle::random_positive(g->size(), rng, -0.5, 2.0);
    const Field zero = shifted_poisson_solve(*g, 2.0, v, 1.0, Field(g->size(), 0.0)).x;
    for (double x : zero) CHECK(x == 0.0);
    const Field xs = oracle::random_positive(g->size(), rng, -1.0, 1.0);
    Field rhs = apply_neg_laplacian(*g, xs);
    for (std::size_t m = 0; m < rhs.size(); ++m) rhs[m] = 2.0 * rhs[m] + (v[m] + 1.0) * xs[m];
    const Field x = shifted_poisson_solve(*g, 2.0, v, 1.0, rhs).x;
    const ShiftedPoissonFactor fac(*g, 2.0, v, 1.0);
    const Field y = fac.solve(rhs);
    double e1 = 0.0, e2 = 0.0, n = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      e1 += (x[m] - xs[m]) * (x[m] - xs[m]);
      e2 += (y[m] - xs[m]) * (y[m] - xs[m]);
      n += xs[m] * xs[m];
    }
    CHECK(std::sqrt(e1 / n) < 1e-9);
    CHECK(std::sqrt(e2 / n) < 1e-11);
  }
  // dense oracle, interval, V = 0, c = 1, sigma = 1
  const auto g = build_grid(DomainSpec::interval(1.0, 40));
  Eigen::MatrixXd a = oracle::dense_operator(*g);
  a += Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Field rhs = oracle::random_positive(g->size(), rng);
  const Eigen::VectorXd ref =
      a.lu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size()));
  const Field x = shifted_poisson_solve(*g, 1.0, Field(g->size(), 0.0), 1.0, rhs).x;
  for (std::size_t m = 0; m < x.size(); ++m)
    CHECK(x[m] == doctest::Approx(ref[static_cast<Eigen::Index>(m)]).epsilon(1e-10));
}

TEST_CASE("factor update matches a fresh factor") {
  const auto g = build_grid(DomainSpec::disk(1.0, 10, 12));
  std::mt19937_64 rng(3);
  const Field v1 = oracle::random_positive(g->size(), rng);
  const Field v2 = oracle::random_positive(g->size(), rng);
  const Field rhs = oracle::random_positive(g->size(), rng);
  ShiftedPoissonFactor a(*g, 1.0, v1, 1.0);
  a.update(v2, 0.5);
  const ShiftedPoissonFactor b(*g, 1.0, v2, 0.5);
  const Field x = a.solve(rhs), y = b.solve(rhs);
  for (std::size_t m = 0; m < x.size(); ++m) CHECK(x[m] == doctest::Approx(y[m]).epsilon(1e-12));
}

TEST_CASE("mismatched field sizes") {
  const auto g = build_grid(DomainSpec::interval(1.0, 8));
  CHECK_THROWS_AS(apply_neg_laplacian(*g, Field(7, 0.0)), GridMismatch);
  CHECK_THROWS_AS(integrate(*g, Field(9, 0.0)), GridMismatch);
}

TEST_CASE("domain json round trip") {
  for (const auto& spec : all_kinds()) CHECK(domain_spec_from_json(to_json(spec)) == spec);
}
