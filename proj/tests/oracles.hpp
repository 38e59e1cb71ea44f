// Reference computations that do not go through the library's discretization.
#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nehari/grid.hpp"

namespace oracle {

struct ShootingResult {
  double slope = 0.0;   // u'(0)
  double energy = 0.0;  // 1/2 int u'^2 - 1/4 int u^4 = 1/4 int u'^2
};

// -u'' = u^3 on (0, 1), u(0) = u(1) = 0, u > 0: bisection on u'(0) with RK4
// for (u, u', int u'^2). The first zero moves left as u'(0) grows.
inline ShootingResult shoot_cubic(int steps = 20000) {
  auto end_state = [steps](double s, bool& crossed) {
    std::array<double, 3> y{0.0, s, 0.0};
    const double h = 1.0 / steps;
    auto f = [](const std::array<double, 3>& v) {
      return std::array<double, 3>{v[1], -v[0] * v[0] * v[0], v[1] * v[1]};
    };
    crossed = false;
    for (int i = 0; i < steps; ++i) {
      const auto k1 = f(y);
      std::array<double, 3> t;
      for (int c = 0; c < 3; ++c) t[c] = y[c] + 0.5 * h * k1[c];
      const auto k2 = f(t);
      for (int c = 0; c < 3; ++c) t[c] = y[c] + 0.5 * h * k2[c];
      const auto k3 = f(t);
      for (int c = 0; c < 3; ++c) t[c] = y[c] + h * k3[c];
      const auto k4 = f(t);
      for (int c = 0; c < 3; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      if (i + 1 < steps && y[0] < 0.0) crossed = true;
    }
    return y;
  };
  double lo = 0.1, hi = 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    bool crossed = false;
    const auto y = end_state(mid, crossed);
    if (crossed || y[0] < 0.0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-14 * hi) break;
  }
  bool crossed = false;
  const auto y = end_state(0.5 * (lo + hi), crossed);
  return {0.5 * (lo + hi), 0.25 * y[2]};
}

// Dense -Delta_h assembled column by column from apply_neg_laplacian.
inline Eigen::MatrixXd dense_operator(const nehari::Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a(n, n);
  nehari::Field e(g.size(), 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    const auto col = nehari::apply_neg_laplacian(g, e);
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = col[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return a;
}

inline nehari::Field random_positive(std::size_t n, std::mt19937_64& rng, double lo = 0.1,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  nehari::Field f(n);
  for (auto& x : f) x = d(rng);
  return f;
}

constexpr double kJ01 = 2.404825557695773;  // first zero of J_0

}  // namespace oracle
