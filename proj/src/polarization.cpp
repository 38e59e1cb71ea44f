#include "nehari/polarization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

int mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

void require_polar(const Grid& grid, const char* what) {
  if (!grid.is_polar())
    throw InvalidGeometry(std::string(what) + " needs a disk or annulus grid");
}

// Cartesian reflection with the given node map and normal.
HalfSpace cartesian_half_space(const Grid& grid, double axis, double normal,
                               const std::vector<std::size_t>& perm) {
  HalfSpace h;
  h.axis_angle = wrap_angle(axis);
  h.normal_angle = wrap_angle(normal);
  h.map.perm = perm;
  h.map.side.resize(perm.size());
  const double nx = std::cos(normal), ny = std::sin(normal);
  const auto x = grid.x();
  const auto y = grid.y();
  for (std::size_t m = 0; m < perm.size(); ++m) {
    if (perm[m] == m) {
      h.map.side[m] = Side::on_boundary;
    } else {
      h.map.side[m] = x[m] * nx + y[m] * ny > 0.0 ? Side::in_h : Side::in_complement;
    }
  }
  return h;
}

}  // namespace

HalfSpace HalfSpace::complement() const {
  HalfSpace c = *this;
  c.normal_angle = wrap_angle(normal_angle + kPi);
  for (auto& s : c.map.side) {
    if (s == Side::in_h)
      s = Side::in_complement;
    else if (s == Side::in_complement)
      s = Side::in_h;
  }
  return c;
}

HalfSpace polar_half_space(const Grid& grid, int s, bool positive_side) {
  require_polar(grid, "polar_half_space");
  const int nt = grid.angles();
  s = mod(s, 2 * nt);
  HalfSpace h;
  h.axis_angle = kPi * s / nt;
  h.normal_angle = wrap_angle(h.axis_angle + (positive_side ? 0.5 : -0.5) * kPi);
  h.map.perm.resize(grid.size());
  h.map.side.resize(grid.size());
  for (int j = 0; j < grid.rings(); ++j) {
    for (int l = 0; l < nt; ++l) {
      const auto m = grid.polar_index(j, l);
      h.map.perm[m] = grid.polar_index(j, mod(s - l, nt));
      // theta_l - axis in units of pi/nt
      const int e = mod(2 * l - s, 2 * nt);
      if (e == 0 || e == nt)
        h.map.side[m] = Side::on_boundary;
      else if ((e < nt) == positive_side)
        h.map.side[m] = Side::in_h;
      else
        h.map.side[m] = Side::in_complement;
    }
  }
  return h;
}

std::vector<HalfSpace> half_space_family(const Grid& grid) {
  std::vector<HalfSpace> out;
  if (grid.is_polar()) {
    const int nt = grid.angles();
    if (nt % 2 != 0) throw InvalidGeometry("half-space family needs an even ntheta");
    for (int m = 0; m < nt; ++m) out.push_back(polar_half_space(grid, 2 * m - nt / 2, true));
    return out;
  }
  if (grid.kind() != DomainKind::rectangle)
    throw InvalidGeometry("no grid-exact reflection through the origin on an interval");
  const auto& s = grid.spec();
  const int nx = s.nx, ny = s.ny;
  const auto n = grid.size();
  auto idx = [nx](int ix, int iy) { return static_cast<std::size_t>(iy * nx + ix); };
  std::vector<std::size_t> p(n);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) p[idx(ix, iy)] = idx(nx - 1 - ix, iy);
  out.push_back(cartesian_half_space(grid, 0.5 * kPi, 0.0, p));
  out.push_back(cartesian_half_space(grid, 0.5 * kPi, kPi, p));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) p[idx(ix, iy)] = idx(ix, ny - 1 - iy);
  out.push_back(cartesian_half_space(grid, 0.0, 0.5 * kPi, p));
  out.push_back(cartesian_half_space(grid, 0.0, 1.5 * kPi, p));
  if (nx == ny && s.length_x == s.length_y) {
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) p[idx(ix, iy)] = idx(iy, ix);
    out.push_back(cartesian_half_space(grid, 0.25 * kPi, 0.75 * kPi, p));
    out.push_back(cartesian_half_space(grid, 0.25 * kPi, -0.25 * kPi, p));
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) p[idx(ix, iy)] = idx(nx - 1 - iy, nx - 1 - ix);
    out.push_back(cartesian_half_space(grid, 0.75 * kPi, 0.25 * kPi, p));
    out.push_back(cartesian_half_space(grid, 0.75 * kPi, 1.25 * kPi, p));
  }
  return out;
}

Field polarize(const Field& field, const HalfSpace& h) {
  if (field.size() != h.map.perm.size())
    throw GridMismatch("field has " + std::to_string(field.size()) + " nodes, half-space " +
                       std::to_string(h.map.perm.size()));
  Field out(field.size());
  for (std::size_t m = 0; m < field.size(); ++m) {
    const double a = field[m], b = field[h.map.perm[m]];
    out[m] = h.map.side[m] == Side::in_complement ? std::min(a, b) : std::max(a, b);
  }
  return out;
}

double two_point_inequality_scan(const Nonlinearity& model, const std::vector<double>& values) {
  if (model.components() != 2) throw InvalidArgument("two-point scan needs k = 2");
  const auto nv = values.size();
  std::vector<double> table(nv * nv);
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t c = 0; c < nv; ++c) {
      const std::array<double, 2> pt{values[a], values[c]};
      table[a * nv + c] = model.value(pt);
    }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t b = 0; b < nv; ++b) {
      const std::size_t hi = values[a] >= values[b] ? a : b;
      const std::size_t lo = hi == a ? b : a;
      for (std::size_t c = 0; c < nv; ++c)
        for (std::size_t d = 0; d < nv; ++d) {
          const std::size_t chi = values[c] >= values[d] ? c : d;
          const std::size_t clo = chi == c ? d : c;
          const double lhs = table[a * nv + c] + table[b * nv + d];
          const double rhs = table[hi * nv + clo] + table[lo * nv + chi];
          worst = std::max(worst, lhs - rhs);
        }
    }
  return nv == 0 ? 0.0 : worst;
}

PolarizedEnergy polarized_energy_compare(const Problem& problem, const State& uv,
                                         const HalfSpace& h) {
  if (problem.components() != 2) throw InvalidArgument("polarized energy needs k = 2");
  require_state(problem, uv);
  const State pol{polarize(uv[0], h), polarize(uv[1], h.complement())};
  auto split = [&](const State& s, double& e, double& q, double& nl) {
    const auto norms = component_norms_sq(problem, s);
    q = 0.5 * (norms[0] + norms[1]);
    e = energy(problem, s);
    nl = q - e;
  };
  PolarizedEnergy r;
  split(pol, r.polarized, r.quadratic_polarized, r.nonlinear_polarized);
  split(uv, r.original, r.quadratic_original, r.nonlinear_original);
  return r;
}

std::string to_string(Dominance d) {
  switch (d) {
    case Dominance::dominant: return "dominant";
    case Dominance::subordinate: return "subordinate";
    case Dominance::neither: return "neither";
  }
  return "?";
}

DominanceResult dominance_status(const Field& field, const HalfSpace& h, double tol) {
  if (field.size() != h.map.perm.size()) throw GridMismatch("field does not match half-space");
  bool dom = true, sub = true;
  for (std::size_t m = 0; m < field.size(); ++m) {
    if (h.map.side[m] == Side::in_complement) continue;
    const double a = field[m], b = field[h.map.perm[m]];
    if (a < b - tol) dom = false;
    if (a > b + tol) sub = false;
  }
  DominanceResult r;
  if (dom) {
    r.status = Dominance::dominant;
    r.degenerate = sub;
  } else if (sub) {
    r.status = Dominance::subordinate;
  }
  return r;
}

SymmetryReport foliated_schwarz_metrics(const Grid& grid, const Field& field) {
  require_polar(grid, "foliated_schwarz_metrics");
  require_on_grid(grid, field, "field");
  const int nt = grid.angles(), nr = grid.rings();
  const auto w = grid.weights();
  SymmetryReport rep;
  rep.ntheta = nt;

  double umax = 0.0, spread = 0.0, ring_max_sum = 0.0;
  for (int j = 0; j < nr; ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, amax = 0.0;
    for (int l = 0; l < nt; ++l) {
      const double v = field[grid.polar_index(j, l)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      amax = std::max(amax, std::abs(v));
    }
    umax = std::max(umax, amax);
    spread = std::max(spread, hi - lo);
    ring_max_sum += amax;
  }
  rep.degenerate = spread <= 1e-12 * umax;

  // objective over the 2*nt axis directions pi*s/nt
  std::vector<double> obj(2 * static_cast<std::size_t>(nt), 0.0);
  for (int s = 0; s < 2 * nt; ++s) {
    double acc = 0.0;
    for (int j = 0; j < nr; ++j) {
      const double wj = w[grid.polar_index(j, 0)];
      double v;
      if (s % 2 == 0)
        v = field[grid.polar_index(j, mod(s / 2, nt))];
      else
        v = 0.5 * (field[grid.polar_index(j, mod((s - 1) / 2, nt))] +
                   field[grid.polar_index(j, mod((s + 1) / 2, nt))]);
      acc += wj * v;
    }
    obj[static_cast<std::size_t>(s)] = acc;
  }
  int best = 0;
  if (!rep.degenerate)
    for (int s = 1; s < 2 * nt; ++s)
      if (obj[static_cast<std::size_t>(s)] > obj[static_cast<std::size_t>(best)]) best = s;
  rep.axis_index = best;
  double shift = 0.0;
  if (!rep.degenerate) {
    const double fm = obj[static_cast<std::size_t>(mod(best - 1, 2 * nt))];
    const double f0 = obj[static_cast<std::size_t>(best)];
    const double fp = obj[static_cast<std::size_t>(mod(best + 1, 2 * nt))];
    const double den = fm - 2.0 * f0 + fp;
    if (den < 0.0) shift = std::clamp(0.5 * (fm - fp) / den, -0.5, 0.5);
  }
  rep.axis_angle = wrap_angle(kPi * (best + shift) / nt);

  // reflection across the axis line through pi*best/nt
  double diff = 0.0, total = 0.0;
  for (int j = 0; j < nr; ++j)
    for (int l = 0; l < nt; ++l) {
      const auto m = grid.polar_index(j, l);
      const double d = field[m] - field[grid.polar_index(j, mod(best - l, nt))];
      diff += w[m] * d * d;
      total += w[m] * field[m] * field[m];
    }
  rep.axial_asymmetry = total > 0.0 ? std::sqrt(diff / total) : 0.0;

  // walk each side from the axis; offsets in units of pi/nt
  double increments = 0.0;
  rep.rings.resize(static_cast<std::size_t>(nr));
  for (int j = 0; j < nr; ++j) {
    std::vector<double> plus(nt + 1, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> minus(nt + 1, std::numeric_limits<double>::quiet_NaN());
    for (int l = 0; l < nt; ++l) {
      int e = mod(2 * l - best, 2 * nt);
      if (e > nt) e -= 2 * nt;
      const double v = field[grid.polar_index(j, l)];
      if (e >= 0) plus[static_cast<std::size_t>(e)] = v;
      if (e <= 0 || e == nt) minus[static_cast<std::size_t>(e == nt ? nt : -e)] = v;
    }
    for (const auto* side : {&plus, &minus}) {
      double prev = std::numeric_limits<double>::quiet_NaN();
      for (double v : *side) {
        if (std::isnan(v)) continue;
        if (!std::isnan(prev) && v > prev) increments += v - prev;
        prev = v;
      }
    }
    auto& prof = rep.rings[static_cast<std::size_t>(j)];
    prof.radius = grid.ring_radius(j);
    for (int e = 0; e <= nt; ++e) {
      const double a = plus[static_cast<std::size_t>(e)], b = minus[static_cast<std::size_t>(e)];
      if (std::isnan(a) && std::isnan(b)) continue;
      prof.offset.push_back(kPi * e / nt);
      prof.value.push_back(std::isnan(a) ? b : std::isnan(b) ? a : 0.5 * (a + b));
    }
  }
  rep.monotonicity_violation =
      rep.degenerate || ring_max_sum == 0.0 ? 0.0 : increments / ring_max_sum;

  // family half-spaces whose interior contains p
  if (nt % 2 == 0) {
    const double px = std::cos(rep.axis_angle), py = std::sin(rep.axis_angle);
    int count = 0, dom = 0;
    for (const auto& h : half_space_family(grid)) {
      if (std::cos(h.normal_angle) * px + std::sin(h.normal_angle) * py <= 1e-12) continue;
      ++count;
      if (dominance_status(field, h, 1e-8 * umax).status == Dominance::dominant) ++dom;
    }
    rep.dominant_fraction = count > 0 ? static_cast<double>(dom) / count : 1.0;
  }
  return rep;
}

Antipodality antipodality_check(const SymmetryReport& u, const SymmetryReport& v) {
  if (u.ntheta != v.ntheta) throw GridMismatch("symmetry reports from different grids");
  Antipodality a;
  if (u.degenerate || v.degenerate) {
    a.applicable = false;
    a.deviation = std::numeric_limits<double>::quiet_NaN();
    return a;
  }
  const double d = wrap_angle(u.axis_angle - v.axis_angle - kPi);
  a.deviation = std::min(d, 2.0 * kPi - d) + 0.0;
  return a;
}

double radial_deviation(const Grid& grid, const Field& field) {
  require_polar(grid, "radial_deviation");
  require_on_grid(grid, field, "field");
  const auto w = grid.weights();
  double diff = 0.0, total = 0.0;
  for (int j = 0; j < grid.rings(); ++j) {
    double mean = 0.0;
    for (int l = 0; l < grid.angles(); ++l) mean += field[grid.polar_index(j, l)];
    mean /= grid.angles();
    for (int l = 0; l < grid.angles(); ++l) {
      const auto m = grid.polar_index(j, l);
      diff += w[m] * (field[m] - mean) * (field[m] - mean);
      total += w[m] * field[m] * field[m];
    }
  }
  return total > 0.0 ? std::sqrt(diff / total) : 0.0;
}

nlohmann::json to_json(const SymmetryReport& r) {
  return {{"axis_angle", r.axis_angle},
          {"axis_index", r.axis_index},
          {"axial_asymmetry", r.axial_asymmetry},
          {"monotonicity_violation", r.monotonicity_violation},
          {"dominant_fraction", r.dominant_fraction},
          {"degenerate", r.degenerate}};
}

void write_ring_profiles_csv(const SymmetryReport& r, std::ostream& out) {
  out << "ring,r,offset,value\n";
  out.precision(17);
  for (std::size_t j = 0; j < r.rings.size(); ++j) {
    const auto& p = r.rings[j];
    for (std::size_t i = 0; i < p.offset.size(); ++i)
      out << j << ',' << p.radius << ',' << p.offset[i] << ',' << p.value[i] << '\n';
  }
}

}  // namespace nehari
