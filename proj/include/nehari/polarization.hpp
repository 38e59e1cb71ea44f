#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nehari/energy.hpp"

namespace nehari {

enum class Side { in_h, on_boundary, in_complement };

/// Node permutation of a grid-exact reflection plus the side of each node.
struct ReflectionMap {
  std::vector<std::size_t> perm;
  std::vector<Side> side;
};

/// Closed half-space {x : x.n >= 0} whose boundary line passes through the
/// origin at angle `axis_angle`; n points at `normal_angle`.
struct HalfSpace {
  double axis_angle = 0.0;
  double normal_angle = 0.0;
  ReflectionMap map;

  /// Closure of the complement: same line and permutation, sides swapped.
  HalfSpace complement() const;
  std::size_t reflect(std::size_t node) const { return map.perm[node]; }
};

/// Polar grids (even ntheta): ntheta half-spaces with normals at
/// 2*pi*m/ntheta. Rectangles: the coordinate reflections, plus the diagonals
/// on square grids, both orientations. Intervals are refused.
std::vector<HalfSpace> half_space_family(const Grid& grid);

/// Half-space bounded by the line at angle pi*s/ntheta (polar grids only).
HalfSpace polar_half_space(const Grid& grid, int s, bool positive_side);

Field polarize(const Field& field, const HalfSpace& h);

/// max over (a,b,c,d) in values^4 of P(a,c)+P(b,d) - P(a^b, c_d) - P(a_b, c^d)
/// for a two-component model.
double two_point_inequality_scan(const Nonlinearity& model, const std::vector<double>& values);

struct PolarizedEnergy {
  double polarized = 0.0;  // E(u_H, v_Hc)
  double original = 0.0;
  double quadratic_polarized = 0.0;
  double quadratic_original = 0.0;
  double nonlinear_polarized = 0.0;  // sum w P
  double nonlinear_original = 0.0;
};

PolarizedEnergy polarized_energy_compare(const Problem& problem, const State& uv,
                                         const HalfSpace& h);

enum class Dominance { dominant, subordinate, neither };
std::string to_string(Dominance d);

struct DominanceResult {
  Dominance status = Dominance::neither;
  bool degenerate = false;  // dominant and subordinate at once
};

DominanceResult dominance_status(const Field& field, const HalfSpace& h, double tol = 1e-12);

struct RingProfile {
  double radius = 0.0;
  std::vector<double> offset;  // angular distance from the axis
  std::vector<double> value;   // mean of the two sides
};

struct SymmetryReport {
  double axis_angle = 0.0;  // refined
  int axis_index = 0;       // grid axis at pi*axis_index/ntheta
  double axial_asymmetry = 0.0;
  double monotonicity_violation = 0.0;
  double dominant_fraction = 0.0;
  bool degenerate = false;  // radial field, axis arbitrary
  int ntheta = 0;
  std::vector<RingProfile> rings;
};

SymmetryReport foliated_schwarz_metrics(const Grid& grid, const Field& field);

struct Antipodality {
  double deviation = 0.0;
  bool applicable = true;
};

/// |angle(p_u) - angle(-p_v)| folded to [0, pi].
Antipodality antipodality_check(const SymmetryReport& u, const SymmetryReport& v);

/// ||u - ring mean||_w / ||u||_w.
double radial_deviation(const Grid& grid, const Field& field);

nlohmann::json to_json(const SymmetryReport& r);
void write_ring_profiles_csv(const SymmetryReport& r, std::ostream& out);

}  // namespace nehari
