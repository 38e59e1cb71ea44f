#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nehari/grid.hpp"
#include "nehari/polarization.hpp"

namespace nehari {

/// Pair (u, v) for the unit-mass problem.
struct MassState {
  Field u, v;
};

/// Masses sum_n w_n u_n^2 and sum_n w_n v_n^2.
std::pair<double, double> masses(const Grid& grid, const MassState& s);

/// I = 1/2 int(|grad u|^2 + |grad v|^2) + 1/4 int(u^4 + v^4) + beta/2 int u^2 v^2.
double I_energy(const Grid& grid, const MassState& s, double beta);

/// Divides each component by its w-norm. Throws DegenerateState on a zero
/// component.
MassState project_mass(const Grid& grid, const MassState& s);

struct MultiplierPair {
  double lambda = 0.0;
  double mu = 0.0;
};

/// lambda = int(|grad u|^2 + u^4 + beta u^2 v^2), mu likewise.
MultiplierPair mass_multipliers(const Grid& grid, const MassState& s, double beta);

/// ||-Lap u - lambda u + u^3 + beta u v^2||_w / ||u||_w and the v analogue.
std::pair<double, double> mass_stationarity(const Grid& grid, const MassState& s, double beta,
                                            const MultiplierPair& m);

struct MassOptions {
  double tau = 0.1;
  int max_halvings = 30;
  int max_iterations = 20000;
  double tolerance = 1e-9;  // tangential gradient, w-norm
  /// Starts run in order; the lowest I wins (ties to the first). Empty means
  /// one segregated start and one exchange-symmetric start.
  std::vector<MassState> initial_states;
  int workers = 1;
};

struct MassRun {
  std::string status;  // converged | stalled | max_iterations
  double energy = 0.0;
  int iterations = 0;
  double tangential_gradient = 0.0;
  std::vector<double> energy_trace;
};

struct MassSolution {
  MassState state;
  MultiplierPair multipliers;
  double energy = 0.0;
  double mass_u = 0.0, mass_v = 0.0;
  double residual_u = 0.0, residual_v = 0.0;
  double coupling_integral = 0.0;  // int u^2 v^2
  int start_index = -1;
  std::vector<MassRun> runs;
};

/// Preconditioned normalized gradient flow for min I on the unit-mass set.
/// Throws InvalidArgument for beta <= 0 and SolverFailure when no start
/// converges.
MassSolution solve_mass_ground_state(const Grid& grid, double beta, const MassOptions& opts = {});

struct MassPolarization {
  double mass_u = 0.0, mass_v = 0.0;  // of (u_H, v_Hc)
  double energy_polarized = 0.0;
  double energy_original = 0.0;
  double coupling_difference = 0.0;  // |int u_H^2 v_Hc^2 - int u^2 v^2|
  bool masses_ok = false;
  bool energy_ok = false;
};

MassPolarization mass_polarization_check(const Grid& grid, const MassState& s, double beta,
                                         const HalfSpace& h);

nlohmann::json to_json(const MassRun& r);
nlohmann::json to_json(const MassSolution& s);
nlohmann::json to_json(const MassPolarization& p);

}  // namespace nehari
