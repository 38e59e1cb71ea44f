#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nehari/energy.hpp"

namespace nehari {

struct SolverOptions {
  int start_count = 3;
  int max_outer_iterations = 4000;
  double tolerance = 1e-10;  // projected gradient ||g - sum lambda_i grad F_i||_w / max(1, ||u||_w)
  double initial_step = 1.0;
  double backtracking = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 40;
  std::uint64_t seed = 0;
  bool preconditioned = true;
  /// Adds the frozen coupling potential max(0, -P_{u_i u_i}(u)) to the
  /// preconditioner at every outer step.
  bool adaptive_preconditioner = true;
  bool conjugate = true;  // Polak-Ribiere directions with restarts
  int workers = 1;
  bool waive_assumptions = false;
  NehariOptions nehari;
  /// When nonempty these replace the generated starts.
  std::vector<State> initial_states;
};

enum class StartKind { radial, segregated, random_bumps, supplied };
std::string to_string(StartKind kind);

/// Start plan: radial, then segregated (k >= 2), then random bumps.
std::vector<StartKind> plan_starts(std::size_t k, int count);

/// Nonnegative initial fields vanishing at the boundary. Random starts draw
/// from mt19937_64 seeded with (seed, index).
State initial_state(const Problem& problem, StartKind kind, std::uint64_t seed, int index);
State initial_state(const Grid& grid, std::size_t k, StartKind kind, std::uint64_t seed, int index);

struct StartHistory {
  int start_index = 0;
  StartKind kind = StartKind::radial;
  std::string status;  // converged | failed | max_iterations
  double energy = 0.0;
  int iterations = 0;
  double final_gradient = 0.0;
  std::string message;
  std::vector<double> energy_trace;
};

struct MultiplierFit {
  std::vector<double> lambda;
  double fit_residual = 0.0;  // ||g - sum lambda_i grad F_i||_w / max(1, ||u||_w)
};

struct Solution {
  State state;
  double energy = 0.0;
  NehariDiagnostics nehari;
  MultiplierFit multipliers;
  std::vector<double> pde_residual;
  std::vector<double> interior_min;
  int start_index = -1;
  int iterations = 0;
  std::vector<StartHistory> start_histories;
  bool assumptions_waived = false;
  std::vector<std::string> assumption_failures;
};

/// Multi-start preconditioned descent on E restricted to the Nehari set.
/// Throws AssumptionFailure (unless waived) and SolverFailure when no start
/// converges.
Solution solve_ground_state(const Problem& problem, const SolverOptions& options = {});

/// Least-squares fit of grad E against span{grad F_i} in the w-product.
/// Throws NotOnNehari when the relative defect exceeds `tolerance` and
/// RankDeficient for a singular Gram matrix.
MultiplierFit multiplier_residual(const Problem& problem, const State& u,
                                  double tolerance = 1e-8);

/// ||c_i(-Lap u_i) + V_i u_i - P_{u_i}(u)||_w / max(1, ||u_i||_w).
std::vector<double> discrete_pde_residual(const Problem& problem, const State& u);

struct DiagnosticsReport {
  std::vector<double> interior_min;
  bool positive = false;
  double lower_bound_slack = 0.0;
  bool lower_bound_ok = false;
  std::vector<double> norms;
  bool norm_floor_ok = false;
  double hessian_max_eig = 0.0;
  bool hessian_negative = false;
  Membership membership = Membership::sampled_no;
  std::vector<std::string> flags;  // failed expectations
};

DiagnosticsReport diagnostics_bundle(const Problem& problem, const Solution& solution);

/// max of phi_u over t = t_star * (i/per_unit), i = 1..points, per axis.
struct MinimaxCheck {
  double lattice_max = 0.0;
  double energy = 0.0;
  std::vector<int> argmax;  // lattice indices (1-based)
  int star_index = 0;       // index of t_star on each axis
  bool contains_star = false;
};

MinimaxCheck minimax_lattice_check(const Problem& problem, const State& u,
                                   const Eigen::VectorXd& t_star, int points = 60,
                                   int per_unit = 20);

nlohmann::json to_json(const MultiplierFit& fit);
nlohmann::json to_json(const StartHistory& h);
nlohmann::json to_json(const DiagnosticsReport& d);
nlohmann::json to_json(const Solution& s);

}  // namespace nehari
