#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nehari/grid.hpp"
#include "nehari/model.hpp"

namespace nehari {

enum class Task { solve, solve_mass, check_assumptions, polarize_audit, sweep_beta };
std::string to_string(Task t);

struct SolverConfig {
  int start_count = 3;
  int max_outer_iterations = 4000;
  double tolerance = 1e-10;
  bool waive_assumptions = false;
  bool operator==(const SolverConfig&) const = default;
};

struct MassConfig {
  double beta = 1.0;
  double tau = 0.1;
  double tolerance = 1e-9;
  int max_iterations = 20000;
  bool operator==(const MassConfig&) const = default;
};

struct AuditConfig {
  int pairs = 20;  // random positive pairs per half-space
  bool operator==(const AuditConfig&) const = default;
};

struct ExperimentConfig {
  Task task = Task::solve;
  DomainSpec domain;
  std::optional<PowerCouplingParams> model;  // absent only for solve_mass
  std::vector<Potential> potentials;
  std::vector<double> diffusion;
  SolverConfig solver;
  MassConfig mass;
  AuditConfig audit;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output = "out";
  std::vector<double> betas;  // sweep_beta

  bool operator==(const ExperimentConfig& other) const;
};

/// Validates against the schema; throws ConfigError listing every issue
/// with its path. Structural parameter conditions are checked here.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config(const nlohmann::json& j);

/// Fully resolved config (defaults filled in).
nlohmann::json serialize(const ExperimentConfig& config);

/// FNV-1a 64 of the compact resolved config, as 16 hex digits. Excludes
/// `workers` and `output`, which do not change numerics.
std::string config_hash(const ExperimentConfig& config);

struct SweepRow {
  double beta = 0.0;
  std::string status;  // converged | failed
  std::string message;
  bool assumptions_waived = false;
  double energy = 0.0;
  double radial_deviation = 0.0;  // max over components
  std::vector<double> radial_deviation_each;
  std::vector<double> axial_asymmetry;
  std::vector<double> monotonicity_violation;
  double antipodal_deviation = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // ordered by beta
  std::vector<std::string> warnings;
};

/// Solves the two-component problem for every beta (off-diagonal coupling
/// of the configured model). Duplicates are dropped with a warning; beta = 0
/// runs under a recorded assumption waiver. Per-entry failures do not stop
/// the sweep.
SweepTable sweep_beta(const ExperimentConfig& config,
                      std::vector<std::vector<std::vector<double>>>* states = nullptr);

void write_sweep_csv(const SweepTable& table, std::ostream& out);

struct RunSummary {
  nlohmann::json summary;
  bool ok = true;
  std::vector<std::string> failed_flags;
};

/// Dispatches the task and writes resolved_config.json, summary.json, a
/// fields CSV per solved state and sweep.csv for sweeps into
/// config.output.
RunSummary run_experiment(const ExperimentConfig& config);

/// Fields CSV: node columns of write_nodes_csv followed by u1..uk.
void write_fields_csv(const Grid& grid, const std::vector<std::vector<double>>& state,
                      std::ostream& out);

}  // namespace nehari
