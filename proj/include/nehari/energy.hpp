#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nehari/grid.hpp"
#include "nehari/model.hpp"

namespace nehari {

/// k nodal fields on one grid.
using State = std::vector<Field>;

/// Discrete Dirichlet problem -c_i Lap u_i + V_i u_i = P_{u_i}(u).
struct Problem {
  GridPtr grid;
  NonlinearityPtr model;
  std::vector<Field> potentials;  // realized V_i
  std::vector<double> diffusion;  // c_i

  std::size_t components() const { return diffusion.size(); }
  /// Throws InvalidArgument / GridMismatch on inconsistent inputs.
  void validate() const;
};

Problem make_problem(GridPtr grid, NonlinearityPtr model, const std::vector<Potential>& potentials,
                     std::vector<double> diffusion);

/// Throws GridMismatch unless u has k components on the problem grid.
void require_state(const Problem& problem, const State& u);

/// Norm floor below which a component counts as vanishing.
inline constexpr double kNormFloor = 1e-12;

/// ||u_i||_i^2 = c_i <-Lap u_i, u_i>_w + <V_i u_i, u_i>_w.
std::vector<double> component_norms_sq(const Problem& problem, const State& u);

double energy(const Problem& problem, const State& u);

/// w-gradient: c_i(-Lap u_i) + V_i u_i - P_{u_i}(u).
State energy_gradient(const Problem& problem, const State& u);

/// F_i(u) = ||u_i||_i^2 - sum_n w_n P_{u_i}(u) u_i. Throws DegenerateState.
std::vector<double> nehari_residuals(const Problem& problem, const State& u);

/// w-gradients of F_1..F_k; entry [i][j] is the j-th component of grad F_i.
std::vector<State> constraint_gradients(const Problem& problem, const State& u);

struct PhiBundle {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// phi_u(t) = E(t_1 u_1, ..., t_k u_k) with |u| and the norms cached.
class ScalingMap {
 public:
  ScalingMap(const Problem& problem, const State& u);

  std::size_t components() const { return norms_sq_.size(); }
  const std::vector<double>& norms_sq() const { return norms_sq_; }

  double value(const Eigen::VectorXd& t) const;
  PhiBundle bundle(const Eigen::VectorXd& t) const;

 private:
  const Problem* problem_;
  std::vector<double> norms_sq_;
  std::vector<double> abs_;  // node-major |u|
};

PhiBundle phi_bundle(const Problem& problem, const State& u, const Eigen::VectorXd& t);

struct NehariOptions {
  double newton_tolerance = 1e-10;  // ||grad phi|| <= tol * sum_i t_i ||u_i||_i^2
  double manifold_tolerance = 1e-9;  // |F_i| <= tol * ||u_i||_i^2
  int max_iterations = 100;
  int max_halvings = 30;
  double escape_bound = 1e8;  // t_i outside [1/bound, bound] counts as divergence
};

struct NehariDiagnostics {
  double energy = 0.0;
  std::vector<double> residuals;
  std::vector<double> norms;  // ||u_i||_i
  double hessian_max_eig = 0.0;
  double lower_bound_slack = 0.0;
};

nlohmann::json to_json(const NehariDiagnostics& d);

struct NehariProjection {
  Eigen::VectorXd t;
  State state;
  NehariDiagnostics diagnostics;
  int iterations = 0;
};

/// Damped Newton on grad phi_u = 0. Throws ProjectionFailure (with the t
/// trajectory) on divergence, iteration cap or a non-negative Hessian at the
/// limit, and DegenerateState for vanishing components.
NehariProjection project_to_nehari(const Problem& problem, const State& u,
                                   const NehariOptions& options = {},
                                   std::optional<Eigen::VectorXd> t0 = std::nullopt);

/// max_i |F_i| / ||u_i||_i^2.
double nehari_defect(const Problem& problem, const State& u);

/// E(u) - (1/2 - 1/(2+alpha)) sum ||u_i||_i^2. Throws NotOnNehari when the
/// relative Nehari defect exceeds `tolerance`.
double lower_bound_check(const Problem& problem, const State& u, double alpha,
                         double tolerance = 1e-9);

enum class Membership { analytic_yes, sampled_yes, sampled_no };
std::string to_string(Membership m);

struct MembershipResult {
  Membership verdict = Membership::sampled_no;
  std::string detail;
  std::vector<double> direction;  // failing ray direction for sampled_no
};

/// Analytic for power-family states on the discrete Nehari set (valid
/// parameters); otherwise phi is sampled on rays at radii 10, 100, 1000.
MembershipResult membership_in_M(const Problem& problem, const State& u,
                                 double manifold_tolerance = 1e-9);

/// Equivalent problem with c_i = 1: u~_i = sqrt(c_i) u_i, V~_i = V_i / c_i,
/// P~(v) = P(v_1/sqrt(c_1), ...).
struct UnitDiffusion {
  Problem problem;
  std::vector<double> scales;  // sqrt(c_i)
  State forward(const State& u) const;
  State backward(const State& v) const;
};

UnitDiffusion rescale_unit_diffusion(const Problem& problem);

}  // namespace nehari
