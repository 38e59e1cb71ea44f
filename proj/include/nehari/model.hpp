#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nehari/grid.hpp"

namespace nehari {

/// Nonlinearity P on the closed positive cone C+ of R^k.
///
/// Implementations are evaluated at points with nonnegative entries only;
/// the even extension P(u) = P(|u_1|,...,|u_k|) is applied by callers
/// (see eval_P). Hessians are written row-major into a k*k buffer.
/// Instances are immutable and safe to share across threads.
class Nonlinearity {
 public:
  virtual ~Nonlinearity() = default;

  virtual std::size_t components() const = 0;
  virtual double value(std::span<const double> u) const = 0;
  virtual void gradient(std::span<const double> u, std::span<double> grad) const = 0;
  virtual void hessian(std::span<const double> u, std::span<double> hess) const = 0;
  /// Exponent p of the growth bound |P_uu| <= C(1 + |u|^{p-2}).
  virtual double growth_exponent() const = 0;
  virtual std::string name() const = 0;
};

using NonlinearityPtr = std::shared_ptr<const Nonlinearity>;

/// Parameters of P(u) = sum_i lambda_i/p |u_i|^p
///                      - 1/2 sum_{i != j} beta_ij |u_i|^{q_i} |u_j|^{q_j}.
struct PowerCouplingParams {
  std::size_t k = 1;
  double p = 4.0;
  std::vector<double> lambda;
  std::vector<double> q;
  std::vector<std::vector<double>> beta;

  /// Human-readable violations of lambda_i > 0, beta symmetric >= 0 with
  /// zero diagonal, q_i >= 2, p > 2 and p >= q_i + q_j. Empty when valid.
  std::vector<std::string> violations() const;

  bool operator==(const PowerCouplingParams&) const = default;
};

/// Cubic preset (p = 4, q_i = 2). The PDE coupling term for component i is
/// 2 * u_i * sum_j beta_ij u_j^2.
PowerCouplingParams cubic_preset(std::vector<double> lambda,
                                 std::vector<std::vector<double>> beta);

/// Two-component cubic system whose energy carries (beta/2) int u^2 v^2,
/// expressed in the power family (beta_12 = beta / 2).
PowerCouplingParams symmetric_cubic_pair(double beta);

nlohmann::json to_json(const PowerCouplingParams& params);
PowerCouplingParams power_params_from_json(const nlohmann::json& j);

class PowerModel final : public Nonlinearity {
 public:
  /// Checks only structural consistency (sizes, finiteness, symmetry of
  /// beta); parameter inequalities are reported by check_assumptions.
  explicit PowerModel(PowerCouplingParams params);

  const PowerCouplingParams& params() const noexcept { return params_; }

  std::size_t components() const override { return params_.k; }
  double value(std::span<const double> u) const override;
  void gradient(std::span<const double> u, std::span<double> grad) const override;
  void hessian(std::span<const double> u, std::span<double> hess) const override;
  double growth_exponent() const override { return params_.p; }
  std::string name() const override { return "power"; }

 private:
  PowerCouplingParams params_;
};

/// Separated model P(u) = sum_i F_i(u_i) - H(u).
class SeparatedModel final : public Nonlinearity {
 public:
  struct Scalar {
    std::function<double(double)> antiderivative;  // F_i
    std::function<double(double)> f;               // f_i = F_i'
    std::function<double(double)> df;              // f_i'
  };
  struct Interaction {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    std::function<void(std::span<const double>, std::span<double>)> hessian;
  };

  SeparatedModel(std::vector<Scalar> scalars, Interaction interaction, double growth_exponent,
                 std::string name = "separated");

  const std::vector<Scalar>& scalars() const noexcept { return scalars_; }
  const Interaction& interaction() const noexcept { return interaction_; }

  std::size_t components() const override { return scalars_.size(); }
  double value(std::span<const double> u) const override;
  void gradient(std::span<const double> u, std::span<double> grad) const override;
  void hessian(std::span<const double> u, std::span<double> hess) const override;
  double growth_exponent() const override { return growth_; }
  std::string name() const override { return name_; }

 private:
  std::vector<Scalar> scalars_;
  Interaction interaction_;
  double growth_;
  std::string name_;
};

/// The power family written as a SeparatedModel; useful for checking the
/// sampled assumption path against the closed-form one.
std::shared_ptr<SeparatedModel> separated_power_model(const PowerCouplingParams& params);

/// P~(v) = P(s_1 v_1, ..., s_k v_k) for positive scales s_i.
class ScaledNonlinearity final : public Nonlinearity {
 public:
  ScaledNonlinearity(NonlinearityPtr base, std::vector<double> scales);

  std::size_t components() const override { return base_->components(); }
  double value(std::span<const double> u) const override;
  void gradient(std::span<const double> u, std::span<double> grad) const override;
  void hessian(std::span<const double> u, std::span<double> hess) const override;
  double growth_exponent() const override { return base_->growth_exponent(); }
  std::string name() const override { return "scaled(" + base_->name() + ")"; }

 private:
  NonlinearityPtr base_;
  std::vector<double> scales_;
};

/// P, grad P, Hess P at |u|.
struct PointEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Evaluates the model at (|u_1|, ..., |u_k|). Rejects non-finite input.
PointEval eval_P(const Nonlinearity& model, std::span<const double> u);

/// M(u)_ij = delta_ij (1 + alpha) P_i(u) u_i - P_ij(u) u_i u_j.
Eigen::MatrixXd matrix_M_alpha(const Nonlinearity& model, std::span<const double> u,
                               double alpha);

/// Gershgorin sufficient test for negative semidefiniteness:
/// h_ii + sum_{j != i} |h_ij| <= 0 for every row. Rejects non-symmetric h.
bool gershgorin_nsd(const Eigen::MatrixXd& h);

/// Potential V_i realized on a grid. Radial kinds depend on |x| only.
struct Potential {
  enum class Kind { constant, radial_quadratic, tabulated_radial };
  Kind kind = Kind::constant;
  double a = 0.0;  // constant value, or offset of a + b r^2
  double b = 0.0;
  std::vector<double> table_r;
  std::vector<double> table_v;

  static Potential constant(double value);
  static Potential radial_quadratic(double a, double b);
  static Potential tabulated(std::vector<double> r, std::vector<double> v);

  Field realize(const Grid& grid) const;
  bool operator==(const Potential&) const = default;
};

nlohmann::json to_json(const Potential& potential);
Potential potential_from_json(const nlohmann::json& j);

enum class Verdict { pass, fail, not_applicable };
enum class CheckMethod { closed_form, sampled };

std::string to_string(Verdict v);
std::string to_string(CheckMethod m);

struct AssumptionCheck {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
  CheckMethod method = CheckMethod::closed_form;
  std::string detail;
  std::vector<double> witness;  // point (or index pair) where a check failed
};

struct AssumptionReport {
  double alpha = 0.0;  // constant certified for the M(u) condition
  std::vector<AssumptionCheck> checks;

  const AssumptionCheck& at(const std::string& name) const;
  /// True when no check failed.
  bool all_pass() const;
  /// Names of failed checks.
  std::vector<std::string> failures() const;
};

nlohmann::json to_json(const AssumptionReport& report);

struct AssumptionOptions {
  std::optional<double> alpha;  // default p - 2
  double lambda1_tolerance = 1e-8;
};

/// Decides (P0)-(P6), (a1)-(a3), (H1)-(H5) and the parameter inequalities of
/// the power family. Power models are decided in closed form; any other
/// model is sampled over a log-spaced lattice of the cone.
AssumptionReport check_assumptions(const Nonlinearity& model, const Grid& grid,
                                   std::span<const Field> potentials,
                                   std::span<const double> diffusion,
                                   const AssumptionOptions& options = {});

/// Log-spaced sample points in C+ used by the sampled checks: 17 magnitudes
/// in [1e-3, 1e3] per coordinate, strided down to at most `cap` points.
std::vector<std::vector<double>> cone_lattice(std::size_t k, std::size_t cap = 100000);

}  // namespace nehari
