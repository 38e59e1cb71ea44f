#include "nehari/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

// a^e for a >= 0 with exact small-integer fast paths; 0^0 = 1.
inline double power(double a, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  if (e == 3.0) return a * a * a;
  if (e == 4.0) {
    const double a2 = a * a;
    return a2 * a2;
  }
  return std::pow(a, e);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- params

std::vector<std::string> PowerCouplingParams::violations() const {
  std::vector<std::string> out;
  if (!(p > 2.0)) out.push_back("p must exceed 2 (p=" + fmt(p) + ")");
  for (std::size_t i = 0; i < k; ++i) {
    if (i < lambda.size() && !(lambda[i] > 0.0))
      out.push_back("lambda_" + std::to_string(i + 1) + " must be positive");
    if (i < q.size() && !(q[i] >= 2.0))
      out.push_back("q_" + std::to_string(i + 1) + " must be >= 2");
  }
  for (std::size_t i = 0; i < k && i < beta.size(); ++i) {
    for (std::size_t j = 0; j < k && j < beta[i].size(); ++j) {
      if (i == j) {
        if (beta[i][i] != 0.0)
          out.push_back("beta_" + std::to_string(i + 1) + std::to_string(i + 1) + " must be 0");
        continue;
      }
      if (!(beta[i][j] >= 0.0))
        out.push_back("beta_" + std::to_string(i + 1) + std::to_string(j + 1) +
                      " must be nonnegative");
      if (j > i && beta[i][j] != beta[j][i])
        out.push_back("beta must be symmetric (pair " + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ")");
      if (j > i && i < q.size() && j < q.size() && p < q[i] + q[j])
        out.push_back("p >= q_i + q_j violated for pair (" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + "): p=" + fmt(p) + " < " + fmt(q[i] + q[j]));
    }
  }
  return out;
}

PowerCouplingParams cubic_preset(std::vector<double> lambda,
                                 std::vector<std::vector<double>> beta) {
  PowerCouplingParams params;
  params.k = lambda.size();
  params.p = 4.0;
  params.lambda = std::move(lambda);
  params.q.assign(params.k, 2.0);
  params.beta = std::move(beta);
  return params;
}

PowerCouplingParams symmetric_cubic_pair(double beta) {
  return cubic_preset({1.0, 1.0}, {{0.0, 0.5 * beta}, {0.5 * beta, 0.0}});
}

nlohmann::json to_json(const PowerCouplingParams& params) {
  return nlohmann::json{{"family", "power"}, {"k", params.k},   {"p", params.p},
                        {"lambda", params.lambda}, {"q", params.q}, {"beta", params.beta}};
}

PowerCouplingParams power_params_from_json(const nlohmann::json& j) {
  PowerCouplingParams params;
  params.k = j.at("k").get<std::size_t>();
  params.p = j.at("p").get<double>();
  params.lambda = j.at("lambda").get<std::vector<double>>();
  params.q = j.at("q").get<std::vector<double>>();
  params.beta = j.at("beta").get<std::vector<std::vector<double>>>();
  return params;
}

// ---------------------------------------------------------------- PowerModel

PowerModel::PowerModel(PowerCouplingParams params) : params_(std::move(params)) {
  const auto k = params_.k;
  if (k == 0) throw InvalidArgument("power model needs k >= 1");
  if (params_.lambda.size() != k || params_.q.size() != k || params_.beta.size() != k)
    throw InvalidArgument("power model: lambda, q and beta must have k entries");
  for (const auto& row : params_.beta)
    if (row.size() != k) throw InvalidArgument("power model: beta must be k x k");
  if (!std::isfinite(params_.p)) throw InvalidArgument("power model: p must be finite");
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(params_.lambda[i]) || !std::isfinite(params_.q[i]))
      throw InvalidArgument("power model: non-finite parameter");
    for (std::size_t j = 0; j < k; ++j)
      if (params_.beta[i][j] != params_.beta[j][i])
        throw InvalidArgument("power model: beta must be symmetric");
  }
}

double PowerModel::value(std::span<const double> u) const {
  const auto k = params_.k;
  const double p = params_.p;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += params_.lambda[i] / p * power(u[i], p);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (params_.beta[i][j] != 0.0)
        s -= params_.beta[i][j] * power(u[i], params_.q[i]) * power(u[j], params_.q[j]);
  return s;
}

void PowerModel::gradient(std::span<const double> u, std::span<double> grad) const {
  const auto k = params_.k;
  const double p = params_.p;
  for (std::size_t i = 0; i < k; ++i) {
    double coupling = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i && params_.beta[i][j] != 0.0)
        coupling += params_.beta[i][j] * power(u[j], params_.q[j]);
    const double qi = params_.q[i];
    grad[i] = params_.lambda[i] * power(u[i], p - 1.0) -
              (coupling != 0.0 ? qi * power(u[i], qi - 1.0) * coupling : 0.0);
  }
}

void PowerModel::hessian(std::span<const double> u, std::span<double> hess) const {
  const auto k = params_.k;
  const double p = params_.p;
  for (std::size_t i = 0; i < k; ++i) {
    double coupling = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i && params_.beta[i][j] != 0.0)
        coupling += params_.beta[i][j] * power(u[j], params_.q[j]);
    const double qi = params_.q[i];
    hess[i * k + i] = params_.lambda[i] * (p - 1.0) * power(u[i], p - 2.0) -
                      (coupling != 0.0 ? qi * (qi - 1.0) * power(u[i], qi - 2.0) * coupling : 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double b = params_.beta[i][j];
      hess[i * k + j] = b == 0.0 ? 0.0
                                 : -qi * params_.q[j] * b * power(u[i], qi - 1.0) *
                                       power(u[j], params_.q[j] - 1.0);
    }
  }
}

// ---------------------------------------------------------------- SeparatedModel

SeparatedModel::SeparatedModel(std::vector<Scalar> scalars, Interaction interaction,
                               double growth_exponent, std::string name)
    : scalars_(std::move(scalars)),
      interaction_(std::move(interaction)),
      growth_(growth_exponent),
      name_(std::move(name)) {
  if (scalars_.empty()) throw InvalidArgument("separated model needs k >= 1");
  for (const auto& s : scalars_)
    if (!s.antiderivative || !s.f || !s.df)
      throw InvalidArgument("separated model: scalar terms need F, f and f'");
  if (!interaction_.value || !interaction_.gradient || !interaction_.hessian)
    throw InvalidArgument("separated model: interaction needs value, gradient and hessian");
}

double SeparatedModel::value(std::span<const double> u) const {
  double s = 0.0;
  for (std::size_t i = 0; i < scalars_.size(); ++i) s += scalars_[i].antiderivative(u[i]);
  return s - interaction_.value(u);
}

void SeparatedModel::gradient(std::span<const double> u, std::span<double> grad) const {
  interaction_.gradient(u, grad);
  for (std::size_t i = 0; i < scalars_.size(); ++i) grad[i] = scalars_[i].f(u[i]) - grad[i];
}

void SeparatedModel::hessian(std::span<const double> u, std::span<double> hess) const {
  const auto k = scalars_.size();
  interaction_.hessian(u, hess);
  for (std::size_t i = 0; i < k * k; ++i) hess[i] = -hess[i];
  for (std::size_t i = 0; i < k; ++i) hess[i * k + i] += scalars_[i].df(u[i]);
}

std::shared_ptr<SeparatedModel> separated_power_model(const PowerCouplingParams& params) {
  // Validate the structure once through PowerModel.
  auto reference = std::make_shared<const PowerModel>(params);
  std::vector<SeparatedModel::Scalar> scalars;
  for (std::size_t i = 0; i < params.k; ++i) {
    const double lam = params.lambda[i], p = params.p;
    scalars.push_back({[lam, p](double s) { return lam / p * power(std::abs(s), p); },
                       [lam, p](double s) { return lam * power(std::abs(s), p - 1.0); },
                       [lam, p](double s) { return lam * (p - 1.0) * power(std::abs(s), p - 2.0); }});
  }
  // H = P_F - P where P_F is the decoupled part; reuse the power model with
  // lambda = 0 to obtain -H and its derivatives.
  PowerCouplingParams coupling = params;
  std::fill(coupling.lambda.begin(), coupling.lambda.end(), 0.0);
  auto minus_h = std::make_shared<const PowerModel>(coupling);
  SeparatedModel::Interaction inter{
      [minus_h](std::span<const double> u) { return -minus_h->value(u); },
      [minus_h](std::span<const double> u, std::span<double> g) {
        minus_h->gradient(u, g);
        for (auto& x : g) x = -x;
      },
      [minus_h](std::span<const double> u, std::span<double> h) {
        minus_h->hessian(u, h);
        for (auto& x : h) x = -x;
      }};
  return std::make_shared<SeparatedModel>(std::move(scalars), std::move(inter), params.p,
                                          "separated-power");
}

// ---------------------------------------------------------------- ScaledNonlinearity

ScaledNonlinearity::ScaledNonlinearity(NonlinearityPtr base, std::vector<double> scales)
    : base_(std::move(base)), scales_(std::move(scales)) {
  if (!base_) throw InvalidArgument("scaled nonlinearity: null base");
  if (scales_.size() != base_->components())
    throw InvalidArgument("scaled nonlinearity: one scale per component required");
  for (double s : scales_)
    if (!(s > 0.0)) throw InvalidArgument("scaled nonlinearity: scales must be positive");
}

double ScaledNonlinearity::value(std::span<const double> u) const {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = scales_[i] * u[i];
  return base_->value(v);
}

void ScaledNonlinearity::gradient(std::span<const double> u, std::span<double> grad) const {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = scales_[i] * u[i];
  base_->gradient(v, grad);
  for (std::size_t i = 0; i < u.size(); ++i) grad[i] *= scales_[i];
}

void ScaledNonlinearity::hessian(std::span<const double> u, std::span<double> hess) const {
  const auto k = u.size();
  std::vector<double> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = scales_[i] * u[i];
  base_->hessian(v, hess);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) hess[i * k + j] *= scales_[i] * scales_[j];
}

// ---------------------------------------------------------------- point evaluations

PointEval eval_P(const Nonlinearity& model, std::span<const double> u) {
  const auto k = model.components();
  if (u.size() != k) throw InvalidArgument("eval_P: point has wrong dimension");
  std::vector<double> a(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(u[i])) throw InvalidArgument("eval_P: non-finite input");
    a[i] = std::abs(u[i]);
  }
  PointEval out;
  out.value = model.value(a);
  out.gradient.resize(static_cast<Eigen::Index>(k));
  model.gradient(a, std::span<double>(out.gradient.data(), k));
  std::vector<double> h(k * k);
  model.hessian(a, h);
  out.hessian.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out.hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i * k + j];
  return out;
}

Eigen::MatrixXd matrix_M_alpha(const Nonlinearity& model, std::span<const double> u,
                               double alpha) {
  const PointEval e = eval_P(model, u);
  const auto k = static_cast<Eigen::Index>(model.components());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double ui = std::abs(u[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double uj = std::abs(u[static_cast<std::size_t>(j)]);
      m(i, j) = -e.hessian(i, j) * ui * uj;
    }
    m(i, i) += (1.0 + alpha) * e.gradient[i] * ui;
  }
  return m;
}

bool gershgorin_nsd(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw InvalidArgument("gershgorin_nsd: matrix must be square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = i + 1; j < h.cols(); ++j)
      if (std::abs(h(i, j) - h(j, i)) > 1e-12 * scale)
        throw InvalidArgument("gershgorin_nsd: matrix must be symmetric");
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    double radius = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      if (j != i) radius += std::abs(h(i, j));
    if (h(i, i) + radius > 1e-12 * scale) return false;
  }
  return true;
}

// ---------------------------------------------------------------- potentials

Potential Potential::constant(double value) {
  Potential v;
  v.kind = Kind::constant;
  v.a = value;
  return v;
}

Potential Potential::radial_quadratic(double a, double b) {
  Potential v;
  v.kind = Kind::radial_quadratic;
  v.a = a;
  v.b = b;
  return v;
}

Potential Potential::tabulated(std::vector<double> r, std::vector<double> values) {
  if (r.size() != values.size() || r.size() < 2)
    throw InvalidArgument("tabulated potential needs >= 2 matching (r, v) samples");
  if (!std::is_sorted(r.begin(), r.end()))
    throw InvalidArgument("tabulated potential radii must be increasing");
  Potential v;
  v.kind = Kind::tabulated_radial;
  v.table_r = std::move(r);
  v.table_v = std::move(values);
  return v;
}

Field Potential::realize(const Grid& grid) const {
  Field out(grid.size());
  const auto rad = grid.radius();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = rad[i];
    switch (kind) {
      case Kind::constant: out[i] = a; break;
      case Kind::radial_quadratic: out[i] = a + b * r * r; break;
      case Kind::tabulated_radial: {
        if (r <= table_r.front()) {
          out[i] = table_v.front();
        } else if (r >= table_r.back()) {
          out[i] = table_v.back();
        } else {
          const auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
          const auto hi = static_cast<std::size_t>(it - table_r.begin());
          const double t = (r - table_r[hi - 1]) / (table_r[hi] - table_r[hi - 1]);
          out[i] = (1.0 - t) * table_v[hi - 1] + t * table_v[hi];
        }
        break;
      }
    }
    if (!std::isfinite(out[i])) throw InvalidArgument("potential is not finite on the grid");
  }
  return out;
}

nlohmann::json to_json(const Potential& v) {
  switch (v.kind) {
    case Potential::Kind::constant: return {{"kind", "constant"}, {"value", v.a}};
    case Potential::Kind::radial_quadratic:
      return {{"kind", "radial_quadratic"}, {"a", v.a}, {"b", v.b}};
    case Potential::Kind::tabulated_radial:
      return {{"kind", "tabulated_radial"}, {"r", v.table_r}, {"v", v.table_v}};
  }
  return {};
}

Potential potential_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return Potential::constant(j.at("value").get<double>());
  if (kind == "radial_quadratic")
    return Potential::radial_quadratic(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "tabulated_radial")
    return Potential::tabulated(j.at("r").get<std::vector<double>>(),
                                j.at("v").get<std::vector<double>>());
  throw InvalidArgument("unknown potential kind '" + kind + "'");
}

// ---------------------------------------------------------------- assumptions

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "unknown";
}

std::string to_string(CheckMethod m) {
  return m == CheckMethod::closed_form ? "closed_form" : "sampled";
}

const AssumptionCheck& AssumptionReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidArgument("no assumption check named '" + name + "'");
}

bool AssumptionReport::all_pass() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const AssumptionCheck& c) { return c.verdict == Verdict::fail; });
}

std::vector<std::string> AssumptionReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (c.verdict == Verdict::fail) out.push_back(c.name);
  return out;
}

nlohmann::json to_json(const AssumptionReport& report) {
  nlohmann::json j;
  j["alpha"] = report.alpha;
  j["all_pass"] = report.all_pass();
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& c : report.checks) {
    nlohmann::json e{{"verdict", to_string(c.verdict)},
                     {"method", to_string(c.method)},
                     {"detail", c.detail}};
    if (!c.witness.empty()) e["witness"] = c.witness;
    checks[c.name] = std::move(e);
  }
  j["checks"] = std::move(checks);
  return j;
}

std::vector<std::vector<double>> cone_lattice(std::size_t k, std::size_t cap) {
  constexpr int kLevels = 17;
  std::vector<double> mags(kLevels);
  for (int s = 0; s < kLevels; ++s) mags[s] = std::pow(10.0, -3.0 + 6.0 * s / (kLevels - 1));
  double total_d = std::pow(static_cast<double>(kLevels), static_cast<double>(k));
  const std::size_t total = static_cast<std::size_t>(total_d);
  const std::size_t stride = total > cap ? (total + cap - 1) / cap : 1;
  std::vector<std::vector<double>> out;
  out.reserve(std::min(total, cap));
  for (std::size_t idx = 0; idx < total; idx += stride) {
    std::vector<double> pt(k);
    std::size_t rest = idx;
    for (std::size_t i = 0; i < k; ++i) {
      pt[i] = mags[rest % kLevels];
      rest /= kLevels;
    }
    out.push_back(std::move(pt));
  }
  return out;
}

namespace {

AssumptionCheck make(const std::string& name, Verdict v, CheckMethod m, std::string detail,
                     std::vector<double> witness = {}) {
  return AssumptionCheck{name, v, m, std::move(detail), std::move(witness)};
}

AssumptionCheck check_p0(const Grid& grid, std::span<const Field> potentials,
                         std::span<const double> diffusion, double lambda1) {
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    const double vmin = *std::min_element(potentials[i].begin(), potentials[i].end());
    const double bound = -diffusion[i] * lambda1;
    if (!(vmin > bound)) {
      return make("P0", Verdict::fail, CheckMethod::closed_form,
                  "inf V_" + std::to_string(i + 1) + " = " + fmt(vmin) +
                      " <= -c_i*lambda1 = " + fmt(bound),
                  {static_cast<double>(i)});
    }
  }
  (void)grid;
  return make("P0", Verdict::pass, CheckMethod::closed_form,
              "inf V_i > -c_i*lambda1 with lambda1 = " + fmt(lambda1));
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Sampled (P4): largest eigenvalue of M(u) over the lattice.
AssumptionCheck sampled_p4(const Nonlinearity& model, double alpha,
                           const std::vector<std::vector<double>>& lattice) {
  for (const auto& u : lattice) {
    const Eigen::MatrixXd m = matrix_M_alpha(model, u, alpha);
    // round-off is set by the terms that cancel, not by M itself
    const auto pe = eval_P(model, u);
    double scale = 1e-300;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j) {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        scale = std::max(scale, (i == j ? std::abs((1 + alpha) * pe.gradient[a] * u[i]) : 0.0) +
                                    std::abs(pe.hessian(a, b) * u[i] * u[j]));
      }
    const double top = max_eigenvalue(m);
    if (top > 1e-10 * scale) {
      return make("P4", Verdict::fail, CheckMethod::sampled,
                  "M(u) has eigenvalue " + fmt(top) + " > 0 with alpha = " + fmt(alpha), u);
    }
  }
  return make("P4", Verdict::pass, CheckMethod::sampled,
              "M(u) negative semidefinite on " + std::to_string(lattice.size()) +
                  " lattice points, alpha = " + fmt(alpha));
}

std::vector<AssumptionCheck> power_checks(const PowerModel& model, double alpha,
                                          const std::vector<std::vector<double>>& lattice) {
  const auto& prm = model.params();
  const auto k = prm.k;
  std::vector<AssumptionCheck> out;
  const auto cf = CheckMethod::closed_form;

  out.push_back(prm.p > 2.0
                    ? make("P1", Verdict::pass, cf, "2 < p = " + fmt(prm.p) + " < 2* = inf (N <= 2)")
                    : make("P1", Verdict::fail, cf, "p = " + fmt(prm.p) + " <= 2"));

  bool q_ok = true;
  for (double qi : prm.q) q_ok = q_ok && qi > 1.0;
  out.push_back(q_ok && prm.p > 1.0
                    ? make("P2", Verdict::pass, cf, "P(0)=0 and P_i vanishes on {u_i=0} since q_i > 1")
                    : make("P2", Verdict::fail, cf, "some exponent <= 1"));

  // first negative coupling / lambda found, if any
  std::vector<double> neg_pair;
  for (std::size_t i = 0; i < k && neg_pair.empty(); ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && prm.beta[i][j] < 0.0) {
        neg_pair = {static_cast<double>(i), static_cast<double>(j)};
        break;
      }
  std::vector<double> bad_lambda;
  for (std::size_t i = 0; i < k; ++i)
    if (!(prm.lambda[i] > 0.0)) {
      bad_lambda = {static_cast<double>(i)};
      break;
    }

  if (!neg_pair.empty())
    out.push_back(make("P3", Verdict::fail, cf, "beta_ij < 0 for pair (i,j)", neg_pair));
  else if (!bad_lambda.empty())
    out.push_back(make("P3", Verdict::fail, cf, "P_i(u_i e_i) u_i = 0 since lambda_i <= 0", bad_lambda));
  else
    out.push_back(make("P3", Verdict::pass, cf, "beta_ij >= 0 and lambda_i > 0"));

  // (P4): decoupled diagonal (alpha - (p-2)) lambda_i u_i^p <= 0, coupling
  // block covered by Gershgorin rows sum_j beta_ij q_i (2 + alpha - q_i - q_j) >= 0.
  bool diag_ok = true, gersh_ok = neg_pair.empty();
  std::vector<double> gersh_witness;
  for (std::size_t i = 0; i < k; ++i) {
    if ((alpha - (prm.p - 2.0)) * prm.lambda[i] > 0.0) diag_ok = false;
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && prm.beta[i][j] > 0.0 && 2.0 + alpha < prm.q[i] + prm.q[j]) {
        gersh_ok = false;
        gersh_witness = {static_cast<double>(i), static_cast<double>(j)};
      }
  }
  if (diag_ok && gersh_ok) {
    std::vector<double> ones(k, 1.0);
    const bool consistent = gershgorin_nsd(matrix_M_alpha(model, ones, alpha));
    out.push_back(make("P4", consistent ? Verdict::pass : Verdict::fail, cf,
                       "alpha = " + fmt(alpha) +
                           " <= p - 2 and 2 + alpha >= q_i + q_j on coupled pairs (Gershgorin)"));
  } else {
    out.push_back(sampled_p4(model, alpha, lattice));
    if (!gersh_witness.empty() && out.back().verdict == Verdict::fail)
      out.back().detail += "; Gershgorin condition fails for a coupled pair";
  }

  out.push_back(neg_pair.empty()
                    ? make("P5", Verdict::pass, cf, "P_ii on {u_i=0} equals -q_i(q_i-1)0^{q_i-2} sum beta u_j^q <= 0")
                    : make("P5", Verdict::fail, cf, "negative coupling", neg_pair));

  if (k != 2) {
    out.push_back(make("P6", Verdict::not_applicable, cf, "two-component condition"));
  } else if (prm.beta[0][1] > 0.0) {
    out.push_back(make("P6", Verdict::pass, cf, "P_uv = -q1 q2 beta u^{q1-1} v^{q2-1} < 0"));
  } else {
    out.push_back(make("P6", Verdict::fail, cf, "beta_12 <= 0 gives P_uv >= 0", {1.0, 1.0}));
  }

  // (a1)-(a3) for f_i = lambda_i s^{p-1}, gamma = p - 2.
  out.push_back(prm.p > 2.0 ? make("a1", Verdict::pass, cf, "|f'| <= C(1 + s^{p-2})")
                            : make("a1", Verdict::fail, cf, "p <= 2"));
  out.push_back(prm.p > 2.0 ? make("a2", Verdict::pass, cf, "f(s) = o(s) since p > 2")
                            : make("a2", Verdict::fail, cf, "p <= 2"));
  out.push_back(bad_lambda.empty() && prm.p > 2.0
                    ? make("a3", Verdict::pass, cf, "(1+gamma) f s = f' s^2 with gamma = p - 2")
                    : make("a3", Verdict::fail, cf, "requires lambda_i > 0 and p > 2", bad_lambda));

  bool h1 = true;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && prm.beta[i][j] != 0.0 && prm.q[i] + prm.q[j] - 2.0 > alpha) h1 = false;
  out.push_back(h1 ? make("H1", Verdict::pass, cf, "H_ij grows like |u|^{q_i+q_j-2} <= |u|^alpha")
                   : make("H1", Verdict::fail, cf, "q_i + q_j - 2 > alpha for a coupled pair"));
  out.push_back(q_ok ? make("H2", Verdict::pass, cf, "H(0)=0, H_i = 0 on {u_i = 0}")
                     : make("H2", Verdict::fail, cf, "some q_i <= 1"));
  out.push_back(neg_pair.empty() ? make("H3", Verdict::pass, cf, "H_i >= 0 since beta >= 0")
                                 : make("H3", Verdict::fail, cf, "negative coupling", neg_pair));
  out.push_back(gersh_ok ? make("H4", Verdict::pass, cf,
                                "Gershgorin: eigenvalues >= sum_j beta_ij q_i (2+alpha-q_i-q_j) u_i^q u_j^q >= 0")
                         : make("H4", Verdict::fail, cf, "Gershgorin bound negative for pair",
                                gersh_witness));
  if (k != 2) {
    out.push_back(make("H5", Verdict::not_applicable, cf, "two-component condition"));
  } else {
    out.push_back(prm.beta[0][1] > 0.0
                      ? make("H5", Verdict::pass, cf, "H_uv = q1 q2 beta u^{q1-1} v^{q2-1} > 0")
                      : make("H5", Verdict::fail, cf, "beta_12 = 0", {1.0, 1.0}));
  }

  const auto viol = prm.violations();
  if (viol.empty()) {
    out.push_back(make("eq4", Verdict::pass, cf, "lambda > 0, beta symmetric >= 0, q >= 2, p >= q_i + q_j"));
  } else {
    std::vector<double> pair;
    for (std::size_t i = 0; i < k && pair.empty(); ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (prm.p < prm.q[i] + prm.q[j]) {
          pair = {static_cast<double>(i), static_cast<double>(j)};
          break;
        }
    std::string detail;
    for (const auto& v : viol) detail += (detail.empty() ? "" : "; ") + v;
    out.push_back(make("eq4", Verdict::fail, cf, detail, pair));
  }
  return out;
}

// zero out slot i of a lattice point
std::vector<double> with_zero(std::vector<double> u, std::size_t i) {
  u[i] = 0.0;
  return u;
}

std::vector<AssumptionCheck> sampled_checks(const Nonlinearity& model, double alpha,
                                            const std::vector<std::vector<double>>& lattice) {
  const auto k = model.components();
  const double p = model.growth_exponent();
  const auto sm = CheckMethod::sampled;
  std::vector<AssumptionCheck> out;

  // (P1): fitted growth constant; a finite lattice cannot falsify the bound
  // except through a non-finite value or p <= 2.
  {
    double c_fit = 0.0;
    std::vector<double> arg;
    bool finite = true;
    for (const auto& u : lattice) {
      const PointEval e = eval_P(model, u);
      double s = 1.0;
      for (double x : u) s += std::pow(x, p - 2.0);
      const double r = e.hessian.cwiseAbs().maxCoeff() / s;
      if (!std::isfinite(r)) {
        finite = false;
        arg = u;
        break;
      }
      if (r > c_fit) {
        c_fit = r;
        arg = u;
      }
    }
    if (!(p > 2.0) || !finite)
      out.push_back(make("P1", Verdict::fail, sm, "p <= 2 or non-finite Hessian", arg));
    else
      out.push_back(make("P1", Verdict::pass, sm, "fitted C = " + fmt(c_fit)));
  }

  // (P2)
  {
    AssumptionCheck c = make("P2", Verdict::pass, sm, "P(0)=0 and P_i = 0 on {u_i=0}");
    const std::vector<double> zero(k, 0.0);
    if (std::abs(model.value(zero)) > 1e-14) {
      c = make("P2", Verdict::fail, sm, "P(0) != 0", zero);
    }
    std::vector<double> g(k);
    for (const auto& u : lattice) {
      if (c.verdict == Verdict::fail) break;
      for (std::size_t i = 0; i < k; ++i) {
        const auto z = with_zero(u, i);
        model.gradient(z, g);
        if (std::abs(g[i]) > 1e-12) {
          c = make("P2", Verdict::fail, sm, "P_i != 0 with u_i = 0", z);
          break;
        }
      }
    }
    out.push_back(std::move(c));
  }

  // (P3)
  {
    AssumptionCheck c = make("P3", Verdict::pass, sm, "P_i(u)u_i <= P_i(u_i e_i) u_i != 0");
    std::vector<double> g(k), gi(k);
    for (const auto& u : lattice) {
      model.gradient(u, g);
      for (std::size_t i = 0; i < k && c.verdict == Verdict::pass; ++i) {
        std::vector<double> ei(k, 0.0);
        ei[i] = u[i];
        model.gradient(ei, gi);
        const double lhs = g[i] * u[i], rhs = gi[i] * u[i];
        if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs)) || rhs == 0.0)
          c = make("P3", Verdict::fail, sm, "weak competition violated", u);
      }
      if (c.verdict == Verdict::fail) break;
    }
    out.push_back(std::move(c));
  }

  out.push_back(sampled_p4(model, alpha, lattice));

  // (P5)
  {
    AssumptionCheck c = make("P5", Verdict::pass, sm, "P_ii <= 0 on {u_i = 0}");
    std::vector<double> h(k * k);
    for (const auto& u : lattice) {
      for (std::size_t i = 0; i < k && c.verdict == Verdict::pass; ++i) {
        const auto z = with_zero(u, i);
        model.hessian(z, h);
        if (h[i * k + i] > 1e-12) c = make("P5", Verdict::fail, sm, "P_ii > 0 on {u_i=0}", z);
      }
      if (c.verdict == Verdict::fail) break;
    }
    out.push_back(std::move(c));
  }

  // (P6)
  if (k != 2) {
    out.push_back(make("P6", Verdict::not_applicable, sm, "two-component condition"));
  } else {
    AssumptionCheck c = make("P6", Verdict::pass, sm, "P_uv < 0 on the open cone");
    std::vector<double> h(4);
    for (const auto& u : lattice) {
      model.hessian(u, h);
      if (!(h[1] < 0.0)) {
        c = make("P6", Verdict::fail, sm, "P_uv >= 0", u);
        break;
      }
    }
    out.push_back(std::move(c));
  }

  const auto* sep = dynamic_cast<const SeparatedModel*>(&model);
  const std::vector<std::string> separated_names = {"a1", "a2", "a3", "H1", "H2",
                                                    "H3", "H4", "H5"};
  if (sep == nullptr) {
    for (const auto& n : separated_names)
      out.push_back(make(n, Verdict::not_applicable, sm, "model is not of separated form"));
    out.push_back(make("eq4", Verdict::not_applicable, sm, "power-family condition"));
    return out;
  }

  const double gamma = alpha;
  std::vector<double> mags;
  for (int s = 0; s < 17; ++s) mags.push_back(std::pow(10.0, -3.0 + 6.0 * s / 16.0));

  // (a1)
  {
    double c_fit = 0.0;
    for (const auto& sc : sep->scalars())
      for (double s : mags) c_fit = std::max(c_fit, std::abs(sc.df(s)) / (1.0 + std::pow(s, p - 2.0)));
    out.push_back(std::isfinite(c_fit) && p > 2.0
                      ? make("a1", Verdict::pass, sm, "fitted C = " + fmt(c_fit))
                      : make("a1", Verdict::fail, sm, "unbounded f' growth"));
  }
  // (a2): f(s)/s at s = 1e-3, 1e-5, 1e-7 decreasing to 0
  {
    AssumptionCheck c = make("a2", Verdict::pass, sm, "f(s)/s -> 0 as s -> 0");
    for (std::size_t i = 0; i < sep->scalars().size(); ++i) {
      const auto& sc = sep->scalars()[i];
      const double r1 = std::abs(sc.f(1e-3) / 1e-3), r2 = std::abs(sc.f(1e-5) / 1e-5),
                   r3 = std::abs(sc.f(1e-7) / 1e-7);
      if (!(r3 <= r2 && r2 <= r1 && r3 < 1e-2 * std::max(1.0, r1))) {
        c = make("a2", Verdict::fail, sm, "f(s)/s does not vanish at 0", {static_cast<double>(i)});
        break;
      }
    }
    out.push_back(std::move(c));
  }
  // (a3)
  {
    AssumptionCheck c = make("a3", Verdict::pass, sm, "0 < (1+gamma) f s <= f' s^2, gamma = " + fmt(gamma));
    for (std::size_t i = 0; i < sep->scalars().size() && c.verdict == Verdict::pass; ++i) {
      const auto& sc = sep->scalars()[i];
      for (double s : mags) {
        const double lhs = (1.0 + gamma) * sc.f(s) * s, rhs = sc.df(s) * s * s;
        if (!(lhs > 0.0) || lhs > rhs + 1e-12 * std::abs(rhs)) {
          c = make("a3", Verdict::fail, sm, "violated for component " + std::to_string(i + 1), {s});
          break;
        }
      }
    }
    out.push_back(std::move(c));
  }
  const auto& inter = sep->interaction();
  // (H1)
  {
    double c_fit = 0.0;
    std::vector<double> h(k * k);
    for (const auto& u : lattice) {
      inter.hessian(u, h);
      double s = 1.0;
      for (double x : u) s += std::pow(x, alpha);
      double m = 0.0;
      for (double x : h) m = std::max(m, std::abs(x));
      c_fit = std::max(c_fit, m / s);
    }
    out.push_back(std::isfinite(c_fit) ? make("H1", Verdict::pass, sm, "fitted C = " + fmt(c_fit))
                                       : make("H1", Verdict::fail, sm, "non-finite Hessian"));
  }
  // (H2), (H3), (H4)
  {
    AssumptionCheck h2 = make("H2", Verdict::pass, sm, "H(0)=0, H_i = 0 on {u_i = 0}");
    AssumptionCheck h3 = make("H3", Verdict::pass, sm, "H_i >= 0");
    AssumptionCheck h4 = make("H4", Verdict::pass, sm, "h(u) positive semidefinite");
    const std::vector<double> zero(k, 0.0);
    if (std::abs(inter.value(zero)) > 1e-14) h2 = make("H2", Verdict::fail, sm, "H(0) != 0", zero);
    std::vector<double> g(k), h(k * k);
    for (const auto& u : lattice) {
      for (std::size_t i = 0; i < k && h2.verdict == Verdict::pass; ++i) {
        const auto z = with_zero(u, i);
        inter.gradient(z, g);
        if (std::abs(g[i]) > 1e-12) h2 = make("H2", Verdict::fail, sm, "H_i != 0 with u_i = 0", z);
      }
      inter.gradient(u, g);
      if (h3.verdict == Verdict::pass)
        for (std::size_t i = 0; i < k; ++i)
          if (g[i] < -1e-14) {
            h3 = make("H3", Verdict::fail, sm, "H_i < 0", u);
            break;
          }
      if (h4.verdict == Verdict::pass) {
        inter.hessian(u, h);
        Eigen::MatrixXd hm(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            hm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (i == j ? (1.0 + alpha) * g[i] * u[i] : 0.0) - h[i * k + j] * u[i] * u[j];
        const double scale = std::max(1e-300, hm.cwiseAbs().maxCoeff());
        const double low = -max_eigenvalue(-hm);
        if (low < -1e-10 * scale) h4 = make("H4", Verdict::fail, sm, "h(u) has a negative eigenvalue", u);
      }
    }
    out.push_back(std::move(h2));
    out.push_back(std::move(h3));
    out.push_back(std::move(h4));
  }
  // (H5)
  if (k != 2) {
    out.push_back(make("H5", Verdict::not_applicable, sm, "two-component condition"));
  } else {
    AssumptionCheck c = make("H5", Verdict::pass, sm, "H_uv > 0 on the open cone");
    std::vector<double> h(4);
    for (const auto& u : lattice) {
      inter.hessian(u, h);
      if (!(h[1] > 0.0)) {
        c = make("H5", Verdict::fail, sm, "H_uv <= 0", u);
        break;
      }
    }
    out.push_back(std::move(c));
  }
  out.push_back(make("eq4", Verdict::not_applicable, sm, "power-family condition"));
  return out;
}

}  // namespace

AssumptionReport check_assumptions(const Nonlinearity& model, const Grid& grid,
                                   std::span<const Field> potentials,
                                   std::span<const double> diffusion,
                                   const AssumptionOptions& options) {
  const auto k = model.components();
  if (potentials.size() != k || diffusion.size() != k)
    throw InvalidArgument("check_assumptions: need one potential and one diffusion constant per component");
  for (const auto& v : potentials) require_on_grid(grid, v, "potential");
  for (double c : diffusion)
    if (!(c > 0.0)) throw InvalidArgument("check_assumptions: diffusion constants must be positive");

  AssumptionReport report;
  report.alpha = options.alpha.value_or(model.growth_exponent() - 2.0);
  const double lambda1 = lambda1_estimate(grid, options.lambda1_tolerance).value;
  report.checks.push_back(check_p0(grid, potentials, diffusion, lambda1));

  const auto lattice = cone_lattice(k);
  std::vector<AssumptionCheck> rest;
  if (const auto* power_model = dynamic_cast<const PowerModel*>(&model)) {
    rest = power_checks(*power_model, report.alpha, lattice);
  } else {
    rest = sampled_checks(model, report.alpha, lattice);
  }
  for (auto& c : rest) report.checks.push_back(std::move(c));
  return report;
}

}  // namespace nehari
