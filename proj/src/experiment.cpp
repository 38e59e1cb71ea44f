#include "nehari/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "nehari/errors.hpp"
#include "nehari/mass.hpp"
#include "nehari/polarization.hpp"
#include "nehari/solver.hpp"

namespace nehari {

namespace {

constexpr const char* kVersion = "nehari_lab 0.1.0";

using json = nlohmann::json;
using Issue = ConfigError::Issue;

// Collects schema issues while walking the document.
class Reader {
 public:
  std::vector<Issue> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

  bool object(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    return true;
  }

  void only(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) fail(path + "/" + it.key(), "unknown key");
    }
  }

  const json* find(const json& j, const char* key, const std::string& path, bool required) {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path + "/" + key, "required");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& j, const char* key, const std::string& path,
                               bool required) {
    const json* v = find(j, key, path, required);
    if (!v) return std::nullopt;
    return as_number(*v, path + "/" + key);
  }

  std::optional<double> as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<long long> integer(const json& j, const char* key, const std::string& path,
                                   bool required, long long lo) {
    const json* v = find(j, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(path + "/" + key, "expected an integer");
      return std::nullopt;
    }
    long long x = 0;
    if (v->is_number_unsigned()) {
      const auto u = v->get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
        fail(path + "/" + key, "out of range");
        return std::nullopt;
      }
      x = static_cast<long long>(u);
    } else {
      x = v->get<long long>();
    }
    if (x < lo) {
      fail(path + "/" + key, "must be >= " + std::to_string(lo));
      return std::nullopt;
    }
    return x;
  }

  std::optional<bool> boolean(const json& j, const char* key, const std::string& path) {
    const json* v = find(j, key, path, false);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      fail(path + "/" + key, "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> string(const json& j, const char* key, const std::string& path,
                                    bool required) {
    const json* v = find(j, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(path + "/" + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto d = as_number(v[i], path + "/" + std::to_string(i));
      ok = ok && d.has_value();
      out.push_back(d.value_or(0.0));
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<std::vector<std::vector<double>>> matrix(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of rows");
      return std::nullopt;
    }
    std::vector<std::vector<double>> out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto row = numbers(v[i], path + "/" + std::to_string(i));
      ok = ok && row.has_value();
      out.push_back(row.value_or(std::vector<double>{}));
    }
    if (!ok) return std::nullopt;
    return out;
  }
};

std::optional<DomainSpec> read_domain(Reader& r, const json& j) {
  const std::string path = "/domain";
  if (!r.object(j, path)) return std::nullopt;
  const auto kind = r.string(j, "kind", path, true);
  if (!kind) return std::nullopt;
  const auto before = r.issues.size();
  DomainSpec s;
  auto num = [&](const char* k) { return r.number(j, k, path, true).value_or(0.0); };
  auto cnt = [&](const char* k) {
    return static_cast<int>(r.integer(j, k, path, true, 1).value_or(1));
  };
  if (*kind == "interval") {
    r.only(j, path, {"kind", "length", "n"});
    s = DomainSpec::interval(num("length"), cnt("n"));
  } else if (*kind == "rectangle") {
    r.only(j, path, {"kind", "length_x", "length_y", "nx", "ny"});
    s = DomainSpec::rectangle(num("length_x"), num("length_y"), cnt("nx"), cnt("ny"));
  } else if (*kind == "disk") {
    r.only(j, path, {"kind", "radius", "nr", "ntheta"});
    s = DomainSpec::disk(num("radius"), cnt("nr"), cnt("ntheta"));
  } else if (*kind == "annulus") {
    r.only(j, path, {"kind", "r_in", "r_out", "nr", "ntheta"});
    s = DomainSpec::annulus(num("r_in"), num("r_out"), cnt("nr"), cnt("ntheta"));
  } else {
    r.fail(path + "/kind", "unknown domain kind '" + *kind + "'");
    return std::nullopt;
  }
  if (r.issues.size() != before) return std::nullopt;
  try {
    s.validate();
  } catch (const InvalidGeometry& e) {
    r.fail(path, e.what());
    return std::nullopt;
  }
  return s;
}

std::optional<PowerCouplingParams> read_model(Reader& r, const json& j) {
  const std::string path = "/model";
  if (!r.object(j, path)) return std::nullopt;
  const auto family = r.string(j, "family", path, true);
  if (!family) return std::nullopt;
  const auto before = r.issues.size();
  PowerCouplingParams params;
  if (*family == "power") {
    r.only(j, path, {"family", "k", "p", "lambda", "q", "beta"});
    const auto k = r.integer(j, "k", path, true, 1);
    const auto p = r.number(j, "p", path, true);
    std::optional<std::vector<double>> lambda, q;
    std::optional<std::vector<std::vector<double>>> beta;
    if (const json* v = r.find(j, "lambda", path, true)) lambda = r.numbers(*v, path + "/lambda");
    if (const json* v = r.find(j, "q", path, true)) q = r.numbers(*v, path + "/q");
    if (const json* v = r.find(j, "beta", path, true)) beta = r.matrix(*v, path + "/beta");
    if (r.issues.size() != before) return std::nullopt;
    const auto kk = static_cast<std::size_t>(*k);
    if (lambda->size() != kk) r.fail(path + "/lambda", "needs k entries");
    if (q->size() != kk) r.fail(path + "/q", "needs k entries");
    if (beta->size() != kk) r.fail(path + "/beta", "needs k rows");
    for (std::size_t i = 0; i < beta->size(); ++i)
      if ((*beta)[i].size() != kk) r.fail(path + "/beta/" + std::to_string(i), "needs k entries");
    if (r.issues.size() != before) return std::nullopt;
    params.k = kk;
    params.p = *p;
    params.lambda = *lambda;
    params.q = *q;
    params.beta = *beta;
  } else if (*family == "cubic") {
    r.only(j, path, {"family", "lambda", "beta"});
    std::optional<std::vector<double>> lambda;
    if (const json* v = r.find(j, "lambda", path, true)) lambda = r.numbers(*v, path + "/lambda");
    const json* bj = r.find(j, "beta", path, true);
    if (r.issues.size() != before || !bj) return std::nullopt;
    const auto k = lambda->size();
    if (k == 0) {
      r.fail(path + "/lambda", "needs at least one entry");
      return std::nullopt;
    }
    std::vector<std::vector<double>> beta(k, std::vector<double>(k, 0.0));
    if (bj->is_number()) {
      const auto b = r.as_number(*bj, path + "/beta");
      if (!b) return std::nullopt;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t l = 0; l < k; ++l)
          if (i != l) beta[i][l] = *b;
    } else {
      auto m = r.matrix(*bj, path + "/beta");
      if (!m) return std::nullopt;
      if (m->size() != k) r.fail(path + "/beta", "needs one row per lambda entry");
      for (std::size_t i = 0; i < m->size(); ++i)
        if ((*m)[i].size() != k) r.fail(path + "/beta/" + std::to_string(i), "wrong row length");
      if (r.issues.size() != before) return std::nullopt;
      beta = *m;
    }
    params = cubic_preset(*lambda, beta);
  } else {
    r.fail(path + "/family", "unknown family '" + *family + "' (power | cubic)");
    return std::nullopt;
  }
  const auto v = params.violations();
  for (const auto& msg : v) r.fail(path, "eq4: " + msg);
  if (!v.empty()) return std::nullopt;
  return params;
}

std::optional<Task> task_from_string(const std::string& s) {
  if (s == "solve") return Task::solve;
  if (s == "solve_mass") return Task::solve_mass;
  if (s == "check_assumptions") return Task::check_assumptions;
  if (s == "polarize_audit") return Task::polarize_audit;
  if (s == "sweep_beta") return Task::sweep_beta;
  return std::nullopt;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Problem build_problem(const ExperimentConfig& c, GridPtr grid, const PowerCouplingParams& params) {
  return make_problem(std::move(grid), std::make_shared<PowerModel>(params), c.potentials,
                      c.diffusion);
}

SolverOptions solver_options(const ExperimentConfig& c) {
  SolverOptions o;
  o.start_count = c.solver.start_count;
  o.max_outer_iterations = c.solver.max_outer_iterations;
  o.tolerance = c.solver.tolerance;
  o.waive_assumptions = c.solver.waive_assumptions;
  o.seed = c.seed;
  o.workers = c.workers;
  return o;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

void write_fields(const std::filesystem::path& p, const Grid& grid,
                  const std::vector<std::vector<double>>& state) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  write_fields_csv(grid, state, out);
}

// Symmetry block for a polar k = 2 state.
json symmetry_block(const Grid& grid, const std::vector<std::vector<double>>& state) {
  json j;
  std::vector<SymmetryReport> reps;
  json comps = json::array();
  for (const auto& f : state) {
    reps.push_back(foliated_schwarz_metrics(grid, f));
    json c = to_json(reps.back());
    c["radial_deviation"] = radial_deviation(grid, f);
    comps.push_back(c);
  }
  j["components"] = comps;
  if (reps.size() == 2) {
    const auto a = antipodality_check(reps[0], reps[1]);
    j["antipodal_deviation"] = a.applicable ? json(a.deviation) : json(nullptr);
    j["antipodal_applicable"] = a.applicable;
  }
  return j;
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::solve: return "solve";
    case Task::solve_mass: return "solve_mass";
    case Task::check_assumptions: return "check_assumptions";
    case Task::polarize_audit: return "polarize_audit";
    case Task::sweep_beta: return "sweep_beta";
  }
  return "?";
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return task == o.task && domain == o.domain && model == o.model &&
         potentials == o.potentials && diffusion == o.diffusion && solver == o.solver &&
         mass == o.mass && audit == o.audit && seed == o.seed && workers == o.workers &&
         output == o.output && betas == o.betas;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({{"", std::string("malformed JSON: ") + e.what()}});
  }
  return parse_config(j);
}

ExperimentConfig parse_config(const json& j) {
  Reader r;
  ExperimentConfig c;
  if (!r.object(j, "")) throw ConfigError(r.issues);
  r.only(j, "", {"task", "domain", "model", "potentials", "diffusion", "solver", "mass", "audit",
                 "seed", "workers", "output", "betas"});

  if (auto t = r.string(j, "task", "", true)) {
    if (auto task = task_from_string(*t))
      c.task = *task;
    else
      r.fail("/task", "unknown task '" + *t +
                          "' (solve | solve_mass | check_assumptions | polarize_audit | "
                          "sweep_beta)");
  }
  std::optional<DomainSpec> domain;
  if (const json* d = r.find(j, "domain", "", true)) domain = read_domain(r, *d);
  if (domain) c.domain = *domain;

  const json* mj = r.find(j, "model", "", c.task != Task::solve_mass);
  if (mj) c.model = read_model(r, *mj);
  const std::size_t k = c.model ? c.model->k : 2;

  if (const json* pj = r.find(j, "potentials", "", false)) {
    if (!pj->is_array() || pj->size() != k) {
      r.fail("/potentials", "expected an array with one potential per component");
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        const std::string path = "/potentials/" + std::to_string(i);
        try {
          c.potentials.push_back(potential_from_json((*pj)[i]));
        } catch (const std::exception& e) {
          r.fail(path, e.what());
        }
      }
    }
  } else {
    c.potentials.assign(k, Potential::constant(0.0));
  }
  if (const json* dj = r.find(j, "diffusion", "", false)) {
    if (auto d = r.numbers(*dj, "/diffusion")) {
      if (d->size() != k) r.fail("/diffusion", "needs one entry per component");
      for (std::size_t i = 0; i < d->size(); ++i)
        if (!((*d)[i] > 0.0)) r.fail("/diffusion/" + std::to_string(i), "must be positive");
      c.diffusion = *d;
    }
  } else {
    c.diffusion.assign(k, 1.0);
  }

  if (const json* sj = r.find(j, "solver", "", false); sj && r.object(*sj, "/solver")) {
    r.only(*sj, "/solver", {"start_count", "max_outer_iterations", "tolerance", "waive_assumptions"});
    if (auto v = r.integer(*sj, "start_count", "/solver", false, 1)) c.solver.start_count = static_cast<int>(*v);
    if (auto v = r.integer(*sj, "max_outer_iterations", "/solver", false, 0))
      c.solver.max_outer_iterations = static_cast<int>(*v);
    if (auto v = r.number(*sj, "tolerance", "/solver", false)) {
      if (*v > 0.0) c.solver.tolerance = *v;
      else r.fail("/solver/tolerance", "must be positive");
    }
    if (auto v = r.boolean(*sj, "waive_assumptions", "/solver")) c.solver.waive_assumptions = *v;
  }
  if (const json* sj = r.find(j, "mass", "", false); sj && r.object(*sj, "/mass")) {
    r.only(*sj, "/mass", {"beta", "tau", "tolerance", "max_iterations"});
    if (auto v = r.number(*sj, "beta", "/mass", false)) {
      if (*v > 0.0) c.mass.beta = *v;
      else r.fail("/mass/beta", "must be positive");
    }
    if (auto v = r.number(*sj, "tau", "/mass", false)) {
      if (*v > 0.0) c.mass.tau = *v;
      else r.fail("/mass/tau", "must be positive");
    }
    if (auto v = r.number(*sj, "tolerance", "/mass", false)) {
      if (*v > 0.0) c.mass.tolerance = *v;
      else r.fail("/mass/tolerance", "must be positive");
    }
    if (auto v = r.integer(*sj, "max_iterations", "/mass", false, 0))
      c.mass.max_iterations = static_cast<int>(*v);
  }
  if (const json* aj = r.find(j, "audit", "", false); aj && r.object(*aj, "/audit")) {
    r.only(*aj, "/audit", {"pairs"});
    if (auto v = r.integer(*aj, "pairs", "/audit", false, 1)) c.audit.pairs = static_cast<int>(*v);
  }
  if (const json* s = r.find(j, "seed", "", false)) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      r.fail("/seed", "expected a nonnegative integer");
    else
      c.seed = s->get<std::uint64_t>();
  }
  if (auto v = r.integer(j, "workers", "", false, 1)) c.workers = static_cast<int>(*v);
  if (auto v = r.string(j, "output", "", false)) {
    if (v->empty()) r.fail("/output", "must not be empty");
    c.output = *v;
  }
  if (const json* bj = r.find(j, "betas", "", c.task == Task::sweep_beta)) {
    if (auto b = r.numbers(*bj, "/betas")) {
      for (std::size_t i = 0; i < b->size(); ++i)
        if ((*b)[i] < 0.0) r.fail("/betas/" + std::to_string(i), "must be >= 0");
      if (b->empty() && c.task == Task::sweep_beta) r.fail("/betas", "must not be empty");
      c.betas = *b;
    }
  }

  // task-level requirements
  if (domain && c.model) {
    if ((c.task == Task::sweep_beta || c.task == Task::polarize_audit) && c.model->k != 2)
      r.fail("/model", to_string(c.task) + " needs k = 2");
    if (c.task == Task::sweep_beta && !domain->is_polar())
      r.fail("/domain/kind", "sweep_beta needs a disk or annulus");
    if (c.task == Task::polarize_audit && domain->kind == DomainKind::interval)
      r.fail("/domain/kind", "polarize_audit needs a grid with reflections through the origin");
  }
  if (!r.issues.empty()) throw ConfigError(r.issues);
  return c;
}

json serialize(const ExperimentConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  j["domain"] = to_json(c.domain);
  if (c.model) j["model"] = to_json(*c.model);
  json pots = json::array();
  for (const auto& p : c.potentials) pots.push_back(to_json(p));
  j["potentials"] = pots;
  j["diffusion"] = c.diffusion;
  j["solver"] = {{"start_count", c.solver.start_count},
                 {"max_outer_iterations", c.solver.max_outer_iterations},
                 {"tolerance", c.solver.tolerance},
                 {"waive_assumptions", c.solver.waive_assumptions}};
  j["mass"] = {{"beta", c.mass.beta},
               {"tau", c.mass.tau},
               {"tolerance", c.mass.tolerance},
               {"max_iterations", c.mass.max_iterations}};
  j["audit"] = {{"pairs", c.audit.pairs}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output"] = c.output;
  j["betas"] = c.betas;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = serialize(c);
  j.erase("workers");
  j.erase("output");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

void write_fields_csv(const Grid& grid, const std::vector<std::vector<double>>& state,
                      std::ostream& out) {
  std::ostringstream nodes;
  write_nodes_csv(grid, nodes);
  std::istringstream in(nodes.str());
  std::string line;
  std::getline(in, line);
  out << line;
  for (std::size_t i = 0; i < state.size(); ++i) out << ",u" << (i + 1);
  out << '\n';
  out.precision(17);
  for (std::size_t m = 0; std::getline(in, line); ++m) {
    out << line;
    for (const auto& f : state) out << ',' << f.at(m);
    out << '\n';
  }
}

SweepTable sweep_beta(const ExperimentConfig& config,
                      std::vector<std::vector<std::vector<double>>>* states) {
  if (!config.model || config.model->k != 2) throw InvalidArgument("sweep needs a k = 2 model");
  if (!config.domain.is_polar()) throw InvalidGeometry("sweep needs a disk or annulus");
  SweepTable table;
  std::vector<double> betas;
  std::set<double> seen;
  for (double b : config.betas) {
    if (!seen.insert(b).second) {
      std::ostringstream msg;
      msg << "duplicate beta " << b << " dropped";
      table.warnings.push_back(msg.str());
      continue;
    }
    betas.push_back(b);
  }
  std::sort(betas.begin(), betas.end());
  const GridPtr grid = build_grid(config.domain);
  table.rows.resize(betas.size());
  std::vector<std::vector<std::vector<double>>> solved(betas.size());

  auto run = [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    row.beta = betas[i];
    try {
      PowerCouplingParams params = *config.model;
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          if (a != b) params.beta[a][b] = betas[i];
      const Problem problem = build_problem(config, grid, params);
      SolverOptions opt = solver_options(config);
      opt.workers = 1;
      if (betas[i] == 0.0) opt.waive_assumptions = true;
      const Solution sol = solve_ground_state(problem, opt);
      row.status = "converged";
      row.assumptions_waived = sol.assumptions_waived;
      row.energy = sol.energy;
      std::vector<SymmetryReport> reps;
      for (const auto& f : sol.state) {
        row.radial_deviation_each.push_back(radial_deviation(*grid, f));
        reps.push_back(foliated_schwarz_metrics(*grid, f));
        row.axial_asymmetry.push_back(reps.back().axial_asymmetry);
        row.monotonicity_violation.push_back(reps.back().monotonicity_violation);
      }
      row.radial_deviation = max_of(row.radial_deviation_each);
      const auto a = antipodality_check(reps[0], reps[1]);
      row.antipodal_deviation = a.applicable ? a.deviation : std::numeric_limits<double>::quiet_NaN();
      solved[i] = sol.state;
    } catch (const Error& e) {
      row.status = "failed";
      row.message = e.what();
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.workers)), betas.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < betas.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < betas.size();) run(i);
      });
    for (auto& th : pool) th.join();
  }
  if (states) *states = std::move(solved);
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  out << "beta,status,assumptions_waived,energy,radial_deviation,radial_deviation_u1,"
         "radial_deviation_u2,axial_asymmetry_u1,axial_asymmetry_u2,monotonicity_u1,"
         "monotonicity_u2,antipodal_deviation\n";
  out.precision(17);
  for (const auto& r : table.rows) {
    out << r.beta << ',' << r.status << ',' << (r.assumptions_waived ? 1 : 0) << ',';
    if (r.status != "converged") {
      out << ",,,,,,,,\n";
      continue;
    }
    out << r.energy << ',' << r.radial_deviation << ',' << r.radial_deviation_each[0] << ','
        << r.radial_deviation_each[1] << ',' << r.axial_asymmetry[0] << ','
        << r.axial_asymmetry[1] << ',' << r.monotonicity_violation[0] << ','
        << r.monotonicity_violation[1] << ',' << r.antipodal_deviation << '\n';
  }
}

RunSummary run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(config.output);
  fs::create_directories(dir);
  write_text(dir / "resolved_config.json", serialize(config).dump(2) + "\n");

  RunSummary run;
  json results = json::object();
  json flags = json::object();
  json warnings = json::array();
  try {
    switch (config.task) {
      case Task::solve: {
        const GridPtr grid = build_grid(config.domain);
        const Problem problem = build_problem(config, grid, *config.model);
        results["assumptions"] = to_json(check_assumptions(*problem.model, *grid,
                                                           problem.potentials, problem.diffusion));
        const Solution sol = solve_ground_state(problem, solver_options(config));
        const DiagnosticsReport diag = diagnostics_bundle(problem, sol);
        results["solution"] = to_json(sol);
        results["diagnostics"] = to_json(diag);
        if (grid->is_polar()) results["symmetry"] = symmetry_block(*grid, sol.state);
        flags["diagnostics"] = diag.flags.empty();
        flags["pde_residual"] = max_of(sol.pde_residual) < 1e-8;
        write_fields(dir / "fields.csv", *grid, sol.state);
        break;
      }
      case Task::solve_mass: {
        const GridPtr grid = build_grid(config.domain);
        MassOptions mo;
        mo.tau = config.mass.tau;
        mo.tolerance = config.mass.tolerance;
        mo.max_iterations = config.mass.max_iterations;
        mo.workers = config.workers;
        const MassSolution sol = solve_mass_ground_state(*grid, config.mass.beta, mo);
        results["mass"] = to_json(sol);
        flags["masses"] =
            std::abs(sol.mass_u - 1.0) <= 1e-10 && std::abs(sol.mass_v - 1.0) <= 1e-10;
        flags["stationarity"] = sol.residual_u < 1e-6 && sol.residual_v < 1e-6;
        if (config.domain.kind != DomainKind::interval) {
          bool masses_ok = true, energy_ok = true;
          double coupling = 0.0;
          json table = json::array();
          for (const auto& h : half_space_family(*grid)) {
            const auto p = mass_polarization_check(*grid, sol.state, config.mass.beta, h);
            json row = to_json(p);
            row["normal_angle"] = h.normal_angle;
            table.push_back(row);
            masses_ok = masses_ok && p.masses_ok;
            energy_ok = energy_ok && p.energy_ok;
            coupling = std::max(coupling, p.coupling_difference);
          }
          results["polarization"] = table;
          flags["polarization_masses"] = masses_ok;
          flags["polarization_energy"] = energy_ok;
          flags["coupling_equality"] = coupling <= 1e-10;
        }
        if (grid->is_polar()) results["symmetry"] = symmetry_block(*grid, {sol.state.u, sol.state.v});
        write_fields(dir / "fields.csv", *grid, {sol.state.u, sol.state.v});
        break;
      }
      case Task::check_assumptions: {
        const GridPtr grid = build_grid(config.domain);
        const Problem problem = build_problem(config, grid, *config.model);
        const auto report =
            check_assumptions(*problem.model, *grid, problem.potentials, problem.diffusion);
        results["assumptions"] = to_json(report);
        flags["all_pass"] = report.all_pass();
        break;
      }
      case Task::polarize_audit: {
        const GridPtr grid = build_grid(config.domain);
        const Problem problem = build_problem(config, grid, *config.model);
        const Field base = initial_state(*grid, 1, StartKind::radial, 0, 0)[0];
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                          static_cast<std::uint32_t>(config.seed >> 32)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.05, 1.0);
        std::vector<State> pairs;
        for (int n = 0; n < config.audit.pairs; ++n) {
          State s(2, Field(grid->size()));
          for (auto& f : s)
            for (std::size_t m = 0; m < f.size(); ++m) f[m] = base[m] * unit(rng);
          pairs.push_back(std::move(s));
        }
        json table = json::array();
        int violations = 0;
        for (const auto& h : half_space_family(*grid)) {
          double excess = -std::numeric_limits<double>::infinity();
          int bad = 0;
          for (const auto& s : pairs) {
            const auto e = polarized_energy_compare(problem, s, h);
            excess = std::max(excess, e.polarized - e.original);
            if (e.polarized > e.original + 1e-12) ++bad;
          }
          violations += bad;
          table.push_back(
              {{"normal_angle", h.normal_angle}, {"max_excess", excess}, {"violations", bad}});
        }
        std::vector<double> values;
        for (int i = 1; i <= 30; ++i) values.push_back(0.1 * i);
        const double scan = two_point_inequality_scan(*problem.model, values);
        results["half_spaces"] = table;
        results["two_point_violation"] = scan;
        flags["energy_monotone"] = violations == 0;
        flags["two_point"] = scan <= 1e-12;
        break;
      }
      case Task::sweep_beta: {
        std::vector<std::vector<std::vector<double>>> states;
        const SweepTable table = sweep_beta(config, &states);
        const GridPtr grid = build_grid(config.domain);
        json rows = json::array();
        bool all = true;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
          const auto& r = table.rows[i];
          json row = {{"beta", r.beta},
                      {"status", r.status},
                      {"assumptions_waived", r.assumptions_waived}};
          if (r.status == "converged") {
            row["energy"] = r.energy;
            row["radial_deviation"] = r.radial_deviation;
            row["radial_deviation_components"] = r.radial_deviation_each;
            row["axial_asymmetry"] = r.axial_asymmetry;
            row["monotonicity_violation"] = r.monotonicity_violation;
            row["antipodal_deviation"] =
                std::isnan(r.antipodal_deviation) ? json(nullptr) : json(r.antipodal_deviation);
            write_fields(dir / ("fields_beta_" + std::to_string(i) + ".csv"), *grid, states[i]);
          } else {
            row["message"] = r.message;
            all = false;
          }
          rows.push_back(row);
        }
        for (const auto& w : table.warnings) {
          warnings.push_back(w);
          std::cerr << "warning: " << w << "\n";
        }
        results["sweep"] = rows;
        flags["all_converged"] = all;
        std::ofstream out(dir / "sweep.csv");
        write_sweep_csv(table, out);
        break;
      }
    }
  } catch (const Error& e) {
    results["error"] = e.what();
    flags["completed"] = false;
  }

  for (auto it = flags.begin(); it != flags.end(); ++it)
    if (!it.value().get<bool>()) run.failed_flags.push_back(it.key());
  run.ok = run.failed_flags.empty();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.summary = {{"config_hash", config_hash(config)},
                 {"task", to_string(config.task)},
                 {"version", kVersion},
                 {"results", results},
                 {"flags", flags},
                 {"ok", run.ok},
                 {"warnings", warnings},
                 {"timing", {{"wall_seconds", wall}}}};
  write_text(dir / "summary.json", run.summary.dump(2) + "\n");
  return run;
}

}  // namespace nehari
