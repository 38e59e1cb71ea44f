// nehari: command-line front end for experiment configs.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nehari/errors.hpp"
#include "nehari/experiment.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
};

int run(const std::string& task, const Args& a, bool seed_given) {
  std::ifstream in(a.config);
  if (!in) {
    std::cerr << "error: cannot read " << a.config << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: " << a.config << ": malformed JSON: " << e.what() << "\n";
    return 2;
  }
  if (!j.is_object()) {
    std::cerr << "error: " << a.config << ": top level must be an object\n";
    return 2;
  }
  if (j.contains("task") && j["task"] != task) {
    std::cerr << "error: config task '" << j["task"].dump() << "' does not match subcommand ("
              << task << ")\n";
    return 2;
  }
  j["task"] = task;
  if (!a.out.empty()) j["output"] = a.out;
  if (seed_given) j["seed"] = a.seed;
  if (a.workers > 0) j["workers"] = a.workers;

  try {
    const auto config = nehari::parse_config(j);
    const auto summary = nehari::run_experiment(config);
    std::cout << "output: " << config.output << "\n";
    std::cout << "config hash: " << summary.summary["config_hash"].get<std::string>() << "\n";
    for (auto it = summary.summary["flags"].begin(); it != summary.summary["flags"].end(); ++it)
      std::cout << "  " << it.key() << ": " << (it.value().get<bool>() ? "ok" : "FAILED") << "\n";
    if (summary.summary["results"].contains("error"))
      std::cerr << "error: " << summary.summary["results"]["error"].get<std::string>() << "\n";
    return summary.ok ? 0 : 1;
  } catch (const nehari::ConfigError& e) {
    std::cerr << "invalid config " << a.config << ":\n";
    for (const auto& issue : e.issues())
      std::cerr << "  " << (issue.path.empty() ? "/" : issue.path) << ": " << issue.message << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nehari-set ground states for competitive elliptic systems"};
  app.require_subcommand(1);

  Args args;
  struct Sub {
    const char* name;
    const char* task;
    const char* help;
  };
  const Sub subs[] = {
      {"solve", "solve", "ground state on the Nehari set"},
      {"solve-mass", "solve_mass", "unit-mass minimizer of the cubic pair"},
      {"check", "check_assumptions", "structural assumption report"},
      {"polarize", "polarize_audit", "polarization inequality audit"},
      {"sweep", "sweep_beta", "coupling sweep with symmetry metrics"},
  };
  std::string chosen;
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", args.config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (overrides config)");
    sub->add_option("--seed", args.seed, "random seed (overrides config)");
    sub->add_option("--workers", args.workers, "worker threads (overrides config)")
        ->check(CLI::PositiveNumber);
    sub->callback([&chosen, task = s.task] { chosen = task; });
    apps.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  bool seed_given = false;
  for (auto* sub : apps)
    if (sub->parsed()) seed_given = sub->count("--seed") > 0;
  return run(chosen, args, seed_given);
}
