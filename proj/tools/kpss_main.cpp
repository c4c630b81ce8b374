// Command-line runner for the k-PSS experiments.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpss/config.hpp"
#include "kpss/errors.hpp"
#include "kpss/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact k-polar slice sampling experiments"};
  std::string experiment;
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(kpss::experiment_names()));
  app.add_option("-c,--config", config_path, "INI config file")->required();
  auto* seed_opt = app.add_option("-s,--seed", seed, "Seed; overrides run.seed");
  auto* threads_opt =
      app.add_option("-t,--threads", threads, "Worker threads; overrides run.threads")
          ->check(CLI::PositiveNumber);
  app.add_option("-o,--out", out_path, "Output CSV path (default: stdout)");
  app.add_option("--set", overrides, "Override a config key, as section.key=value");
  CLI11_PARSE(app, argc, argv);

  kpss::ExperimentOutcome outcome;
  try {
    kpss::Config config = kpss::Config::from_file(config_path);
    for (const auto& item : overrides) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw kpss::ConfigError("--set " + item + ": expected key=value");
      config.set(item.substr(0, eq), item.substr(eq + 1));
    }
    if (*seed_opt) config.set("run.seed", std::to_string(seed));
    if (*threads_opt) config.set("run.threads", std::to_string(threads));
    kpss::validate_experiment(experiment, config);

    std::ostringstream csv;
    outcome = kpss::run_experiment(experiment, config, csv);
    if (out_path.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 2;
      }
      out << csv.str();
    }
  } catch (const kpss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << experiment << ": " << outcome.cells << " cells, " << outcome.failed_cells
            << " failed" << (out_path.empty() ? "" : ", wrote " + out_path) << "\n";
  if (outcome.cells > 0 && outcome.failed_cells == outcome.cells) return 2;
  return 0;
}
