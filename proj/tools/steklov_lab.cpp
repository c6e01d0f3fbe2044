// steklov-lab <experiment> --config <path> [--out <dir>] [--threads N]
//
// Exit status: 0 when every verdict is Satisfied, 1 when some verdict is Violated,
// 2 on configuration, I/O or solver errors.

#include "steklov/lab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

// --threads, then STEKLOV_LAB_THREADS, then 1.
int resolve_threads(const std::optional<int>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("STEKLOV_LAB_THREADS"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw steklov::ConfigError(std::string("STEKLOV_LAB_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-element lab for fourth-order Steklov and Navier problems on oscillating domains"};
  std::string experiment;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  const std::vector<std::string> names(std::begin(steklov::lab::kExperiments), std::end(steklov::lab::kExperiments));
  app.add_option("experiment", experiment, "Experiment to run")->required()->check(CLI::IsMember(names));
  app.add_option("--config", config_path, "Configuration file (key = value lines)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides the config's `out`)");
  app.add_option("--threads", threads, "Worker threads (default: STEKLOV_LAB_THREADS or 1)")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    steklov::lab::ExperimentConfig config = steklov::lab::load_config(config_path, experiment);
    if (out_dir) config.out_dir = *out_dir;
    const int n_threads = resolve_threads(threads);

    const auto start = std::chrono::steady_clock::now();
    const steklov::lab::ExperimentReport report = steklov::lab::run_experiment(config, n_threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto files = steklov::lab::emit(report, config.out_dir);
    std::cout << steklov::lab::summary_text(report);
    std::cout << "\nwrote " << files.size() << " files to " << config.out_dir << " in " << seconds << " s ("
              << n_threads << (n_threads == 1 ? " thread" : " threads") << ")\n";
    return report.all_satisfied() ? 0 : 1;
  } catch (const steklov::lab::AssumptionRefused& e) {
    std::cerr << "steklov-lab: " << e.what() << "\n";
    for (const auto& row : e.report().rows) {
      std::cerr << "  eps = " << row.epsilon << ": kappa = " << row.kappa << ", ratios = " << row.ratio[0] << ", "
                << row.ratio[1] << ", " << row.ratio[2] << "\n";
    }
    return 2;
  } catch (const steklov::Error& e) {
    std::cerr << "steklov-lab: " << e.what() << "\n";
    return 2;
  }
}
