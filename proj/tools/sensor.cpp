// Command-line driver for parameter sweeps.
//
//   sensor <task> --config FILE [--out DIR] [--workers K] [--set key=value]...
//
// Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
// failure of every grid point, 4 file-system error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modsense/errors.hpp"
#include "modsense/sweep.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

const std::vector<std::string> kTasks{"qfi-scan", "phase-diagram", "collapse",    "global-opt",
                                      "ssh-bands", "ssh-qfi",      "ssh-winding", "oracle-check"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum sensing sweeps for modular XY and SSH chains"};
  std::string task, config_path, out_dir, cache_dir;
  int workers = 0;
  bool no_cache = false;
  std::vector<std::string> overrides;
  app.add_option("task", task, "Task to run")->required()->check(CLI::IsMember(kTasks));
  app.add_option("-c,--config", config_path, "JSON configuration file")->required();
  app.add_option("-o,--out", out_dir, "Output directory (overrides the config)");
  app.add_option("-w,--workers", workers, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "Override a config entry, e.g. --set model.N=200");
  app.add_option("--cache-dir", cache_dir, "Per-point cache directory");
  app.add_flag("--no-cache", no_cache, "Recompute every point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  using namespace modsense;
  SweepConfig config;
  try {
    Json doc = load_config_file(config_path);
    if (!doc.is_object()) throw ValidationError("configuration must be a JSON object");
    doc["task"] = task;
    for (const auto& o : overrides) apply_override(doc, o);
    if (!out_dir.empty()) doc["output"] = out_dir;
    if (workers > 0) doc["workers"] = workers;
    config = SweepConfig::from_json(doc);
  } catch (const ValidationError& e) {
    std::cerr << "sensor: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "sensor: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "sensor: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  }

  SweepOptions options;
  if (!no_cache) options.cache_dir = cache_dir.empty() ? default_cache_dir(config) : cache_dir;

  const auto start = std::chrono::steady_clock::now();
  SweepOutcome outcome;
  try {
    outcome = run_sweep(config, options);
  } catch (const ValidationError& e) {
    std::cerr << "sensor: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "sensor: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "sensor: " << e.what() << "\n";
    return kExitNumerical;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::vector<std::string> written;
  try {
    written = write_outputs(config, outcome);
  } catch (const IoError& e) {
    std::cerr << "sensor: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    // The CSV is written before the plot is rendered.
    std::cerr << "sensor: cannot plot: " << e.what() << "\n";
    return kExitConfig;
  }

  std::printf("%s: %zu points (%zu computed, %zu cached, %zu failed) in %.2f s, hash %s\n",
              to_string(config.task).c_str(), outcome.points, outcome.computed, outcome.cached,
              outcome.failed_points, seconds, config.hash().c_str());
  for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
  return 0;
}
