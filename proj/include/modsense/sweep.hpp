#pragma once

// Parameter sweeps driven by a JSON configuration: grid construction, parallel
// evaluation with a per-point on-disk cache, CSV tables and SVG plots.
//
// Configuration layout (all keys optional except "task"):
//
//   {
//     "task": "qfi-scan",
//     "model": {"N": 100, "r": 2, "J": 0.4, "gamma": 0.3, "h": 0.0,
//               "boundary": "antiperiodic"},
//     "axes": [{"name": "h", "min": 0.0, "max": 1.0, "count": 200},
//              {"name": "N", "values": [40, 80]}],
//     "options": {...task specific...},
//     "plot": "auto",
//     "output": "out", "workers": 1, "seed": 0
//   }
//
// SSH tasks read "r", "J2", "J", "l" and "j1" from "model". docs/formats.md
// lists the options and the columns of every task.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modsense/result_table.hpp"
#include "modsense/svg.hpp"

namespace modsense {

using Json = nlohmann::json;

enum class Task {
  qfi_scan,
  phase_diagram,
  collapse,
  global_opt,
  ssh_bands,
  ssh_qfi,
  ssh_winding,
  oracle_check,
};

std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct Axis {
  std::string name;
  std::vector<double> values;
};

struct SweepConfig {
  Task task = Task::qfi_scan;
  Json document;  // the configuration as given, after overrides
  std::vector<Axis> axes;
  std::string output_dir = "out";
  int workers = 1;
  std::uint64_t seed = 0;

  // Parses and validates; throws ValidationError.
  static SweepConfig from_json(const Json& document);
  // FNV-1a of the canonical JSON without "output" and "workers", as 16 hex
  // digits. Identical for any two configs that produce the same results.
  std::string hash() const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

// Reads a JSON file; throws IoError when unreadable, ValidationError when
// malformed.
Json load_config_file(const std::string& path);
// "a.b.c=value": value is parsed as JSON when possible, otherwise taken as a
// string. Array elements are addressed by index ("axes.0.count=50").
void apply_override(Json& document, const std::string& assignment);

struct SweepOptions {
  // Per-point cache directory; empty disables caching.
  std::string cache_dir;
};

struct SweepOutcome {
  ResultTable table;
  std::size_t points = 0;
  std::size_t computed = 0;
  std::size_t cached = 0;
  std::size_t failed_points = 0;
};

// Evaluates the task at every grid point on config.workers threads. Rows are
// ordered by axis index (first axis slowest) whatever the scheduling; a point
// that fails yields a row with status "error". Throws NumericalError when
// every point failed.
SweepOutcome run_sweep(const SweepConfig& config, const SweepOptions& options = {});

struct PlotChoice {
  enum class Kind { none, heatmap, lines } kind = Kind::none;
  HeatmapSpec heatmap;
  LinePlotSpec lines;
};

// Resolves the "plot" entry against the task and axes; throws
// ValidationError for an incompatible request.
PlotChoice plot_for(const SweepConfig& config);

// Writes <output_dir>/<task>.csv and, when a plot is selected,
// <output_dir>/<task>.svg. Returns the written paths. Throws IoError.
std::vector<std::string> write_outputs(const SweepConfig& config, const SweepOutcome& outcome);

// SENSOR_CACHE_DIR when set, otherwise <output_dir>/.cache.
std::string default_cache_dir(const SweepConfig& config);

}  // namespace modsense
