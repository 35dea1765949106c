#pragma once

// Standalone SVG rendering of result tables. Output depends only on the table
// contents, so identical tables give identical bytes.

#include <string>

#include "modsense/result_table.hpp"

namespace modsense {

struct HeatmapSpec {
  std::string x_column;
  std::string y_column;  // empty: a single row of cells
  std::string value_column;
  bool log_scale = false;
  std::string title;
};

// One cell per distinct (x, y) pair. Rows whose status column is not "ok" or
// whose value is not finite (or not positive on a log scale) stay blank.
// Throws ValidationError when a column is missing or an (x, y) pair repeats.
std::string render_heatmap(const ResultTable& table, const HeatmapSpec& spec);

struct LinePlotSpec {
  std::string x_column;
  std::string y_column;
  std::string group_column;  // empty: one series
  bool log_x = false;
  bool log_y = false;
  std::string title;
};

std::string render_lines(const ResultTable& table, const LinePlotSpec& spec);

// Atomic write of a text file; throws IoError.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace modsense
