#pragma once

// Plain CSV tables with a block of "# key: value" metadata lines on top.
// Numbers are written with 17 significant digits so that a write/read round
// trip reproduces every double exactly.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace modsense {

struct ResultTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Index of a column, -1 when absent.
  int column(const std::string& name) const;
  // Value of a metadata key, empty when absent.
  std::string meta(const std::string& key) const;
  // Throws ValidationError when the row width does not match the header.
  void add_row(std::vector<std::string> row);
};

std::string format_double(double x);
std::string format_int(long long x);

void write_table(std::ostream& out, const ResultTable& table);
// Writes atomically (temporary file + rename); throws IoError.
void write_table_file(const std::string& path, const ResultTable& table);

ResultTable read_table(std::istream& in);
ResultTable read_table_file(const std::string& path);

}  // namespace modsense
