#include "modsense/result_table.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modsense/errors.hpp"

namespace modsense {

int ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::string ResultTable::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return {};
}

void ResultTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw ValidationError("row has " + std::to_string(row.size()) +
                          " fields, header has " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_int(long long x) { return std::to_string(x); }

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostream& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << quote(row[i]);
  }
  out << '\n';
}

// Splits one logical CSV record; quoted fields may contain commas and
// doubled quotes (embedded newlines are not supported).
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quote in CSV line");
  fields.push_back(cur);
  return fields;
}

}  // namespace

void write_table(std::ostream& out, const ResultTable& table) {
  for (const auto& [k, v] : table.metadata) out << "# " << k << ": " << v << '\n';
  write_row(out, table.columns);
  for (const auto& row : table.rows) write_row(out, row);
}

void write_table_file(const std::string& path, const ResultTable& table) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    write_table(out, table);
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

ResultTable read_table(std::istream& in) {
  ResultTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# ") == std::string::npos
                                               ? line.size()
                                               : line.find_first_not_of("# "));
      const auto colon = body.find(':');
      if (colon != std::string::npos) {
        std::string value = body.substr(colon + 1);
        if (!value.empty() && value[0] == ' ') value.erase(0, 1);
        t.metadata.emplace_back(body.substr(0, colon), value);
      }
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      t.columns = std::move(fields);
      have_header = true;
    } else {
      t.add_row(std::move(fields));
    }
  }
  if (!have_header) throw ValidationError("CSV input has no header line");
  return t;
}

ResultTable read_table_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_table(in);
}

}  // namespace modsense
