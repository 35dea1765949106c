#include "modsense/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "modsense/errors.hpp"

namespace modsense {

namespace {

constexpr double kWidth = 720, kHeight = 520;
constexpr double kLeft = 90, kRight = 130, kTop = 50, kBottom = 70;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Comments may not contain "--".
std::string comment_safe(std::string s) {
  for (std::size_t i = s.find("--"); i != std::string::npos; i = s.find("--"))
    s.replace(i, 2, "- -");
  return s;
}

int require_column(const ResultTable& t, const std::string& name) {
  const int c = t.column(name);
  if (c < 0) throw ValidationError("table has no column '" + name + "'");
  return c;
}

double parse(const std::string& s) {
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    return used == s.size() ? v : std::numeric_limits<double>::quiet_NaN();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

bool row_ok(const ResultTable& t, const std::vector<std::string>& row) {
  const int s = t.column("status");
  return s < 0 || row[s] == "ok";
}

std::string header(const ResultTable& t, const std::string& title) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  for (const auto& [k, v] : t.metadata)
    o << "<!-- " << comment_safe(k) << ": " << comment_safe(v) << " -->\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    o << "<text x=\"" << num(kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";
  return o.str();
}

// Perceptually ordered palette (dark blue -> teal -> yellow).
std::string colour(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                              {59, 82, 139},
                                                              {33, 145, 140},
                                                              {94, 201, 98},
                                                              {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

std::string series_colour(std::size_t i) {
  static const std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % palette.size()];
}

std::string axes_frame(const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream o;
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(w)
    << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << num(kLeft + w / 2) << "\" y=\"" << num(kHeight - 20)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << escape(xlabel) << "</text>\n";
  o << "<text x=\"24\" y=\"" << num(kTop + h / 2) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 24 "
    << num(kTop + h / 2) << ")\">" << escape(ylabel) << "</text>\n";
  return o.str();
}

std::string tick(double x, double y, const std::string& text, const char* anchor) {
  std::ostringstream o;
  o << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
    << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(text) << "</text>\n";
  return o.str();
}

}  // namespace

std::string render_heatmap(const ResultTable& table, const HeatmapSpec& spec) {
  const int cx = require_column(table, spec.x_column);
  const int cy = spec.y_column.empty() ? -1 : require_column(table, spec.y_column);
  const int cv = require_column(table, spec.value_column);

  std::map<double, int> xs, ys;
  std::map<std::pair<double, double>, double> cells;
  for (const auto& row : table.rows) {
    const double x = parse(row[cx]);
    const double y = cy < 0 ? 0.0 : parse(row[cy]);
    if (!std::isfinite(x) || !std::isfinite(y))
      throw ValidationError("heatmap coordinates must be finite numbers");
    xs.emplace(x, 0);
    ys.emplace(y, 0);
    double v = row_ok(table, row) ? parse(row[cv]) : std::numeric_limits<double>::quiet_NaN();
    if (spec.log_scale) v = v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
    if (!cells.emplace(std::pair{x, y}, v).second)
      throw ValidationError("heatmap needs one row per (" + spec.x_column +
                            (cy < 0 ? "" : ", " + spec.y_column) + ") pair");
  }
  int i = 0;
  for (auto& [x, idx] : xs) idx = i++;
  i = 0;
  for (auto& [y, idx] : ys) idx = i++;

  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& [k, v] : cells) {
    if (!std::isfinite(v)) continue;
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const bool any = std::isfinite(vmin);
  const double span = any && vmax > vmin ? vmax - vmin : 1.0;

  std::ostringstream o;
  o << header(table, spec.title);
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  const double cw = w / xs.size(), ch = h / ys.size();
  for (const auto& [key, v] : cells) {
    if (!std::isfinite(v)) continue;
    const double px = kLeft + xs[key.first] * cw;
    const double py = kTop + h - (ys[key.second] + 1) * ch;
    o << "<rect class=\"cell\" shape-rendering=\"crispEdges\" x=\"" << num(px) << "\" y=\""
      << num(py) << "\" width=\"" << num(cw + 0.05) << "\" height=\"" << num(ch + 0.05)
      << "\" fill=\"" << colour((v - vmin) / span) << "\"/>\n";
  }
  o << axes_frame(spec.x_column, spec.y_column);
  if (!xs.empty()) {
    o << tick(kLeft, kTop + h + 18, label(xs.begin()->first), "start");
    o << tick(kLeft + w, kTop + h + 18, label(xs.rbegin()->first), "end");
  }
  if (cy >= 0 && !ys.empty()) {
    o << tick(kLeft - 6, kTop + h, label(ys.begin()->first), "end");
    o << tick(kLeft - 6, kTop + 10, label(ys.rbegin()->first), "end");
  }

  // Colour bar.
  const double bx = kWidth - kRight + 30, bw = 18;
  constexpr int steps = 64;
  for (int s = 0; s < steps; ++s) {
    const double y0 = kTop + h - (s + 1) * h / steps;
    o << "<rect x=\"" << num(bx) << "\" y=\"" << num(y0) << "\" width=\"" << num(bw)
      << "\" height=\"" << num(h / steps + 0.05) << "\" fill=\""
      << colour((s + 0.5) / steps) << "\"/>\n";
  }
  o << "<rect x=\"" << num(bx) << "\" y=\"" << num(kTop) << "\" width=\"" << num(bw)
    << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  const std::string prefix = spec.log_scale ? "1e" : "";
  if (any) {
    o << tick(bx + bw + 4, kTop + h, prefix + label(vmin), "start");
    o << tick(bx + bw + 4, kTop + 10, prefix + label(vmax), "start");
  }
  o << tick(bx + bw / 2, kTop - 8,
            spec.log_scale ? "log10 " + spec.value_column : spec.value_column, "middle");
  o << "</svg>\n";
  return o.str();
}

std::string render_lines(const ResultTable& table, const LinePlotSpec& spec) {
  const int cx = require_column(table, spec.x_column);
  const int cy = require_column(table, spec.y_column);
  const int cg = spec.group_column.empty() ? -1 : require_column(table, spec.group_column);

  // Series keyed by group label, kept in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& row : table.rows) {
    const std::string g = cg < 0 ? "" : row[cg];
    if (!series.count(g)) order.push_back(g);
    auto& pts = series[g];
    if (!row_ok(table, row)) continue;
    double x = parse(row[cx]), y = parse(row[cy]);
    if (spec.log_x) x = x > 0 ? std::log10(x) : std::numeric_limits<double>::quiet_NaN();
    if (spec.log_y) y = y > 0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(x) && std::isfinite(y)) pts.emplace_back(x, y);
  }
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (auto& [g, pts] : series) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  const bool any = std::isfinite(x0);
  if (!any) x0 = y0 = 0.0, x1 = y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;

  std::ostringstream o;
  o << header(table, spec.title);
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return kTop + h - (y - y0) / (y1 - y0) * h; };
  for (std::size_t s = 0; s < order.size(); ++s) {
    const auto& pts = series[order[s]];
    if (pts.empty()) continue;
    o << "<polyline fill=\"none\" stroke=\"" << series_colour(s) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k)
      o << (k ? " " : "") << num(px(pts[k].first)) << ',' << num(py(pts[k].second));
    o << "\"/>\n";
    if (cg >= 0) {
      const double ly = kTop + 14 + 18 * s;
      o << "<line x1=\"" << num(kWidth - kRight + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(kWidth - kRight + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\""
        << series_colour(s) << "\" stroke-width=\"2\"/>\n";
      o << tick(kWidth - kRight + 34, ly, spec.group_column + "=" + order[s], "start");
    }
  }
  const std::string xl = spec.log_x ? "log10 " + spec.x_column : spec.x_column;
  const std::string yl = spec.log_y ? "log10 " + spec.y_column : spec.y_column;
  o << axes_frame(xl, yl);
  o << tick(kLeft, kTop + h + 18, label(x0), "start");
  o << tick(kLeft + w, kTop + h + 18, label(x1), "end");
  o << tick(kLeft - 6, kTop + h, label(y0), "end");
  o << tick(kLeft - 6, kTop + 10, label(y1), "end");
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace modsense
