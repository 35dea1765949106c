#include "modsense/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "modsense/ed_oracle.hpp"
#include "modsense/errors.hpp"
#include "modsense/global_sensing.hpp"
#include "modsense/parallel.hpp"
#include "modsense/phase_boundary.hpp"
#include "modsense/qfi.hpp"
#include "modsense/scaling.hpp"
#include "modsense/ssh.hpp"

namespace modsense {

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::pair<Task, std::string>>& task_names() {
  static const std::vector<std::pair<Task, std::string>> names{
      {Task::qfi_scan, "qfi-scan"},       {Task::phase_diagram, "phase-diagram"},
      {Task::collapse, "collapse"},       {Task::global_opt, "global-opt"},
      {Task::ssh_bands, "ssh-bands"},     {Task::ssh_qfi, "ssh-qfi"},
      {Task::ssh_winding, "ssh-winding"}, {Task::oracle_check, "oracle-check"}};
  return names;
}

bool is_ssh(Task t) {
  return t == Task::ssh_bands || t == Task::ssh_qfi || t == Task::ssh_winding;
}

std::set<std::string> allowed_axes(Task t) {
  switch (t) {
    case Task::qfi_scan: return {"N", "r", "J", "gamma", "h"};
    case Task::phase_diagram: return {"r", "J", "gamma", "h"};
    case Task::global_opt: return {"N", "r", "J", "gamma", "width", "h0"};
    case Task::ssh_bands: return {"r", "J2", "J", "l"};
    case Task::ssh_qfi: return {"r", "J2", "J", "l", "p"};
    case Task::ssh_winding: return {"r", "J2", "J"};
    case Task::collapse:
    case Task::oracle_check: return {};
  }
  return {};
}

bool integral_name(const std::string& n) { return n == "N" || n == "r" || n == "l"; }

// ---- JSON accessors -------------------------------------------------------

const Json& section(const Json& doc, const char* key) {
  static const Json empty = Json::object();
  if (!doc.contains(key)) return empty;
  const Json& s = doc.at(key);
  if (!s.is_object()) throw ValidationError(std::string("'") + key + "' must be an object");
  return s;
}

double get_number(const Json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("'" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const Json& obj, const std::string& key, int fallback) {
  const double v = get_number(obj, key, fallback);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ValidationError("'" + key + "' must be an integer");
  return static_cast<int>(v);
}

bool get_bool(const Json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ValidationError("'" + key + "' must be true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ValidationError("'" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> get_list(const Json& obj, const std::string& key,
                             std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_array()) throw ValidationError("'" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw ValidationError("'" + key + "' must be a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// ---- points ---------------------------------------------------------------

using Point = std::map<std::string, double>;
using Row = std::vector<std::string>;

std::string fmt(double x) { return format_double(x); }
std::string fmt_bool(bool b) { return b ? "1" : "0"; }

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

struct XYModel {
  int n = 100, r = 2;
  double j = 0.4, gamma = 0.3, h = 0.0;
  Boundary boundary = Boundary::antiperiodic;

  XYChainSpec spec() const { return XYChainSpec::modular(n, r, j, gamma, h, boundary); }
};

XYModel xy_model(const Json& doc, const Point& pt) {
  const Json& m = section(doc, "model");
  XYModel x;
  x.n = get_int(m, "N", 100);
  x.r = get_int(m, "r", 2);
  x.j = get_number(m, "J", 0.4);
  x.gamma = get_number(m, "gamma", 0.3);
  x.h = get_number(m, "h", 0.0);
  x.boundary = boundary_from_string(get_string(m, "boundary", "antiperiodic"));
  if (auto it = pt.find("N"); it != pt.end()) x.n = static_cast<int>(it->second);
  if (auto it = pt.find("r"); it != pt.end()) x.r = static_cast<int>(it->second);
  if (auto it = pt.find("J"); it != pt.end()) x.j = it->second;
  if (auto it = pt.find("gamma"); it != pt.end()) x.gamma = it->second;
  if (auto it = pt.find("h"); it != pt.end()) x.h = it->second;
  return x;
}

SSHChainSpec ssh_model(const Json& doc, const Point& pt) {
  const Json& m = section(doc, "model");
  SSHChainSpec s;
  s.dimers_per_cell = get_int(m, "r", 2);
  s.j1 = get_number(m, "j1", 1.0);
  s.j2 = get_number(m, "J2", 2.0);
  s.inter_coupling = get_number(m, "J", 1.0);
  s.n_cells = get_int(m, "l", 100);
  if (auto it = pt.find("r"); it != pt.end()) s.dimers_per_cell = static_cast<int>(it->second);
  if (auto it = pt.find("J2"); it != pt.end()) s.j2 = it->second;
  if (auto it = pt.find("J"); it != pt.end()) s.inter_coupling = it->second;
  if (auto it = pt.find("l"); it != pt.end()) s.n_cells = static_cast<int>(it->second);
  s.validate();
  return s;
}

// ---- tasks ----------------------------------------------------------------
//
// Every task has a fixed list of "full" columns (model values first, then
// results, then status and message). A point produces one or more full rows;
// the output table drops full columns that duplicate an axis.

struct TaskDef {
  std::vector<std::string> columns;
  std::function<std::vector<Row>(const Point&)> evaluate;
};

Row error_row(const std::vector<std::string>& columns, const Point& pt,
              const std::string& status, const std::string& message) {
  Row r(columns.size(), "nan");
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (auto it = pt.find(columns[c]); it != pt.end()) r[c] = fmt(it->second);
  r[columns.size() - 2] = status;
  r[columns.size() - 1] = one_line(message);
  return r;
}

std::vector<std::string> xy_columns() { return {"N", "r", "J", "gamma", "h"}; }

Row xy_values(const XYModel& m) {
  return {format_int(m.n), format_int(m.r), fmt(m.j), fmt(m.gamma), fmt(m.h)};
}

TaskDef qfi_scan_task(const Json& doc) {
  const Json& o = section(doc, "options");
  const Parameter param = parameter_from_string(get_string(o, "parameter", "h"));
  const std::string method = get_string(o, "method", "overlap");
  if (method != "overlap" && method != "trace")
    throw ValidationError("options.method must be 'overlap' or 'trace'");
  const std::string mode = get_string(o, "mode", "vacuum");
  if (mode != "vacuum" && mode != "spin")
    throw ValidationError("options.mode must be 'vacuum' or 'spin'");
  const double step = get_number(o, "step", 0.0);

  TaskDef t;
  t.columns = xy_columns();
  for (const char* c : {"Q", "gap_closed", "converged", "step", "status", "message"})
    t.columns.push_back(c);
  t.evaluate = [=](const Point& pt) {
    const XYModel m = xy_model(doc, pt);
    QfiResult q;
    if (method == "trace") {
      TraceOptions to;
      to.step = step;
      q = qfi_trace_formula(m.spec(), param, to).qfi;
    } else {
      QfiOptions qo;
      qo.step = step;
      qo.mode = mode == "spin" ? GroundStateMode::spin_sector : GroundStateMode::bdg_vacuum;
      q = qfi_finite_difference(m.spec(), param, qo);
    }
    Row r = xy_values(m);
    for (const auto& s : {fmt(q.value), fmt_bool(q.gap_closed), fmt_bool(q.converged),
                          fmt(q.step), std::string("ok"), std::string()})
      r.push_back(s);
    return std::vector<Row>{r};
  };
  return t;
}

TaskDef phase_diagram_task(const Json& doc) {
  TaskDef t;
  t.columns = {"r", "J", "gamma", "h", "f_plus", "f_minus", "region", "boundary", "status",
               "message"};
  t.evaluate = [=](const Point& pt) {
    const XYModel m = xy_model(doc, pt);
    const double fp = boundary_function(m.h, m.j, m.gamma, m.r, 1);
    const double fm = boundary_function(m.h, m.j, m.gamma, m.r, -1);
    const int region = region_label(m.h, m.j, m.gamma, m.r);
    // "boundary" is filled in after assembly from neighbouring rows.
    return std::vector<Row>{{format_int(m.r), fmt(m.j), fmt(m.gamma), fmt(m.h), fmt(fp), fmt(fm),
                             format_int(region), "0", "ok", ""}};
  };
  return t;
}

TaskDef collapse_task(const Json& doc) {
  const Json& o = section(doc, "options");
  std::vector<int> sizes;
  for (double n : get_list(o, "sizes", {40, 80, 160, 320})) {
    if (n != std::floor(n) || n < 1) throw ValidationError("options.sizes must be integers");
    sizes.push_back(static_cast<int>(n));
  }
  const int points = get_int(o, "points", 801);
  if (points < 5) throw ValidationError("options.points must be >= 5");
  CollapseOptions co;
  co.window = get_number(o, "window", 0.1);
  co.fit_hc = get_bool(o, "fit_hc", false);
  co.hc_range = get_number(o, "hc_range", co.hc_range);
  if (!(co.window > 0)) throw ValidationError("options.window must be positive");
  const std::string input = get_string(o, "input", "");

  TaskDef t;
  t.columns = {"r",           "J",       "gamma",         "h_c_fit",     "beta",
               "beta_error",  "nu",      "nu_error",      "collapse_cost", "slope_at_hc",
               "slope_error", "on_boundary", "points_used", "status",      "message"};
  t.evaluate = [=](const Point& pt) {
    const XYModel m = xy_model(doc, pt);
    const double hc = pt.at("h_c");
    ScalingDataset data;
    if (!input.empty()) {
      data = read_scaling_csv_file(input);
    } else {
      std::vector<double> grid(points);
      for (int i = 0; i < points; ++i)
        grid[i] = hc - co.window + 2.0 * co.window * i / (points - 1);
      for (int n : sizes) {
        XYModel mm = m;
        mm.n = n;
        const auto res = qfi_scan(mm.spec(), Parameter::field, grid);
        for (int i = 0; i < points; ++i) data.records.push_back({n, grid[i], res[i].value});
      }
    }
    const ScalingFit f = fit_collapse(data, hc, co);
    return std::vector<Row>{{format_int(m.r), fmt(m.j), fmt(m.gamma), fmt(f.h_c), fmt(f.beta),
                             fmt(f.beta_error), fmt(f.nu), fmt(f.nu_error), fmt(f.collapse_cost),
                             fmt(f.slope_at_hc.slope), fmt(f.slope_at_hc.standard_error),
                             fmt_bool(f.on_boundary), format_int(static_cast<long long>(f.points_used)),
                             "ok", ""}};
  };
  return t;
}

TaskDef global_opt_task(const Json& doc) {
  const Json& o = section(doc, "options");
  GlobalSensingProblem base;
  base.width = get_number(o, "width", 0.2);
  base.h0 = get_number(o, "h0", 0.0);
  base.quadrature_points = get_int(o, "quadrature_points", 101);
  base.scan_points = get_int(o, "scan_points", 301);
  base.refine_starts = get_int(o, "refine_starts", 3);
  base.center_min = get_number(o, "center_min", -1.5);
  base.center_max = get_number(o, "center_max", 1.5);
  const bool curve = get_bool(o, "curve", false);

  TaskDef t;
  t.columns = xy_columns();
  for (const char* c : {"width", "h0", "h_ctr_opt", "effective_center", "g_opt"})
    t.columns.push_back(c);
  if (curve)
    for (const char* c : {"h_ctr", "center", "G"}) t.columns.push_back(c);
  t.columns.push_back("status");
  t.columns.push_back("message");
  t.evaluate = [=](const Point& pt) {
    const XYModel m = xy_model(doc, pt);
    GlobalSensingProblem p = base;
    p.spec = m.spec();
    if (auto it = pt.find("width"); it != pt.end()) p.width = it->second;
    if (auto it = pt.find("h0"); it != pt.end()) p.h0 = it->second;
    const GlobalSensingResult r = optimize_control_field(p);
    Row head = xy_values(m);
    for (double v : {p.width, p.h0, r.h_ctr_opt, r.effective_center, r.g_opt})
      head.push_back(fmt(v));
    std::vector<Row> rows;
    if (!curve) {
      head.push_back("ok");
      head.push_back("");
      rows.push_back(head);
      return rows;
    }
    for (std::size_t k = 0; k < r.h_ctr.size(); ++k) {
      Row row = head;
      const bool ok = std::isfinite(r.g_curve[k]);
      row.push_back(fmt(r.h_ctr[k]));
      row.push_back(fmt(p.h0 + r.h_ctr[k]));
      row.push_back(fmt(r.g_curve[k]));
      row.push_back(ok ? "ok" : "error");
      row.push_back(ok ? "" : "G not finite at this control field");
      rows.push_back(row);
    }
    return rows;
  };
  return t;
}

std::vector<std::string> ssh_columns() { return {"r", "J2", "J", "l"}; }

Row ssh_values(const SSHChainSpec& s) {
  return {format_int(s.dimers_per_cell), fmt(s.j2), fmt(s.inter_coupling), format_int(s.n_cells)};
}

TaskDef ssh_bands_task(const Json& doc) {
  const Json& o = section(doc, "options");
  const int momenta = get_int(o, "momenta", 0);
  if (momenta < 0) throw ValidationError("options.momenta must be >= 0");
  TaskDef t;
  t.columns = ssh_columns();
  for (const char* c : {"p", "band", "energy", "status", "message"}) t.columns.push_back(c);
  t.evaluate = [=](const Point& pt) {
    const SSHChainSpec s = ssh_model(doc, pt);
    std::vector<double> grid;
    if (momenta > 0) {
      for (int k = 0; k < momenta; ++k)
        grid.push_back(-std::numbers::pi + 2.0 * std::numbers::pi * k / std::max(1, momenta - 1));
    } else {
      grid = ssh_momentum_grid(s.n_cells);
      std::sort(grid.begin(), grid.end());
    }
    const BandStructure bs = band_structure(s, grid);
    std::vector<Row> rows;
    for (const auto& bp : bs.points) {
      for (int b = 0; b < s.cell_sites(); ++b) {
        Row r = ssh_values(s);
        for (const auto& v : {fmt(bp.momentum), format_int(b), fmt(bp.energies[b]),
                              std::string("ok"), std::string()})
          r.push_back(v);
        rows.push_back(r);
      }
    }
    return rows;
  };
  return t;
}

TaskDef ssh_qfi_task(const Json& doc, bool momentum_axis) {
  const Json& o = section(doc, "options");
  const std::string method = get_string(o, "method", "sum_over_states");
  if (method != "sum_over_states" && method != "finite_difference")
    throw ValidationError("options.method must be 'sum_over_states' or 'finite_difference'");
  const BandQfiMethod bm = method == "finite_difference" ? BandQfiMethod::finite_difference
                                                         : BandQfiMethod::sum_over_states;
  TaskDef t;
  t.columns = ssh_columns();
  for (const char* c : {"N", "p", "Q", "susceptibility", "divergent", "status", "message"})
    t.columns.push_back(c);
  t.evaluate = [=](const Point& pt) {
    const SSHChainSpec s = ssh_model(doc, pt);
    Row r = ssh_values(s);
    r.push_back(format_int(s.n_sites()));
    if (momentum_axis) {
      const double p = pt.at("p");
      double chi = 0.0;
      bool divergent = false;
      for (int b = 0; b < s.dimers_per_cell; ++b) {
        const BandQfi q = band_qfi(s, b, p, bm);
        divergent |= q.degenerate;
        chi += q.susceptibility;
      }
      for (const auto& v : {fmt(p), fmt(4.0 * chi), fmt(chi), fmt_bool(divergent),
                            std::string(divergent ? "divergent" : "ok"), std::string()})
        r.push_back(v);
    } else {
      const HalfFillingQfi q = half_filling_qfi(s, bm);
      std::string msg;
      if (q.divergent) {
        std::ostringstream os;
        os << "band " << q.band << " degenerate at p = " << q.momentum;
        msg = os.str();
      }
      for (const auto& v : {std::string("nan"), fmt(q.qfi), fmt(q.susceptibility),
                            fmt_bool(q.divergent), std::string(q.divergent ? "divergent" : "ok"),
                            msg})
        r.push_back(v);
    }
    return std::vector<Row>{r};
  };
  return t;
}

TaskDef ssh_winding_task(const Json& doc) {
  const Json& o = section(doc, "options");
  const int samples = get_int(o, "samples", 401);
  const bool edges = get_bool(o, "edge_modes", false);
  TaskDef t;
  t.columns = {"r", "J2", "J", "index", "residual", "determinant_winding", "zak_phases",
               "edge_modes", "status", "message"};
  t.evaluate = [=](const Point& pt) {
    const SSHChainSpec s = ssh_model(doc, pt);
    Row r{format_int(s.dimers_per_cell), fmt(s.j2), fmt(s.inter_coupling)};
    try {
      const WindingResult w = winding_number(s, samples);
      std::string zak;
      for (std::size_t g = 0; g < w.zak_phases.size(); ++g)
        zak += (g ? ";" : "") + fmt(w.zak_phases[g]);
      std::string edge = "nan";
      if (edges) {
        int total = 0;
        for (int c : edge_mode_counts(s)) total += std::max(0, c);
        edge = format_int(total);
      }
      for (const auto& v : {format_int(w.index), fmt(w.residual), fmt(w.determinant_winding),
                            zak, edge, std::string("ok"), std::string()})
        r.push_back(v);
    } catch (const GapClosedError& e) {
      for (const auto& v : {std::string("nan"), std::string("nan"), std::string("nan"),
                            std::string(), std::string("nan"), std::string("gap_closed"),
                            one_line(e.what())})
        r.push_back(v);
    }
    return std::vector<Row>{r};
  };
  return t;
}

TaskDef oracle_check_task(const Json& doc, std::uint64_t seed) {
  const Json& o = section(doc, "options");
  std::vector<int> sizes;
  for (double n : get_list(o, "sizes", {6, 8, 10})) {
    if (n != std::floor(n) || n < 2 || n > kMaxEdSites)
      throw ValidationError("options.sizes must be integers in [2, " +
                            std::to_string(kMaxEdSites) + "]");
    sizes.push_back(static_cast<int>(n));
  }
  if (sizes.empty()) throw ValidationError("options.sizes must not be empty");
  const double tolerance = get_number(o, "tolerance", 1e-6);

  TaskDef t;
  t.columns = {"trial", "N",    "r",       "J",        "gamma", "h",      "boundary",
               "Q_free_fermion", "Q_ed", "rel_diff", "pass", "status", "message"};
  t.evaluate = [=](const Point& pt) {
    const int trial = static_cast<int>(pt.at("trial"));
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::mt19937_64 rng(seq);
    const int n = sizes[std::uniform_int_distribution<std::size_t>(0, sizes.size() - 1)(rng)];
    std::vector<int> cells;
    for (int r : {1, 2, 3, 4, 5})
      if (n % r == 0 && n / r >= 2) cells.push_back(r);
    const int r = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
    const double j = std::uniform_real_distribution<double>(0.2, 1.5)(rng);
    const double gamma = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    const double h = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
    const Boundary b = std::uniform_int_distribution<int>(0, 1)(rng) ? Boundary::open
                                                                    : Boundary::periodic;
    const XYChainSpec spec = XYChainSpec::modular(n, r, j, gamma, h, b);
    QfiOptions qo;
    qo.mode = GroundStateMode::spin_sector;
    const double ff = qfi_finite_difference(spec, Parameter::field, qo).value;
    const double ed = qfi_ed(spec, Parameter::field).value;
    const double rel = std::abs(ff - ed) / std::max(std::abs(ed), 1e-300);
    return std::vector<Row>{{format_int(trial), format_int(n), format_int(r), fmt(j), fmt(gamma),
                             fmt(h), to_string(b), fmt(ff), fmt(ed), fmt(rel),
                             fmt_bool(rel < tolerance), "ok", ""}};
  };
  return t;
}

TaskDef make_task(const SweepConfig& c) {
  const bool p_axis = std::any_of(c.axes.begin(), c.axes.end(),
                                  [](const Axis& a) { return a.name == "p"; });
  switch (c.task) {
    case Task::qfi_scan: return qfi_scan_task(c.document);
    case Task::phase_diagram: return phase_diagram_task(c.document);
    case Task::collapse: return collapse_task(c.document);
    case Task::global_opt: return global_opt_task(c.document);
    case Task::ssh_bands: return ssh_bands_task(c.document);
    case Task::ssh_qfi: return ssh_qfi_task(c.document, p_axis);
    case Task::ssh_winding: return ssh_winding_task(c.document);
    case Task::oracle_check: return oracle_check_task(c.document, c.seed);
  }
  throw ValidationError("unknown task");
}

// Axes a task sweeps without the user naming them.
std::vector<Axis> implicit_axes(const SweepConfig& c) {
  const Json& o = section(c.document, "options");
  if (c.task == Task::collapse) {
    Axis a{"h_c", get_list(o, "critical_fields", {})};
    if (a.values.empty()) {
      const XYModel m = xy_model(c.document, {});
      for (double h : find_critical_fields(m.j, m.gamma, m.r).critical_fields)
        if (h > 0) a.values.push_back(h);
      if (a.values.empty())
        throw ValidationError("no positive critical field for this model; set options.critical_fields");
    }
    return {a};
  }
  if (c.task == Task::oracle_check) {
    const int trials = get_int(o, "trials", 20);
    if (trials < 1) throw ValidationError("options.trials must be >= 1");
    Axis a{"trial", {}};
    for (int i = 0; i < trials; ++i) a.values.push_back(i);
    return {a};
  }
  return {};
}

// ---- cache ----------------------------------------------------------------

Json strip(Json doc, std::initializer_list<const char*> keys) {
  for (const char* k : keys) doc.erase(k);
  return doc;
}

std::string point_key(const SweepConfig& c, const std::vector<Axis>& axes, const Point& pt) {
  std::string s = to_string(c.task) + "|" +
                  strip(c.document, {"output", "workers", "axes", "plot"}).dump() + "|";
  for (const auto& a : axes) s += a.name + "=" + fmt(pt.at(a.name)) + ";";
  return hex64(fnv1a64(s));
}

bool read_cache(const std::string& path, const std::vector<std::string>& columns,
                std::vector<Row>& rows) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return false;
  try {
    ResultTable t = read_table_file(path);
    if (t.columns != columns) return false;
    rows = std::move(t.rows);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void write_cache(const std::string& path, const std::vector<std::string>& columns,
                 const std::vector<Row>& rows) {
  ResultTable t;
  t.columns = columns;
  t.rows = rows;
  try {
    write_table_file(path, t);
  } catch (const IoError&) {
    // A cache that cannot be written only costs recomputation.
  }
}

// ---- post-processing ------------------------------------------------------

void mark_boundaries(ResultTable& t, const std::vector<Axis>& axes) {
  const int region = t.column("region"), boundary = t.column("boundary");
  if (axes.empty() || region < 0 || boundary < 0) return;
  const std::size_t inner = axes.back().values.size();
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    if ((i + 1) % inner == 0) continue;
    if (t.rows[i][region] != t.rows[i + 1][region] && t.rows[i][region] != "nan" &&
        t.rows[i + 1][region] != "nan")
      t.rows[i][boundary] = "1";
  }
}

}  // namespace

// ---- public API -----------------------------------------------------------

std::string to_string(Task t) {
  for (const auto& [task, name] : task_names())
    if (task == t) return name;
  return "unknown";
}

Task task_from_string(const std::string& s) {
  for (const auto& [task, name] : task_names())
    if (name == s) return task;
  throw ValidationError("unknown task '" + s + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

SweepConfig SweepConfig::from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("configuration must be a JSON object");
  SweepConfig c;
  c.document = doc;
  c.task = task_from_string(get_string(doc, "task", ""));
  c.output_dir = get_string(doc, "output", "out");
  c.workers = get_int(doc, "workers", 1);
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
  const double seed = get_number(doc, "seed", 0);
  if (seed < 0 || seed != std::floor(seed)) throw ValidationError("seed must be a non-negative integer");
  c.seed = static_cast<std::uint64_t>(seed);

  const auto allowed = allowed_axes(c.task);
  if (doc.contains("axes")) {
    const Json& axes = doc.at("axes");
    if (!axes.is_array()) throw ValidationError("'axes' must be a list");
    if (axes.size() > 2) throw ValidationError("at most 2 axes can be swept");
    for (const Json& a : axes) {
      if (!a.is_object()) throw ValidationError("each axis must be an object");
      Axis axis;
      axis.name = get_string(a, "name", "");
      if (!allowed.count(axis.name))
        throw ValidationError("axis '" + axis.name + "' does not exist for task " +
                              to_string(c.task));
      for (const auto& other : c.axes)
        if (other.name == axis.name) throw ValidationError("axis '" + axis.name + "' repeats");
      if (a.contains("values")) {
        axis.values = get_list(a, "values", {});
      } else {
        const int count = get_int(a, "count", 0);
        if (count < 1) throw ValidationError("axis '" + axis.name + "' needs count >= 1");
        if (!a.contains("min") || !a.contains("max"))
          throw ValidationError("axis '" + axis.name + "' needs min and max (or values)");
        const double lo = get_number(a, "min", 0), hi = get_number(a, "max", 0);
        for (int i = 0; i < count; ++i)
          axis.values.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
      }
      if (axis.values.empty()) throw ValidationError("axis '" + axis.name + "' is empty");
      for (double v : axis.values) {
        if (!std::isfinite(v)) throw ValidationError("axis values must be finite");
        if (integral_name(axis.name) && v != std::floor(v))
          throw ValidationError("axis '" + axis.name + "' takes integer values");
      }
      c.axes.push_back(std::move(axis));
    }
  }
  // Build the task once so that option errors surface before any work.
  (void)make_task(c);
  if (c.task == Task::collapse || c.task == Task::oracle_check) {
    if (!c.axes.empty())
      throw ValidationError("task " + to_string(c.task) + " does not take axes");
  }
  // Catch an inconsistent model (such as N not a multiple of r) up front.
  // With a size axis some points may still be valid, and bad ones become
  // error rows instead.
  Point first;
  bool size_axis = false;
  for (const auto& a : c.axes) {
    first[a.name] = a.values.front();
    size_axis |= integral_name(a.name);
  }
  if (!size_axis && is_ssh(c.task)) {
    ssh_model(doc, first);
  } else if (!size_axis && c.task != Task::oracle_check) {
    xy_model(doc, first).spec().validate();
  }
  (void)plot_for(c);
  return c;
}

std::string SweepConfig::hash() const {
  return hex64(fnv1a64(strip(document, {"output", "workers"}).dump()));
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open configuration " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("configuration " + path + " is not valid JSON: " + e.what());
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override '" + assignment + "' must look like key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ValidationError("empty key in override '" + assignment + "'");
    Json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ValidationError("'" + key + "' is not a list index in '" + assignment + "'");
      }
      if (idx >= node->size()) throw ValidationError("index " + key + " out of range");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object())
        throw ValidationError("cannot descend into '" + key + "' in '" + assignment + "'");
      next = &(*node)[key];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

PlotChoice plot_for(const SweepConfig& c) {
  PlotChoice out;
  const Json* spec = nullptr;
  std::string kind = "auto";
  if (c.document.contains("plot")) {
    const Json& p = c.document.at("plot");
    if (p.is_string()) {
      kind = p.get<std::string>();
    } else if (p.is_object()) {
      spec = &p;
      kind = get_string(p, "kind", "auto");
    } else {
      throw ValidationError("'plot' must be a string or an object");
    }
  }
  if (kind != "auto" && kind != "none" && kind != "heatmap" && kind != "lines")
    throw ValidationError("plot kind must be auto, none, heatmap or lines");
  if (kind == "none") return out;

  const std::size_t n_axes = c.axes.size();
  std::string value, x, y, group;
  bool log = false;
  switch (c.task) {
    case Task::qfi_scan: value = "Q"; log = n_axes == 2; break;
    case Task::phase_diagram: value = "region"; break;
    case Task::global_opt: value = "g_opt"; log = true; break;
    case Task::ssh_bands: value = "energy"; break;
    case Task::ssh_qfi: value = "Q"; log = true; break;
    case Task::ssh_winding: value = "index"; break;
    case Task::collapse:
    case Task::oracle_check:
      if (kind == "auto") return out;
      throw ValidationError("task " + to_string(c.task) + " has no plot");
  }
  const bool curve = c.task == Task::global_opt &&
                     get_bool(section(c.document, "options"), "curve", false);
  if (curve) value = "G";

  if (kind == "auto") {
    if (c.task == Task::ssh_bands) {
      kind = n_axes == 0 ? "lines" : "none";
    } else if (curve) {
      kind = n_axes <= 1 ? "heatmap" : "none";
    } else if (n_axes == 2) {
      const bool has_n = c.axes[0].name == "N" || c.axes[1].name == "N" ||
                         c.axes[0].name == "l" || c.axes[1].name == "l";
      kind = has_n ? "lines" : "heatmap";
    } else if (n_axes == 1) {
      kind = "lines";
    } else {
      kind = "none";
    }
    if (kind == "none") return out;
  }

  if (kind == "heatmap") {
    if (curve) {
      x = "center";
      y = n_axes == 1 ? c.axes[0].name : "";
    } else {
      if (n_axes == 0 || n_axes > 2) throw ValidationError("a heatmap needs 1 or 2 axes");
      x = c.axes.back().name;
      y = n_axes == 2 ? c.axes[0].name : "";
    }
  } else {
    if (c.task == Task::ssh_bands) {
      x = "p";
      group = "band";
    } else if (curve) {
      x = "center";
      if (n_axes == 1) group = c.axes[0].name;
    } else {
      if (n_axes == 0) throw ValidationError("a line plot needs an axis");
      x = c.axes.back().name;
      if (n_axes == 2) {
        x = c.axes[1].name;
        group = c.axes[0].name;
        if (c.axes[1].name == "N" || c.axes[1].name == "l") std::swap(x, group);
      }
    }
  }
  if (spec) {
    x = get_string(*spec, "x", x);
    y = get_string(*spec, "y", y);
    value = get_string(*spec, "value", value);
    group = get_string(*spec, "group", group);
    log = get_bool(*spec, "log", log);
  }
  if (kind == "heatmap") {
    out.kind = PlotChoice::Kind::heatmap;
    out.heatmap = {x, y, value, log, to_string(c.task)};
  } else {
    out.kind = PlotChoice::Kind::lines;
    bool log_x = spec ? get_bool(*spec, "log_x", false) : false;
    out.lines = {x, value, group, log_x, log, to_string(c.task)};
  }
  return out;
}

SweepOutcome run_sweep(const SweepConfig& c, const SweepOptions& options) {
  const TaskDef task = make_task(c);
  std::vector<Axis> axes = c.axes;
  for (auto& a : implicit_axes(c)) axes.push_back(std::move(a));

  // Output columns: axes, then the task's columns that are not axes.
  std::vector<int> keep;
  ResultTable table;
  for (const auto& a : axes) table.columns.push_back(a.name);
  for (std::size_t k = 0; k < task.columns.size(); ++k) {
    const bool dup = std::any_of(axes.begin(), axes.end(),
                                 [&](const Axis& a) { return a.name == task.columns[k]; });
    if (!dup) {
      keep.push_back(static_cast<int>(k));
      table.columns.push_back(task.columns[k]);
    }
  }
  table.metadata = {{"task", to_string(c.task)},
                    {"config_hash", c.hash()},
                    {"version", kVersion},
                    {"config", strip(c.document, {"output", "workers"}).dump()}};

  std::size_t n_points = 1;
  for (const auto& a : axes) n_points *= a.values.size();
  std::vector<Point> points(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    std::size_t rest = i;
    for (std::size_t d = axes.size(); d-- > 0;) {
      points[i][axes[d].name] = axes[d].values[rest % axes[d].values.size()];
      rest /= axes[d].values.size();
    }
  }

  if (!options.cache_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.cache_dir, ec);
  }
  std::vector<std::vector<Row>> results(n_points);
  std::vector<char> from_cache(n_points, 0), failed(n_points, 0);
  parallel_for_index(n_points, c.workers, [&](std::size_t i) {
    std::string cache_path;
    if (!options.cache_dir.empty()) {
      cache_path = options.cache_dir + "/" + point_key(c, axes, points[i]) + ".csv";
      if (read_cache(cache_path, task.columns, results[i])) {
        from_cache[i] = 1;
        return;
      }
    }
    try {
      results[i] = task.evaluate(points[i]);
    } catch (const std::exception& e) {
      results[i] = {error_row(task.columns, points[i], "error", e.what())};
    }
    if (!cache_path.empty()) write_cache(cache_path, task.columns, results[i]);
  });

  SweepOutcome out;
  out.points = n_points;
  const int status = static_cast<int>(task.columns.size()) - 2;
  for (std::size_t i = 0; i < n_points; ++i) {
    (from_cache[i] ? out.cached : out.computed) += 1;
    bool all_error = !results[i].empty();
    for (const Row& full : results[i]) {
      all_error &= full[status] == "error";
      Row row;
      for (const auto& a : axes) row.push_back(fmt(points[i].at(a.name)));
      for (int k : keep) row.push_back(full[k]);
      table.add_row(std::move(row));
    }
    if (all_error) failed[i] = 1;
  }
  out.failed_points = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  if (c.task == Task::phase_diagram) mark_boundaries(table, axes);
  if (c.task == Task::phase_diagram && axes.size() == 1 && axes[0].name == "h") {
    const XYModel m = xy_model(c.document, {});
    std::string roots;
    for (double h : find_critical_fields(m.j, m.gamma, m.r).critical_fields)
      roots += (roots.empty() ? "" : ";") + fmt(h);
    table.metadata.emplace_back("critical_fields", roots);
  }
  out.table = std::move(table);
  if (out.failed_points == n_points) {
    std::string first;
    for (const Row& r : results.front()) first = r.back();
    throw NumericalError("every grid point failed; first error: " + first);
  }
  return out;
}

std::vector<std::string> write_outputs(const SweepConfig& c, const SweepOutcome& outcome) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.output_dir + ": " + ec.message());
  std::vector<std::string> written;
  const std::string base = c.output_dir + "/" + to_string(c.task);
  write_table_file(base + ".csv", outcome.table);
  written.push_back(base + ".csv");
  const PlotChoice plot = plot_for(c);
  if (plot.kind != PlotChoice::Kind::none) {
    const std::string svg = plot.kind == PlotChoice::Kind::heatmap
                                ? render_heatmap(outcome.table, plot.heatmap)
                                : render_lines(outcome.table, plot.lines);
    write_text_file(base + ".svg", svg);
    written.push_back(base + ".svg");
  }
  return written;
}

std::string default_cache_dir(const SweepConfig& c) {
  if (const char* env = std::getenv("SENSOR_CACHE_DIR"); env && *env) return env;
  return c.output_dir + "/.cache";
}

}  // namespace modsense
