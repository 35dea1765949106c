#include "modsense/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "modsense/errors.hpp"
#include "modsense/minimize.hpp"
#include "modsense/result_table.hpp"

namespace modsense {

void ScalingDataset::validate(int min_sizes) const {
  std::set<int> sizes;
  for (const auto& r : records) {
    if (r.n <= 0) throw ValidationError("scaling record with non-positive N");
    if (!std::isfinite(r.h)) throw ValidationError("scaling record with non-finite h");
    if (!(r.q > 0.0) || !std::isfinite(r.q))
      throw ValidationError("scaling record needs finite Q > 0");
    sizes.insert(r.n);
  }
  if (static_cast<int>(sizes.size()) < min_sizes)
    throw ValidationError("scaling dataset needs at least " +
                          std::to_string(min_sizes) + " distinct sizes");
}

std::map<int, std::vector<std::pair<double, double>>> ScalingDataset::groups() const {
  std::map<int, std::vector<std::pair<double, double>>> g;
  for (const auto& r : records) g[r.n].emplace_back(r.h, r.q);
  for (auto& [n, pts] : g) std::sort(pts.begin(), pts.end());
  return g;
}

ScalingDataset ScalingDataset::window(double centre, double half_width) const {
  ScalingDataset out;
  for (const auto& r : records)
    if (std::abs(r.h - centre) <= half_width) out.records.push_back(r);
  return out;
}

ScalingDataset read_scaling_csv(std::istream& in) {
  const ResultTable t = read_table(in);
  const int cn = t.column("N"), ch = t.column("h"), cq = t.column("Q");
  if (cn < 0 || ch < 0 || cq < 0)
    throw ValidationError("scaling table needs columns N, h and Q");
  const int cs = t.column("status");
  ScalingDataset d;
  for (const auto& row : t.rows) {
    if (cs >= 0 && row[cs] != "ok") continue;
    ScalingRecord r;
    r.n = std::stoi(row[cn]);
    r.h = std::stod(row[ch]);
    r.q = std::stod(row[cq]);
    d.records.push_back(r);
  }
  return d;
}

ScalingDataset read_scaling_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_scaling_csv(in);
}

SlopeFit loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ValidationError("log-log fit needs at least 3 points");
  const double m = static_cast<double>(points.size());
  std::vector<double> x, y;
  for (const auto& [n, q] : points) {
    if (!(n > 0.0) || !(q > 0.0) || !std::isfinite(n) || !std::isfinite(q))
      throw ValidationError("log-log fit needs positive finite values");
    x.push_back(std::log(n));
    y.push_back(std::log(q));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / m;
    my += y[i] / m;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("log-log fit needs distinct sizes");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.standard_error = std::sqrt(ssr / (m - 2.0) / sxx);
  return fit;
}

namespace {

struct Curve {
  std::vector<double> x, y;
};

std::vector<Curve> rescale(const ScalingDataset& data, double beta, double nu,
                           double h_c) {
  std::vector<Curve> curves;
  for (const auto& [n, pts] : data.groups()) {
    Curve c;
    const double nn = static_cast<double>(n);
    const double sx = std::pow(nn, 1.0 / nu);
    const double sy = std::pow(nn, -beta / nu);
    for (const auto& [h, q] : pts) {
      c.x.push_back(sx * (h - h_c));
      c.y.push_back(sy * q);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

// Linear interpolation on an ascending abscissa; false outside the range.
bool interpolate(const Curve& c, double x, double& y) {
  if (c.x.empty() || x < c.x.front() || x > c.x.back()) return false;
  auto it = std::lower_bound(c.x.begin(), c.x.end(), x);
  std::size_t i = static_cast<std::size_t>(it - c.x.begin());
  if (i == 0) {
    y = c.y.front();
    return true;
  }
  const double x0 = c.x[i - 1], x1 = c.x[i];
  const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
  y = c.y[i - 1] + t * (c.y[i] - c.y[i - 1]);
  return true;
}

double interpolate_q(const std::vector<std::pair<double, double>>& pts, double h) {
  if (pts.empty() || h < pts.front().first || h > pts.back().first)
    return std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (h <= pts[i].first) {
      const auto [h0, q0] = pts[i - 1];
      const auto [h1, q1] = pts[i];
      const double t = h1 > h0 ? (h - h0) / (h1 - h0) : 0.0;
      return q0 + t * (q1 - q0);
    }
  }
  return pts.front().second;
}

}  // namespace

double collapse_cost(const ScalingDataset& data, double beta, double nu,
                     double h_c) {
  if (!(nu > 0.0)) throw ValidationError("nu must be positive");
  const auto curves = rescale(data, beta, nu, h_c);
  if (curves.size() < 2) return 0.0;

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t i = 0; i < curves[a].x.size(); ++i) {
      for (std::size_t b = 0; b < curves.size(); ++b) {
        if (b == a) continue;
        double y;
        if (!interpolate(curves[b], curves[a].x[i], y)) continue;
        const double d = curves[a].y[i] - y;
        sum += d * d;
        ++pairs;
      }
    }
  }
  if (pairs == 0) return std::numeric_limits<double>::infinity();

  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& c : curves)
    for (double y : c.y) {
      mean += y;
      ++count;
    }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const auto& c : curves)
    for (double y : c.y) var += (y - mean) * (y - mean);
  var /= static_cast<double>(count);
  if (!(var > 0.0)) return 0.0;
  return sum / static_cast<double>(pairs) / var;
}

namespace {

// Half-width of the interval around x_opt on which cost(x) <= level,
// clipped to [lo, hi].
double half_width(const std::function<double(double)>& cost, double x_opt,
                  double level, double lo, double hi) {
  auto edge = [&](double limit) {
    if (cost(limit) <= level) return limit;
    double inside = x_opt, outside = limit;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (inside + outside);
      (cost(m) <= level ? inside : outside) = m;
    }
    return 0.5 * (inside + outside);
  };
  return 0.5 * (edge(hi) - edge(lo));
}

}  // namespace

ScalingFit fit_collapse(const ScalingDataset& data, double h_c,
                        const CollapseOptions& o) {
  if (!(o.beta_min < o.beta_max) || !(o.nu_min < o.nu_max) || o.nu_min <= 0.0)
    throw ValidationError("collapse bounds must be increasing with nu > 0");
  if (o.grid < 2) throw ValidationError("collapse grid needs >= 2 points per axis");
  const double reach = o.window + (o.fit_hc ? o.hc_range : 0.0);
  const ScalingDataset win = data.window(h_c, reach);
  win.validate(2);

  ScalingFit fit;
  fit.points_used = win.records.size();

  // Coarse grid at the supplied h_c.
  double best = std::numeric_limits<double>::infinity();
  double b0 = o.beta_min, n0 = o.nu_min;
  for (int i = 0; i < o.grid; ++i) {
    const double b = o.beta_min + (o.beta_max - o.beta_min) * i / (o.grid - 1);
    for (int j = 0; j < o.grid; ++j) {
      const double n = o.nu_min + (o.nu_max - o.nu_min) * j / (o.grid - 1);
      const double c = collapse_cost(win.window(h_c, o.window), b, n, h_c);
      if (c < best) {
        best = c;
        b0 = b;
        n0 = n;
      }
    }
  }

  const double db = (o.beta_max - o.beta_min) / (o.grid - 1);
  const double dn = (o.nu_max - o.nu_min) / (o.grid - 1);
  NelderMeadOptions nm;
  nm.x_tolerance = 1e-7;
  nm.f_tolerance = 1e-14;
  if (o.fit_hc) {
    nm.step = {db, dn, 0.25 * o.hc_range};
    nm.lower = {o.beta_min, o.nu_min, h_c - o.hc_range};
    nm.upper = {o.beta_max, o.nu_max, h_c + o.hc_range};
    auto f = [&](const std::vector<double>& x) {
      return collapse_cost(win.window(x[2], o.window), x[0], x[1], x[2]);
    };
    const auto r = nelder_mead(f, {b0, n0, h_c}, nm);
    fit.beta = r.x[0];
    fit.nu = r.x[1];
    fit.h_c = r.x[2];
    fit.collapse_cost = r.value;
  } else {
    nm.step = {db, dn};
    nm.lower = {o.beta_min, o.nu_min};
    nm.upper = {o.beta_max, o.nu_max};
    const ScalingDataset fixed = win.window(h_c, o.window);
    auto f = [&](const std::vector<double>& x) {
      return collapse_cost(fixed, x[0], x[1], h_c);
    };
    const auto r = nelder_mead(f, {b0, n0}, nm);
    fit.beta = r.x[0];
    fit.nu = r.x[1];
    fit.h_c = h_c;
    fit.collapse_cost = r.value;
  }

  const ScalingDataset final_window = win.window(fit.h_c, o.window);
  const double level = o.error_level * fit.collapse_cost;
  fit.beta_error = half_width(
      [&](double b) { return collapse_cost(final_window, b, fit.nu, fit.h_c); },
      fit.beta, level, o.beta_min, o.beta_max);
  fit.nu_error = half_width(
      [&](double n) { return collapse_cost(final_window, fit.beta, n, fit.h_c); },
      fit.nu, level, o.nu_min, o.nu_max);

  const double eps = 1e-6;
  fit.on_boundary = fit.beta - o.beta_min < eps || o.beta_max - fit.beta < eps ||
                    fit.nu - o.nu_min < eps || o.nu_max - fit.nu < eps ||
                    (o.fit_hc && o.hc_range - std::abs(fit.h_c - h_c) < eps);

  std::vector<std::pair<double, double>> at_hc;
  for (const auto& [n, pts] : data.groups()) {
    const double q = interpolate_q(pts, fit.h_c);
    if (std::isfinite(q) && q > 0.0) at_hc.emplace_back(n, q);
  }
  if (at_hc.size() >= 3) fit.slope_at_hc = loglog_slope(at_hc);
  return fit;
}

}  // namespace modsense
