#pragma once

// Scaling exponents from QFI-versus-size data: direct log-log slopes and a
// finite-size-scaling collapse for Q = N^(beta/nu) f(N^(1/nu) (h - h_c)).

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace modsense {

struct ScalingRecord {
  int n = 0;
  double h = 0.0;
  double q = 0.0;
};

struct ScalingDataset {
  std::vector<ScalingRecord> records;

  // Q > 0 and finite everywhere, at least `min_sizes` distinct N.
  void validate(int min_sizes = 3) const;
  // Records grouped by N, each group sorted by h.
  std::map<int, std::vector<std::pair<double, double>>> groups() const;
  // Records with |h - centre| <= half_width.
  ScalingDataset window(double centre, double half_width) const;
};

// Reads a table with (at least) columns N, h and Q. Lines starting with '#'
// are skipped; when a `status` column exists only rows with status "ok" are
// kept.
ScalingDataset read_scaling_csv(std::istream& in);
ScalingDataset read_scaling_csv_file(const std::string& path);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
  std::vector<double> residuals;  // log Q - fit, in input order
};

// Least-squares fit of log Q against log N.
SlopeFit loglog_slope(const std::vector<std::pair<double, double>>& points);

// Mean squared vertical distance of every rescaled point from the linear
// interpolant through each other size's rescaled curve (where that curve
// covers the point's abscissa), divided by the variance of all rescaled
// ordinates. One size gives 0; no overlap at all gives +infinity.
double collapse_cost(const ScalingDataset& data, double beta, double nu,
                     double h_c);

struct CollapseOptions {
  double beta_min = 0.5, beta_max = 3.0;
  double nu_min = 0.3, nu_max = 3.0;
  int grid = 41;
  // Data window |h - h_c| <= window.
  double window = 0.1;
  // Fit h_c too, within +- hc_range of the supplied value.
  bool fit_hc = false;
  double hc_range = 0.02;
  // Uncertainty level: cost <= error_level * minimum.
  double error_level = 1.1;
};

struct ScalingFit {
  double beta = 0.0;
  double nu = 0.0;
  double h_c = 0.0;
  double collapse_cost = 0.0;
  double beta_error = 0.0;
  double nu_error = 0.0;
  // The optimum touches the search box.
  bool on_boundary = false;
  // log Q(h_c) against log N, Q(h_c) interpolated inside each size.
  SlopeFit slope_at_hc;
  std::size_t points_used = 0;
};

ScalingFit fit_collapse(const ScalingDataset& data, double h_c,
                        const CollapseOptions& options = {});

}  // namespace modsense
