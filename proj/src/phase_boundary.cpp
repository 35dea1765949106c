#include "modsense/phase_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "modsense/errors.hpp"
#include "modsense/parallel.hpp"

namespace modsense {

namespace {

void check_arguments(double h, double j, double g, int r) {
  if (r < 1) throw ValidationError("cell_size must be positive");
  if (!std::isfinite(h) || !std::isfinite(j) || !std::isfinite(g))
    throw ValidationError("non-finite transfer-matrix argument");
  if (j == 0.0) throw ValidationError("inter-cell coupling must be non-zero");
}

// Factors with a common prefactor s on the first row: s = 1/(1-g) gives the
// printed matrices, s = 1 the (1-g)-rescaled ones.
TransferMatrixCell product(double h, double j, double g, int r, double s,
                           double lower_left) {
  auto factor = [&](double a, double b) {
    Eigen::Matrix2d m;
    m << a * s, b * s, lower_left, 0.0;
    return m;
  };
  TransferMatrixCell cell;
  cell.h = h;
  cell.inter_coupling = j;
  cell.anisotropy = g;
  cell.cell_size = r;
  if (r == 1) {
    cell.m_tilde = factor(-2.0 * h / j, -(1.0 + g));
    return cell;
  }
  const Eigen::Matrix2d left = factor(-2.0 * h / j, -(1.0 + g) / j);
  const Eigen::Matrix2d centre = factor(-2.0 * h, -(1.0 + g));
  const Eigen::Matrix2d right = factor(-2.0 * h, -j * (1.0 + g));
  Eigen::Matrix2d m = left;
  for (int k = 0; k < r - 2; ++k) m = m * centre;
  cell.m_tilde = m * right;
  return cell;
}

}  // namespace

TransferMatrixCell cell_transfer_matrix(double h, double inter_coupling,
                                        double anisotropy, int cell_size) {
  check_arguments(h, inter_coupling, anisotropy, cell_size);
  if (anisotropy >= 1.0 - 1e-9)
    throw ValidationError(
        "transfer matrix divides by 1 - gamma; use the rescaled form "
        "(scaled_cell_transfer_matrix) near gamma = 1");
  const double s = 1.0 / (1.0 - anisotropy);
  return product(h, inter_coupling, anisotropy, cell_size, s, 1.0);
}

TransferMatrixCell scaled_cell_transfer_matrix(double h, double inter_coupling,
                                               double anisotropy,
                                               int cell_size) {
  check_arguments(h, inter_coupling, anisotropy, cell_size);
  auto cell = product(h, inter_coupling, anisotropy, cell_size, 1.0,
                      1.0 - anisotropy);
  cell.scaled = true;
  return cell;
}

double boundary_function(double h, double inter_coupling, double anisotropy,
                         int cell_size, int branch) {
  if (branch != 1 && branch != -1)
    throw ValidationError("branch must be +1 or -1");
  const auto cell =
      scaled_cell_transfer_matrix(h, inter_coupling, anisotropy, cell_size);
  const double g = anisotropy;
  return std::pow(1.0 + g, cell_size) + branch * cell.m_tilde.trace() +
         std::pow(1.0 - g, cell_size);
}

int region_label(double h, double inter_coupling, double anisotropy,
                 int cell_size) {
  const double fp = boundary_function(h, inter_coupling, anisotropy, cell_size, 1);
  const double fm = boundary_function(h, inter_coupling, anisotropy, cell_size, -1);
  return fp * fm > 0.0 ? 1 : -1;
}

PhaseBoundarySet find_critical_fields(double inter_coupling, double anisotropy,
                                      int cell_size,
                                      const RootSearchOptions& options) {
  check_arguments(0.0, inter_coupling, anisotropy, cell_size);
  if (!std::isfinite(options.lower) || !std::isfinite(options.upper) ||
      !(options.lower < options.upper))
    throw ValidationError("search interval must be finite and non-empty");
  if (!(options.tolerance > 0.0))
    throw ValidationError("tolerance must be positive");
  const int r = cell_size;
  const int samples =
      std::max(options.samples > 0 ? options.samples : 100 * r + 200, 40 * r);

  PhaseBoundarySet out;
  out.inter_coupling = inter_coupling;
  out.anisotropy = anisotropy;
  out.cell_size = r;
  out.tolerance = options.tolerance;

  struct Root {
    double h;
    int branch;
    double residual;
  };
  std::vector<Root> roots;
  const double width = options.upper - options.lower;
  for (int branch : {1, -1}) {
    auto f = [&](double h) {
      return boundary_function(h, inter_coupling, anisotropy, r, branch);
    };
    double h_prev = options.lower;
    double f_prev = f(h_prev);
    if (f_prev == 0.0) {
      roots.push_back({h_prev, branch, 0.0});
      out.endpoint_warning = true;
    }
    for (int i = 1; i < samples; ++i) {
      const double h = options.lower + width * i / (samples - 1);
      const double fh = f(h);
      if (fh == 0.0) {
        roots.push_back({h, branch, 0.0});
        if (i == samples - 1) out.endpoint_warning = true;
      } else if (f_prev != 0.0 && (f_prev < 0.0) != (fh < 0.0)) {
        double a = h_prev, b = h, fa = f_prev;
        // Bisect down to adjacent doubles; the requested tolerance is only
        // an upper bound on the bracket width.
        for (int it = 0; it < 200; ++it) {
          const double m = 0.5 * (a + b);
          if (m <= a || m >= b) break;
          const double fm = f(m);
          if (fm == 0.0) {
            a = b = m;
            break;
          }
          if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        const double root = 0.5 * (a + b);
        roots.push_back({root, branch, std::abs(f(root))});
      }
      h_prev = h;
      f_prev = fh;
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const Root& x, const Root& y) { return x.h < y.h; });
  for (const auto& root : roots) {
    if (!out.critical_fields.empty() &&
        root.h - out.critical_fields.back() < options.tolerance)
      continue;
    out.critical_fields.push_back(root.h);
    out.branch.push_back(root.branch);
    out.residual.push_back(root.residual);
    if (root.h - options.lower < options.tolerance ||
        options.upper - root.h < options.tolerance)
      out.endpoint_warning = true;
  }
  return out;
}

PhaseDiagram phase_diagram_grid(const GridAxis& axis1, const GridAxis& axis2,
                                double field, double inter_coupling,
                                double anisotropy, int cell_size, int workers) {
  if (axis1.parameter == axis2.parameter)
    throw ValidationError("phase-diagram axes must be different parameters");
  if (axis1.values.empty() || axis2.values.empty())
    throw ValidationError("phase-diagram axes must not be empty");
  PhaseDiagram d;
  d.axis1 = axis1;
  d.axis2 = axis2;
  d.field = field;
  d.inter_coupling = inter_coupling;
  d.anisotropy = anisotropy;
  d.cell_size = cell_size;
  const std::size_t n1 = axis1.values.size(), n2 = axis2.values.size();
  d.f_plus.assign(n1 * n2, 0.0);
  d.f_minus.assign(n1 * n2, 0.0);
  d.region.assign(n1 * n2, 0);
  d.boundary.assign(n1 * n2, 0);

  parallel_for_index(n1, workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < n2; ++j) {
      double p[3] = {field, inter_coupling, anisotropy};
      auto set = [&](Parameter which, double v) {
        p[which == Parameter::field ? 0
          : which == Parameter::inter_coupling ? 1 : 2] = v;
      };
      set(axis1.parameter, axis1.values[i]);
      set(axis2.parameter, axis2.values[j]);
      const std::size_t k = d.index(i, j);
      d.f_plus[k] = boundary_function(p[0], p[1], p[2], cell_size, 1);
      d.f_minus[k] = boundary_function(p[0], p[1], p[2], cell_size, -1);
      d.region[k] = d.f_plus[k] * d.f_minus[k] > 0.0 ? 1 : -1;
    }
  });

  auto flips = [&](std::size_t a, std::size_t b) {
    return (d.f_plus[a] < 0.0) != (d.f_plus[b] < 0.0) ||
           (d.f_minus[a] < 0.0) != (d.f_minus[b] < 0.0) ||
           d.f_plus[a] == 0.0 || d.f_minus[a] == 0.0;
  };
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const std::size_t k = d.index(i, j);
      bool mark = false;
      if (i + 1 < n1) mark = mark || flips(k, d.index(i + 1, j));
      if (j + 1 < n2) mark = mark || flips(k, d.index(i, j + 1));
      if (i + 1 == n1 && j + 1 == n2)
        mark = d.f_plus[k] == 0.0 || d.f_minus[k] == 0.0;
      d.boundary[k] = mark ? 1 : 0;
    }
  }
  return d;
}

int count_islands(const std::vector<int>& labels) {
  int islands = 0;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] < 0) {
      std::size_t j = i;
      while (j < labels.size() && labels[j] < 0) ++j;
      if (i > 0 && j < labels.size()) ++islands;
      i = j;
    } else {
      ++i;
    }
  }
  return islands;
}

}  // namespace modsense
