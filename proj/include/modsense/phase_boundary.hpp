#pragma once

// Thermodynamic-limit critical fields of the modular XY chain from the
// single-cell transfer matrix
//
//   Mt = L * C^(r-2) * R,
//   L = [[-2h/(J(1-g)), -(1+g)/(J(1-g))], [1, 0]]
//   C = [[-2h/(1-g),    -(1+g)/(1-g)],    [1, 0]]
//   R = [[-2h/(1-g),    -J(1+g)/(1-g)],   [1, 0]]
//
// with criticality at det(Mt +- I) = 0. Multiplying every factor by (1-g)
// gives Ms = (1-g)^r Mt, which stays finite at g = 1. Because
// det Mt = ((1+g)/(1-g))^r,
//
//   (1-g)^r det(Mt +- I) = (1+g)^r +- tr Ms + (1-g)^r =: f_pm(h),
//
// a polynomial of degree r in h with the same roots and, for g < 1, the same
// sign. A cell of one site uses the single factor with every bond equal to J.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "modsense/xy_chain.hpp"

namespace modsense {

struct TransferMatrixCell {
  Eigen::Matrix2d m_tilde;
  double h = 0.0;
  double inter_coupling = 1.0;
  double anisotropy = 0.0;
  int cell_size = 1;
  // True when every factor carries the extra (1-g).
  bool scaled = false;
};

// Unscaled product. Throws ValidationError when g >= 1 - 1e-9; use
// scaled_cell_transfer_matrix there.
TransferMatrixCell cell_transfer_matrix(double h, double inter_coupling,
                                        double anisotropy, int cell_size);

TransferMatrixCell scaled_cell_transfer_matrix(double h, double inter_coupling,
                                               double anisotropy,
                                               int cell_size);

// f_+ (branch = +1) or f_- (branch = -1) as defined above.
double boundary_function(double h, double inter_coupling, double anisotropy,
                         int cell_size, int branch);

struct PhaseBoundarySet {
  std::vector<double> critical_fields;  // ascending
  std::vector<int> branch;              // +1 for det(Mt + I), -1 for det(Mt - I)
  std::vector<double> residual;         // |f_branch(h_c)|
  double inter_coupling = 0.0;
  double anisotropy = 0.0;
  int cell_size = 1;
  double tolerance = 0.0;
  // A root sits on (or within tolerance of) the search interval's edge.
  bool endpoint_warning = false;
};

struct RootSearchOptions {
  double lower = -1.5;
  double upper = 1.5;
  double tolerance = 1e-10;
  // Scan points per branch; 0 selects 100 r + 200 (never below 40 r).
  int samples = 0;
};

PhaseBoundarySet find_critical_fields(double inter_coupling, double anisotropy,
                                      int cell_size,
                                      const RootSearchOptions& options = {});

// +1 inside the ordered (ferromagnetic) phase, -1 in a paramagnetic region:
// the sign of f_+ f_-.
int region_label(double h, double inter_coupling, double anisotropy,
                 int cell_size);

struct GridAxis {
  Parameter parameter = Parameter::field;
  std::vector<double> values;
};

struct PhaseDiagram {
  GridAxis axis1;  // rows
  GridAxis axis2;  // columns
  double field = 0.0;
  double inter_coupling = 0.0;
  double anisotropy = 0.0;
  int cell_size = 1;
  // Row-major, axis1.values.size() x axis2.values.size().
  std::vector<double> f_plus;
  std::vector<double> f_minus;
  std::vector<int> region;
  // 1 where f_+ or f_- changes sign towards the next row or column.
  std::vector<int> boundary;

  std::size_t index(std::size_t i, std::size_t j) const {
    return i * axis2.values.size() + j;
  }
};

// Axes must be two distinct parameters out of {h, J, gamma}; the third one
// keeps the value given in `fixed`.
PhaseDiagram phase_diagram_grid(const GridAxis& axis1, const GridAxis& axis2,
                                double field, double inter_coupling,
                                double anisotropy, int cell_size,
                                int workers = 1);

// Number of maximal runs of paramagnetic labels strictly inside an ordered
// background along one row of labels (runs touching either end are excluded).
int count_islands(const std::vector<int>& labels);

}  // namespace modsense
