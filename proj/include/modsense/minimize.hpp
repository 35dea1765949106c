#pragma once

#include <functional>
#include <vector>

namespace modsense {

struct NelderMeadOptions {
  // Initial simplex edge per coordinate.
  std::vector<double> step;
  // Box constraints; trial points are projected onto the box.
  std::vector<double> lower;
  std::vector<double> upper;
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-9;
  int max_evaluations = 2000;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Downhill simplex with the standard coefficients (reflection 1,
// expansion 2, contraction 1/2, shrink 1/2).
MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x0, const NelderMeadOptions& options);

// Bracketed scalar minimization (Brent's golden-section/parabolic method).
struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, int bits = 40, int max_iterations = 200);

}  // namespace modsense
