#pragma once

// Global sensing over a field interval of width dh centred at h0 with a
// uniform prior. The figure of merit is the prior average of 1/Q,
//
//   G(h0 + h_ctr | dh) = (1/dh) * int_{h0-dh/2}^{h0+dh/2} dh' / Q(h' + h_ctr),
//
// evaluated by the trapezoidal rule, and minimized over the control field
// h_ctr that shifts the probe's working point.

#include <functional>
#include <vector>

#include "modsense/qfi.hpp"
#include "modsense/scaling.hpp"
#include "modsense/xy_chain.hpp"

namespace modsense {

struct GlobalSensingProblem {
  // Probe; its `field` member is overwritten by h' + h_ctr.
  XYChainSpec spec;
  double h0 = 0.0;
  double width = 0.1;
  int quadrature_points = 101;
  QfiOptions qfi{.step = 0.0, .richardson = false};
  // Range searched for the effective centre h0 + h_ctr.
  double center_min = -1.5;
  double center_max = 1.5;
  int scan_points = 301;
  int refine_starts = 3;
  // Optional replacement for the QFI engine, e.g. interpolation in a cached
  // scan. Receives the total field and returns Q.
  std::function<double(double)> qfi_lookup;

  void validate() const;
};

// Single evaluation of G at control field h_ctr.
double average_uncertainty(const GlobalSensingProblem& problem, double h_ctr);

struct GlobalSensingResult {
  std::vector<double> h_ctr;    // scanned control fields
  std::vector<double> g_curve;  // G at each scanned control field
  double h_ctr_opt = 0.0;
  double g_opt = 0.0;
  double effective_center = 0.0;  // h0 + h_ctr_opt
  std::size_t qfi_evaluations = 0;
};

// Dense scan of scan_points centres followed by Brent refinement around the
// refine_starts lowest local minima. Among optima whose G agree to 1e-9
// relative, the smaller |h_ctr| wins (then the positive one).
GlobalSensingResult optimize_control_field(const GlobalSensingProblem& problem,
                                           int workers = 1);

struct GlobalExponent {
  double b = 0.0;
  double standard_error = 0.0;
  std::vector<int> sizes;
  std::vector<GlobalSensingResult> results;
};

// G_opt ~ N^(-b) over the given sizes. The template's cell size and
// couplings are kept; only the number of cells changes.
GlobalExponent global_exponent(const GlobalSensingProblem& problem,
                               const std::vector<int>& sizes, int workers = 1);

}  // namespace modsense
