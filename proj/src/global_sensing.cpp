#include "modsense/global_sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "modsense/errors.hpp"
#include "modsense/minimize.hpp"
#include "modsense/parallel.hpp"

namespace modsense {

void GlobalSensingProblem::validate() const {
  spec.validate();
  if (!(width > 0.0) || !std::isfinite(width))
    throw ValidationError("interval width must be positive");
  if (!std::isfinite(h0)) throw ValidationError("interval centre must be finite");
  if (quadrature_points < 51)
    throw ValidationError("at least 51 quadrature points are required");
  if (!(center_min < center_max))
    throw ValidationError("empty search range for the effective centre");
  if (scan_points < 3) throw ValidationError("scan needs at least 3 points");
  if (refine_starts < 1) throw ValidationError("refine_starts must be >= 1");
}

namespace {

struct Sample {
  double q = 0.0;
  bool gap_closed = false;
};

// QFI memo shared by all evaluations of one optimization. Values are pure
// functions of the total field, so concurrent duplicate work is harmless.
class QfiCache {
 public:
  explicit QfiCache(const GlobalSensingProblem& p) : problem_(p) {}

  Sample get(double h) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(h); it != memo_.end()) return it->second;
    }
    Sample s;
    if (problem_.qfi_lookup) {
      s.q = problem_.qfi_lookup(h);
    } else {
      const auto r = qfi_finite_difference(
          with_parameter(problem_.spec, Parameter::field, h), Parameter::field,
          problem_.qfi);
      s.q = r.value;
      s.gap_closed = r.gap_closed;
    }
    std::lock_guard lock(mutex_);
    ++evaluations_;
    memo_.emplace(h, s);
    return s;
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const GlobalSensingProblem& problem_;
  std::mutex mutex_;
  std::unordered_map<double, Sample> memo_;
  std::size_t evaluations_ = 0;
};

double evaluate_g(const GlobalSensingProblem& p, QfiCache& cache, double h_ctr) {
  const int n = p.quadrature_points;
  const double spacing = p.width / (n - 1);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double h = p.h0 - 0.5 * p.width + j * spacing + h_ctr;
    Sample s = cache.get(h);
    if (s.gap_closed) {
      s = cache.get(h + spacing);
      if (s.gap_closed) s = cache.get(h - spacing);
    }
    if (!std::isfinite(s.q) || !(s.q > 0.0)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "QFI is not a positive finite number at h = " << h << " (Q = " << s.q
          << ")";
      throw NumericalError(msg.str());
    }
    const double weight = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    sum += weight / s.q;
  }
  return sum / (n - 1);
}

// a better than b: lower G, or equal G (1e-9 relative) with smaller |h_ctr|,
// then positive h_ctr. |h_ctr| values closer than the refinement resolution
// count as equal, so mirror-image optima resolve to the positive side.
bool preferred(double ga, double xa, double gb, double xb) {
  if (!std::isfinite(gb)) return std::isfinite(ga);
  if (!std::isfinite(ga)) return false;
  if (std::abs(ga - gb) > 1e-9 * std::max(std::abs(ga), std::abs(gb)))
    return ga < gb;
  if (std::abs(std::abs(xa) - std::abs(xb)) > 1e-7)
    return std::abs(xa) < std::abs(xb);
  return xa > xb;
}

}  // namespace

double average_uncertainty(const GlobalSensingProblem& problem, double h_ctr) {
  problem.validate();
  QfiCache cache(problem);
  return evaluate_g(problem, cache, h_ctr);
}

GlobalSensingResult optimize_control_field(const GlobalSensingProblem& problem,
                                           int workers) {
  problem.validate();
  QfiCache cache(problem);
  const int m = problem.scan_points;
  const double lo = problem.center_min - problem.h0;
  const double hi = problem.center_max - problem.h0;

  GlobalSensingResult out;
  out.h_ctr.resize(m);
  out.g_curve.assign(m, std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < m; ++k) out.h_ctr[k] = lo + (hi - lo) * k / (m - 1);

  std::vector<std::string> errors(m);
  parallel_for_index(m, workers, [&](std::size_t k) {
    try {
      out.g_curve[k] = evaluate_g(problem, cache, out.h_ctr[k]);
    } catch (const NumericalError& e) {
      errors[k] = e.what();
    }
  });
  const auto finite = [&](int k) { return std::isfinite(out.g_curve[k]); };
  int ok = 0;
  for (int k = 0; k < m; ++k) ok += finite(k);
  if (ok == 0)
    throw NumericalError("every scanned control field failed; first error: " +
                         errors.front());

  // Local minima of the scan, ranked by G.
  std::vector<int> minima;
  for (int k = 0; k < m; ++k) {
    if (!finite(k)) continue;
    const bool left = k == 0 || !finite(k - 1) || out.g_curve[k] <= out.g_curve[k - 1];
    const bool right =
        k == m - 1 || !finite(k + 1) || out.g_curve[k] <= out.g_curve[k + 1];
    if (left && right) minima.push_back(k);
  }
  std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) {
    return preferred(out.g_curve[a], out.h_ctr[a], out.g_curve[b], out.h_ctr[b]);
  });
  if (static_cast<int>(minima.size()) > problem.refine_starts)
    minima.resize(problem.refine_starts);

  std::vector<double> best_x(minima.size()), best_g(minima.size());
  parallel_for_index(minima.size(), workers, [&](std::size_t i) {
    const int k = minima[i];
    const double a = out.h_ctr[std::max(0, k - 1)];
    const double b = out.h_ctr[std::min(m - 1, k + 1)];
    auto g = [&](double x) {
      try {
        return evaluate_g(problem, cache, x);
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const ScalarMinimum r = minimize_scalar(g, a, b);
    // Refinement must improve G; otherwise the scan point stands.
    const double gk = out.g_curve[k];
    if (r.value < gk - 1e-9 * std::abs(gk)) {
      best_x[i] = r.x;
      best_g[i] = r.value;
    } else {
      best_x[i] = out.h_ctr[k];
      best_g[i] = out.g_curve[k];
    }
  });

  out.h_ctr_opt = best_x[0];
  out.g_opt = best_g[0];
  for (std::size_t i = 1; i < best_x.size(); ++i) {
    if (preferred(best_g[i], best_x[i], out.g_opt, out.h_ctr_opt)) {
      out.h_ctr_opt = best_x[i];
      out.g_opt = best_g[i];
    }
  }
  out.effective_center = problem.h0 + out.h_ctr_opt;
  out.qfi_evaluations = cache.evaluations();
  return out;
}

GlobalExponent global_exponent(const GlobalSensingProblem& problem,
                               const std::vector<int>& sizes, int workers) {
  if (sizes.size() < 3) throw ValidationError("global exponent needs >= 3 sizes");
  if (!problem.spec.field_offsets.empty())
    throw ValidationError("global exponent requires a probe without field offsets");
  GlobalExponent out;
  std::vector<std::pair<double, double>> points;
  for (int n : sizes) {
    GlobalSensingProblem p = problem;
    if (n <= 0 || n % p.spec.cell_size != 0)
      throw ValidationError("size " + std::to_string(n) +
                            " is not a multiple of the cell size");
    p.spec.n_sites = n;
    p.spec.n_cells = n / p.spec.cell_size;
    out.results.push_back(optimize_control_field(p, workers));
    out.sizes.push_back(n);
    points.emplace_back(n, out.results.back().g_opt);
  }
  const SlopeFit fit = loglog_slope(points);
  out.b = -fit.slope;
  out.standard_error = fit.standard_error;
  return out;
}

}  // namespace modsense
