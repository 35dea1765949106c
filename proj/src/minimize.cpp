#include "modsense/minimize.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "modsense/errors.hpp"

namespace modsense {

MinimizeResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw ValidationError("nelder_mead needs at least one variable");
  auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i < options.lower.size()) x[i] = std::max(x[i], options.lower[i]);
      if (i < options.upper.size()) x[i] = std::min(x[i], options.upper[i]);
    }
  };
  MinimizeResult res;
  auto eval = [&](std::vector<double>& x) {
    project(x);
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = i < options.step.size() ? options.step[i] : 0.1;
    // Step away from an upper bound rather than into it.
    if (i < options.upper.size() && x0[i] + s > options.upper[i]) s = -s;
    simplex[i + 1][i] += s;
  }
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  while (res.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(),
                      second = order[n - 1];

    double spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        spread = std::max(spread, std::abs(simplex[i][k] - simplex[best][k]));
    if (std::abs(fv[worst] - fv[best]) <= options.f_tolerance &&
        spread <= options.x_tolerance) {
      res.converged = true;
      break;
    }
    if (spread <= options.x_tolerance * 1e-3) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / n;
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k)
        x[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
      return x;
    };

    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k)
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      fv[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  res.x = simplex[static_cast<std::size_t>(it - fv.begin())];
  res.value = *it;
  return res;
}

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, int bits, int max_iterations) {
  if (!(lo <= hi)) throw ValidationError("minimize_scalar needs lo <= hi");
  if (lo == hi) return {lo, f(lo)};
  std::uintmax_t iterations = static_cast<std::uintmax_t>(max_iterations);
  const auto r = boost::math::tools::brent_find_minima(f, lo, hi, bits, iterations);
  return {r.first, r.second};
}

}  // namespace modsense
