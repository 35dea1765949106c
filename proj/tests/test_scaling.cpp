#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "modsense/errors.hpp"
#include "modsense/minimize.hpp"
#include "modsense/scaling.hpp"

using namespace modsense;

namespace {

// Exact finite-size-scaling data with a smooth master curve.
ScalingDataset synthetic(double beta, double nu, double h_c,
                         std::vector<int> sizes = {40, 80, 160, 320}) {
  ScalingDataset d;
  for (int n : sizes) {
    for (int i = 0; i <= 200; ++i) {
      const double h = h_c - 0.1 + 0.2 * i / 200.0;
      const double x = std::pow(n, 1.0 / nu) * (h - h_c);
      const double f = 1.0 / (1.0 + 0.05 * x * x) + 0.02;
      d.records.push_back({n, h, std::pow(n, beta / nu) * f});
    }
  }
  return d;
}

}  // namespace

TEST_CASE("log-log slope") {
  std::vector<std::pair<double, double>> exact;
  for (double n : {10.0, 20.0, 40.0, 80.0}) exact.emplace_back(n, 3.0 * n * n);
  auto f = loglog_slope(exact);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.standard_error < 1e-10);
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));

  std::vector<std::pair<double, double>> noisy{{10, 10.5}, {20, 19}, {40, 41}, {80, 79}};
  auto g = loglog_slope(noisy);
  CHECK(g.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(g.standard_error > 0.0);
  CHECK(g.residuals.size() == 4);

  CHECK_THROWS_AS(loglog_slope({{1, 1}, {2, 2}}), ValidationError);
  CHECK_THROWS_AS(loglog_slope({{1, 1}, {2, -2}, {3, 3}}), ValidationError);
}

TEST_CASE("collapse cost basics") {
  const auto d = synthetic(2.0, 1.0, 0.3);
  CHECK(collapse_cost(d, 2.0, 1.0, 0.3) < 1e-4);
  CHECK(collapse_cost(d, 2.0, 1.0, 0.3) < collapse_cost(d, 2.2, 1.0, 0.3));
  CHECK(collapse_cost(d, 2.0, 1.0, 0.3) < collapse_cost(d, 2.0, 0.9, 0.3));
  CHECK(collapse_cost(d, 2.0, 1.0, 0.3) < collapse_cost(d, 1.8, 1.1, 0.3));

  for (double b : {0.6, 1.5, 2.7})
    for (double n : {0.4, 1.0, 2.5}) CHECK(collapse_cost(d, b, n, 0.3) >= 0.0);

  ScalingDataset single;
  for (const auto& r : d.records)
    if (r.n == 80) single.records.push_back(r);
  CHECK(collapse_cost(single, 2.0, 1.0, 0.3) == 0.0);

  ScalingDataset disjoint;
  disjoint.records = {{10, 0.0, 1.0}, {10, 0.1, 1.0}, {20, 5.0, 1.0}, {20, 5.1, 2.0}};
  CHECK(collapse_cost(disjoint, 1.0, 1.0, 0.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("constant rescaling of Q leaves the cost unchanged") {
  auto d = synthetic(1.8, 0.9, 0.0);
  auto scaled = d;
  for (auto& r : scaled.records) r.q *= 17.0;
  for (double b : {1.0, 1.8, 2.5})
    for (double n : {0.7, 0.9, 1.4})
      CHECK(collapse_cost(scaled, b, n, 0.0) ==
            doctest::Approx(collapse_cost(d, b, n, 0.0)).epsilon(1e-10));
  auto f1 = fit_collapse(d, 0.0);
  auto f2 = fit_collapse(scaled, 0.0);
  CHECK(f1.beta == doctest::Approx(f2.beta).epsilon(1e-6));
  CHECK(f1.nu == doctest::Approx(f2.nu).epsilon(1e-6));
}

TEST_CASE("fit recovers planted exponents") {
  for (auto [beta, nu] : {std::pair{2.0, 1.0}, std::pair{1.6, 0.8}, std::pair{1.2, 1.5}}) {
    auto fit = fit_collapse(synthetic(beta, nu, 0.5), 0.5);
    INFO("beta=" << beta << " nu=" << nu);
    CHECK(std::abs(fit.beta - beta) < 0.02);
    CHECK(std::abs(fit.nu - nu) < 0.02);
    CHECK_FALSE(fit.on_boundary);
    CHECK(fit.beta_error > 0.0);
    CHECK(fit.nu_error > 0.0);
    // Q(h_c) ~ N^(beta/nu).
    CHECK(fit.slope_at_hc.slope == doctest::Approx(beta / nu).epsilon(1e-6));
  }
}

TEST_CASE("three-parameter fit finds a shifted critical point") {
  auto d = synthetic(2.0, 1.0, 0.31);
  CollapseOptions o;
  o.fit_hc = true;
  auto fit = fit_collapse(d, 0.30, o);
  CHECK(std::abs(fit.h_c - 0.31) < 2e-3);
  CHECK(std::abs(fit.beta - 2.0) < 0.05);
  CHECK(std::abs(fit.nu - 1.0) < 0.05);
}

TEST_CASE("boundary warning") {
  CollapseOptions o;
  o.beta_max = 1.5;
  auto fit = fit_collapse(synthetic(2.0, 1.0, 0.0), 0.0, o);
  CHECK(fit.on_boundary);
}

TEST_CASE("dataset validation and CSV input") {
  ScalingDataset bad;
  bad.records = {{10, 0.1, 1.0}, {20, 0.1, 0.0}, {40, 0.1, 1.0}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  ScalingDataset two;
  two.records = {{10, 0.1, 1.0}, {20, 0.1, 2.0}};
  CHECK_THROWS_AS(two.validate(), ValidationError);

  std::istringstream csv(
      "# task: qfi-scan\n"
      "h,N,Q,status\n"
      "0.1,40,2.5,ok\n"
      "0.2,40,nan,error\n"
      "0.1,80,5,ok\n");
  auto d = read_scaling_csv(csv);
  REQUIRE(d.records.size() == 2);
  CHECK(d.records[1].n == 80);
  CHECK(d.records[1].q == 5.0);
  std::istringstream missing("N,h\n1,2\n");
  CHECK_THROWS_AS(read_scaling_csv(missing), ValidationError);
}

TEST_CASE("minimizers") {
  auto rosen = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  NelderMeadOptions o;
  o.step = {0.5, 0.5};
  o.max_evaluations = 5000;
  auto r = nelder_mead(rosen, {-1.2, 1.0}, o);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));

  NelderMeadOptions boxed;
  boxed.lower = {2.0, -10.0};
  boxed.upper = {5.0, 10.0};
  auto rb = nelder_mead(rosen, {3.0, 3.0}, boxed);
  CHECK(rb.x[0] == doctest::Approx(2.0));

  auto m = minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3) + 1; }, -1, 2);
  CHECK(m.x == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(m.value == doctest::Approx(1.0));
}
