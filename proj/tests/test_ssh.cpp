#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "modsense/errors.hpp"
#include "modsense/scaling.hpp"
#include "modsense/ssh.hpp"

using namespace modsense;

namespace {

constexpr double kPi = std::numbers::pi;

SSHChainSpec make(int r, double j2, double j, int l = 100) {
  SSHChainSpec s;
  s.dimers_per_cell = r;
  s.j2 = j2;
  s.inter_coupling = j;
  s.n_cells = l;
  return s;
}

}  // namespace

TEST_CASE("Bloch matrix structure") {
  auto h = build_bloch(make(2, 0.7, 1.3), 0.4);
  Eigen::Matrix4cd expect;
  const std::complex<double> e = std::polar(1.0, -0.4);
  expect << 0, 1, 0, 1.3 * e, 1, 0, 0.7, 0, 0, 0.7, 0, 1, 1.3 * std::conj(e), 0, 1, 0;
  CHECK((h - expect).norm() < 1e-15);
  CHECK(build_bloch(make(2, 0.7, 1.3), 0.0).imag().isZero(0.0));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> c(0.1, 3.0), p(-kPi, kPi);
  std::uniform_int_distribution<int> rd(1, 4);
  for (int t = 0; t < 10; ++t) {
    auto s = make(rd(rng), c(rng), c(rng));
    const double q = p(rng);
    auto m = build_bloch(s, q);
    CHECK((m - m.adjoint()).norm() < 1e-12);
    Eigen::VectorXd g(s.cell_sites());
    for (int i = 0; i < g.size(); ++i) g[i] = i % 2 == 0 ? 1.0 : -1.0;
    CHECK((g.asDiagonal() * m * g.asDiagonal() + m).norm() < 1e-12);
    CHECK((build_bloch(s, -q) - m.conjugate()).norm() < 1e-15);
  }
  CHECK_THROWS_AS(build_bloch(make(2, -1.0, 1.0), 0.0), ValidationError);
}

TEST_CASE("momentum grid") {
  auto g = ssh_momentum_grid(4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == 0.0);
  CHECK(g[2] == doctest::Approx(kPi));
  CHECK(g[3] == doctest::Approx(-kPi / 2));
  for (double p : ssh_momentum_grid(7)) CHECK((p > -kPi && p <= kPi));
}

TEST_CASE("bands come in +- pairs with orthonormal, gauge-fixed vectors") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c(0.1, 3.0);
  for (int t = 0; t < 12; ++t) {
    auto s = make(1 + t % 3, c(rng), c(rng), 9);
    auto bs = band_structure(s, ssh_momentum_grid(9));
    CHECK(bs.occupied == s.dimers_per_cell);
    for (const auto& pt : bs.points) {
      const int n = s.cell_sites();
      for (int b = 0; b < n; ++b) {
        CHECK(std::abs(pt.energies[b] + pt.energies[n - 1 - b]) < 1e-10);
        const auto col = pt.vectors.col(b);
        const double mx = col.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i) {
          if (std::abs(col[i]) >= mx * (1 - 1e-9)) {
            CHECK(col[i].imag() == 0.0);
            CHECK(col[i].real() > 0.0);
            break;
          }
        }
      }
      const Eigen::MatrixXcd id = pt.vectors.adjoint() * pt.vectors;
      CHECK((id - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-12);
    }
  }
}

TEST_CASE("r = 2 closed forms") {
  SUBCASE("energies on a 101-point grid") {
    for (auto [j2, j] : {std::pair{2.0, 3.0}, std::pair{2.0, 0.3}, std::pair{0.6, 1.1}}) {
      for (int k = 0; k <= 100; ++k) {
        const double p = -kPi + 2 * kPi * k / 100;
        auto w = ssh_r2::omegas(j2, j, p);
        auto e = bloch_bands(make(2, j2, j), p).energies;
        CHECK(std::abs(e[0] + w[1]) < 1e-12);
        CHECK(std::abs(e[1] + w[0]) < 1e-12);
        CHECK(std::abs(e[2] - w[0]) < 1e-12);
        CHECK(std::abs(e[3] - w[1]) < 1e-12);
      }
    }
  }
  SUBCASE("gap-closing points") {
    auto w = ssh_r2::omegas(2.0, 2.0, kPi);
    CHECK(w[0] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(ssh_r2::omegas(2.0, 0.5, 0.0)[0] < 1e-12);
  }
  SUBCASE("eigenvectors and band QFI") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> c(0.2, 3.0), pd(-kPi, kPi);
    for (int t = 0; t < 40; ++t) {
      const double j2 = c(rng), j = c(rng), p = pd(rng);
      const auto s = make(2, j2, j);
      const auto bp = bloch_bands(s, p);
      const auto h = build_bloch(s, p);
      for (int b = 0; b < 4; ++b) {
        const double omega = bp.energies[b];
        const auto a = ssh_r2::amplitudes(j2, j, p, omega);
        CHECK((h * a.v - omega * a.v).norm() < 1e-10 * a.v.norm());
        const Eigen::Vector4cd u = a.v.normalized();
        CHECK(std::abs(std::abs(bp.vectors.col(b).dot(u)) - 1.0) < 1e-8);

        const double closed = ssh_r2::band_qfi(j2, j, p, b).qfi;
        const double fd = band_qfi(s, b, p).qfi;
        const double sos = band_qfi(s, b, p, BandQfiMethod::sum_over_states).qfi;
        INFO("j2=" << j2 << " j=" << j << " p=" << p << " band " << b);
        CHECK(sos == doctest::Approx(closed).epsilon(1e-8));
        CHECK(fd == doctest::Approx(closed).epsilon(1e-6));
        CHECK(closed >= 0.0);
      }
    }
  }
  SUBCASE("derivatives of the amplitudes") {
    const double j2 = 1.7, j = 0.8, p = 1.1, d = 1e-6;
    for (int b = 0; b < 4; ++b) {
      auto e = [&](double x) { return bloch_bands(make(2, x, j), p).energies[b]; };
      auto plus = ssh_r2::amplitudes(j2 + d, j, p, e(j2 + d));
      auto minus = ssh_r2::amplitudes(j2 - d, j, p, e(j2 - d));
      auto mid = ssh_r2::amplitudes(j2, j, p, e(j2));
      CHECK(((plus.v - minus.v) / (2 * d) - mid.dv).norm() < 1e-7 * mid.dv.norm());
    }
  }
}

TEST_CASE("band QFI concentrates near the closing momenta") {
  // J2 = 2: J near J2 closes a gap at p = pi, J near 1/J2 at p = 0. At the
  // symmetric momenta themselves dH/dJ2 does not connect the closing bands,
  // so the weight sits on either side of them.
  auto near_pi = make(2, 2.0, 2.05);
  CHECK(band_qfi(near_pi, 1, 0.95 * kPi).qfi > 50 * band_qfi(near_pi, 1, kPi / 2).qfi);
  auto near_zero = make(2, 2.0, 0.52);
  CHECK(band_qfi(near_zero, 1, 0.05 * kPi).qfi > 50 * band_qfi(near_zero, 1, kPi / 2).qfi);
  CHECK(band_qfi(make(2, 2.0, 2.0), 0, kPi).degenerate);
  CHECK(ssh_r2::band_qfi(2.0, 2.0, kPi, 0).degenerate);
}

TEST_CASE("half-filling QFI") {
  SUBCASE("divergence at a boundary is flagged") {
    auto q = half_filling_qfi(make(2, 2.0, 2.0, 10));
    CHECK(q.divergent);
    CHECK(q.momentum == doctest::Approx(kPi));
    CHECK(std::isinf(q.qfi));
  }
  SUBCASE("momentum sum converges per site away from boundaries") {
    for (auto [j2, j] : {std::pair{2.0, 1.0}, std::pair{2.0, 3.5}, std::pair{0.6, 0.3}}) {
      const double a = half_filling_qfi(make(2, j2, j, 50)).qfi / 50;
      const double b = half_filling_qfi(make(2, j2, j, 100)).qfi / 100;
      CHECK(std::abs(a - b) < 0.01 * b);
    }
  }
  SUBCASE("both derivative routes agree") {
    auto s = make(3, 1.4, 0.7, 12);
    CHECK(half_filling_qfi(s, BandQfiMethod::finite_difference).qfi ==
          doctest::Approx(half_filling_qfi(s).qfi).epsilon(1e-6));
  }
  SUBCASE("size scaling") {
    std::vector<std::pair<double, double>> crit, bulk;
    for (int l : {50, 100, 200, 400}) {
      crit.emplace_back(4 * l, half_filling_qfi(make(2, 2.0, 2.001, l)).qfi);
      bulk.emplace_back(4 * l, half_filling_qfi(make(2, 2.0, 1.0, l)).qfi);
    }
    CHECK(loglog_slope(crit).slope == doctest::Approx(2.0).epsilon(0.075));
    CHECK(loglog_slope(bulk).slope == doctest::Approx(1.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(half_filling_qfi(make(2, 2.0, 1.0, 1)), ValidationError);
}

TEST_CASE("topological index") {
  SUBCASE("values around the r = 2 boundaries") {
    const std::vector<std::pair<double, int>> expect{
        {3.0, 1}, {1.5, 3}, {1.0, 3}, {0.7, 3}, {0.3, 2}, {0.1, 2}};
    for (auto [j, idx] : expect) {
      auto w = winding_number(make(2, 2.0, j));
      INFO("J = " << j);
      CHECK(w.index == idx);
      CHECK(w.residual < 0.05);
      CHECK(w.zak_phases.size() == 3);
    }
  }
  SUBCASE("constant between boundaries, quantized everywhere") {
    for (double j2 : {2.0, 0.6}) {
      const double lo = std::min(j2, 1 / j2), hi = std::max(j2, 1 / j2);
      int last_region = -1, last_index = -1;
      for (int i = 0; i < 60; ++i) {
        const double j = std::exp(std::log(0.08) + (std::log(6.0) - std::log(0.08)) * i / 59);
        if (std::abs(j - lo) < 0.02 || std::abs(j - hi) < 0.02) continue;
        auto w = winding_number(make(2, j2, j));
        CHECK(w.residual < 0.05);
        const int region = (j > lo) + (j > hi);
        if (region == last_region) CHECK(w.index == last_index);
        last_region = region;
        last_index = w.index;
      }
    }
  }
  SUBCASE("index counts the edge modes of an open chain") {
    for (int r : {1, 2, 3}) {
      for (double j : {0.1, 0.3, 1.0, 3.0}) {
        auto s = make(r, 2.0, j);
        if (std::abs(j - 2.0) < 0.1 || std::abs(j - std::pow(2.0, 1 - r)) < 0.05) continue;
        int edges = 0;
        for (int c : edge_mode_counts(s)) edges += c;
        INFO("r = " << r << " J = " << j);
        CHECK(edges == winding_number(s).index);
      }
    }
  }
  SUBCASE("determinant winding changes across the zero-energy closing") {
    CHECK(std::abs(winding_number(make(2, 2.0, 1.0)).determinant_winding) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(winding_number(make(2, 2.0, 0.3)).determinant_winding ==
          doctest::Approx(0.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(winding_number(make(2, 2.0, 2.0)), GapClosedError);
  CHECK_THROWS_AS(winding_number(make(2, 2.0, 0.5)), GapClosedError);
}

TEST_CASE("gap closings at J = J2 and J = J2^(1-r)") {
  for (int r : {2, 3}) {
    for (double j2 : {2.0, 0.6}) {
      auto closings = find_gap_closings(j2, r);
      bool at_j2 = false, at_zero = false;
      for (const auto& c : closings) {
        INFO("r=" << r << " J2=" << j2 << " J=" << c.inter_coupling << " gap " << c.gap);
        const bool near_j2 = std::abs(c.inter_coupling - j2) < 1e-3;
        const bool near_zero = std::abs(c.inter_coupling - std::pow(j2, 1 - r)) < 1e-3;
        CHECK((near_j2 || near_zero));
        at_j2 |= near_j2 && !c.zero_energy;
        at_zero |= near_zero && c.zero_energy;
        CHECK(c.width < 1e-6);
      }
      CHECK(at_j2);
      CHECK(at_zero);
    }
  }
}
