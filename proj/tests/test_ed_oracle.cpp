#include <cmath>
#include <random>

#include "doctest.h"
#include "modsense/ed_oracle.hpp"
#include "modsense/errors.hpp"
#include "modsense/qfi.hpp"

using namespace modsense;

TEST_CASE("single Zeeman term") {
  auto h = build_spin_hamiltonian(XYChainSpec::uniform(1, 0.5, 0.3, Boundary::open));
  REQUIRE(h.matrix.rows() == 2);
  CHECK(h.matrix(0, 0) == doctest::Approx(0.3));
  CHECK(h.matrix(1, 1) == doctest::Approx(-0.3));
  CHECK(h.matrix(0, 1) == 0.0);
}

TEST_CASE("two-site Ising bond") {
  // -XX on two open sites: eigenvalues -1, -1, 1, 1.
  auto h = build_spin_hamiltonian(XYChainSpec::uniform(2, 1.0, 0.0, Boundary::open));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix);
  CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[2] == doctest::Approx(1.0));
  CHECK(es.eigenvalues()[3] == doctest::Approx(1.0));
  CHECK(ed_ground_state(XYChainSpec::uniform(2, 1.0, 0.0, Boundary::open)).energy ==
        doctest::Approx(-1.0));
}

TEST_CASE("size limit") {
  CHECK_THROWS_AS(build_spin_hamiltonian(XYChainSpec::uniform(13, 0.5, 0.1)),
                  ValidationError);
}

TEST_CASE("Hamiltonian symmetry and parity conservation") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int r = 1 + trial % 3;
    const int n = r * (1 + trial % 3) + (r == 1 ? 2 : 0);
    auto spec = XYChainSpec::modular(n, r, u(rng), u(rng), u(rng),
                                     static_cast<Boundary>(trial % 3));
    spec.field_offsets.resize(n);
    for (double& x : spec.field_offsets) x = 0.2 * u(rng);
    auto h = build_spin_hamiltonian(spec);
    CHECK((h.matrix - h.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd p = fermion_parity_diagonal(n);
    const Eigen::MatrixXd comm =
        p.asDiagonal() * h.matrix - h.matrix * p.asDiagonal();
    CHECK(comm.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("single site QFI vanishes") {
  auto spec = XYChainSpec::uniform(1, 0.5, 0.3, Boundary::periodic);
  CHECK(qfi_ed(spec, Parameter::field).value == doctest::Approx(0.0));
}

TEST_CASE("ED QFI agrees with the free-fermion engine") {
  QfiOptions ff;
  ff.mode = GroundStateMode::spin_sector;
  SUBCASE("uniform Ising, N=8") {
    auto spec = XYChainSpec::uniform(8, 1.0, 0.5, Boundary::periodic);
    const double ed = qfi_ed(spec, Parameter::field).value;
    const double q = qfi_finite_difference(spec, Parameter::field, ff).value;
    CHECK(q == doctest::Approx(ed).epsilon(1e-6));
  }
  SUBCASE("modular r=2 at a critical field, N=8") {
    auto spec = XYChainSpec::modular(8, 2, 0.4, 0.3, 0.214, Boundary::periodic);
    const double ed = qfi_ed(spec, Parameter::field).value;
    const double q = qfi_finite_difference(spec, Parameter::field, ff).value;
    CHECK(q == doctest::Approx(ed).epsilon(1e-6));
  }
  SUBCASE("open chain, coupling parameter") {
    auto spec = XYChainSpec::modular(9, 3, 0.6, 0.5, 0.8, Boundary::open);
    const double ed = qfi_ed(spec, Parameter::inter_coupling).value;
    const double q =
        qfi_finite_difference(spec, Parameter::inter_coupling).value;
    CHECK(q == doctest::Approx(ed).epsilon(1e-6));
  }
}

TEST_CASE("deep paramagnet QFI grows linearly with N") {
  const double q8 =
      qfi_ed(XYChainSpec::uniform(8, 0.3, 10.0, Boundary::periodic), Parameter::field).value;
  const double q10 =
      qfi_ed(XYChainSpec::uniform(10, 0.3, 10.0, Boundary::periodic), Parameter::field).value;
  CHECK(q10 / q8 == doctest::Approx(10.0 / 8.0).epsilon(1e-3));
  const double ff10 = qfi_finite_difference(
      XYChainSpec::uniform(10, 0.3, 10.0, Boundary::antiperiodic), Parameter::field).value;
  CHECK(ff10 == doctest::Approx(q10).epsilon(1e-6));
}
