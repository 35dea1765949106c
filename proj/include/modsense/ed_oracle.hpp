#pragma once

// Exact diagonalization of the spin-1/2 modular XY chain (N <= 12), used as
// an independent reference for the free-fermion engine.
//
// Basis state index bit j is 0 when spin j points up (Z_j = +1). A ring is
// always the periodic spin ring; the fermionic boundary label of the spec is
// ignored here, the parity sector plays its role instead.

#include <Eigen/Dense>

#include "modsense/qfi.hpp"
#include "modsense/xy_chain.hpp"

namespace modsense {

inline constexpr int kMaxEdSites = 12;

struct SpinHamiltonian {
  Eigen::MatrixXd matrix;
  XYChainSpec spec;
};

SpinHamiltonian build_spin_hamiltonian(const XYChainSpec& spec);

// Fermion-number parity (-1)^(number of up spins) of each basis state. The
// spin-flip parity prod Z_j differs from it by (-1)^N.
Eigen::VectorXd fermion_parity_diagonal(int n_sites);

struct EdGroundState {
  Eigen::VectorXd state;  // full 2^N vector, zero outside the sector
  double energy = 0.0;
  // Distance to the next level inside the same sector.
  double gap = 0.0;
  int parity = 1;
};

// sector = +1 or -1 restricts to that fermion parity; 0 solves both sectors
// and keeps the lower one (ties go to even).
EdGroundState ed_ground_state(const XYChainSpec& spec, int sector = 0);

// |<a|b>| from two normalized states.
double ed_overlap(const EdGroundState& a, const EdGroundState& b);

struct EdQfiOptions {
  // 0 selects 1e-3 * max(1, |lambda|).
  double step = 0.0;
  bool richardson = true;
  // 0 follows the sector that holds the ground state at the central value.
  int sector = 0;
};

// Centered fidelity QFI, Q = 8 (1 - F) / e^2, with 1 - F evaluated as
// |b - a <a|b>|^2 / (1 + F) to avoid cancellation. Throws GapClosedError if
// the followed state is degenerate within its sector (gap < 1e-10).
QfiResult qfi_ed(const XYChainSpec& spec, Parameter parameter,
                 const EdQfiOptions& options = {});

}  // namespace modsense
