#pragma once

// Ground-state quantum Fisher information of the modular XY chain.
//
// Q = 4 (<d psi|d psi> - |<psi|d psi>|^2) is obtained from the fidelity
// F(l - e/2, l + e/2) = |<psi(l - e/2)|psi(l + e/2)>| as Q = 8 (1 - F) / e^2.
// F comes from the Onishi determinant, evaluated through the principal angles
// between the two Bogoliubov vacua so that 1 - F keeps full relative
// precision at small e.

#include <string>
#include <vector>

#include "modsense/xy_chain.hpp"

namespace modsense {

enum class QfiMethod { overlap_finite_difference, trace_formula };

std::string to_string(QfiMethod m);

struct QfiResult {
  double value = 0.0;
  Parameter parameter = Parameter::field;
  double parameter_value = 0.0;
  double step = 0.0;
  QfiMethod method = QfiMethod::overlap_finite_difference;
  XYChainSpec spec;
  // Smallest single-particle energy fell below 1e-12.
  bool gap_closed = false;
  // The two Richardson levels agreed to 1e-4 relative (true when unrefined).
  bool converged = true;
};

// Which state the finite differences follow.
enum class GroundStateMode {
  // Bogoliubov vacuum of the spec's own boundary condition.
  bdg_vacuum,
  // Lowest state of the spin ring's parity sector that hosts the ground
  // state at the central parameter value (see spin_ground_state).
  spin_sector,
};

enum class Solver { automatic, real_space, momentum };

struct QfiOptions {
  // Centered step; 0 selects 1e-5 * max(1, |lambda|).
  double step = 0.0;
  // Combine steps e and e/2 as (4 Q(e/2) - Q(e)) / 3.
  bool richardson = true;
  Solver solver = Solver::automatic;
  GroundStateMode mode = GroundStateMode::bdg_vacuum;
};

// |<psi_1|psi_2>| = sqrt|det(U1^T U2 + V1^T V2)|, clamped to [0, 1].
double onishi_overlap(const BogoliubovDecomposition& d1,
                      const BogoliubovDecomposition& d2);

// log |<psi_1|psi_2>|, computed as 1/4 sum log(1 - s_i^2) with s_i the
// singular values of V1^T U2 + U1^T V2 (sines of the principal angles).
double log_overlap(const BogoliubovDecomposition& d1,
                   const BogoliubovDecomposition& d2);

QfiResult qfi_finite_difference(const XYChainSpec& spec, Parameter parameter,
                                const QfiOptions& options = {});

// Trace-formula route. Eigenvector derivatives come from central differences
// of gauge-aligned [U; V]: the vectors at lambda +- e are rotated onto those
// at lambda by the orthogonal polar factor of their overlap, which handles
// sign flips, reordering and degenerate subspaces alike. With
// M1 = U^T dU + V^T dV and M2 = (U^T d2U + V^T d2V) / 2,
//   Q = -4 Tr M2 + 2 Tr M1^2
//     = 2 (u_term + v_term + interference),
// u_term = Tr[(U^T dU)^2 - U^T d2U], v_term likewise, and
// interference = 2 Tr[U^T dU V^T dV].
struct TraceFormulaResult {
  QfiResult qfi;
  double u_term = 0.0;
  double v_term = 0.0;
  double interference = 0.0;
  double trace_m1 = 0.0;
};

struct TraceOptions {
  // With richardson: first step of a halving ladder (0 selects
  // 1e-2 * max(1, |lambda|)); the level whose extrapolants agree best is
  // kept and reported in QfiResult::step. Without: the single step used
  // (0 selects 2e-4 * max(1, |lambda|)). Levels whose frames cannot be
  // aligned are skipped.
  double step = 0.0;
  bool richardson = true;
  int levels = 10;
};

TraceFormulaResult qfi_trace_formula(const XYChainSpec& spec,
                                     Parameter parameter,
                                     const TraceOptions& options = {});

// Evaluates qfi_finite_difference at every grid value, independently, on up
// to `workers` threads. Output order matches the grid. A failure at grid
// point i is rethrown as NumericalError naming i.
std::vector<QfiResult> qfi_scan(const XYChainSpec& spec, Parameter parameter,
                                const std::vector<double>& grid,
                                const QfiOptions& options = {},
                                int workers = 1);

}  // namespace modsense
