#pragma once

// Momentum-space form of a translation-invariant modular XY chain.
//
// With c_{n,a} = l^{-1/2} sum_q e^{iqn} c_{q,a}, the BdG matrix splits into l
// blocks of size 2r acting on (c_{q,1..r}, c^dag_{-q,1..r}):
//
//   H_q = [[A_q, B_q], [B_q^dag, -A_q]]
//
// Antiperiodic chains use q = 2 pi (m + 1/2) / l, periodic ones q = 2 pi m / l.
// The real-space overlap matrix W = U^dag U' + V^dag V' is unitarily
// equivalent to the direct sum of per-block W_q, so fidelities factorize.

#include <Eigen/Dense>

#include <vector>

#include "modsense/xy_chain.hpp"

namespace modsense {

struct MomentumBlock {
  double momentum = 0.0;
  Eigen::VectorXd energies;       // all 2r eigenvalues, ascending
  Eigen::MatrixXcd positive;      // 2r x r, eigenvectors of the upper r energies
  Eigen::MatrixXcd negative;      // 2r x r, eigenvectors of the lower r energies
};

struct BlochDecomposition {
  std::vector<MomentumBlock> blocks;
  int cell_size = 1;

  double ground_energy() const;
  // Smallest positive single-particle energy over all blocks.
  double min_energy() const;
};

std::vector<double> bloch_momenta(const XYChainSpec& spec);

// 2r x 2r Hermitian block at momentum q. Requires spec.translation_invariant().
Eigen::MatrixXcd bloch_bdg_block(const XYChainSpec& spec, double q);

BlochDecomposition diagonalize_bloch(const XYChainSpec& spec);

// Sum over blocks of log(1 - s^2) where s are the sines of principal angles
// between the vacua of a and b (singular values of Y_a^dag X_b). The fidelity
// is |<a|b>| = exp(sum / 4).
double bloch_log_cos_squared(const BlochDecomposition& a,
                             const BlochDecomposition& b);

}  // namespace modsense
