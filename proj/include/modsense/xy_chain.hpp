#pragma once

// Modular transverse XY chain in its free-fermion (Bogoliubov-de Gennes) form.
//
//   H = -1/2 sum_j J_{j,j+1} [(1+g) X_j X_{j+1} + (1-g) Y_j Y_{j+1}] + sum_j h_j Z_j
//
// The chain holds n_cells identical cells of cell_size sites. Bonds inside a
// cell carry intra_coupling, the bond leaving the last site of a cell carries
// inter_coupling. After Jordan-Wigner (Z_j = 2 n_j - 1) the Hamiltonian is
// Psi^dag Ht Psi with Psi = (c_1..c_N, c_1^dag..c_N^dag) and
// Ht = [[A, B], [-B, -A]].

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace modsense {

enum class Boundary { periodic, antiperiodic, open };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct XYChainSpec {
  int n_sites = 2;
  int cell_size = 1;
  int n_cells = 2;
  double intra_coupling = 1.0;
  double inter_coupling = 1.0;
  double anisotropy = 1.0;
  double field = 0.0;
  // Optional per-site additions to the uniform field (empty or n_sites long).
  std::vector<double> field_offsets;
  Boundary boundary = Boundary::antiperiodic;

  // Throws ValidationError when the description is inconsistent.
  void validate() const;

  double site_field(int j) const;
  bool translation_invariant() const;

  // Convenience constructor deriving n_cells = n_sites / cell_size.
  static XYChainSpec modular(int n_sites, int cell_size, double inter_coupling,
                             double anisotropy, double field,
                             Boundary boundary = Boundary::antiperiodic);
  static XYChainSpec uniform(int n_sites, double anisotropy, double field,
                             Boundary boundary = Boundary::antiperiodic);
};

// Parameters a ground state can be differentiated with respect to.
enum class Parameter { field, inter_coupling, anisotropy };

std::string to_string(Parameter p);
Parameter parameter_from_string(const std::string& s);
double parameter_value(const XYChainSpec& spec, Parameter p);
XYChainSpec with_parameter(XYChainSpec spec, Parameter p, double value);

// Bond j joins site j and site (j+1) mod N. Periodic and antiperiodic chains
// carry N bonds (none for N = 1), open chains N-1.
std::vector<double> build_couplings(const XYChainSpec& spec);

struct BdGMatrix {
  Eigen::MatrixXd a;  // symmetric
  Eigen::MatrixXd b;  // antisymmetric

  int n() const { return static_cast<int>(a.rows()); }
  // The full 2N x 2N layout [[A, B], [-B, -A]].
  Eigen::MatrixXd dense() const;
};

BdGMatrix build_bdg_matrix(const XYChainSpec& spec);

// Positive-energy eigenvectors [U; V] of the BdG matrix. Column k belongs to
// energies[k]; energies are sorted ascending and are the positive half of the
// BdG spectrum, i.e. Ht [U;V]_k = energies[k] [U;V]_k and
// Ht [V;U]_k = -energies[k] [V;U]_k. A quasiparticle excitation costs
// 2 * energies[k].
struct BogoliubovDecomposition {
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  Eigen::VectorXd energies;

  int n() const { return static_cast<int>(u.rows()); }
  // Energy of the Bogoliubov vacuum, -sum_k energies[k].
  double ground_energy() const;
  // Fermion-number parity (+1 even, -1 odd) of the Bogoliubov vacuum.
  int vacuum_parity() const;
  double min_energy() const;
};

// Diagonalizes through the singular value decomposition of A - B, which is
// equivalent to the 2N x 2N eigenproblem but a factor ~8 cheaper. Columns are
// ordered by ascending energy; each column's largest-magnitude entry of
// [U; V] is made positive; near-degenerate columns are ordered
// lexicographically after gauge fixing.
BogoliubovDecomposition diagonalize_bdg(const BdGMatrix& m);

// Full dense eigenvalues of the 2N x 2N matrix (ascending). Slow reference
// path used to check the particle-hole pairing.
Eigen::VectorXd bdg_spectrum(const BdGMatrix& m);

// Bogoliubov vacuum of the spec's own boundary condition, without any parity
// projection. This is the state used by default for QFI calculations.
BogoliubovDecomposition ground_state(const XYChainSpec& spec);

// Lowest state of one Jordan-Wigner parity sector of a periodic spin ring.
// The even sector sees antiperiodic fermions, the odd sector periodic ones.
// When the sector's vacuum has the wrong parity the lowest mode is occupied
// (its columns swap U <-> V), which is again a Gaussian state.
struct SectorGroundState {
  BogoliubovDecomposition modes;
  double energy = 0.0;
  int parity = 1;  // fermion-number parity of the state, +1 or -1
  bool mode_flipped = false;
};

SectorGroundState sector_ground_state(const XYChainSpec& spec, int parity);

// Ground state of the spin chain described by spec. Open chains map onto a
// single fermionic problem. For rings both parity sectors are solved and the
// lower energy wins (ties go to the even sector).
SectorGroundState spin_ground_state(const XYChainSpec& spec);

// FNV-1a over the raw bytes of a matrix; used to tag numerical failures.
std::uint64_t matrix_fingerprint(const Eigen::MatrixXd& m);

}  // namespace modsense
