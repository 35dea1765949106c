#pragma once

// Modular SSH chain: cells of 2r sites with hoppings 1, J2, 1, J2, ..., 1
// inside the cell and J between cells. The Bloch Hamiltonian is the 2r x 2r
// hopping matrix of one cell with the inter-cell bond folded into the corner
// as J e^{-ip} (row 0, column 2r-1).
//
// QFI convention: band and half-filling results carry the fidelity
// susceptibility chi = <d psi|d psi> - |<psi|d psi>|^2 with respect to J2 and
// report qfi = 4 chi, the same normalization as the XY chain.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace modsense {

struct SSHChainSpec {
  int dimers_per_cell = 2;  // r
  double j1 = 1.0;
  double j2 = 2.0;
  double inter_coupling = 1.0;  // J
  int n_cells = 100;            // l

  void validate() const;
  int cell_sites() const { return 2 * dimers_per_cell; }
  int n_sites() const { return 2 * dimers_per_cell * n_cells; }
};

// Bond k joins cell sites k and k+1; the last one (k = 2r-1) is the
// inter-cell bond. Entries: j1 on even k, j2 on odd k, J last.
std::vector<double> ssh_cell_bonds(const SSHChainSpec& spec);

Eigen::MatrixXcd build_bloch(const SSHChainSpec& spec, double p);
// Same layout for an arbitrary list of 2r bonds (last = inter-cell bond).
Eigen::MatrixXcd bloch_from_bonds(const std::vector<double>& bonds, double p);
// dH/dJ2 of the Bloch matrix (independent of p).
Eigen::MatrixXcd bloch_j2_derivative(const SSHChainSpec& spec);

// p_k = 2 pi k / l mapped into (-pi, pi], k = 0..l-1.
std::vector<double> ssh_momentum_grid(int n_cells);

struct BandPoint {
  double momentum = 0.0;
  Eigen::VectorXd energies;   // ascending
  Eigen::MatrixXcd vectors;   // column b belongs to energies[b]
};

struct BandStructure {
  std::vector<BandPoint> points;
  int occupied = 0;  // lowest r bands at half filling
};

// Bands with each eigenvector's largest-magnitude component made real and
// positive (the first among near-equal maxima).
BandPoint bloch_bands(const SSHChainSpec& spec, double p);
BandStructure band_structure(const SSHChainSpec& spec, const std::vector<double>& grid);

enum class BandQfiMethod {
  // Phase-aligned central differences in J2 (step 1e-6 * max(1, J2)).
  finite_difference,
  // chi_b = sum_{c != b} |<c|dH|b>|^2 / (E_b - E_c)^2.
  sum_over_states,
};

struct BandQfi {
  double susceptibility = 0.0;
  double qfi = 0.0;
  // Band b is within 1e-10 of another band; both fields are then +inf.
  bool degenerate = false;
};

BandQfi band_qfi(const SSHChainSpec& spec, int band, double p,
                 BandQfiMethod method = BandQfiMethod::finite_difference,
                 double step = 0.0);

struct HalfFillingQfi {
  double susceptibility = 0.0;
  double qfi = 0.0;
  bool divergent = false;
  // First degenerate (band, momentum) when divergent.
  int band = -1;
  double momentum = 0.0;
};

// Sum of band QFIs over the occupied bands and the l crystal momenta.
HalfFillingQfi half_filling_qfi(const SSHChainSpec& spec,
                                BandQfiMethod method = BandQfiMethod::sum_over_states);

// Closed forms for r = 2 with J0 = J2 (j1 = 1).
namespace ssh_r2 {

// Positive energies omega_1 <= omega_2.
std::array<double, 2> omegas(double j2, double j, double p);
// Unnormalized eigenvector (alpha, beta, gamma, delta) for energy omega,
// together with its J2 derivative at fixed p.
struct Amplitudes {
  Eigen::Vector4cd v;
  Eigen::Vector4cd dv;
};
Amplitudes amplitudes(double j2, double j, double p, double omega);
// Band b = 0..3 in ascending order (-w2, -w1, w1, w2).
BandQfi band_qfi(double j2, double j, double p, int band);

}  // namespace ssh_r2

struct WindingResult {
  // Number of bulk gaps whose Zak phase (bands below the gap, cell cut at
  // its central bond so that the cell is inversion symmetric) equals pi.
  int index = 0;
  // Zak phase / pi per gap, in [0, 1].
  std::vector<double> zak_phases;
  // Largest distance of a Zak phase / pi from the nearest integer.
  double residual = 0.0;
  // Winding of det h(p), h the sublattice off-diagonal block of the Bloch
  // matrix; reported alongside the index.
  double determinant_winding = 0.0;
  double j2 = 0.0;
  double inter_coupling = 0.0;
  int dimers_per_cell = 0;
  int samples = 0;
};

// Throws GapClosedError naming the momentum when any bulk gap at a sampled
// momentum is below 1e-8.
WindingResult winding_number(const SSHChainSpec& spec, int samples = 401);

// In-gap states per end of an open chain of n_cells central-cut cells.
std::vector<int> edge_mode_counts(const SSHChainSpec& spec, int n_cells = 60);

struct GapClosing {
  double inter_coupling = 0.0;
  int gap = 0;  // between bands gap and gap+1
  bool zero_energy = false;
  double momentum = 0.0;
  double width = 0.0;  // residual gap at the located point
};

// Scans J on a logarithmic grid and refines every local minimum of each
// bulk gap; minima narrower than `threshold` are reported, ordered by J.
std::vector<GapClosing> find_gap_closings(double j2, int dimers_per_cell,
                                          double j_min = 0.05, double j_max = 20.0,
                                          int samples = 400, double threshold = 1e-6);

// Smallest width of bulk gap `gap` over the Brillouin zone, and where.
std::pair<double, double> minimum_gap(const SSHChainSpec& spec, int gap);

}  // namespace modsense
