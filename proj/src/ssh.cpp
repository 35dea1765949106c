#include "modsense/ssh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "modsense/errors.hpp"
#include "modsense/minimize.hpp"

namespace modsense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerate = 1e-10;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void fix_phase(Eigen::MatrixXcd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const double mx = v.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, c));
      if (a >= mx * (1.0 - 1e-9)) {
        v.col(c) *= std::conj(v(i, c)) / a;
        v(i, c) = a;
        break;
      }
    }
  }
}

BandPoint diagonalize(const Eigen::MatrixXcd& h, double p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericalError("Bloch eigensolver failed");
  BandPoint out;
  out.momentum = p;
  out.energies = es.eigenvalues();
  out.vectors = es.eigenvectors();
  fix_phase(out.vectors);
  return out;
}

double min_separation(const Eigen::VectorXd& e, int band) {
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < e.size(); ++c)
    if (c != band) d = std::min(d, std::abs(e[c] - e[band]));
  return d;
}

// Cell rotated so that the inter-cell bond is the central intra-cell bond.
std::vector<double> central_cut_bonds(const SSHChainSpec& spec) {
  const auto bonds = ssh_cell_bonds(spec);
  const int r = spec.dimers_per_cell;
  std::vector<double> cut(bonds.begin() + r, bonds.end());
  cut.insert(cut.end(), bonds.begin(), bonds.begin() + r);
  return cut;
}

}  // namespace

void SSHChainSpec::validate() const {
  if (dimers_per_cell < 1) throw ValidationError("dimers_per_cell must be >= 1");
  if (n_cells < 1) throw ValidationError("n_cells must be >= 1");
  if (!positive_finite(j1) || !positive_finite(j2) || !positive_finite(inter_coupling))
    throw ValidationError("SSH couplings must be positive and finite");
}

std::vector<double> ssh_cell_bonds(const SSHChainSpec& spec) {
  spec.validate();
  const int n = spec.cell_sites();
  std::vector<double> b(n);
  for (int k = 0; k + 1 < n; ++k) b[k] = k % 2 == 0 ? spec.j1 : spec.j2;
  b[n - 1] = spec.inter_coupling;
  return b;
}

Eigen::MatrixXcd bloch_from_bonds(const std::vector<double>& bonds, double p) {
  const int n = static_cast<int>(bonds.size());
  if (n < 2 || n % 2 != 0) throw ValidationError("a cell needs an even number of bonds");
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) h(k, k + 1) = h(k + 1, k) = bonds[k];
  const std::complex<double> phase = std::polar(1.0, -p);
  h(0, n - 1) += bonds[n - 1] * phase;
  h(n - 1, 0) += bonds[n - 1] * std::conj(phase);
  return h;
}

Eigen::MatrixXcd build_bloch(const SSHChainSpec& spec, double p) {
  return bloch_from_bonds(ssh_cell_bonds(spec), p);
}

Eigen::MatrixXcd bloch_j2_derivative(const SSHChainSpec& spec) {
  spec.validate();
  const int n = spec.cell_sites();
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k + 1 < n; k += 2) d(k, k + 1) = d(k + 1, k) = 1.0;
  return d;
}

std::vector<double> ssh_momentum_grid(int n_cells) {
  if (n_cells < 1) throw ValidationError("n_cells must be >= 1");
  std::vector<double> p(n_cells);
  for (int k = 0; k < n_cells; ++k) {
    p[k] = kPi * (2.0 * k / n_cells);
    if (p[k] > kPi) p[k] -= 2.0 * kPi;
  }
  return p;
}

BandPoint bloch_bands(const SSHChainSpec& spec, double p) {
  return diagonalize(build_bloch(spec, p), p);
}

BandStructure band_structure(const SSHChainSpec& spec, const std::vector<double>& grid) {
  BandStructure out;
  out.occupied = spec.dimers_per_cell;
  out.points.reserve(grid.size());
  for (double p : grid) out.points.push_back(bloch_bands(spec, p));
  return out;
}

BandQfi band_qfi(const SSHChainSpec& spec, int band, double p, BandQfiMethod method,
                 double step) {
  if (band < 0 || band >= spec.cell_sites()) throw ValidationError("band index out of range");
  const BandPoint centre = bloch_bands(spec, p);
  BandQfi out;
  if (min_separation(centre.energies, band) < kDegenerate) {
    out.degenerate = true;
    out.susceptibility = out.qfi = std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::VectorXcd psi = centre.vectors.col(band);

  if (method == BandQfiMethod::sum_over_states) {
    const Eigen::VectorXcd dh_psi = bloch_j2_derivative(spec) * psi;
    double chi = 0.0;
    for (int c = 0; c < spec.cell_sites(); ++c) {
      if (c == band) continue;
      const double de = centre.energies[band] - centre.energies[c];
      chi += std::norm(centre.vectors.col(c).dot(dh_psi)) / (de * de);
    }
    out.susceptibility = chi;
  } else {
    const double eps = step > 0.0 ? step : 1e-6 * std::max(1.0, spec.j2);
    if (spec.j2 - eps <= 0.0) throw ValidationError("J2 step reaches zero coupling");
    auto aligned = [&](double j2) {
      SSHChainSpec s = spec;
      s.j2 = j2;
      Eigen::VectorXcd v = bloch_bands(s, p).vectors.col(band);
      const std::complex<double> o = psi.dot(v);
      return Eigen::VectorXcd(v * (std::conj(o) / std::abs(o)));
    };
    const Eigen::VectorXcd d = (aligned(spec.j2 + eps) - aligned(spec.j2 - eps)) / (2.0 * eps);
    out.susceptibility = std::max(0.0, d.squaredNorm() - std::norm(psi.dot(d)));
  }
  out.qfi = 4.0 * out.susceptibility;
  return out;
}

HalfFillingQfi half_filling_qfi(const SSHChainSpec& spec, BandQfiMethod method) {
  spec.validate();
  if (spec.n_cells < 2) throw ValidationError("half-filling QFI needs at least 2 cells");
  HalfFillingQfi out;
  for (double p : ssh_momentum_grid(spec.n_cells)) {
    for (int b = 0; b < spec.dimers_per_cell; ++b) {
      const BandQfi q = band_qfi(spec, b, p, method);
      if (q.degenerate) {
        if (!out.divergent) {
          out.band = b;
          out.momentum = p;
        }
        out.divergent = true;
        continue;
      }
      out.susceptibility += q.susceptibility;
    }
  }
  if (out.divergent) out.susceptibility = std::numeric_limits<double>::infinity();
  out.qfi = 4.0 * out.susceptibility;
  return out;
}

namespace ssh_r2 {

std::array<double, 2> omegas(double j2, double j, double p) {
  const double s = j2 * j2 + j * j + 2.0;
  const double prod = 1.0 + j2 * j2 * j * j - 2.0 * j2 * j * std::cos(p);
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * prod));
  const double w2sq = 0.5 * (s + disc);
  // omega_1^2 omega_2^2 = prod keeps the small root accurate.
  const double w1sq = std::max(0.0, prod) / w2sq;
  return {std::sqrt(w1sq), std::sqrt(w2sq)};
}

Amplitudes amplitudes(double j2, double j, double p, double omega) {
  const double x = omega * omega;
  const double s = j2 * j2 + j * j + 2.0;
  const double ds = 2.0 * j2;
  const double dprod = 2.0 * j2 * j * j - 2.0 * j * std::cos(p);
  // x solves x^2 - s x + prod = 0.
  const double dx = (x * ds - dprod) / (2.0 * x - s);
  const double dw = dx / (2.0 * omega);
  const std::complex<double> e = std::polar(1.0, -p);
  Amplitudes a;
  a.v << j * (x - j2 * j2) * e + j2, omega * (j2 + j * e), (x - 1.0) + j * j2 * e,
      -omega * (1.0 + j2 * j2 - x);
  a.dv << j * (dx - 2.0 * j2) * e + 1.0, dw * (j2 + j * e) + omega, dx + j * e,
      -dw * (1.0 + j2 * j2 - x) - omega * (2.0 * j2 - dx);
  return a;
}

BandQfi band_qfi(double j2, double j, double p, int band) {
  if (band < 0 || band > 3) throw ValidationError("r = 2 has bands 0..3");
  const auto w = omegas(j2, j, p);
  BandQfi out;
  if (w[0] < kDegenerate || w[1] - w[0] < kDegenerate) {
    out.degenerate = true;
    out.susceptibility = out.qfi = std::numeric_limits<double>::infinity();
    return out;
  }
  const double omega = std::array<double, 4>{-w[1], -w[0], w[0], w[1]}[band];
  const Amplitudes a = amplitudes(j2, j, p, omega);
  const double n2 = a.v.squaredNorm();
  if (!(n2 > 1e-24)) throw NumericalError("closed-form eigenvector vanishes at this momentum");
  out.susceptibility =
      std::max(0.0, a.dv.squaredNorm() / n2 - std::norm(a.v.dot(a.dv)) / (n2 * n2));
  out.qfi = 4.0 * out.susceptibility;
  return out;
}

}  // namespace ssh_r2

WindingResult winding_number(const SSHChainSpec& spec, int samples) {
  spec.validate();
  if (samples < 8) throw ValidationError("winding number needs at least 8 momenta");
  const int n = spec.cell_sites();
  const int r = spec.dimers_per_cell;
  const auto cut = central_cut_bonds(spec);
  const auto bonds = ssh_cell_bonds(spec);

  // Closings between sampled momenta (p = pi is not on an odd grid).
  for (int g = 0; g + 1 < n; ++g) {
    const auto [w, p] = minimum_gap(spec, g);
    if (w < 1e-8) {
      std::ostringstream msg;
      msg << "gap " << g << " closes at p = " << p << "; the index is undefined";
      throw GapClosedError(msg.str(), p);
    }
  }

  std::vector<Eigen::MatrixXcd> frames(samples);
  for (int k = 0; k < samples; ++k) {
    const double p = 2.0 * kPi * k / samples;
    const BandPoint bp = diagonalize(bloch_from_bonds(cut, p), p);
    for (int g = 0; g + 1 < n; ++g) {
      if (bp.energies[g + 1] - bp.energies[g] < 1e-8) {
        std::ostringstream msg;
        msg << "gap " << g << " closes at p = " << p << "; the index is undefined";
        throw GapClosedError(msg.str(), p);
      }
    }
    frames[k] = bp.vectors;
  }

  // Wilson loop of the lowest g bands for each gap.
  std::vector<double> phase(n - 1, 0.0);
  for (int k = 0; k < samples; ++k) {
    const Eigen::MatrixXcd o = frames[k].adjoint() * frames[(k + 1) % samples];
    for (int g = 1; g < n; ++g)
      phase[g - 1] += std::arg(o.topLeftCorner(g, g).determinant());
  }

  WindingResult out;
  out.j2 = spec.j2;
  out.inter_coupling = spec.inter_coupling;
  out.dimers_per_cell = r;
  out.samples = samples;
  for (double ph : phase) {
    const double wrapped = std::remainder(-ph, 2.0 * kPi);
    const double z = std::abs(wrapped) / kPi;
    out.zak_phases.push_back(z);
    out.index += static_cast<int>(std::lround(z));
    out.residual = std::max(out.residual, std::abs(z - std::round(z)));
  }

  // det h(p) with h = H[even sites, odd sites] of the original cell.
  auto det_h = [&](double p) {
    const Eigen::MatrixXcd h = bloch_from_bonds(bonds, p);
    Eigen::MatrixXcd block(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) block(a, b) = h(2 * a, 2 * b + 1);
    return block.determinant();
  };
  double total = 0.0;
  std::complex<double> prev = det_h(0.0);
  for (int k = 1; k <= samples; ++k) {
    const std::complex<double> cur = det_h(2.0 * kPi * k / samples);
    total += std::arg(cur / prev);
    prev = cur;
  }
  out.determinant_winding = total / (2.0 * kPi);
  return out;
}

std::pair<double, double> minimum_gap(const SSHChainSpec& spec, int gap) {
  if (gap < 0 || gap + 1 >= spec.cell_sites()) throw ValidationError("gap index out of range");
  auto width = [&](double p) {
    const BandPoint bp = bloch_bands(spec, p);
    return bp.energies[gap + 1] - bp.energies[gap];
  };
  // E(p) = E(-p), so [0, pi] suffices.
  constexpr int m = 128;
  int best = 0;
  std::vector<double> w(m + 1);
  for (int i = 0; i <= m; ++i) {
    w[i] = width(kPi * i / m);
    if (w[i] < w[best]) best = i;
  }
  const double lo = kPi * std::max(0, best - 1) / m;
  const double hi = kPi * std::min(m, best + 1) / m;
  const ScalarMinimum r = minimize_scalar(width, lo, hi);
  if (r.value < w[best]) return {r.value, r.x};
  return {w[best], kPi * best / m};
}

std::vector<int> edge_mode_counts(const SSHChainSpec& spec, int n_cells) {
  spec.validate();
  if (n_cells < 2) throw ValidationError("edge modes need at least 2 cells");
  const int n = spec.cell_sites();
  const auto cut = central_cut_bonds(spec);

  // Bulk band edges.
  std::vector<double> lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
  constexpr int m = 512;
  for (int i = 0; i <= m; ++i) {
    const double p = kPi * i / m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bloch_from_bonds(cut, p),
                                                       Eigen::EigenvaluesOnly);
    for (int b = 0; b < n; ++b) {
      lo[b] = std::min(lo[b], es.eigenvalues()[b]);
      hi[b] = std::max(hi[b], es.eigenvalues()[b]);
    }
  }

  const int sites = n * n_cells;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(sites, sites);
  for (int i = 0; i + 1 < sites; ++i) h(i, i + 1) = h(i + 1, i) = cut[i % n];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);

  std::vector<int> counts(n - 1, -1);
  for (int g = 0; g + 1 < n; ++g) {
    const double a = hi[g], b = lo[g + 1];
    const double margin = 1e-6 * std::max(1.0, b - a);
    if (b - a <= 2.0 * margin) continue;
    int c = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double e = es.eigenvalues()[i];
      if (e > a + margin && e < b - margin) ++c;
    }
    counts[g] = c / 2;
  }
  return counts;
}

std::vector<GapClosing> find_gap_closings(double j2, int dimers_per_cell, double j_min,
                                          double j_max, int samples, double threshold) {
  if (!(j_min > 0.0) || !(j_max > j_min)) throw ValidationError("invalid J range");
  if (samples < 3) throw ValidationError("need at least 3 J samples");
  SSHChainSpec spec;
  spec.dimers_per_cell = dimers_per_cell;
  spec.j2 = j2;
  spec.n_cells = 1;
  spec.validate();
  const int gaps = spec.cell_sites() - 1;

  std::vector<double> js(samples);
  const double a = std::log(j_min), b = std::log(j_max);
  for (int i = 0; i < samples; ++i) js[i] = std::exp(a + (b - a) * i / (samples - 1));
  std::vector<std::vector<double>> width(gaps, std::vector<double>(samples));
  for (int i = 0; i < samples; ++i) {
    spec.inter_coupling = js[i];
    for (int g = 0; g < gaps; ++g) width[g][i] = minimum_gap(spec, g).first;
  }

  std::vector<GapClosing> out;
  for (int g = 0; g < gaps; ++g) {
    for (int i = 1; i + 1 < samples; ++i) {
      if (!(width[g][i] < width[g][i - 1] && width[g][i] <= width[g][i + 1])) continue;
      auto f = [&](double j) {
        SSHChainSpec s = spec;
        s.inter_coupling = j;
        return minimum_gap(s, g).first;
      };
      const ScalarMinimum m = minimize_scalar(f, js[i - 1], js[i + 1], 52);
      if (m.value >= threshold) continue;
      SSHChainSpec s = spec;
      s.inter_coupling = m.x;
      GapClosing c;
      c.inter_coupling = m.x;
      c.gap = g;
      c.zero_energy = g == dimers_per_cell - 1;
      c.momentum = minimum_gap(s, g).second;
      c.width = m.value;
      out.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const GapClosing& x, const GapClosing& y) {
    return x.inter_coupling < y.inter_coupling;
  });
  return out;
}

}  // namespace modsense
