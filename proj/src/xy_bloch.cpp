#include "modsense/xy_bloch.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "modsense/errors.hpp"

namespace modsense {

using cd = std::complex<double>;

std::vector<double> bloch_momenta(const XYChainSpec& spec) {
  const int l = spec.n_cells;
  const double shift = spec.boundary == Boundary::antiperiodic ? 0.5 : 0.0;
  std::vector<double> q(l);
  for (int m = 0; m < l; ++m) q[m] = 2.0 * std::numbers::pi * (m + shift) / l;
  return q;
}

Eigen::MatrixXcd bloch_bdg_block(const XYChainSpec& spec, double q) {
  spec.validate();
  if (!spec.translation_invariant())
    throw ValidationError(
        "momentum blocks need a ring with a cell-periodic field");
  const int r = spec.cell_size;
  const double g = spec.anisotropy;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(r, r);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(r, r);
  for (int i = 0; i < r; ++i) a(i, i) = spec.field;
  for (int i = 0; i + 1 < r; ++i) {
    const double t = spec.intra_coupling;
    a(i, i + 1) += -0.5 * t;
    a(i + 1, i) += -0.5 * t;
    b(i, i + 1) += -0.5 * g * t;
    b(i + 1, i) += 0.5 * g * t;
  }
  // A single-cell ring has no inter-cell bond to itself.
  if (spec.n_cells > 1 || spec.n_sites > 1) {
    const double t = spec.inter_coupling;
    const cd e = std::polar(1.0, q);
    a(r - 1, 0) += -0.5 * t * e;
    a(0, r - 1) += -0.5 * t * std::conj(e);
    b(r - 1, 0) += -0.5 * g * t * e;
    b(0, r - 1) += 0.5 * g * t * std::conj(e);
  }
  Eigen::MatrixXcd h(2 * r, 2 * r);
  h << a, b, b.adjoint(), -a;
  return h;
}

BlochDecomposition diagonalize_bloch(const XYChainSpec& spec) {
  const int r = spec.cell_size;
  BlochDecomposition out;
  out.cell_size = r;
  const auto momenta = bloch_momenta(spec);
  out.blocks.reserve(momenta.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (double q : momenta) {
    es.compute(bloch_bdg_block(spec, q));
    if (es.info() != Eigen::Success)
      throw NumericalError("momentum-block eigensolver did not converge at q=" +
                           std::to_string(q));
    MomentumBlock blk;
    blk.momentum = q;
    blk.energies = es.eigenvalues();
    blk.negative = es.eigenvectors().leftCols(r);
    blk.positive = es.eigenvectors().rightCols(r);
    out.blocks.push_back(std::move(blk));
  }
  return out;
}

double BlochDecomposition::ground_energy() const {
  // Each block's upper half counts every positive real-space energy once.
  double e = 0.0;
  for (const auto& blk : blocks) e -= blk.energies.tail(cell_size).sum();
  return e;
}

double BlochDecomposition::min_energy() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& blk : blocks)
    m = std::min(m, blk.energies.tail(cell_size).minCoeff());
  return m;
}

double bloch_log_cos_squared(const BlochDecomposition& a,
                             const BlochDecomposition& b) {
  if (a.blocks.size() != b.blocks.size() || a.cell_size != b.cell_size)
    throw ValidationError("momentum decompositions have different shapes");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    const Eigen::MatrixXcd z = a.blocks[i].negative.adjoint() * b.blocks[i].positive;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(z);
    for (double s : svd.singularValues()) acc += std::log1p(-std::min(s * s, 1.0));
  }
  return acc;
}

}  // namespace modsense
