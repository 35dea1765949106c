#include "modsense/xy_chain.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "modsense/errors.hpp"

namespace modsense {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::antiperiodic: return "antiperiodic";
    case Boundary::open: return "open";
  }
  return "unknown";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "antiperiodic") return Boundary::antiperiodic;
  if (s == "open") return Boundary::open;
  throw ValidationError("unknown boundary condition '" + s + "'");
}

void XYChainSpec::validate() const {
  if (n_sites < 1 || cell_size < 1 || n_cells < 1)
    throw ValidationError("n_sites, cell_size and n_cells must be positive");
  if (n_sites != n_cells * cell_size) {
    std::ostringstream os;
    os << "n_sites (" << n_sites << ") != n_cells (" << n_cells
       << ") * cell_size (" << cell_size << ")";
    throw ValidationError(os.str());
  }
  if (!field_offsets.empty() &&
      static_cast<int>(field_offsets.size()) != n_sites)
    throw ValidationError("field_offsets must be empty or n_sites long");
  for (double x : {intra_coupling, inter_coupling, anisotropy, field})
    if (!std::isfinite(x)) throw ValidationError("non-finite chain parameter");
}

double XYChainSpec::site_field(int j) const {
  return field_offsets.empty() ? field : field + field_offsets[j];
}

bool XYChainSpec::translation_invariant() const {
  return boundary != Boundary::open && field_offsets.empty();
}

XYChainSpec XYChainSpec::modular(int n_sites, int cell_size,
                                 double inter_coupling, double anisotropy,
                                 double field, Boundary boundary) {
  if (cell_size < 1 || n_sites < 1 || n_sites % cell_size != 0)
    throw ValidationError("n_sites must be a positive multiple of cell_size");
  XYChainSpec s;
  s.n_sites = n_sites;
  s.cell_size = cell_size;
  s.n_cells = n_sites / cell_size;
  s.inter_coupling = inter_coupling;
  s.anisotropy = anisotropy;
  s.field = field;
  s.boundary = boundary;
  return s;
}

XYChainSpec XYChainSpec::uniform(int n_sites, double anisotropy, double field,
                                 Boundary boundary) {
  return modular(n_sites, 1, 1.0, anisotropy, field, boundary);
}

std::string to_string(Parameter p) {
  switch (p) {
    case Parameter::field: return "h";
    case Parameter::inter_coupling: return "J";
    case Parameter::anisotropy: return "gamma";
  }
  return "unknown";
}

Parameter parameter_from_string(const std::string& s) {
  if (s == "h" || s == "field") return Parameter::field;
  if (s == "J" || s == "inter_coupling") return Parameter::inter_coupling;
  if (s == "gamma" || s == "anisotropy") return Parameter::anisotropy;
  throw ValidationError("unknown parameter '" + s + "'");
}

double parameter_value(const XYChainSpec& spec, Parameter p) {
  switch (p) {
    case Parameter::field: return spec.field;
    case Parameter::inter_coupling: return spec.inter_coupling;
    case Parameter::anisotropy: return spec.anisotropy;
  }
  return 0.0;
}

XYChainSpec with_parameter(XYChainSpec spec, Parameter p, double value) {
  switch (p) {
    case Parameter::field: spec.field = value; break;
    case Parameter::inter_coupling: spec.inter_coupling = value; break;
    case Parameter::anisotropy: spec.anisotropy = value; break;
  }
  return spec;
}

std::vector<double> build_couplings(const XYChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  int count = spec.boundary == Boundary::open ? n - 1 : n;
  if (n == 1) count = 0;
  std::vector<double> bonds(count);
  for (int j = 0; j < count; ++j)
    bonds[j] = (j % spec.cell_size == spec.cell_size - 1)
                   ? spec.inter_coupling
                   : spec.intra_coupling;
  return bonds;
}

Eigen::MatrixXd BdGMatrix::dense() const {
  const int n = this->n();
  Eigen::MatrixXd h(2 * n, 2 * n);
  h << a, b, -b, -a;
  return h;
}

BdGMatrix build_bdg_matrix(const XYChainSpec& spec) {
  const auto bonds = build_couplings(spec);
  const int n = spec.n_sites;
  BdGMatrix m{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (int j = 0; j < n; ++j) m.a(j, j) = spec.site_field(j);
  const double g = spec.anisotropy;
  for (int j = 0; j < static_cast<int>(bonds.size()); ++j) {
    const int k = (j + 1) % n;
    // Wrap-around bond of an antiperiodic chain changes sign.
    const double s =
        (k == 0 && spec.boundary == Boundary::antiperiodic) ? -1.0 : 1.0;
    const double t = s * bonds[j];
    m.a(j, k) += -0.5 * t;
    m.a(k, j) += -0.5 * t;
    m.b(j, k) += -0.5 * g * t;
    m.b(k, j) += 0.5 * g * t;
  }
  return m;
}

double BogoliubovDecomposition::ground_energy() const {
  return -energies.sum();
}

int BogoliubovDecomposition::vacuum_parity() const {
  // The Majorana transformation is block diagonal with orthogonal blocks
  // U+V and U-V; the vacuum's parity is the determinant of that rotation.
  const double d1 = (u + v).partialPivLu().determinant();
  const double d2 = (u - v).partialPivLu().determinant();
  return d1 * d2 >= 0.0 ? 1 : -1;
}

double BogoliubovDecomposition::min_energy() const {
  return energies.size() ? energies.minCoeff() : 0.0;
}

std::uint64_t matrix_fingerprint(const Eigen::MatrixXd& m) {
  std::uint64_t hash = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t len = sizeof(double) * static_cast<std::size_t>(m.size());
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

namespace {

void fix_column_gauge(Eigen::MatrixXd& u, Eigen::MatrixXd& v, int k) {
  const int n = static_cast<int>(u.rows());
  auto entry = [&](int i) { return i < n ? u(i, k) : v(i - n, k); };
  double best = 0.0;
  for (int i = 0; i < 2 * n; ++i) best = std::max(best, std::abs(entry(i)));
  // Entries that tie with the maximum up to roundoff are common in symmetric
  // chains; the first of them decides, so the choice does not hinge on the
  // last bit.
  for (int i = 0; i < 2 * n; ++i) {
    if (std::abs(entry(i)) >= best * (1.0 - 1e-9)) {
      if (entry(i) < 0.0) {
        u.col(k) *= -1.0;
        v.col(k) *= -1.0;
      }
      return;
    }
  }
}

bool lexicographic_less(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                        int a, int b) {
  const int n = static_cast<int>(u.rows());
  for (int i = 0; i < 2 * n; ++i) {
    const double xa = i < n ? u(i, a) : v(i - n, a);
    const double xb = i < n ? u(i, b) : v(i - n, b);
    if (std::abs(xa - xb) > 1e-12) return xa < xb;
  }
  return false;
}

}  // namespace

BogoliubovDecomposition diagonalize_bdg(const BdGMatrix& m) {
  const int n = m.n();
  const Eigen::MatrixXd amb = m.a - m.b;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(amb,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (!s.allFinite() || !svd.matrixU().allFinite() ||
      !svd.matrixV().allFinite()) {
    std::ostringstream os;
    os << "BdG diagonalization failed (matrix fingerprint " << std::hex
       << matrix_fingerprint(m.dense()) << ")";
    throw NumericalError(os.str());
  }
  // (A - B) psi = L phi and (A + B) phi = L psi with phi = U + V, psi = U - V.
  const Eigen::MatrixXd& phi = svd.matrixU();
  const Eigen::MatrixXd& psi = svd.matrixV();

  BogoliubovDecomposition d;
  d.u.resize(n, n);
  d.v.resize(n, n);
  d.energies.resize(n);
  // BDCSVD orders singular values descending; reverse into ascending order.
  for (int k = 0; k < n; ++k) {
    const int src = n - 1 - k;
    d.u.col(k) = 0.5 * (phi.col(src) + psi.col(src));
    d.v.col(k) = 0.5 * (phi.col(src) - psi.col(src));
    d.energies[k] = s[src];
    fix_column_gauge(d.u, d.v, k);
  }

  // Order runs of degenerate energies lexicographically.
  const double tol = 1e-12 * std::max(1.0, d.energies.cwiseAbs().maxCoeff());
  int start = 0;
  while (start < n) {
    int stop = start + 1;
    while (stop < n && d.energies[stop] - d.energies[stop - 1] <= tol) ++stop;
    if (stop - start > 1) {
      std::vector<int> order(stop - start);
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return lexicographic_less(d.u, d.v, a, b);
      });
      Eigen::MatrixXd u_block(n, stop - start), v_block(n, stop - start);
      Eigen::VectorXd e_block(stop - start);
      for (int i = 0; i < stop - start; ++i) {
        u_block.col(i) = d.u.col(order[i]);
        v_block.col(i) = d.v.col(order[i]);
        e_block[i] = d.energies[order[i]];
      }
      d.u.middleCols(start, stop - start) = u_block;
      d.v.middleCols(start, stop - start) = v_block;
      d.energies.segment(start, stop - start) = e_block;
    }
    start = stop;
  }
  return d;
}

Eigen::VectorXd bdg_spectrum(const BdGMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense(),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "dense BdG eigensolver did not converge (matrix fingerprint "
       << std::hex << matrix_fingerprint(m.dense()) << ")";
    throw NumericalError(os.str());
  }
  return es.eigenvalues();
}

BogoliubovDecomposition ground_state(const XYChainSpec& spec) {
  return diagonalize_bdg(build_bdg_matrix(spec));
}

SectorGroundState sector_ground_state(const XYChainSpec& spec, int parity) {
  if (parity != 1 && parity != -1)
    throw ValidationError("parity must be +1 or -1");
  if (spec.boundary == Boundary::open)
    throw ValidationError("parity sectors are defined for rings only");
  XYChainSpec sector = spec;
  sector.boundary = parity == 1 ? Boundary::antiperiodic : Boundary::periodic;
  SectorGroundState out;
  out.modes = ground_state(sector);
  out.energy = out.modes.ground_energy();
  out.parity = out.modes.vacuum_parity();
  if (out.parity != parity) {
    // Occupy the lowest mode: its creation operator becomes the new
    // annihilator, i.e. the column pair (U, V) -> (V, U).
    out.modes.u.col(0).swap(out.modes.v.col(0));
    out.energy += 2.0 * out.modes.energies[0];
    out.parity = parity;
    out.mode_flipped = true;
  }
  return out;
}

SectorGroundState spin_ground_state(const XYChainSpec& spec) {
  if (spec.boundary == Boundary::open) {
    SectorGroundState out;
    out.modes = ground_state(spec);
    out.energy = out.modes.ground_energy();
    out.parity = out.modes.vacuum_parity();
    return out;
  }
  auto even = sector_ground_state(spec, 1);
  auto odd = sector_ground_state(spec, -1);
  return odd.energy < even.energy ? odd : even;
}

}  // namespace modsense
