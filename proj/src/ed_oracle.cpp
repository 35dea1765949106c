#include "modsense/ed_oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <sstream>
#include <vector>

#include "modsense/errors.hpp"

namespace modsense {

SpinHamiltonian build_spin_hamiltonian(const XYChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  if (n > kMaxEdSites) {
    std::ostringstream os;
    os << "exact diagonalization limited to " << kMaxEdSites << " sites, got "
       << n;
    throw ValidationError(os.str());
  }
  const auto bonds = build_couplings(spec);
  const double g = spec.anisotropy;
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j)
      diag += ((s >> j) & 1u) ? -spec.site_field(j) : spec.site_field(j);
    h(s, s) = diag;
    for (int j = 0; j < static_cast<int>(bonds.size()); ++j) {
      const int k = (j + 1) % n;
      const std::size_t flipped = s ^ (std::size_t{1} << j) ^ (std::size_t{1} << k);
      const bool parallel = ((s >> j) & 1u) == ((s >> k) & 1u);
      // -1/2 t [(1+g) XX + (1-g) YY]: YY gives -1 on parallel spins, +1 on
      // antiparallel ones.
      h(flipped, s) += parallel ? -g * bonds[j] : -bonds[j];
    }
  }
  return {std::move(h), spec};
}

Eigen::VectorXd fermion_parity_diagonal(int n_sites) {
  const std::size_t dim = std::size_t{1} << n_sites;
  Eigen::VectorXd p(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    const int down = std::popcount(s);
    p[s] = ((n_sites - down) % 2 == 0) ? 1.0 : -1.0;
  }
  return p;
}

namespace {

EdGroundState solve_sector(const SpinHamiltonian& h, int parity) {
  const int n = h.spec.n_sites;
  const Eigen::VectorXd pd = fermion_parity_diagonal(n);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index s = 0; s < pd.size(); ++s)
    if (pd[s] == parity) idx.push_back(s);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = h.matrix(idx[a], idx[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  if (es.info() != Eigen::Success)
    throw NumericalError("dense spin eigensolver did not converge");
  EdGroundState out;
  out.energy = es.eigenvalues()[0];
  out.gap = m > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0]
                  : std::numeric_limits<double>::infinity();
  out.parity = parity;
  out.state = Eigen::VectorXd::Zero(pd.size());
  for (Eigen::Index a = 0; a < m; ++a) out.state[idx[a]] = es.eigenvectors()(a, 0);
  return out;
}

}  // namespace

EdGroundState ed_ground_state(const XYChainSpec& spec, int sector) {
  if (sector != 0 && sector != 1 && sector != -1)
    throw ValidationError("sector must be 0, +1 or -1");
  const auto h = build_spin_hamiltonian(spec);
  if (sector != 0) return solve_sector(h, sector);
  auto even = solve_sector(h, 1);
  // A single site has one state per sector; both are legitimate.
  auto odd = solve_sector(h, -1);
  return odd.energy < even.energy ? odd : even;
}

double ed_overlap(const EdGroundState& a, const EdGroundState& b) {
  if (a.state.size() != b.state.size())
    throw ValidationError("states have different dimensions");
  return std::min(1.0, std::abs(a.state.dot(b.state)));
}

namespace {

// 1 - |<a|b>| without subtracting two numbers close to one.
double one_minus_fidelity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ov = a.dot(b);
  const double f = std::min(1.0, std::abs(ov));
  const double s2 = (b - ov * a).squaredNorm();
  return s2 / (1.0 + f);
}

}  // namespace

QfiResult qfi_ed(const XYChainSpec& spec, Parameter parameter,
                 const EdQfiOptions& options) {
  const double lambda = parameter_value(spec, parameter);
  const double eps =
      options.step > 0.0 ? options.step : 1e-3 * std::max(1.0, std::abs(lambda));
  if (!(eps >= 1e-9))
    throw ValidationError("finite-difference step must be at least 1e-9");

  const auto centre = ed_ground_state(spec, options.sector);
  if (centre.gap < 1e-10) {
    std::ostringstream os;
    os << "degenerate ground state at " << to_string(parameter) << "=" << lambda
       << " (gap " << centre.gap << ")";
    throw GapClosedError(os.str(), lambda);
  }
  const int sector = centre.parity;

  auto q_at = [&](double e) {
    const auto lo =
        ed_ground_state(with_parameter(spec, parameter, lambda - 0.5 * e), sector);
    const auto hi =
        ed_ground_state(with_parameter(spec, parameter, lambda + 0.5 * e), sector);
    return 8.0 * one_minus_fidelity(lo.state, hi.state) / (e * e);
  };

  QfiResult res;
  res.parameter = parameter;
  res.parameter_value = lambda;
  res.step = eps;
  res.method = QfiMethod::overlap_finite_difference;
  res.spec = spec;
  const double coarse = q_at(eps);
  if (options.richardson) {
    const double fine = q_at(0.5 * eps);
    res.value = std::max(0.0, (4.0 * fine - coarse) / 3.0);
    const double scale = std::max(std::abs(fine), std::abs(coarse));
    res.converged = scale == 0.0 || std::abs(fine - coarse) <= 1e-4 * scale;
  } else {
    res.value = coarse;
  }
  if (!std::isfinite(res.value)) throw NumericalError("non-finite ED QFI");
  return res;
}

}  // namespace modsense
