#include "modsense/qfi.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "modsense/errors.hpp"
#include "modsense/parallel.hpp"
#include "modsense/xy_bloch.hpp"

namespace modsense {

std::string to_string(QfiMethod m) {
  return m == QfiMethod::trace_formula ? "trace_formula"
                                       : "overlap_finite_difference";
}

namespace {

void check_same_shape(const BogoliubovDecomposition& d1,
                      const BogoliubovDecomposition& d2) {
  if (d1.u.rows() != d2.u.rows() || d1.u.cols() != d2.u.cols() ||
      d1.v.rows() != d2.v.rows() || d1.v.cols() != d2.v.cols())
    throw ValidationError("Bogoliubov decompositions differ in dimension");
}

constexpr double kGapClosedThreshold = 1e-12;
constexpr double kMinStep = 1e-9;
constexpr double kConvergenceTol = 1e-4;
// At g = 0 the ground state is degenerate and the QFI is ill defined.
constexpr double kMinAnisotropy = 1e-6;

void check_anisotropy(const XYChainSpec& spec) {
  if (std::abs(spec.anisotropy) < kMinAnisotropy)
    throw ValidationError("QFI needs |gamma| >= 1e-6 (isotropic point is degenerate)");
}

double richardson(double coarse, double fine) {
  return (4.0 * fine - coarse) / 3.0;
}

bool agree(double coarse, double fine) {
  const double scale = std::max(std::abs(fine), std::abs(coarse));
  return scale == 0.0 || std::abs(fine - coarse) <= kConvergenceTol * scale;
}

double clamp_qfi(double q) {
  if (!std::isfinite(q)) throw NumericalError("non-finite QFI");
  // Tiny negative values are roundoff around a vanishing QFI.
  if (q < 0.0) {
    if (q < -1e-8 * std::max(1.0, std::abs(q)))
      throw NumericalError("QFI came out negative");
    return 0.0;
  }
  return q;
}

double qfi_from_log_fidelity(double log_f, double eps) {
  // log_f = -inf means orthogonal states (a level crossed inside the step);
  // Q is then step-limited at 8 / e^2.
  if (std::isnan(log_f) || log_f > 0.0)
    throw NumericalError("non-finite overlap in finite difference");
  return 8.0 * -std::expm1(log_f) / (eps * eps);
}

// Fixed-sector state along the parameter axis.
BogoliubovDecomposition state_for(const XYChainSpec& spec, GroundStateMode mode,
                                  int parity) {
  if (mode == GroundStateMode::spin_sector && spec.boundary != Boundary::open)
    return sector_ground_state(spec, parity).modes;
  return ground_state(spec);
}

}  // namespace

double onishi_overlap(const BogoliubovDecomposition& d1,
                      const BogoliubovDecomposition& d2) {
  check_same_shape(d1, d2);
  if (d1.n() == 0) return 1.0;
  const Eigen::MatrixXd w = d1.u.transpose() * d2.u + d1.v.transpose() * d2.v;
  const double det = w.partialPivLu().determinant();
  if (!std::isfinite(det)) throw NumericalError("non-finite Onishi determinant");
  return std::clamp(std::sqrt(std::abs(det)), 0.0, 1.0);
}

double log_overlap(const BogoliubovDecomposition& d1,
                   const BogoliubovDecomposition& d2) {
  check_same_shape(d1, d2);
  if (d1.n() == 0) return 0.0;
  const Eigen::MatrixXd z = d1.v.transpose() * d2.u + d1.u.transpose() * d2.v;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z);
  double acc = 0.0;
  for (double s : svd.singularValues()) acc += std::log1p(-std::min(s * s, 1.0));
  return 0.25 * acc;
}

QfiResult qfi_finite_difference(const XYChainSpec& spec, Parameter parameter,
                                const QfiOptions& options) {
  spec.validate();
  check_anisotropy(spec);
  const double lambda = parameter_value(spec, parameter);
  const double eps =
      options.step > 0.0 ? options.step : 1e-5 * std::max(1.0, std::abs(lambda));
  if (!(eps >= kMinStep))
    throw ValidationError("finite-difference step must be at least 1e-9");

  bool use_momentum = false;
  switch (options.solver) {
    case Solver::automatic:
      use_momentum = spec.translation_invariant() &&
                     options.mode == GroundStateMode::bdg_vacuum;
      break;
    case Solver::momentum:
      if (!spec.translation_invariant())
        throw ValidationError("momentum solver needs a translation-invariant ring");
      if (options.mode != GroundStateMode::bdg_vacuum)
        throw ValidationError("momentum solver only follows the BdG vacuum");
      use_momentum = true;
      break;
    case Solver::real_space: break;
  }

  QfiResult res;
  res.parameter = parameter;
  res.parameter_value = lambda;
  res.method = QfiMethod::overlap_finite_difference;
  res.spec = spec;

  int parity = 1;
  if (use_momentum) {
    res.gap_closed = diagonalize_bloch(spec).min_energy() < kGapClosedThreshold;
  } else if (options.mode == GroundStateMode::spin_sector &&
             spec.boundary != Boundary::open) {
    const auto gs = spin_ground_state(spec);
    parity = gs.parity;
    res.gap_closed = gs.modes.min_energy() < kGapClosedThreshold;
  } else {
    res.gap_closed = ground_state(spec).min_energy() < kGapClosedThreshold;
  }

  auto q_at = [&](double e) {
    const auto lo = with_parameter(spec, parameter, lambda - 0.5 * e);
    const auto hi = with_parameter(spec, parameter, lambda + 0.5 * e);
    double log_f;
    if (use_momentum) {
      log_f = 0.25 * bloch_log_cos_squared(diagonalize_bloch(lo),
                                           diagonalize_bloch(hi));
    } else {
      log_f = log_overlap(state_for(lo, options.mode, parity),
                          state_for(hi, options.mode, parity));
    }
    return qfi_from_log_fidelity(log_f, e);
  };

  const double coarse = q_at(eps);
  if (options.richardson) {
    const double fine = q_at(0.5 * eps);
    res.value = clamp_qfi(richardson(coarse, fine));
    res.converged = agree(coarse, fine);
  } else {
    res.value = clamp_qfi(coarse);
  }
  res.step = eps;
  return res;
}

namespace {

Eigen::MatrixXd stacked(const BogoliubovDecomposition& d) {
  Eigen::MatrixXd x(2 * d.n(), d.n());
  x << d.u, d.v;
  return x;
}

// Rotates `moved` onto `anchor` by the orthogonal polar factor of
// moved^T anchor. Returns false when the two frames are not close.
bool align_frame(const Eigen::MatrixXd& anchor, Eigen::MatrixXd& moved) {
  const Eigen::MatrixXd o = moved.transpose() * anchor;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(o, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  if (o.size() > 0 && svd.singularValues().minCoeff() < 0.99) return false;
  moved = moved * (svd.matrixU() * svd.matrixV().transpose());
  return true;
}

struct TraceTerms {
  double u_term, v_term, interference, trace_m1;
  double q() const { return 2.0 * (u_term + v_term + interference); }
};

bool trace_terms(const XYChainSpec& spec, Parameter parameter, double lambda,
                 const Eigen::MatrixXd& x, double eps, TraceTerms& out) {
  const int n = spec.n_sites;
  Eigen::MatrixXd xp =
      stacked(ground_state(with_parameter(spec, parameter, lambda + eps)));
  Eigen::MatrixXd xm =
      stacked(ground_state(with_parameter(spec, parameter, lambda - eps)));
  if (!align_frame(x, xp) || !align_frame(x, xm)) return false;

  const Eigen::MatrixXd d1 = (xp - xm) / (2.0 * eps);
  const Eigen::MatrixXd u = x.topRows(n), v = x.bottomRows(n);
  const Eigen::MatrixXd du = d1.topRows(n), dv = d1.bottomRows(n);
  // U^T d2U = U^T (U+ + U- - 2U) / e^2.
  const Eigen::MatrixXd ud2u =
      u.transpose() * (xp.topRows(n) + xm.topRows(n) - 2.0 * u) / (eps * eps);
  const Eigen::MatrixXd vd2v =
      v.transpose() * (xp.bottomRows(n) + xm.bottomRows(n) - 2.0 * v) /
      (eps * eps);
  const Eigen::MatrixXd a = u.transpose() * du;
  const Eigen::MatrixXd b = v.transpose() * dv;
  out.u_term = (a * a).trace() - ud2u.trace();
  out.v_term = (b * b).trace() - vd2v.trace();
  out.interference = 2.0 * (a * b).trace();
  out.trace_m1 = (a + b).trace();
  return true;
}

TraceTerms richardson(const TraceTerms& coarse, const TraceTerms& fine) {
  return {richardson(coarse.u_term, fine.u_term),
          richardson(coarse.v_term, fine.v_term),
          richardson(coarse.interference, fine.interference),
          richardson(coarse.trace_m1, fine.trace_m1)};
}

}  // namespace

TraceFormulaResult qfi_trace_formula(const XYChainSpec& spec,
                                     Parameter parameter,
                                     const TraceOptions& options) {
  spec.validate();
  check_anisotropy(spec);
  const double lambda = parameter_value(spec, parameter);
  const double scale = std::max(1.0, std::abs(lambda));
  if (options.step != 0.0 && !(options.step >= kMinStep))
    throw ValidationError("finite-difference step must be at least 1e-9");
  if (options.levels < 3) throw ValidationError("trace formula needs >= 3 levels");

  const auto centre = ground_state(spec);
  const Eigen::MatrixXd x = stacked(centre);

  TraceFormulaResult out;
  out.qfi.parameter = parameter;
  out.qfi.parameter_value = lambda;
  out.qfi.method = QfiMethod::trace_formula;
  out.qfi.spec = spec;
  out.qfi.gap_closed = centre.min_energy() < kGapClosedThreshold;

  auto finish = [&](const TraceTerms& t, double eps) {
    out.u_term = t.u_term;
    out.v_term = t.v_term;
    out.interference = t.interference;
    out.trace_m1 = t.trace_m1;
    out.qfi.value = clamp_qfi(t.q());
    out.qfi.step = eps;
    return out;
  };

  if (!options.richardson) {
    const double eps = options.step > 0.0 ? options.step : 2e-4 * scale;
    TraceTerms t{};
    if (trace_terms(spec, parameter, lambda, x, eps, t)) return finish(t, eps);
  } else {
    // Halving ladder. Second differences of eigenvectors lose accuracy as
    // e^-2 while truncation shrinks as e^4 after extrapolation, so the level
    // where consecutive extrapolants agree best is kept.
    const double eps0 = options.step > 0.0 ? options.step : 1e-2 * scale;
    std::vector<double> eps(options.levels);
    std::vector<TraceTerms> raw(options.levels);
    std::vector<bool> ok(options.levels);
    for (int k = 0; k < options.levels; ++k) {
      eps[k] = eps0 * std::ldexp(1.0, -k);
      ok[k] = eps[k] >= kMinStep &&
              trace_terms(spec, parameter, lambda, x, eps[k], raw[k]);
    }
    int best = -1;
    double best_diff = std::numeric_limits<double>::infinity();
    std::vector<TraceTerms> ext(options.levels);
    for (int k = 1; k < options.levels; ++k)
      if (ok[k - 1] && ok[k]) ext[k] = richardson(raw[k - 1], raw[k]);
    for (int k = 2; k < options.levels; ++k) {
      if (!(ok[k - 2] && ok[k - 1] && ok[k])) continue;
      const double d = std::abs(ext[k].q() - ext[k - 1].q());
      if (d < best_diff) {
        best_diff = d;
        best = k;
      }
    }
    if (best >= 0) {
      finish(ext[best], eps[best - 1]);
      out.qfi.converged =
          best_diff <= kConvergenceTol * std::max(std::abs(ext[best].q()), 1e-300);
      return out;
    }
  }
  std::ostringstream os;
  os << "gauge alignment failed at " << to_string(parameter) << "=" << lambda
     << ": eigenvectors change too fast (level crossing within the step)";
  throw NumericalError(os.str());
}

std::vector<QfiResult> qfi_scan(const XYChainSpec& spec, Parameter parameter,
                                const std::vector<double>& grid,
                                const QfiOptions& options, int workers) {
  for (double x : grid)
    if (!std::isfinite(x)) throw ValidationError("scan grid must be finite");
  std::vector<QfiResult> out(grid.size());
  parallel_for_index(grid.size(), workers, [&](std::size_t i) {
    try {
      out[i] = qfi_finite_difference(with_parameter(spec, parameter, grid[i]),
                                     parameter, options);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "grid point " << i << " (" << to_string(parameter) << "="
         << grid[i] << "): " << e.what();
      throw NumericalError(os.str());
    }
  });
  return out;
}

}  // namespace modsense
