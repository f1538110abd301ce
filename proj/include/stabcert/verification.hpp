#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stabcert/certificates.hpp"
#include "stabcert/grids.hpp"
#include "stabcert/parallel.hpp"
#include "stabcert/quadrature.hpp"
#include "stabcert/resolvent_engine.hpp"

namespace stabcert {

struct CheckRecord {
  std::string name;
  std::string spec;  // grid / quadrature provenance
  double measured = 0.0;
  double threshold = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

/// Two-column table for plot emission (grid point, value).
struct PlotTable {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> rows;
};

struct VerificationReport {
  std::vector<CheckRecord> checks;
  std::vector<PlotTable> tables;
  std::map<std::string, double> fitted_exponents;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void add(CheckRecord r) { checks.push_back(std::move(r)); }
};

// ---------------------------------------------------------------------------
// Transfer-norm scan over the Omega_k regions and the off-resonance window.
// ---------------------------------------------------------------------------

struct TransferScanSpec {
  int n_radii = 40;
  int n_angles = 33;
  double r_min = 1e-8;
  double window_re = 10.0;
  double window_im = 10.0;
  int n_re = 41;
  int n_im = 81;
  int threads = 1;
};

struct TransferScanResult {
  double max_norm = 0.0;
  Complex argmax;
  long skipped_singular = 0;
  PlotTable region_profile;  // per Omega_k radius: max transfer norm over angles
};

inline TransferScanResult scan_transfer_norm(const SpectralModel& model,
                                             const PerturbationFactors& factors,
                                             const std::vector<double>& resonances,
                                             double eps_a, const TransferScanSpec& spec = {}) {
  TransferScanResult out;
  out.region_profile.name = "transfer_norm_region_profile";
  out.region_profile.x_label = "radius";
  out.region_profile.y_label = "max_transfer_norm";

  auto eval_points = [&](const std::vector<Complex>& pts) {
    std::vector<double> vals(pts.size(), -1.0);
    parallel_for_index(
        static_cast<long>(pts.size()),
        [&](long i) {
          try {
            vals[i] = transfer_norm(model, factors, pts[i]);
          } catch (const SingularPointError&) {
            vals[i] = -1.0;
          }
        },
        spec.threads);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (vals[i] < 0.0) {
        ++out.skipped_singular;
        continue;
      }
      if (vals[i] > out.max_norm) {
        out.max_norm = vals[i];
        out.argmax = pts[i];
      }
    }
    return vals;
  };

  for (double wk : resonances) {
    const auto radii = log_space(spec.r_min, eps_a, spec.n_radii);
    for (double r : radii) {
      std::vector<Complex> ring;
      ring.reserve(spec.n_angles);
      for (int a = 0; a < spec.n_angles; ++a) {
        const double theta = -0.5 * kPi + kPi * a / (spec.n_angles - 1);
        ring.emplace_back(r * std::cos(theta), wk + r * std::sin(theta));
      }
      const auto vals = eval_points(ring);
      double ring_max = 0.0;
      for (double v : vals) ring_max = std::max(ring_max, v);
      out.region_profile.rows.emplace_back(r, ring_max);
    }
  }

  eval_points(half_plane_window_grid(spec.window_re, spec.window_im, spec.n_re, spec.n_im,
                                     resonances, eps_a));
  return out;
}

// ---------------------------------------------------------------------------
// Injectivity at the resonances.
// ---------------------------------------------------------------------------

struct InjectivityRecord {
  double omega_k = 0.0;
  double beta1 = 0.0;
  double gamma1 = 0.0;
  double norm_b = 0.0;
  double norm_c = 0.0;
  double product = 0.0;
  bool pass = false;
};

/// Verifies ||(i w_k - A)^{-beta1} B|| * ||(-i w_k - A^*)^{-gamma1} C^*|| < 1
/// with beta1 + gamma1 = 1, beta1 = beta/alpha clamped to [0, beta].
inline std::vector<InjectivityRecord> check_injectivity_at_resonances(
    const SpectralModel& model, const PerturbationFactors& factors,
    const std::vector<double>& resonances, double beta, double gamma) {
  const double alpha = beta + gamma;
  if (!(alpha > 0.0))
    throw InvalidInputError("check_injectivity_at_resonances: beta + gamma must be > 0");
  double beta1 = std::clamp(beta / alpha, 0.0, beta);
  double gamma1 = 1.0 - beta1;
  if (gamma1 > gamma) {  // only possible when alpha < 1; push the excess to beta1
    gamma1 = gamma;
    beta1 = 1.0 - gamma1;
  }
  std::vector<InjectivityRecord> out;
  for (double wk : resonances) {
    InjectivityRecord r;
    r.omega_k = wk;
    r.beta1 = beta1;
    r.gamma1 = gamma1;
    r.norm_b = graph_norm(model, factors, wk, beta1, FactorSide::BSide);
    r.norm_c = graph_norm(model, factors, wk, gamma1, FactorSide::CSide);
    r.product = r.norm_b * r.norm_c;
    r.pass = r.product < 1.0;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perturbed resolvent growth near the resonances.
// ---------------------------------------------------------------------------

struct GrowthScanSpec {
  double off_min = 1e-8;
  int offsets_per_resonance = 25;
  int off_resonance_points = 81;
  double window = 0.0;  // 0 -> auto
  double norm_rel_tol = 1e-6;
  int norm_max_iter = 400;
  double headroom = 1.1;
  int threads = 1;
};

struct GrowthScanResult {
  double rung_sup = 0.0;      // sup |omega-omega_k|^alpha ||R(i omega, A+BC)||
  double off_sup = 0.0;       // sup ||R(i omega, A+BC)|| off the neighborhoods
  double m_k = 0.0;           // recorded sup of |omega-omega_k|^alpha ||RB|| ||CR|| (headroom)
  double analytic_bound = 0.0;  // M_A + M_D * M_k with M_D = 1/(1-c)
  double off_bound = 0.0;       // M_A + M_D ||B|| ||C|| M_A^2
  bool finite = true;
  bool within_bound = true;
  PlotTable rung_table;
};

inline double factor_image_norm(const SpectralModel& model, const ComplexMatrix& cols,
                                Complex lambda, bool adjoint) {
  ComplexMatrix img(cols.rows(), cols.cols());
  for (Index j = 0; j < cols.cols(); ++j)
    img.col(j) = adjoint ? apply_resolvent_adjoint(model, lambda, cols.col(j))
                         : apply_resolvent(model, lambda, cols.col(j));
  return columns_operator_norm(model, img);
}

inline GrowthScanResult check_resolvent_growth(const SpectralModel& model,
                                               const PerturbationFactors& factors,
                                               const ResolventProfile& profile, double c,
                                               const GrowthScanSpec& spec = {}) {
  GrowthScanResult out;
  out.rung_table.name = "perturbed_resolvent_rung";
  out.rung_table.x_label = "offset";
  out.rung_table.y_label = "rung_value";
  const double m_d = 1.0 / (1.0 - c);

  double mk_raw = 0.0;
  for (double wk : profile.resonances) {
    const auto freqs = resonance_offset_frequencies(wk, spec.off_min, profile.eps_a,
                                                    spec.offsets_per_resonance);
    std::vector<double> rungs(freqs.size(), -1.0);
    std::vector<double> fvals(freqs.size(), 0.0);
    parallel_for_index(
        static_cast<long>(freqs.size()),
        [&](long i) {
          const Complex lam(0.0, freqs[i]);
          const double off = std::abs(freqs[i] - wk);
          try {
            const NormEstimate est = perturbed_resolvent_norm(model, factors, lam,
                                                              spec.norm_rel_tol,
                                                              spec.norm_max_iter);
            rungs[i] = std::pow(off, profile.alpha) * est.value;
            fvals[i] = std::pow(off, profile.alpha) *
                       factor_image_norm(model, factors.b_columns(), lam, false) *
                       factor_image_norm(model, factors.c_columns(), lam, true);
          } catch (const SingularPointError&) {
            rungs[i] = -1.0;
          }
        },
        spec.threads);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (rungs[i] < 0.0) continue;
      out.rung_sup = std::max(out.rung_sup, rungs[i]);
      mk_raw = std::max(mk_raw, fvals[i]);
      out.rung_table.rows.emplace_back(std::abs(freqs[i] - wk), rungs[i]);
      if (!std::isfinite(rungs[i])) out.finite = false;
    }
  }
  out.m_k = spec.headroom * mk_raw;
  out.analytic_bound = profile.m_a + m_d * out.m_k;

  double max_res = 0.0;
  for (double wk : profile.resonances) max_res = std::max(max_res, std::abs(wk));
  const double window = spec.window > 0.0 ? spec.window : std::max(2.0, 2.0 * max_res + 2.0);
  for (double w : linear_space(-window, window, spec.off_resonance_points)) {
    bool inside = false;
    for (double wk : profile.resonances)
      if (std::abs(w - wk) <= profile.eps_a) inside = true;
    if (inside) continue;
    try {
      const NormEstimate est = perturbed_resolvent_norm(model, factors, Complex(0.0, w),
                                                        spec.norm_rel_tol, spec.norm_max_iter);
      out.off_sup = std::max(out.off_sup, est.value);
      if (!std::isfinite(est.value)) out.finite = false;
    } catch (const SingularPointError&) {
    }
  }
  const double nb = operator_norm_b(model, factors);
  const double nc = operator_norm_c(model, factors);
  out.off_bound = profile.m_a + m_d * nb * nc * profile.m_a * profile.m_a;
  out.within_bound = out.finite && out.rung_sup <= out.analytic_bound &&
                     out.off_sup <= out.off_bound;
  return out;
}

// ---------------------------------------------------------------------------
// Uniform-boundedness functionals (frequency-domain integrals).
// ---------------------------------------------------------------------------

struct BoundednessSpec {
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int xi_points = 25;
  LineIntegralSpec quad;
  bool check_refinement = true;
  double stability_tol = 0.01;
  int threads = 1;
};

struct BoundednessResult {
  double sup = 0.0;
  double xi_at_sup = 0.0;
  double sup_adjoint = 0.0;
  bool quadrature_converged = true;
  bool stable = true;
  std::string verdict;  // "finite" | "inconclusive"
  PlotTable table;          // (xi, xi * integral)
  PlotTable table_adjoint;
};

namespace detail {

/// Seed breakpoints so adaptive panels cannot step over the O(xi)-wide
/// resonance peaks of the integrand.
inline std::vector<double> eta_breakpoints(const SpectralModel& model, double xi) {
  std::vector<double> centers{0.0};
  for (const Complex& z : model.closure_points()) centers.push_back(z.imag());
  double im_lo = 0.0, im_hi = 0.0;
  for (Index j = 0; j < model.size(); ++j) {
    im_lo = std::min(im_lo, model.eigenvalues()[j].imag());
    im_hi = std::max(im_hi, model.eigenvalues()[j].imag());
  }
  centers.push_back(im_lo);
  centers.push_back(im_hi);
  std::vector<double> pts;
  const double scales[] = {0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0};
  for (double s : centers) {
    for (double m : scales) {
      pts.push_back(s - m * xi);
      pts.push_back(s + m * xi);
    }
    pts.push_back(s - 1.0);
    pts.push_back(s + 1.0);
  }
  return pts;
}

}  // namespace detail

/// sup over xi of xi * integral ||R(xi + i eta, A+BC) x||^2 d eta and the
/// adjoint variant. A non-converged quadrature is flagged inconclusive,
/// never "pass".
inline BoundednessResult uniform_boundedness_functional(
    const SpectralModel& model, const std::optional<PerturbationFactors>& factors,
    const ComplexVector& x, const BoundednessSpec& spec = {}) {
  BoundednessResult out;
  out.table.name = "uniform_boundedness_functional";
  out.table.x_label = "xi";
  out.table.y_label = "xi_integral";
  out.table_adjoint = out.table;
  out.table_adjoint.name += "_adjoint";

  const auto xis = log_space(spec.xi_min, spec.xi_max, spec.xi_points);
  auto integral_at = [&](double xi, bool adjoint, const LineIntegralSpec& quad,
                         bool& converged) {
    auto f = [&](double eta) {
      const Complex lam(xi, eta);
      try {
        const ComplexVector v =
            adjoint ? (factors ? perturbed_resolvent_apply_adjoint(model, *factors, lam, x)
                               : apply_resolvent_adjoint(model, lam, x))
                    : (factors ? perturbed_resolvent_apply(model, *factors, lam, x)
                               : apply_resolvent(model, lam, x));
        const double n = model.weighted_norm(v);
        return n * n;
      } catch (const SingularPointError&) {
        return 0.0;
      }
    };
    const QuadratureResult q = real_line_integral(f, detail::eta_breakpoints(model, xi), quad);
    converged = q.converged;
    return xi * q.value;
  };

  for (int pass = 0; pass < 2; ++pass) {
    const bool adjoint = pass == 1;
    PlotTable& table = adjoint ? out.table_adjoint : out.table;
    std::vector<double> vals(xis.size(), 0.0);
    std::vector<char> conv(xis.size(), 1);
    parallel_for_index(
        static_cast<long>(xis.size()),
        [&](long i) {
          bool ok = true;
          vals[i] = integral_at(xis[i], adjoint, spec.quad, ok);
          conv[i] = ok ? 1 : 0;
        },
        spec.threads);
    for (std::size_t i = 0; i < xis.size(); ++i) {
      table.rows.emplace_back(xis[i], vals[i]);
      out.quadrature_converged = out.quadrature_converged && conv[i];
      if (!adjoint && vals[i] > out.sup) {
        out.sup = vals[i];
        out.xi_at_sup = xis[i];
      }
      if (adjoint) out.sup_adjoint = std::max(out.sup_adjoint, vals[i]);
    }
  }

  if (spec.check_refinement) {
    LineIntegralSpec fine = spec.quad;
    fine.rel_tol *= 0.1;
    bool ok = true;
    const double refined = integral_at(out.xi_at_sup, false, fine, ok);
    const double base = out.sup;
    out.stable = ok && std::abs(refined - base) <= spec.stability_tol *
                                                       std::max(std::abs(base), 1e-300);
  }
  out.verdict = (out.quadrature_converged && out.stable && std::isfinite(out.sup) &&
                 std::isfinite(out.sup_adjoint))
                    ? "finite"
                    : "inconclusive";
  return out;
}

/// sup over xi of xi * integral ||R B||^2 ||C R||^2 d eta; the numerical
/// replacement for the majorant-function integrals.
inline BoundednessResult rbcr_integral(const SpectralModel& model,
                                       const PerturbationFactors& factors,
                                       const BoundednessSpec& spec = {}) {
  BoundednessResult out;
  out.table.name = "rbcr_integral";
  out.table.x_label = "xi";
  out.table.y_label = "xi_integral";

  const auto xis = log_space(spec.xi_min, spec.xi_max, spec.xi_points);
  auto integral_at = [&](double xi, const LineIntegralSpec& quad, bool& converged) {
    auto f = [&](double eta) {
      const Complex lam(xi, eta);
      try {
        const double nb = factor_image_norm(model, factors.b_columns(), lam, false);
        const double nc = factor_image_norm(model, factors.c_columns(), lam, true);
        return nb * nb * nc * nc;
      } catch (const SingularPointError&) {
        return 0.0;
      }
    };
    const QuadratureResult q = real_line_integral(f, detail::eta_breakpoints(model, xi), quad);
    converged = q.converged;
    return xi * q.value;
  };

  std::vector<double> vals(xis.size(), 0.0);
  std::vector<char> conv(xis.size(), 1);
  parallel_for_index(
      static_cast<long>(xis.size()),
      [&](long i) {
        bool ok = true;
        vals[i] = integral_at(xis[i], spec.quad, ok);
        conv[i] = ok ? 1 : 0;
      },
      spec.threads);
  for (std::size_t i = 0; i < xis.size(); ++i) {
    out.table.rows.emplace_back(xis[i], vals[i]);
    out.quadrature_converged = out.quadrature_converged && conv[i];
    if (vals[i] > out.sup) {
      out.sup = vals[i];
      out.xi_at_sup = xis[i];
    }
  }
  if (spec.check_refinement) {
    LineIntegralSpec fine = spec.quad;
    fine.rel_tol *= 0.1;
    bool ok = true;
    const double refined = integral_at(out.xi_at_sup, fine, ok);
    out.stable = ok && std::abs(refined - out.sup) <=
                           spec.stability_tol * std::max(std::abs(out.sup), 1e-300);
  }
  out.verdict = (out.quadrature_converged && out.stable && std::isfinite(out.sup))
                    ? "finite"
                    : "inconclusive";
  return out;
}

// ---------------------------------------------------------------------------
// Time-domain simulation.
// ---------------------------------------------------------------------------

struct TimeGridSpec {
  double t_max = 10.0;
  int steps = 100;  // uniform; one Pade matrix exponential, then repeated action
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> norms;  // weighted state norms
  double initial_norm = 0.0;
  bool growth_flag = false;    // final >= initial, or non-finite values reached
  bool overflow_flag = false;  // non-finite state encountered; trajectory truncated
};

/// || T_BC(t) x || on the truncation via the dense matrix exponential of
/// h (A + BC) (scaling-and-squaring Pade), applied repeatedly on the state.
inline Trajectory simulate_semigroup(const SpectralModel& model,
                                     const std::optional<PerturbationFactors>& factors,
                                     const ComplexVector& x0, const TimeGridSpec& grid = {},
                                     Index max_n = 2000) {
  if (model.size() > max_n)
    throw InvalidInputError("simulate_semigroup: N exceeds dense feasibility bound");
  if (x0.size() != model.size())
    throw InvalidInputError("simulate_semigroup: state length mismatch");
  if (grid.steps < 1 || !(grid.t_max > 0.0))
    throw InvalidInputError("simulate_semigroup: invalid time grid");

  const double h = grid.t_max / grid.steps;
  const ComplexMatrix gen =
      dense_generator_matrix(model, factors ? &*factors : nullptr);
  const ComplexMatrix step = (h * gen).exp();

  Trajectory out;
  out.initial_norm = model.weighted_norm(x0);
  out.times.push_back(0.0);
  out.norms.push_back(out.initial_norm);
  ComplexVector x = x0;
  for (int k = 1; k <= grid.steps; ++k) {
    x = step * x;
    const double n = model.weighted_norm(x);
    if (!std::isfinite(n)) {
      out.overflow_flag = true;
      out.growth_flag = true;
      break;
    }
    out.times.push_back(k * h);
    out.norms.push_back(n);
  }
  if (!out.norms.empty() && out.norms.back() >= out.initial_norm && out.initial_norm > 0.0)
    out.growth_flag = true;
  return out;
}

/// Matrix-free trajectory for truncations too large for the dense
/// exponential: classical RK4 with the substep count adapted to the spectral
/// radius of the diagonal part plus the factor norms (stability) and to a
/// local-error target. One matvec costs O(N p).
inline Trajectory simulate_semigroup_matrix_free(
    const SpectralModel& model, const std::optional<PerturbationFactors>& factors,
    const ComplexVector& x0, const TimeGridSpec& grid = {}, double local_error_target = 1e-8) {
  if (x0.size() != model.size())
    throw InvalidInputError("simulate_semigroup_matrix_free: state length mismatch");
  double radius = 0.0;
  for (Index j = 0; j < model.size(); ++j)
    radius = std::max(radius, std::abs(model.eigenvalues()[j]));
  if (factors) radius += operator_norm_b(model, *factors) * operator_norm_c(model, *factors);

  auto matvec = [&](const ComplexVector& v) -> ComplexVector {
    ComplexVector out = (model.eigenvalues().array() * v.array()).matrix();
    if (factors) {
      for (Index k = 0; k < factors->rank(); ++k) {
        const Complex coeff = model.weighted_inner(v, factors->c_columns().col(k));
        out += coeff * factors->b_columns().col(k);
      }
    }
    return out;
  };

  const double h_macro = grid.t_max / grid.steps;
  // |h lambda| <= 1.5 keeps RK4 stable on the imaginary axis; the accuracy
  // term bounds the O(h^5) local error per unit norm.
  const double h_stab = 1.5 / std::max(radius, 1e-12);
  const double h_acc = std::pow(local_error_target, 0.25) / std::max(radius, 1e-12);
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(h_macro / std::min(h_stab, h_acc))));
  const double h = h_macro / substeps;

  Trajectory out;
  out.initial_norm = model.weighted_norm(x0);
  out.times.push_back(0.0);
  out.norms.push_back(out.initial_norm);
  ComplexVector x = x0;
  for (int k = 1; k <= grid.steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const ComplexVector k1 = matvec(x);
      const ComplexVector k2 = matvec(x + 0.5 * h * k1);
      const ComplexVector k3 = matvec(x + 0.5 * h * k2);
      const ComplexVector k4 = matvec(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double n = model.weighted_norm(x);
    if (!std::isfinite(n)) {
      out.overflow_flag = true;
      out.growth_flag = true;
      break;
    }
    out.times.push_back(k * h_macro);
    out.norms.push_back(n);
  }
  if (!out.norms.empty() && out.norms.back() >= out.initial_norm && out.initial_norm > 0.0)
    out.growth_flag = true;
  return out;
}

/// Same trajectory through the eigendecomposition of A + BC; cross-validation
/// path for diagonalizable truncations.
inline Trajectory simulate_semigroup_eigen(const SpectralModel& model,
                                           const std::optional<PerturbationFactors>& factors,
                                           const ComplexVector& x0,
                                           const TimeGridSpec& grid = {}) {
  const ComplexMatrix gen =
      dense_generator_matrix(model, factors ? &*factors : nullptr);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(gen);
  const ComplexVector coeff = es.eigenvectors().partialPivLu().solve(x0);
  Trajectory out;
  out.initial_norm = model.weighted_norm(x0);
  for (int k = 0; k <= grid.steps; ++k) {
    const double t = grid.t_max * k / grid.steps;
    ComplexVector scaled(coeff.size());
    for (Index j = 0; j < coeff.size(); ++j)
      scaled[j] = std::exp(t * es.eigenvalues()[j]) * coeff[j];
    const ComplexVector x = es.eigenvectors() * scaled;
    out.times.push_back(t);
    out.norms.push_back(model.weighted_norm(x));
  }
  if (!out.norms.empty() && out.norms.back() >= out.initial_norm && out.initial_norm > 0.0)
    out.growth_flag = true;
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial decay fit.
// ---------------------------------------------------------------------------

struct DecayFitSpec {
  double t_max = 200.0;
  int doubling_levels = 9;      // snapshots at t_max * 2^{-j}
  double window_divisor = 16.0; // fit over t >= t_max / divisor
  double norm_rel_tol = 1e-9;
  int norm_max_iter = 300;
  double faster_than_polynomial_slope = -5.0;
};

struct DecayFit {
  double exponent = 0.0;  // fitted log-log slope
  double expected_exponent = 0.0;  // -1/alpha when alpha supplied, else 0
  bool monotone_tail = true;
  bool faster_than_polynomial = false;
  bool conclusive = true;
  PlotTable table;  // (t, ||T(t)(-A)^{-1}||)
};

namespace detail {

/// Weighted operator norm of x -> S (d .* x) by power iteration; d is an
/// entrywise diagonal factor applied first.
inline double dense_scaled_operator_norm(const SpectralModel& model, const ComplexMatrix& s,
                                         const ComplexVector& d, double rel_tol,
                                         int max_iter) {
  const Index n = s.rows();
  const RealVector& w = model.weights();
  auto apply = [&](const ComplexVector& v) -> ComplexVector {
    return s * (d.array() * v.array()).matrix();
  };
  auto apply_adj = [&](const ComplexVector& v) -> ComplexVector {
    // weighted adjoint: conj(d) .* (W^{-1} S^H (W v))
    const ComplexVector wv = (w.array().cast<Complex>() * v.array()).matrix();
    ComplexVector t = s.adjoint() * wv;
    t = (t.array() / w.array().cast<Complex>()).matrix();
    return (d.array().conjugate() * t.array()).matrix();
  };
  ComplexVector v = ComplexVector::Ones(n);
  v /= model.weighted_norm(v);
  double prev = 0.0, lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const ComplexVector av = apply(v);
    lam = model.weighted_norm(av);
    if (lam == 0.0) return 0.0;
    ComplexVector z = apply_adj(av);
    const double zn = model.weighted_norm(z);
    if (zn == 0.0) return lam;
    v = z / zn;
    if (std::abs(lam - prev) <= rel_tol * lam && it > 2) break;
    prev = lam;
  }
  return lam;
}

}  // namespace detail

/// Fits the decay exponent of ||T_BC(t) (-A)^{-1}|| on the asymptotic window
/// (snapshots by repeated squaring of one Pade exponential). Requires a
/// model with no spectrum touching the imaginary axis.
inline DecayFit fit_polynomial_decay(const SpectralModel& model,
                                     const std::optional<PerturbationFactors>& factors,
                                     const DecayFitSpec& spec = {},
                                     std::optional<double> alpha = std::nullopt,
                                     Index max_n = 2000) {
  if (!model.imaginary_axis_closure_frequencies().empty())
    throw InvalidInputError(
        "fit_polynomial_decay: polynomial stability requires empty spectrum on the "
        "imaginary axis");
  if (model.size() > max_n)
    throw InvalidInputError("fit_polynomial_decay: N exceeds dense feasibility bound");

  const ComplexMatrix gen =
      dense_generator_matrix(model, factors ? &*factors : nullptr);
  const int levels = spec.doubling_levels;
  const double h0 = spec.t_max / std::pow(2.0, levels);
  ComplexVector inv_a(model.size());
  for (Index j = 0; j < model.size(); ++j) inv_a[j] = 1.0 / (-model.eigenvalues()[j]);

  DecayFit out;
  out.table.name = "decay_envelope";
  out.table.x_label = "t";
  out.table.y_label = "operator_norm";
  if (alpha) out.expected_exponent = -1.0 / *alpha;

  ComplexMatrix s = (h0 * gen).exp();
  std::vector<double> ts, vals;
  for (int j = 0; j <= levels; ++j) {
    const double t = h0 * std::pow(2.0, j);
    const double v = detail::dense_scaled_operator_norm(model, s, inv_a, spec.norm_rel_tol,
                                                        spec.norm_max_iter);
    ts.push_back(t);
    vals.push_back(v);
    out.table.rows.emplace_back(t, v);
    if (j < levels) s = s * s;
  }

  // Least squares on (ln t, ln v) over the asymptotic window.
  std::vector<double> lx, ly;
  const double t_lo = spec.t_max / spec.window_divisor;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] + 1e-12 < t_lo) continue;
    if (!(vals[i] > 0.0) || !std::isfinite(vals[i])) {
      out.conclusive = false;
      continue;
    }
    lx.push_back(std::log(ts[i]));
    ly.push_back(std::log(vals[i]));
  }
  if (lx.size() < 3) {
    out.conclusive = false;
    return out;
  }
  for (std::size_t i = 0; i + 1 < ly.size(); ++i) {
    if (ly[i + 1] > ly[i] + 1e-12) out.monotone_tail = false;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  out.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.faster_than_polynomial = out.exponent < spec.faster_than_polynomial_slope;
  if (!out.monotone_tail) out.conclusive = false;
  return out;
}

/// Brute-force envelope oracle for diagonal models:
/// sup_j |e^{t lambda_j}| / |lambda_j| (the unperturbed decay law).
inline double diagonal_decay_envelope(const SpectralModel& model, double t) {
  double best = 0.0;
  for (Index j = 0; j < model.size(); ++j) {
    const Complex lam = model.eigenvalues()[j];
    best = std::max(best, std::exp(t * lam.real()) / std::abs(lam));
  }
  return best;
}

}  // namespace stabcert
