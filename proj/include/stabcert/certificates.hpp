#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stabcert/fractional.hpp"
#include "stabcert/grids.hpp"
#include "stabcert/parallel.hpp"
#include "stabcert/resolvent_engine.hpp"
#include "stabcert/spectral_model.hpp"

namespace stabcert {

struct ProfileScanSpec {
  double off_min = 1e-8;            // smallest scanned |omega - omega_k|
  int offsets_per_resonance = 60;   // log-spaced, mirrored around omega_k
  double window = 0.0;              // 0 -> max(2, 2*max|omega_k| + 2)
  int off_resonance_points = 241;
  double ladder_start = 1.0;
  double ladder_step = 0.25;        // coarse ladder avoids overfitting grid noise
  double ladder_max = 6.0;
  double divergence_margin = 10.0;  // rung bounded iff sup <= margin * edge value
  double headroom = 1.1;            // grids undersample suprema
  int threads = 1;
};

struct LadderRung {
  double alpha = 0.0;
  double sup = 0.0;
  double edge_value = 0.0;  // rung value at the largest offset
  double ratio = 0.0;
  bool bounded = false;
};

/// Assumption data for the resolvent of A near its imaginary-axis spectrum:
/// resonances, growth exponent alpha, neighborhood radius eps_A and the
/// bound M_A on and off the neighborhoods.
struct ResolventProfile {
  std::vector<double> resonances;
  double alpha = 1.0;
  double eps_a = 1.0;
  double m_a = 1.0;      // includes headroom
  double m_a_raw = 1.0;  // grid supremum before headroom
  double d_a = std::numeric_limits<double>::infinity();
  double semigroup_bound = 1.0;  // M; exactly 1 for normal contraction generators
  double off_resonance_sup = 0.0;
  std::vector<LadderRung> ladder;
  std::vector<bool> resonance_confirmed_as_local_max;
  ProfileScanSpec scan;
};

/// Fits Assumption-style data on the verification grid. Resonances come from
/// the closure points on the imaginary axis (authoritative) and are
/// cross-checked as local maxima of ||R(i omega, A)||; alpha is the smallest
/// rung of a coarse exponent ladder that stays bounded with margin.
inline ResolventProfile estimate_resolvent_profile(const SpectralModel& model,
                                                   const ProfileScanSpec& spec = {}) {
  if (!model.certifiable())
    throw InvalidInputError(
        "estimate_resolvent_profile: model is uncertifiable (spectrum outside the closed "
        "left half-plane or sampled on the imaginary axis)");

  ResolventProfile p;
  p.scan = spec;
  p.resonances = model.imaginary_axis_closure_frequencies();
  p.semigroup_bound = 1.0;

  if (p.resonances.size() >= 2) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < p.resonances.size(); ++i)
      gap = std::min(gap, p.resonances[i + 1] - p.resonances[i]);
    p.d_a = gap;
    p.eps_a = gap / 3.0;  // keeps the neighborhoods disjoint; within (0, max{1, d_A/3}]
  } else {
    p.d_a = std::numeric_limits<double>::infinity();
    p.eps_a = 1.0;
  }

  double max_res = 0.0;
  for (double wk : p.resonances) max_res = std::max(max_res, std::abs(wk));
  const double window = spec.window > 0.0 ? spec.window : std::max(2.0, 2.0 * max_res + 2.0);

  // Norm samples near each resonance (log offsets) and off the neighborhoods.
  std::vector<std::vector<double>> offs(p.resonances.size());
  std::vector<std::vector<double>> norms(p.resonances.size());
  auto norms_at = [&](const std::vector<double>& freqs) {
    std::vector<double> vals(freqs.size(), -1.0);
    parallel_for_index(
        static_cast<long>(freqs.size()),
        [&](long i) {
          try {
            vals[i] = resolvent_norm_exact(model, Complex(0.0, freqs[i]));
          } catch (const SingularPointError&) {
            vals[i] = -1.0;  // sampled point exactly on the grid; skip
          }
        },
        spec.threads);
    return vals;
  };

  for (std::size_t k = 0; k < p.resonances.size(); ++k) {
    const auto freqs = resonance_offset_frequencies(p.resonances[k], spec.off_min, p.eps_a,
                                                    spec.offsets_per_resonance);
    const auto vals = norms_at(freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (vals[i] < 0.0) continue;
      offs[k].push_back(std::abs(freqs[i] - p.resonances[k]));
      norms[k].push_back(vals[i]);
    }
    if (offs[k].empty())
      throw InvalidInputError("estimate_resolvent_profile: no admissible grid point near "
                              "resonance omega=" + std::to_string(p.resonances[k]));
  }

  std::vector<double> off_freqs;
  for (double w : linear_space(-window, window, spec.off_resonance_points)) {
    bool inside = false;
    for (double wk : p.resonances)
      if (std::abs(w - wk) <= p.eps_a) inside = true;
    if (!inside) off_freqs.push_back(w);
  }
  double off_sup = 0.0;
  for (double v : norms_at(off_freqs)) off_sup = std::max(off_sup, v);
  p.off_resonance_sup = off_sup;

  if (p.resonances.empty()) {
    p.alpha = 1.0;  // vacuous: no resonance neighborhoods exist
    p.m_a_raw = off_sup;
    p.m_a = spec.headroom * off_sup;
    return p;
  }

  // Exponent ladder.
  double alpha = -1.0;
  for (double a = spec.ladder_start; a <= spec.ladder_max + 1e-12; a += spec.ladder_step) {
    LadderRung rung;
    rung.alpha = a;
    bool bounded_everywhere = true;
    for (std::size_t k = 0; k < p.resonances.size(); ++k) {
      double sup = 0.0;
      double edge = 0.0;
      double edge_off = 0.0;
      for (std::size_t i = 0; i < offs[k].size(); ++i) {
        const double v = std::pow(offs[k][i], a) * norms[k][i];
        sup = std::max(sup, v);
        if (offs[k][i] > edge_off) {
          edge_off = offs[k][i];
          edge = v;
        }
      }
      rung.sup = std::max(rung.sup, sup);
      rung.edge_value = std::max(rung.edge_value, edge);
      const double ratio = sup / std::max(edge, 1e-300);
      rung.ratio = std::max(rung.ratio, ratio);
      if (ratio > spec.divergence_margin) bounded_everywhere = false;
    }
    rung.bounded = bounded_everywhere;
    p.ladder.push_back(rung);
    if (bounded_everywhere) {
      alpha = a;
      break;
    }
  }
  if (alpha < 0.0)
    throw InvalidInputError(
        "estimate_resolvent_profile: profile not polynomial (no bounded exponent on the "
        "ladder up to alpha_max)");
  p.alpha = std::max(1.0, alpha);

  // M_A from the accepted rung and the off-resonance supremum, with headroom.
  double rung_sup = 0.0;
  for (std::size_t k = 0; k < p.resonances.size(); ++k)
    for (std::size_t i = 0; i < offs[k].size(); ++i)
      rung_sup = std::max(rung_sup, std::pow(offs[k][i], p.alpha) * norms[k][i]);
  p.m_a_raw = std::max(rung_sup, off_sup);
  p.m_a = spec.headroom * p.m_a_raw;

  // Cross-check: the declared resonances should look like blow-up points.
  for (std::size_t k = 0; k < p.resonances.size(); ++k) {
    double inner = 0.0, outer = 0.0, inner_off = std::numeric_limits<double>::infinity(),
           outer_off = 0.0;
    for (std::size_t i = 0; i < offs[k].size(); ++i) {
      if (offs[k][i] < inner_off) {
        inner_off = offs[k][i];
        inner = norms[k][i];
      }
      if (offs[k][i] > outer_off) {
        outer_off = offs[k][i];
        outer = norms[k][i];
      }
    }
    p.resonance_confirmed_as_local_max.push_back(inner > spec.divergence_margin * outer);
  }
  return p;
}

/// M0 covering all three Omega_k cases (imaginary axis, real ray, interior).
inline double bound_M0(const ResolventProfile& p) {
  const double m = p.semigroup_bound;
  const double interior = std::pow(2.0, 0.5 * p.alpha) * (m + p.m_a * (1.0 + m));
  return std::max({p.m_a, m, interior});
}

/// M1 for the fractional-power resolvent bound; alpha split as n + alpha~.
inline double bound_M1(const ResolventProfile& p, double m0, double moment_constant = 1.0) {
  const double alpha_tilde = p.alpha - std::floor(p.alpha);
  if (alpha_tilde == 0.0) return m0;
  return std::pow(2.0, alpha_tilde + 1.0) * moment_constant * m0;
}

/// M2 bounding ||R(lambda,A)|| on the closed right half-plane off the
/// Omega_k neighborhoods. With no resonances only the imaginary-axis and
/// Hille-Yosida cases remain.
inline double bound_M2(const ResolventProfile& p, double m0) {
  const double m = p.semigroup_bound;
  if (p.resonances.empty()) return p.m_a * (1.0 + m);
  return std::max(p.m_a, m0 / std::pow(p.eps_a, p.alpha)) * (1.0 + m);
}

/// Measured sup of ||R(lambda,A)|| over the closed right half-plane window
/// minus the Omega_k regions (exact for normal models); the analytic-path
/// alternative to the M2 formula.
inline double measure_off_region_resolvent_sup(const SpectralModel& model,
                                               const ResolventProfile& p,
                                               double re_max = 10.0, double im_max = 10.0,
                                               int n_re = 41, int n_im = 81,
                                               int n_arc = 65) {
  double sup = 0.0;
  auto consider = [&](Complex z) {
    for (double wk : p.resonances)
      if (std::abs(z - Complex(0.0, wk)) < p.eps_a * (1.0 - 1e-12)) return;
    try {
      sup = std::max(sup, resolvent_norm_exact(model, z));
    } catch (const SingularPointError&) {
    }
  };
  for (const Complex& z :
       half_plane_window_grid(re_max, im_max, n_re, n_im, p.resonances, p.eps_a))
    consider(z);
  const double window = p.scan.window > 0.0 ? p.scan.window : im_max;
  for (double w : linear_space(-window, window, p.scan.off_resonance_points))
    consider(Complex(0.0, w));
  for (double wk : p.resonances) {
    for (int a = 0; a < n_arc; ++a) {
      const double theta = -0.5 * kPi + kPi * a / (n_arc - 1);
      consider(Complex(0.0, wk) + p.eps_a * Complex(std::cos(theta), std::sin(theta)));
    }
  }
  return sup;
}

/// Structure of the Omega_k transfer-norm chain for given exponents:
/// chain(delta) = (M1 + m + n + extra) delta^2, where m = floor(beta),
/// n = floor(gamma) count the telescoping tail terms and `extra` marks the
/// additional split term of the fractional case with
/// frac(beta) + frac(gamma) = frac(alpha) + 1. The direct form (model-
/// supplied M1 for integer alpha at a single resonance, as in the
/// multiplication-semigroup example) is the one-shot bound M1 delta^2.
struct ChainSpec {
  double m1 = 1.0;
  int m = 0;
  int n = 0;
  bool extra_split = false;
  bool direct = false;

  double tail_terms() const { return direct ? 0.0 : m + n + (extra_split ? 1.0 : 0.0); }
  double coefficient() const { return m1 + tail_terms(); }
};

inline ChainSpec make_chain_spec(double alpha, double beta, double gamma, double m1,
                                 bool direct) {
  if (beta < 0.0 || gamma < 0.0)
    throw InvalidInputError("make_chain_spec: beta, gamma must be >= 0");
  if (std::abs(beta + gamma - alpha) > 1e-12)
    throw InvalidInputError("make_chain_spec: beta + gamma must equal alpha");
  ChainSpec c;
  c.m1 = m1;
  c.direct = direct;
  c.m = static_cast<int>(std::floor(beta + 1e-12));
  c.n = static_cast<int>(std::floor(gamma + 1e-12));
  const double alpha_tilde = alpha - std::floor(alpha + 1e-12);
  const double frac_sum = (beta - c.m) + (gamma - c.n);
  c.extra_split = frac_sum > alpha_tilde + 0.5;
  return c;
}

/// Monotone-in-delta upper bound for sup over the Omega_k regions of
/// ||C R(lambda,A) B|| given all factor norms < delta.
inline double transfer_bound_chain(double delta, const ChainSpec& chain) {
  if (delta < 0.0) throw InvalidInputError("transfer_bound_chain: delta must be >= 0");
  return chain.coefficient() * delta * delta;
}

struct Delta1Result {
  double delta1 = 0.0;
  bool solvable = true;
  std::string diagnostic;
};

/// Largest certified delta with chain(delta) <= c, by 60-step bisection.
inline Delta1Result bound_delta1(double c, const ChainSpec& chain, double delta_hi = 10.0,
                                 int iterations = 60) {
  Delta1Result out;
  if (!(c > 0.0 && c < 1.0)) throw InvalidInputError("bound_delta1: need 0 < c < 1");
  const double floor_delta = delta_hi * std::pow(2.0, -iterations);
  if (transfer_bound_chain(floor_delta, chain) > c) {
    out.delta1 = 0.0;
    out.solvable = false;
    out.diagnostic = "chain exceeds c at delta_hi * 2^-" + std::to_string(iterations);
    return out;
  }
  double lo = 0.0, hi = delta_hi;
  if (transfer_bound_chain(hi, chain) <= c) {
    out.delta1 = hi;
    return out;
  }
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (transfer_bound_chain(mid, chain) <= c)
      lo = mid;
    else
      hi = mid;
  }
  out.delta1 = lo;
  return out;
}

/// Injectivity budget at the resonances: the interpolated product bound is
/// (K delta)^2 < 1 with moment constant K, so delta2 = 1/K (= 1 on the
/// certified normal path).
inline double bound_delta2(double moment_constant = 1.0) {
  if (!(moment_constant >= 1.0))
    throw InvalidInputError("bound_delta2: moment constant must be >= 1");
  return 1.0 / moment_constant;
}

struct RobustnessCertificate {
  ResolventProfile profile;
  double beta = 0.0;
  double gamma = 0.0;
  double c = 0.0;
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m2_raw = 0.0;  // measured sup before headroom (measured path only)
  std::string m1_source = "generic_chain";
  std::string m2_source = "formula";
  ChainSpec chain;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double sqrt_c_over_m2 = 0.0;
  double delta = 0.0;
  std::string binding;
  bool delta1_solvable = true;
};

struct CertificateOptions {
  std::optional<double> analytic_m1;    // model-supplied sup ||(-A_k)^alpha R(lambda,A)||
  std::optional<double> measured_m2;    // raw measured off-region sup (headroom applied here)
  double moment_constant = 1.0;         // 1 on the certified normal path
};

/// Analytic power-resolvent bound for a disk tangent to the imaginary axis
/// at the origin (center on the negative real axis, radius = |center|); by
/// the two-case estimate this is 8 * radius for alpha = 2.
inline std::optional<double> analytic_m1_for_tangent_disk(const SpectralModel& model) {
  const auto& disk = model.disk_support();
  if (!disk) return std::nullopt;
  if (!disk->tangent_to_imaginary_axis()) return std::nullopt;
  if (std::abs(disk->center.imag()) > 1e-14) return std::nullopt;
  return 8.0 * disk->radius;
}

/// Full constant chain and the budget delta = min{delta1, delta2,
/// sqrt(c/M2)}; records which term binds.
inline RobustnessCertificate compose_certificate(const ResolventProfile& profile, double beta,
                                                 double gamma, double c,
                                                 const CertificateOptions& options = {}) {
  if (!(c > 0.0 && c < 1.0)) throw InvalidInputError("compose_certificate: need 0 < c < 1");
  if (beta < 0.0 || gamma < 0.0)
    throw InvalidInputError("compose_certificate: beta, gamma must be >= 0");
  if (std::abs(beta + gamma - profile.alpha) > 1e-12)
    throw InvalidInputError("compose_certificate: beta + gamma must equal alpha");

  RobustnessCertificate cert;
  cert.profile = profile;
  cert.beta = beta;
  cert.gamma = gamma;
  cert.c = c;
  cert.m0 = bound_M0(profile);

  if (options.analytic_m1) {
    cert.m1 = *options.analytic_m1;
    cert.m1_source = "model_supplied";
  } else {
    cert.m1 = bound_M1(profile, cert.m0, options.moment_constant);
  }
  if (options.measured_m2) {
    cert.m2_raw = *options.measured_m2;
    cert.m2 = profile.scan.headroom * cert.m2_raw;
    cert.m2_source = "measured_sup";
  } else {
    cert.m2 = bound_M2(profile, cert.m0);
    cert.m2_raw = cert.m2;
  }
  cert.sqrt_c_over_m2 = std::sqrt(c / cert.m2);

  if (profile.resonances.empty()) {
    cert.delta1 = std::numeric_limits<double>::infinity();
    cert.delta2 = std::numeric_limits<double>::infinity();
    cert.delta = cert.sqrt_c_over_m2;
    cert.binding = "sqrt_c_over_M2";
    return cert;
  }

  cert.chain = make_chain_spec(profile.alpha, beta, gamma, cert.m1,
                               cert.m1_source == "model_supplied");
  const Delta1Result d1 = bound_delta1(c, cert.chain);
  cert.delta1 = d1.delta1;
  cert.delta1_solvable = d1.solvable;
  cert.delta2 = bound_delta2(options.moment_constant);

  cert.delta = std::min({cert.delta1, cert.delta2, cert.sqrt_c_over_m2});
  if (cert.delta == cert.delta1)
    cert.binding = "delta1";
  else if (cert.delta == cert.delta2)
    cert.binding = "delta2";
  else
    cert.binding = "sqrt_c_over_M2";
  return cert;
}

struct BudgetRecord {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

struct BudgetCheck {
  std::vector<BudgetRecord> records;
  double delta = 0.0;
  bool pass = true;
};

/// Measures ||B||, ||C|| and the graph norms at every resonance for the
/// certificate exponents; passes iff all are strictly below delta.
inline BudgetCheck check_budget(const SpectralModel& model, const PerturbationFactors& factors,
                                const RobustnessCertificate& cert) {
  BudgetCheck out;
  out.delta = cert.delta;
  auto add = [&](const std::string& name, double value) {
    BudgetRecord r{name, value, value < cert.delta};
    out.pass = out.pass && r.pass;
    out.records.push_back(std::move(r));
  };
  add("norm_B", operator_norm_b(model, factors));
  add("norm_C", operator_norm_c(model, factors));
  for (double wk : cert.profile.resonances) {
    add("graph_norm_B(omega=" + std::to_string(wk) + ",beta=" + std::to_string(cert.beta) + ")",
        graph_norm(model, factors, wk, cert.beta, FactorSide::BSide));
    add("graph_norm_C(omega=" + std::to_string(wk) + ",gamma=" + std::to_string(cert.gamma) +
            ")",
        graph_norm(model, factors, wk, cert.gamma, FactorSide::CSide));
  }
  return out;
}

}  // namespace stabcert
