#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stabcert/certificates.hpp"
#include "stabcert/random.hpp"
#include "stabcert/verification.hpp"

namespace stabcert {

// ---------------------------------------------------------------------------
// Preset inputs.
// ---------------------------------------------------------------------------

inline SpectralModel disk_preset_model(int n_radial = 32, int n_angular = 64) {
  return build_disk_model(Complex(-1.0, 0.0), 1.0, n_radial, n_angular);
}

/// Rank-one factors b = c = scale * mu on a disk model; mu vanishes at the
/// tangency point so the integrals |mu|^{-2 beta} |b|^2 stay finite for
/// beta <= 1 (a constant profile would fall outside the fractional domain).
inline PerturbationFactors disk_preset_factors(const SpectralModel& model, double scale) {
  ComplexVector b(model.size());
  for (Index j = 0; j < model.size(); ++j) b[j] = scale * model.eigenvalues()[j];
  return PerturbationFactors::rank_one(b, b);
}

inline SpectralModel diagonal_preset_model(Index n) {
  return build_diagonal_model(rule_neg_inverse(), n);
}

inline SpectralModel poly_preset_model(Index n = 400) {
  return build_diagonal_model(rule_neg_inverse_plus_ik(), n);
}

inline PerturbationFactors basis_rank_one_factors(const SpectralModel& model, double scale,
                                                  Index j = 0) {
  ComplexVector e = ComplexVector::Zero(model.size());
  e[j] = scale;
  return PerturbationFactors::rank_one(e, e);
}

// ---------------------------------------------------------------------------
// Full verification pipeline (the `verify` command body).
// ---------------------------------------------------------------------------

struct VerifyConfig {
  double trajectory_bound_factor = 2.0;  // uniform-bound policy: sup <= factor * ||x0||
  double decay_threshold = 0.2;          // ||T(t)x0|| <= threshold * ||x0|| by the horizon
  double horizon_multiplier = 5.0;       // t_max = multiplier * N (slowest retained mode)
  int trajectory_steps = 125;
  TransferScanSpec transfer;
  GrowthScanSpec growth;
  BoundednessSpec boundedness;
  int threads = 1;
  std::uint64_t probe_seed = 2024;
};

inline VerificationReport run_full_verification(const SpectralModel& model,
                                                const PerturbationFactors& factors,
                                                const RobustnessCertificate& cert,
                                                VerifyConfig cfg = {}) {
  cfg.transfer.threads = cfg.threads;
  cfg.growth.threads = cfg.threads;
  cfg.boundedness.threads = cfg.threads;
  VerificationReport report;

  const BudgetCheck budget = check_budget(model, factors, cert);
  for (const auto& r : budget.records) {
    report.add({"budget/" + r.name, "certificate delta=" + std::to_string(cert.delta), r.value,
                cert.delta, 0.0, r.pass, "pass iff value < delta"});
  }

  {
    std::ostringstream spec;
    spec << "Omega_k polar grids r in [" << cfg.transfer.r_min << "," << cert.profile.eps_a
         << "] x " << cfg.transfer.n_radii << "x" << cfg.transfer.n_angles
         << " + window grid " << cfg.transfer.n_re << "x" << cfg.transfer.n_im;
    const TransferScanResult scan = scan_transfer_norm(model, factors, cert.profile.resonances,
                                                       cert.profile.eps_a, cfg.transfer);
    report.add({"transfer_norm_sup", spec.str(), scan.max_norm, cert.c, 0.0,
                scan.max_norm <= cert.c,
                "skipped_singular=" + std::to_string(scan.skipped_singular)});
    report.tables.push_back(scan.region_profile);
  }

  for (const auto& r : check_injectivity_at_resonances(model, factors,
                                                       cert.profile.resonances, cert.beta,
                                                       cert.gamma)) {
    report.add({"injectivity(omega=" + std::to_string(r.omega_k) + ")",
                "beta1=" + std::to_string(r.beta1) + " gamma1=" + std::to_string(r.gamma1),
                r.product, 1.0, 0.0, r.pass, "graph-norm product must be < 1"});
  }

  {
    const GrowthScanResult growth =
        check_resolvent_growth(model, factors, cert.profile, cert.c, cfg.growth);
    report.add({"resolvent_growth_rung_sup",
                "log offsets [" + std::to_string(cfg.growth.off_min) + ", eps_A]",
                growth.rung_sup, growth.analytic_bound, 0.0,
                growth.finite && growth.rung_sup <= growth.analytic_bound,
                "bound M_A + M_k/(1-c), recorded M_k=" + std::to_string(growth.m_k)});
    report.add({"resolvent_growth_off_sup", "off-resonance window", growth.off_sup,
                growth.off_bound, 0.0, growth.finite && growth.off_sup <= growth.off_bound,
                "bound M_A + M_D ||B|| ||C|| M_A^2"});
    report.tables.push_back(growth.rung_table);
  }

  DeterministicRng rng(cfg.probe_seed);
  ComplexVector probe = rng.complex_normal_vector(model.size());
  probe /= model.weighted_norm(probe);

  {
    const BoundednessResult ub =
        uniform_boundedness_functional(model, factors, probe, cfg.boundedness);
    report.add({"uniform_boundedness_functional",
                "xi in [" + std::to_string(cfg.boundedness.xi_min) + "," +
                    std::to_string(cfg.boundedness.xi_max) + "], adaptive eta quadrature",
                ub.sup, std::numeric_limits<double>::infinity(), 0.0, ub.verdict == "finite",
                "verdict=" + ub.verdict + " adjoint_sup=" + std::to_string(ub.sup_adjoint)});
    report.tables.push_back(ub.table);
    report.tables.push_back(ub.table_adjoint);
  }

  {
    const BoundednessResult rb = rbcr_integral(model, factors, cfg.boundedness);
    report.add({"rbcr_integral", "xi grid + adaptive eta quadrature", rb.sup,
                std::numeric_limits<double>::infinity(), 0.0, rb.verdict == "finite",
                "verdict=" + rb.verdict});
    report.tables.push_back(rb.table);
  }

  if (model.size() <= 2000) {
    TimeGridSpec grid;
    grid.t_max = cfg.horizon_multiplier * static_cast<double>(model.size());
    grid.steps = cfg.trajectory_steps;
    const Trajectory traj = simulate_semigroup(model, factors, probe, grid);
    double sup = 0.0;
    for (double v : traj.norms) sup = std::max(sup, v);
    const double final_norm = traj.norms.back();
    report.add({"trajectory_uniform_bound",
                "t in [0," + std::to_string(grid.t_max) + "], " +
                    std::to_string(grid.steps) + " steps",
                sup, cfg.trajectory_bound_factor * traj.initial_norm, 0.0,
                !traj.overflow_flag && sup <= cfg.trajectory_bound_factor * traj.initial_norm,
                traj.growth_flag ? "growth flag set" : ""});
    report.add({"trajectory_decay_onset", "norm at horizon t=" + std::to_string(grid.t_max),
                final_norm, cfg.decay_threshold * traj.initial_norm, 0.0,
                !traj.overflow_flag &&
                    final_norm <= cfg.decay_threshold * traj.initial_norm,
                "policy threshold " + std::to_string(cfg.decay_threshold) + "*||x0||"});
    PlotTable tt;
    tt.name = "trajectory";
    tt.x_label = "t";
    tt.y_label = "norm";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      tt.rows.emplace_back(traj.times[i], traj.norms[i]);
    report.tables.push_back(tt);
  } else {
    report.add({"trajectory", "", 0.0, 0.0, 0.0, true,
                "skipped: N exceeds dense simulation bound"});
  }

  return report;
}

// ---------------------------------------------------------------------------
// reproduce presets.
// ---------------------------------------------------------------------------

struct DiskRun {
  double power_resolvent_grid_sup = 0.0;  // sup ||(-A)^2 R(lambda,A)|| over the window
  double alpha = 0.0;
  double rung175_ratio = 0.0;
  double rung175_value_near_1e3 = 0.0;  // rung value at omega = 1e-3
  ResolventProfile profile;
  RobustnessCertificate cert;
  double factor_scale = 0.0;
  BudgetCheck budget;
  double transfer_scan_max = 0.0;
  double injectivity_product = 0.0;
  VerificationReport report;
};

struct DiskRunConfig {
  int n_radial = 32;
  int n_angular = 64;
  double c = 0.8;
  double beta = 1.0;
  double gamma = 1.0;
  double budget_fraction = 0.5;
  int threads = 1;
};

/// Multiplication-semigroup reproduction: alpha = 2, model-supplied M1 = 8,
/// c = 4/5 and delta = 1/sqrt(10); certified rank-one factors at a fraction
/// of the budget are verified against the frequency-domain claims.
inline DiskRun run_disk_reproduction(const DiskRunConfig& cfg = {}) {
  DiskRun run;
  const SpectralModel model = disk_preset_model(cfg.n_radial, cfg.n_angular);

  // sup over the closed right half-plane window (minus the origin) of the
  // sampled ||(-A)^2 R(lambda, A)||.
  const auto window = half_plane_window_grid(10.0, 10.0, 41, 81, {}, 0.0,
                                             {Complex(0.0, 0.0)});
  std::vector<double> vals(window.size(), 0.0);
  parallel_for_index(
      static_cast<long>(window.size()),
      [&](long i) { vals[i] = power_resolvent_norm(model, 0.0, 2.0, window[i]); },
      cfg.threads);
  for (double v : vals) run.power_resolvent_grid_sup = std::max(run.power_resolvent_grid_sup, v);

  ProfileScanSpec scan;
  scan.threads = cfg.threads;
  run.profile = estimate_resolvent_profile(model, scan);
  run.alpha = run.profile.alpha;
  for (const LadderRung& rung : run.profile.ladder) {
    if (std::abs(rung.alpha - 1.75) < 1e-9) run.rung175_ratio = rung.ratio;
  }
  run.rung175_value_near_1e3 =
      std::pow(1e-3, 1.75) * resolvent_norm_exact(model, Complex(0.0, 1e-3));

  CertificateOptions opts;
  opts.analytic_m1 = analytic_m1_for_tangent_disk(model);
  opts.measured_m2 = measure_off_region_resolvent_sup(model, run.profile);
  run.cert = compose_certificate(run.profile, cfg.beta, cfg.gamma, cfg.c, opts);

  // Factors at the requested fraction of the budget: the binding norm of
  // b = s * mu is ||b|| = s sqrt(int |mu|^2).
  const PerturbationFactors unit = disk_preset_factors(model, 1.0);
  const double unit_norm = std::max({operator_norm_b(model, unit),
                                     graph_norm(model, unit, 0.0, cfg.beta, FactorSide::BSide),
                                     graph_norm(model, unit, 0.0, cfg.gamma, FactorSide::CSide)});
  run.factor_scale = cfg.budget_fraction * run.cert.delta / unit_norm;
  const PerturbationFactors factors = disk_preset_factors(model, run.factor_scale);

  run.budget = check_budget(model, factors, run.cert);

  TransferScanSpec tspec;
  tspec.threads = cfg.threads;
  const TransferScanResult scan_res =
      scan_transfer_norm(model, factors, run.profile.resonances, run.profile.eps_a, tspec);
  run.transfer_scan_max = scan_res.max_norm;

  const auto inj = check_injectivity_at_resonances(model, factors, run.profile.resonances,
                                                   cfg.beta, cfg.gamma);
  for (const auto& r : inj) run.injectivity_product = std::max(run.injectivity_product, r.product);

  VerificationReport& rep = run.report;
  rep.add({"power_resolvent_grid_sup", "window [0,10]x[-10,10] grid 41x81 minus origin",
           run.power_resolvent_grid_sup, 8.0, 1e-6,
           run.power_resolvent_grid_sup <= 8.0 + 1e-6, "sup ||(-A)^2 R(lambda,A)||"});
  rep.add({"alpha_ladder", "log offsets down to 1e-8", run.alpha, 2.0, 0.0,
           run.alpha == 2.0, "ladder step 0.25"});
  rep.add({"alpha_ladder_rung_1.75_diverges", "divergence ratio vs edge value",
           run.rung175_ratio, 10.0, 0.0, run.rung175_ratio > 10.0,
           "rung rejected; value at omega=1e-3: " +
               std::to_string(run.rung175_value_near_1e3)});
  rep.add({"delta", "min{delta1, delta2, sqrt(c/M2)}", run.cert.delta,
           1.0 / std::sqrt(10.0), 1e-12,
           std::abs(run.cert.delta - 1.0 / std::sqrt(10.0)) <= 1e-12,
           "binding term: " + run.cert.binding});
  rep.add({"budget_at_half", "all factor norms vs delta", cfg.budget_fraction * run.cert.delta,
           run.cert.delta, 0.0, run.budget.pass, "certified rank-one b=c= s*mu"});
  rep.add({"transfer_norm_scan", "Omega_0 polar + window grids", run.transfer_scan_max, cfg.c,
           0.0, run.transfer_scan_max <= cfg.c, ""});
  rep.add({"injectivity_product", "beta1+gamma1=1 split", run.injectivity_product, 1.0, 0.0,
           run.injectivity_product < 1.0, ""});
  rep.tables.push_back(scan_res.region_profile);
  return run;
}

struct DiagonalRun {
  ResolventProfile profile;
  RobustnessCertificate cert;
  std::vector<double> omegas{0.01, 0.1, 0.5, 1.0};
  std::vector<double> measured_products;  // |omega| * measured ||R(i omega, A)||
  std::vector<double> exact_products;     // |omega| * exact norm (= 1)
  VerificationReport report;
};

struct DiagonalRunConfig {
  Index n = 10000;
  double c = 0.5;
  int threads = 1;
};

/// Diagonal-operator reproduction: |omega| ||R(i omega, A)|| = 1 within the
/// truncation correction 1/sqrt(omega^2 + N^-2), and an alpha = 1 profile.
inline DiagonalRun run_diagonal_reproduction(const DiagonalRunConfig& cfg = {}) {
  DiagonalRun run;
  const SpectralModel model = diagonal_preset_model(cfg.n);

  ProfileScanSpec scan;
  scan.threads = cfg.threads;
  run.profile = estimate_resolvent_profile(model, scan);
  run.cert = compose_certificate(run.profile, 0.5 * run.profile.alpha,
                                 0.5 * run.profile.alpha, cfg.c);

  for (double w : run.omegas) {
    const NormEstimate est =
        perturbed_resolvent_norm(model, std::nullopt, Complex(0.0, w), 1e-10, 1500);
    run.measured_products.push_back(w * est.value);
    run.exact_products.push_back(w * resolvent_norm_exact(model, Complex(0.0, w)));
  }

  VerificationReport& rep = run.report;
  for (std::size_t i = 0; i < run.omegas.size(); ++i) {
    const double lo = 1.0 - 1e-3;
    rep.add({"omega_norm_product(omega=" + std::to_string(run.omegas[i]) + ")",
             "power iteration on the truncation, N=" + std::to_string(cfg.n),
             run.measured_products[i], 1.0, 1e-3,
             run.measured_products[i] >= lo && run.measured_products[i] <= 1.0,
             "expected band [1-1e-3, 1]; exact closure-aware product " +
                 std::to_string(run.exact_products[i])});
  }
  rep.add({"alpha_ladder", "log offsets down to 1e-8", run.profile.alpha, 1.0, 0.0,
           run.profile.alpha == 1.0, ""});
  rep.add({"delta", "generic chain, beta=gamma=alpha/2, c=" + std::to_string(cfg.c),
           run.cert.delta, run.cert.delta, 0.0, run.cert.delta > 0.0,
           "binding term: " + run.cert.binding});
  return run;
}

struct PolyRun {
  DecayFit unperturbed;
  DecayFit perturbed;
  double graph_norm_b = 0.0;
  double graph_norm_c = 0.0;
  double factor_scale = 0.0;
  VerificationReport report;
};

struct PolyRunConfig {
  Index n = 400;
  double beta = 0.5;
  double gamma = 0.5;
  double graph_budget = 0.05;  // on ||(-A)^beta B|| and ||(-A^*)^gamma C^*||
  double t_max = 200.0;
  double alpha = 1.0;
  double exponent_tolerance = 0.10;
  int threads = 1;
};

/// Polynomial-stability reproduction: lambda_k = -1/k + i k, decay exponent
/// of ||T(t)(-A)^{-1}|| within 10% of -1, unperturbed and under small
/// positive-power rank-one factors.
inline PolyRun run_poly_reproduction(const PolyRunConfig& cfg = {}) {
  PolyRun run;
  const SpectralModel model = poly_preset_model(cfg.n);

  const PerturbationFactors unit = basis_rank_one_factors(model, 1.0);
  const double unit_b = positive_power_graph_norm(model, unit, cfg.beta, FactorSide::BSide);
  const double unit_c = positive_power_graph_norm(model, unit, cfg.gamma, FactorSide::CSide);
  run.factor_scale = cfg.graph_budget / std::max(unit_b, unit_c);
  const PerturbationFactors factors = basis_rank_one_factors(model, run.factor_scale);
  run.graph_norm_b = positive_power_graph_norm(model, factors, cfg.beta, FactorSide::BSide);
  run.graph_norm_c = positive_power_graph_norm(model, factors, cfg.gamma, FactorSide::CSide);

  DecayFitSpec fit;
  fit.t_max = cfg.t_max;
  run.unperturbed = fit_polynomial_decay(model, std::nullopt, fit, cfg.alpha);
  run.perturbed = fit_polynomial_decay(model, factors, fit, cfg.alpha);

  const double expected = -1.0 / cfg.alpha;
  auto within = [&](const DecayFit& f) {
    return f.conclusive &&
           std::abs(f.exponent - expected) <= cfg.exponent_tolerance * std::abs(expected);
  };
  VerificationReport& rep = run.report;
  rep.add({"decay_exponent_unperturbed",
           "log-log fit, t in [t_max/16, t_max], t_max=" + std::to_string(cfg.t_max),
           run.unperturbed.exponent, expected, cfg.exponent_tolerance,
           within(run.unperturbed), ""});
  rep.add({"decay_exponent_perturbed",
           "rank-one factors, ||(-A)^b B||=" + std::to_string(run.graph_norm_b),
           run.perturbed.exponent, expected, cfg.exponent_tolerance, within(run.perturbed),
           ""});
  rep.fitted_exponents["unperturbed"] = run.unperturbed.exponent;
  rep.fitted_exponents["perturbed"] = run.perturbed.exponent;
  rep.tables.push_back(run.unperturbed.table);
  PlotTable pt = run.perturbed.table;
  pt.name += "_perturbed";
  rep.tables.push_back(pt);
  return run;
}

/// Upper-envelope growth exponent of ||R(i omega, A)|| fitted over octave
/// windows (polynomial-stability alpha).
inline double fit_resolvent_growth_exponent(const SpectralModel& model, double omega_lo = 2.0,
                                            int octaves = 6, int per_octave = 64) {
  std::vector<double> lx, ly;
  for (int j = 0; j < octaves; ++j) {
    const double w0 = omega_lo * std::pow(2.0, j);
    double sup = 0.0;
    for (int i = 0; i < per_octave; ++i) {
      const double w = w0 * (0.9 + 0.2 * i / (per_octave - 1));
      try {
        sup = std::max(sup, resolvent_norm_exact(model, Complex(0.0, w)));
      } catch (const SingularPointError&) {
      }
    }
    if (sup > 0.0) {
      lx.push_back(std::log(w0));
      ly.push_back(std::log(sup));
    }
  }
  if (lx.size() < 2) throw InvalidInputError("fit_resolvent_growth_exponent: no data");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace stabcert
