// Command-line front end: certify / verify / verify-polynomial / simulate /
// reproduce. Exit codes: 0 pass, 1 verification failure, 2 configuration or
// model error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "stabcert/io.hpp"
#include "stabcert/presets.hpp"

namespace {

using namespace stabcert;

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfigError = 2;

struct CommonOpts {
  std::string model_path;
  std::string pert_path;
  std::string out_path;
  std::string plots_dir;
  int threads = 1;
};

SpectralModel load_model(const std::string& path) { return model_from_json(load_json(path)); }

PerturbationFactors load_factors(const std::string& path) {
  return factors_from_json(load_json(path));
}

void maybe_write_plots(const std::string& dir, const VerificationReport& report) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  write_plot_tables(dir, report.tables);
}

int run_certify(const CommonOpts& opts, double c, double beta, double gamma,
                bool beta_given, const std::string& analytic_m1_mode,
                const ProfileScanSpec& scan) {
  const SpectralModel model = load_model(opts.model_path);
  const ResolventProfile profile = estimate_resolvent_profile(model, scan);

  double b = beta, g = gamma;
  if (!beta_given) {
    b = 0.5 * profile.alpha;
    g = 0.5 * profile.alpha;
  }

  CertificateOptions copts;
  if (analytic_m1_mode == "auto") {
    copts.analytic_m1 = analytic_m1_for_tangent_disk(model);
    if (copts.analytic_m1)
      copts.measured_m2 = measure_off_region_resolvent_sup(model, profile);
  }
  const RobustnessCertificate cert = compose_certificate(profile, b, g, c, copts);

  std::printf("alpha      = %g\n", profile.alpha);
  std::printf("resonances =");
  for (double wk : profile.resonances) std::printf(" %g", wk);
  std::printf("\n");
  std::printf("M_A=%g M0=%g M1=%g (%s) M2=%g (%s)\n", profile.m_a, cert.m0, cert.m1,
              cert.m1_source.c_str(), cert.m2, cert.m2_source.c_str());
  std::printf("delta1=%g delta2=%g sqrt(c/M2)=%g\n", cert.delta1, cert.delta2,
              cert.sqrt_c_over_m2);
  std::printf("delta      = %.12g  (binding term: %s)\n", cert.delta, cert.binding.c_str());

  if (!opts.pert_path.empty()) {
    const PerturbationFactors factors = load_factors(opts.pert_path);
    const BudgetCheck budget = check_budget(model, factors, cert);
    for (const auto& r : budget.records)
      std::printf("budget %-48s %.9g %s\n", r.name.c_str(), r.value,
                  r.pass ? "< delta" : ">= delta (VIOLATION)");
    std::printf("budget     = %s\n", budget.pass ? "pass" : "fail");
  }

  if (!opts.out_path.empty()) save_json(opts.out_path, certificate_to_json(cert));
  return kExitPass;
}

int run_verify(const CommonOpts& opts, const std::string& cert_path, VerifyConfig cfg) {
  if (cert_path.empty() || !std::filesystem::exists(cert_path)) {
    std::fprintf(stderr, "verify: certificate file missing; run `stabcert certify` first\n");
    return kExitConfigError;
  }
  const SpectralModel model = load_model(opts.model_path);
  const PerturbationFactors factors = load_factors(opts.pert_path);
  const RobustnessCertificate cert = certificate_from_json(load_json(cert_path));
  cfg.threads = opts.threads;

  const VerificationReport report = run_full_verification(model, factors, cert, cfg);
  for (const auto& r : report.checks)
    std::printf("[%s] %-44s measured=%.9g threshold=%.9g\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.measured, r.threshold);
  if (!opts.out_path.empty()) save_json(opts.out_path, report_to_json(report));
  maybe_write_plots(opts.plots_dir, report);
  std::printf("verification: %s\n", report.pass() ? "PASS" : "FAIL");
  return report.pass() ? kExitPass : kExitVerifyFail;
}

int run_verify_polynomial(const CommonOpts& opts, double beta, double gamma,
                          std::optional<double> alpha, double t_max, double tol) {
  const SpectralModel model = load_model(opts.model_path);
  if (!model.imaginary_axis_closure_frequencies().empty()) {
    std::fprintf(stderr,
                 "verify-polynomial: model has spectrum touching the imaginary axis\n");
    return kExitConfigError;
  }
  const double a = alpha ? *alpha : fit_resolvent_growth_exponent(model);
  if (beta + gamma + 0.1 < a) {
    std::fprintf(stderr, "verify-polynomial: beta + gamma = %g violates >= alpha = %g\n",
                 beta + gamma, a);
    return kExitConfigError;
  }
  const PerturbationFactors factors = load_factors(opts.pert_path);

  VerificationReport report;
  const double gb = positive_power_graph_norm(model, factors, beta, FactorSide::BSide);
  const double gc = positive_power_graph_norm(model, factors, gamma, FactorSide::CSide);
  report.add({"graph_norm_positive_B", "||(-A)^beta B||", gb,
              std::numeric_limits<double>::infinity(), 0.0, std::isfinite(gb), ""});
  report.add({"graph_norm_positive_C", "||(-A^*)^gamma C^*||", gc,
              std::numeric_limits<double>::infinity(), 0.0, std::isfinite(gc), ""});

  DecayFitSpec fit;
  fit.t_max = t_max;
  const DecayFit base = fit_polynomial_decay(model, std::nullopt, fit, a);
  const DecayFit pert = fit_polynomial_decay(model, factors, fit, a);
  const double expected = -1.0 / a;
  report.add({"decay_exponent_unperturbed", "log-log fit", base.exponent, expected, tol,
              base.conclusive && std::abs(base.exponent - expected) <= tol * std::abs(expected),
              ""});
  report.add({"decay_exponent_perturbed", "log-log fit", pert.exponent, expected, tol,
              pert.conclusive && std::abs(pert.exponent - expected) <= tol * std::abs(expected),
              ""});
  report.fitted_exponents["unperturbed"] = base.exponent;
  report.fitted_exponents["perturbed"] = pert.exponent;
  report.tables.push_back(base.table);
  PlotTable pt = pert.table;
  pt.name += "_perturbed";
  report.tables.push_back(pt);

  for (const auto& r : report.checks)
    std::printf("[%s] %-32s measured=%.9g expected=%.9g\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.measured, r.threshold);
  if (!opts.out_path.empty()) save_json(opts.out_path, report_to_json(report));
  maybe_write_plots(opts.plots_dir, report);
  return report.pass() ? kExitPass : kExitVerifyFail;
}

int run_simulate(const CommonOpts& opts, double t_max, int steps, const std::string& x_spec) {
  const SpectralModel model = load_model(opts.model_path);
  std::optional<PerturbationFactors> factors;
  if (!opts.pert_path.empty()) factors = load_factors(opts.pert_path);

  ComplexVector x0;
  if (x_spec.rfind("basis:", 0) == 0) {
    const Index j = std::stol(x_spec.substr(6));
    if (j < 0 || j >= model.size()) throw InvalidInputError("simulate: basis index out of range");
    x0 = ComplexVector::Zero(model.size());
    x0[j] = 1.0;
  } else if (x_spec.rfind("random:", 0) == 0) {
    DeterministicRng rng(std::stoull(x_spec.substr(7)));
    x0 = rng.complex_normal_vector(model.size());
    x0 /= model.weighted_norm(x0);
  } else {
    throw InvalidInputError("simulate: --x must be basis:<j> or random:<seed>");
  }

  TimeGridSpec grid;
  grid.t_max = t_max;
  grid.steps = steps;
  const Trajectory traj = simulate_semigroup(model, factors, x0, grid);
  PlotTable table;
  table.name = "trajectory";
  table.x_label = "t";
  table.y_label = "norm";
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    table.rows.emplace_back(traj.times[i], traj.norms[i]);
  const std::string csv = plot_table_to_csv(table);
  if (!opts.out_path.empty())
    write_text_file(opts.out_path, csv);
  else
    std::fputs(csv.c_str(), stdout);
  if (traj.growth_flag)
    std::printf("# growth flag: trajectory did not decay%s\n",
                traj.overflow_flag ? " (overflow; truncated)" : "");
  return kExitPass;
}

int run_reproduce(const std::string& preset, const std::string& out_dir, int threads) {
  std::filesystem::create_directories(out_dir);
  VerificationReport report;
  if (preset == "disk") {
    DiskRunConfig cfg;
    cfg.threads = threads;
    const DiskRun run = run_disk_reproduction(cfg);
    report = run.report;
    save_json(out_dir + "/certificate.json", certificate_to_json(run.cert));
  } else if (preset == "diagonal") {
    DiagonalRunConfig cfg;
    cfg.threads = threads;
    const DiagonalRun run = run_diagonal_reproduction(cfg);
    report = run.report;
    save_json(out_dir + "/certificate.json", certificate_to_json(run.cert));
  } else if (preset == "poly") {
    PolyRunConfig cfg;
    cfg.threads = threads;
    const PolyRun run = run_poly_reproduction(cfg);
    report = run.report;
  } else {
    std::fprintf(stderr, "reproduce: unknown preset '%s' (disk|diagonal|poly)\n",
                 preset.c_str());
    return kExitConfigError;
  }
  save_json(out_dir + "/report.json", report_to_json(report));
  write_plot_tables(out_dir, report.tables);
  for (const auto& r : report.checks)
    std::printf("[%s] %-44s measured=%.9g expected=%.9g\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.measured, r.threshold);
  std::printf("reproduce %s: %s\n", preset.c_str(), report.pass() ? "PASS" : "FAIL");
  return report.pass() ? kExitPass : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness certificates for strong and polynomial stability of "
               "C0-semigroups under finite-rank generator perturbations"};
  app.require_subcommand(1);

  CommonOpts opts;
  double c = 0.5, beta = 0.0, gamma = 0.0, t_max = 10.0, tol = 0.10;
  std::optional<double> alpha;
  int steps = 100;
  std::string cert_path, x_spec = "basis:0", analytic_m1 = "auto", preset, out_dir = ".";
  ProfileScanSpec scan;
  VerifyConfig verify_cfg;

  auto add_common = [&](CLI::App* cmd, bool needs_pert) {
    cmd->add_option("--model", opts.model_path, "model file (JSON)")->required();
    auto* p = cmd->add_option("--pert", opts.pert_path, "perturbation file (JSON)");
    if (needs_pert) p->required();
    cmd->add_option("--out", opts.out_path, "output file");
    cmd->add_option("--plots-dir", opts.plots_dir, "directory for plot-data CSV tables");
    cmd->add_option("--threads", opts.threads, "worker threads for grid scans");
  };

  CLI::App* certify = app.add_subcommand("certify", "estimate a resolvent profile and "
                                                    "compose a perturbation-budget certificate");
  add_common(certify, false);
  certify->add_option("--c", c, "contraction target in (0,1)");
  auto* beta_opt = certify->add_option("--beta", beta, "B-side exponent (default alpha/2)");
  certify->add_option("--gamma", gamma, "C-side exponent (default alpha/2)")->needs(beta_opt);
  certify->add_option("--analytic-m1", analytic_m1,
                      "auto|off: use a model-supplied power-resolvent bound when available");
  certify->add_option("--grid-off-min", scan.off_min, "smallest resonance offset scanned");
  certify->add_option("--grid-offsets", scan.offsets_per_resonance,
                      "offsets per resonance (log-spaced)");
  certify->add_option("--grid-window", scan.window, "imaginary-axis window half-width");
  certify->add_option("--grid-off-points", scan.off_resonance_points,
                      "off-resonance grid points");

  CLI::App* verify = app.add_subcommand("verify", "verify certified claims numerically");
  add_common(verify, true);
  verify->add_option("--cert", cert_path, "certificate file from `certify`");
  verify->add_option("--t-max", verify_cfg.horizon_multiplier,
                     "trajectory horizon as a multiple of N");
  verify->add_option("--steps", verify_cfg.trajectory_steps, "trajectory steps");

  CLI::App* verify_poly = app.add_subcommand(
      "verify-polynomial", "verify preservation of polynomial decay (beta+gamma >= alpha)");
  add_common(verify_poly, true);
  verify_poly->add_option("--beta", beta, "positive-power B exponent")->required();
  verify_poly->add_option("--gamma", gamma, "positive-power C exponent")->required();
  verify_poly->add_option("--alpha", alpha, "decay exponent (fitted from the resolvent if omitted)");
  verify_poly->add_option("--t-max", t_max, "fit horizon")->default_val(200.0);
  verify_poly->add_option("--tol", tol, "relative exponent tolerance");

  CLI::App* simulate = app.add_subcommand("simulate", "trajectory of ||T(t)x|| on the truncation");
  add_common(simulate, false);
  simulate->add_option("--x", x_spec, "initial state: basis:<j> or random:<seed>");
  simulate->add_option("--t-max", t_max, "final time")->required();
  simulate->add_option("--steps", steps, "uniform steps");

  CLI::App* reproduce = app.add_subcommand("reproduce", "reproduce a preset study");
  reproduce->add_option("preset", preset, "disk | diagonal | poly")->required();
  reproduce->add_option("--out-dir", out_dir, "output directory");
  reproduce->add_option("--threads", opts.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (certify->parsed())
      return run_certify(opts, c, beta, gamma, beta_opt->count() > 0, analytic_m1, scan);
    if (verify->parsed()) return run_verify(opts, cert_path, verify_cfg);
    if (verify_poly->parsed())
      return run_verify_polynomial(opts, beta, gamma, alpha, t_max, tol);
    if (simulate->parsed()) return run_simulate(opts, t_max, steps, x_spec);
    if (reproduce->parsed()) return run_reproduce(preset, out_dir, opts.threads);
  } catch (const InvalidInputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const SingularPointError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
  return kExitConfigError;
}
