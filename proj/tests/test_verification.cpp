#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stabcert/presets.hpp"
#include "stabcert/random.hpp"
#include "stabcert/verification.hpp"

using namespace stabcert;
using Catch::Approx;

TEST_CASE("transfer scan: zero factors and the oversized negative control") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 50);
  TransferScanSpec spec;
  spec.n_radii = 20;
  spec.n_angles = 17;
  spec.n_re = 11;
  spec.n_im = 21;

  const TransferScanResult zero =
      scan_transfer_norm(m, PerturbationFactors::zero(50), {0.0}, 1.0, spec);
  CHECK(zero.max_norm == 0.0);

  ComplexVector e1 = ComplexVector::Zero(50);
  e1[0] = 2.0;
  const TransferScanResult big =
      scan_transfer_norm(m, PerturbationFactors::rank_one(e1, e1), {0.0}, 1.0, spec);
  // Rank-one transfer 4/(lambda+1) -> 4 as lambda -> 0 along the scan floor.
  CHECK(big.max_norm >= 4.0 - 1e-6);
  CHECK(big.max_norm > 1.0);
}

TEST_CASE("transfer norm is invariant under the compensated rank-one rescaling") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 20);
  DeterministicRng rng(3);
  const ComplexVector b = rng.complex_normal_vector(20);
  const ComplexVector c = rng.complex_normal_vector(20);
  const PerturbationFactors f = PerturbationFactors::rank_one(b, c);
  const PerturbationFactors g =
      PerturbationFactors::rank_one((2.5 * b.array()).matrix(), (c.array() / 2.5).matrix());
  for (int trial = 0; trial < 6; ++trial) {
    const Complex lambda(rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0));
    CHECK(transfer_norm(m, f, lambda) ==
          Approx(transfer_norm(m, g, lambda)).epsilon(1e-12));
  }
}

TEST_CASE("injectivity products") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 40);
  const auto zero = check_injectivity_at_resonances(m, PerturbationFactors::zero(40), {0.0},
                                                    0.5, 0.5);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].product == 0.0);
  CHECK(zero[0].pass);
  CHECK(zero[0].beta1 == Approx(0.5));
  CHECK(zero[0].gamma1 == Approx(0.5));

  ComplexVector e1 = ComplexVector::Zero(40);
  e1[0] = 2.0;
  const auto fail = check_injectivity_at_resonances(
      m, PerturbationFactors::rank_one(e1, e1), {0.0}, 0.5, 0.5);
  CHECK(fail[0].product >= 4.0 - 1e-12);  // |i0+1|^{-1/2} scaling leaves 2 * 2
  CHECK_FALSE(fail[0].pass);
}

TEST_CASE("resolvent growth reduces to the unperturbed profile at B = 0") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 200);
  const ResolventProfile p = estimate_resolvent_profile(m);
  GrowthScanSpec spec;
  spec.offsets_per_resonance = 10;
  spec.off_resonance_points = 21;
  const GrowthScanResult r =
      check_resolvent_growth(m, PerturbationFactors::zero(200), p, 0.5, spec);
  CHECK(r.finite);
  CHECK(r.rung_sup <= p.m_a + 1e-9);
  CHECK(r.m_k == 0.0);
  CHECK(r.within_bound);
}

TEST_CASE("understating alpha by 0.5 is caught by the exact-norm rung scan") {
  // 1/dist profile of the unperturbed disk: the alpha - 0.5 rung grows like
  // offset^{-1/2} as the radius shrinks toward 1e-8.
  const SpectralModel m = build_disk_model(Complex(-1.0, 0.0), 1.0, 12, 24);
  const ResolventProfile p = estimate_resolvent_profile(m);
  REQUIRE(p.alpha == 2.0);
  const double understated = p.alpha - 0.5;
  double at_small = 0.0, at_large = 0.0;
  for (double off : log_space(1e-8, p.eps_a, 25)) {
    const double rung =
        std::pow(off, understated) * resolvent_norm_exact(m, Complex(0.0, off));
    if (at_small == 0.0) at_small = rung;
    at_large = rung;
  }
  CHECK(at_small > 10.0 * at_large);
  // The ladder recorded the same rejection for the 1.5 rung.
  bool saw = false;
  for (const auto& rung : p.ladder)
    if (rung.alpha == 1.5) {
      saw = true;
      CHECK(rung.ratio > 10.0);
      CHECK_FALSE(rung.bounded);
    }
  CHECK(saw);

  // At B = 0 the perturbed growth scan on the sampled truncation stays within
  // the unperturbed bound.
  GrowthScanSpec spec;
  spec.offsets_per_resonance = 12;
  spec.off_resonance_points = 11;
  const GrowthScanResult r =
      check_resolvent_growth(m, PerturbationFactors::zero(m.size()), p, 0.5, spec);
  CHECK(r.finite);
  CHECK(r.within_bound);
}

TEST_CASE("uniform boundedness functional reproduces the Poisson integral") {
  // x = e_3 on diag(-1/k): xi * int ||R(xi+i eta) x||^2 d eta = xi pi/(xi + 1/3).
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 10);
  ComplexVector e3 = ComplexVector::Zero(10);
  e3[2] = 1.0;
  BoundednessSpec spec;
  spec.check_refinement = true;
  const BoundednessResult r = uniform_boundedness_functional(m, std::nullopt, e3, spec);
  REQUIRE(r.verdict == "finite");
  for (const auto& [xi, value] : r.table.rows) {
    const double expected = xi * kPi / (xi + 1.0 / 3.0);
    CHECK(value == Approx(expected).epsilon(1e-3));
  }
  CHECK(r.sup >= 0.999 * kPi);
  CHECK(r.sup <= kPi * (1.0 + 1e-3));
  CHECK(r.sup_adjoint >= 0.999 * kPi);  // same closed form for the adjoint at p = 0
}

TEST_CASE("uniform boundedness functional vanishes at x = 0") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 5);
  BoundednessSpec spec;
  spec.xi_points = 5;
  spec.check_refinement = false;
  const BoundednessResult r =
      uniform_boundedness_functional(m, std::nullopt, ComplexVector::Zero(5), spec);
  CHECK(r.sup == 0.0);
}

TEST_CASE("perturbed boundedness functional stays within the proof inflation") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 60);
  ComplexVector e1 = ComplexVector::Zero(60);
  e1[0] = 1.0;
  BoundednessSpec spec;
  spec.xi_points = 9;
  spec.check_refinement = false;
  const BoundednessResult base = uniform_boundedness_functional(m, std::nullopt, e1, spec);
  const PerturbationFactors f = basis_rank_one_factors(m, 0.05);
  const BoundednessResult pert = uniform_boundedness_functional(m, f, e1, spec);
  CHECK(pert.verdict != "inconclusive");
  CHECK(pert.sup <= 2.0 * base.sup);
}

TEST_CASE("rbcr integral: zero factors, finiteness and quartic homogeneity") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 30);
  BoundednessSpec spec;
  spec.xi_points = 7;
  spec.check_refinement = false;

  ComplexVector b = ComplexVector::Zero(30);
  const BoundednessResult zero =
      rbcr_integral(m, PerturbationFactors::rank_one(b, b), spec);
  CHECK(zero.sup == 0.0);

  const PerturbationFactors f = basis_rank_one_factors(m, 0.1);
  const BoundednessResult r = rbcr_integral(m, f, spec);
  CHECK(r.sup > 0.0);
  CHECK(std::isfinite(r.sup));

  const PerturbationFactors g = basis_rank_one_factors(m, 0.2);
  const BoundednessResult r2 = rbcr_integral(m, g, spec);
  CHECK(r2.sup == Approx(16.0 * r.sup).epsilon(1e-9));
}

TEST_CASE("trajectory closed form and the two simulation paths agree") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 10);
  ComplexVector e1 = ComplexVector::Zero(10);
  e1[0] = 1.0;
  TimeGridSpec grid;
  grid.t_max = 1.0;
  grid.steps = 10;
  const Trajectory t = simulate_semigroup(m, std::nullopt, e1, grid);
  CHECK(t.norms.back() == Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK_FALSE(t.growth_flag);

  DeterministicRng rng(19);
  ComplexMatrix b(10, 2), c(10, 2);
  for (Index j = 0; j < 2; ++j) {
    b.col(j) = 0.1 * rng.complex_normal_vector(10);
    c.col(j) = 0.1 * rng.complex_normal_vector(10);
  }
  const PerturbationFactors f(b, c);
  const ComplexVector x0 = rng.complex_normal_vector(10);
  TimeGridSpec g2;
  g2.t_max = 5.0;
  g2.steps = 25;
  const Trajectory pade = simulate_semigroup(m, f, x0, g2);
  const Trajectory eig = simulate_semigroup_eigen(m, f, x0, g2);
  REQUIRE(pade.norms.size() == eig.norms.size());
  for (std::size_t i = 0; i < pade.norms.size(); ++i)
    CHECK(std::abs(pade.norms[i] - eig.norms[i]) <= 1e-9 * std::max(1.0, eig.norms[i]));
}

TEST_CASE("matrix-free integrator tracks the dense exponential") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse_plus_ik(), 50);
  DeterministicRng rng(29);
  ComplexMatrix b(50, 2), c(50, 2);
  for (Index j = 0; j < 2; ++j) {
    b.col(j) = 0.05 * rng.complex_normal_vector(50);
    c.col(j) = 0.05 * rng.complex_normal_vector(50);
  }
  const PerturbationFactors f(b, c);
  ComplexVector x0 = rng.complex_normal_vector(50);
  TimeGridSpec grid;
  grid.t_max = 4.0;
  grid.steps = 16;
  const Trajectory dense = simulate_semigroup(m, f, x0, grid);
  const Trajectory free = simulate_semigroup_matrix_free(m, f, x0, grid);
  REQUIRE(dense.norms.size() == free.norms.size());
  for (std::size_t i = 0; i < dense.norms.size(); ++i)
    CHECK(std::abs(dense.norms[i] - free.norms[i]) <= 1e-6 * std::max(1.0, dense.norms[i]));
}

TEST_CASE("destabilizing factors produce a growth flag, not an error") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 20);
  const PerturbationFactors f = basis_rank_one_factors(m, 2.0);  // shifts -1 to +3
  ComplexVector e1 = ComplexVector::Zero(20);
  e1[0] = 1.0;
  TimeGridSpec grid;
  grid.t_max = 8.0;
  grid.steps = 80;
  const Trajectory t = simulate_semigroup(m, f, e1, grid);
  CHECK(t.growth_flag);
  // e1 is an eigenvector of the shifted mode: growth factor e^3 per time unit.
  const double ratio = t.norms[60] / t.norms[50];  // one time unit apart
  CHECK(ratio == Approx(std::exp(3.0)).epsilon(1e-3));
}

TEST_CASE("decay fit matches the brute-force envelope oracle") {
  const SpectralModel m = poly_preset_model(100);
  DecayFitSpec spec;
  spec.t_max = 50.0;
  const DecayFit fit = fit_polynomial_decay(m, std::nullopt, spec, 1.0);
  CHECK(fit.conclusive);
  CHECK(fit.exponent == Approx(-1.0).margin(0.1));
  for (const auto& [t, v] : fit.table.rows) {
    if (t < 5.0) continue;
    // Power iteration reaches the smooth maximum of the clustered mode
    // envelope from below to per-mille accuracy.
    CHECK(v == Approx(diagonal_decay_envelope(m, t)).epsilon(1e-3));
    CHECK(v <= diagonal_decay_envelope(m, t) * (1.0 + 1e-12));
  }
}

TEST_CASE("exponentially stable models are flagged faster-than-polynomial") {
  const SpectralModel m = build_diagonal_model(rule_neg_linear(), 30);
  DecayFitSpec spec;
  spec.t_max = 60.0;
  const DecayFit fit = fit_polynomial_decay(m, std::nullopt, spec, 1.0);
  CHECK(fit.faster_than_polynomial);
}

TEST_CASE("decay fit refuses models with spectrum touching the axis") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 10);
  CHECK_THROWS_AS(fit_polynomial_decay(m, std::nullopt), InvalidInputError);
}

TEST_CASE("reported suprema are stable under grid refinement") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 20);
  ComplexVector e2 = ComplexVector::Zero(20);
  e2[1] = 1.0;
  BoundednessSpec coarse;
  coarse.xi_points = 13;
  coarse.check_refinement = false;
  BoundednessSpec fine = coarse;
  fine.xi_points = 26;
  const double a = uniform_boundedness_functional(m, std::nullopt, e2, coarse).sup;
  const double b = uniform_boundedness_functional(m, std::nullopt, e2, fine).sup;
  CHECK(std::abs(a - b) <= 0.01 * std::max(a, b));
}

TEST_CASE("verification report aggregates pass/fail") {
  VerificationReport r;
  r.add({"a", "", 1.0, 2.0, 0.0, true, ""});
  CHECK(r.pass());
  r.add({"b", "", 3.0, 2.0, 0.0, false, ""});
  CHECK_FALSE(r.pass());
}
