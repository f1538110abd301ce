#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stabcert/fractional.hpp"
#include "stabcert/random.hpp"

using namespace stabcert;
using Catch::Approx;

namespace {
SpectralModel example_model(Index n) { return build_diagonal_model(rule_neg_inverse(), n); }
}  // namespace

TEST_CASE("fractional resolvent powers on the diagonal model scale basis vectors by k^beta") {
  const SpectralModel m = example_model(6);
  for (double beta : {0.3, 1.0, 2.5}) {
    for (Index k : {Index(0), Index(2), Index(5)}) {
      ComplexVector e = ComplexVector::Zero(6);
      e[k] = 1.0;
      const ComplexVector y =
          apply_fractional_resolvent_power(m, 0.0, beta, e, FactorSide::BSide);
      CHECK(std::abs(y[k]) == Approx(std::pow(double(k + 1), beta)).epsilon(1e-13));
    }
  }
}

TEST_CASE("zeroth power is the identity") {
  const SpectralModel m = example_model(5);
  DeterministicRng rng(3);
  const ComplexVector x = rng.complex_normal_vector(5);
  const ComplexVector y = apply_fractional_resolvent_power(m, 0.7, 0.0, x, FactorSide::CSide);
  CHECK(m.weighted_norm(y - x) < 1e-15);
}

TEST_CASE("inverse power closed form on a two-mode model") {
  ComplexVector ev(2);
  ev << Complex(-1.0, 0.0), Complex(-0.5, 0.0);
  const SpectralModel m = build_custom_model(ev, RealVector::Ones(2), {});
  ComplexVector x(2);
  x << 1.0, 1.0;
  const ComplexVector y = apply_fractional_resolvent_power(m, 0.0, 1.0, x, FactorSide::BSide);
  CHECK(std::abs(y[0] - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(y[1] - Complex(2.0, 0.0)) < 1e-15);
}

TEST_CASE("negative exponents are rejected; singular bases raise errors") {
  const SpectralModel m = example_model(4);
  ComplexVector x = ComplexVector::Ones(4);
  CHECK_THROWS_AS(apply_fractional_resolvent_power(m, 0.0, -0.5, x, FactorSide::BSide),
                  InvalidInputError);
  ComplexVector ev(1);
  ev << Complex(0.0, 1.0);  // accepted but flagged; base vanishes at omega = 1
  const SpectralModel axis = build_custom_model(ev, RealVector::Ones(1), {});
  ComplexVector one = ComplexVector::Ones(1);
  CHECK_THROWS_AS(apply_fractional_resolvent_power(axis, 1.0, 0.5, one, FactorSide::BSide),
                  SingularPointError);
}

TEST_CASE("graph norms: rank-one closed forms") {
  const SpectralModel m = example_model(8);
  ComplexVector e1 = ComplexVector::Zero(8);
  e1[0] = 1.0;
  const PerturbationFactors f1 = PerturbationFactors::rank_one(e1, e1);
  CHECK(graph_norm(m, f1, 0.0, 1.0, FactorSide::BSide) == Approx(1.0).epsilon(1e-13));

  ComplexVector b = ComplexVector::Zero(8);
  b[0] = 1.0;
  b[1] = 0.5;
  const PerturbationFactors f2 = PerturbationFactors::rank_one(b, b);
  // k^1 scaling maps (1, 1/2) to (1, 1); Euclidean norm sqrt(2).
  CHECK(graph_norm(m, f2, 0.0, 1.0, FactorSide::BSide) ==
        Approx(std::sqrt(2.0)).epsilon(1e-13));
  // beta = 0 reduces to the plain operator norm.
  CHECK(graph_norm(m, f2, 0.0, 0.0, FactorSide::BSide) ==
        Approx(operator_norm_b(m, f2)).epsilon(1e-13));
}

TEST_CASE("graph norm is absolutely homogeneous in the factors") {
  const SpectralModel m = example_model(12);
  DeterministicRng rng(5);
  ComplexMatrix b(12, 2), c(12, 2);
  for (Index j = 0; j < 2; ++j) {
    b.col(j) = rng.complex_normal_vector(12);
    c.col(j) = rng.complex_normal_vector(12);
  }
  const PerturbationFactors f(b, c);
  const PerturbationFactors g = f.scaled(Complex(-2.5, 1.0), Complex(1.0, 0.0));
  const double base = graph_norm(m, f, 0.0, 0.75, FactorSide::BSide);
  const double scaled = graph_norm(m, g, 0.0, 0.75, FactorSide::BSide);
  CHECK(scaled == Approx(std::abs(Complex(-2.5, 1.0)) * base).epsilon(1e-12));
}

TEST_CASE("semigroup property of fractional powers") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse_plus_ik(), 24);
  DeterministicRng rng(9);
  const ComplexVector x = rng.complex_normal_vector(24);
  for (auto [b1, b2] : {std::pair{0.25, 0.5}, std::pair{1.3, 0.9}}) {
    const ComplexVector two_step = apply_fractional_resolvent_power(
        m, 0.4, b2, apply_fractional_resolvent_power(m, 0.4, b1, x, FactorSide::BSide),
        FactorSide::BSide);
    const ComplexVector one_step =
        apply_fractional_resolvent_power(m, 0.4, b1 + b2, x, FactorSide::BSide);
    CHECK(m.weighted_norm(two_step - one_step) <= 1e-12 * m.weighted_norm(one_step));
  }
}

TEST_CASE("monotone interpolation of graph norms on the normal path") {
  const SpectralModel m = example_model(20);
  DeterministicRng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix b(20, 2), c(20, 2);
    for (Index j = 0; j < 2; ++j) {
      b.col(j) = rng.complex_normal_vector(20);
      c.col(j) = rng.complex_normal_vector(20);
    }
    const PerturbationFactors f(b, c);
    const double beta = 1.5, beta_t = 0.6;
    const double g0 = graph_norm(m, f, 0.0, 0.0, FactorSide::BSide);
    const double gb = graph_norm(m, f, 0.0, beta, FactorSide::BSide);
    const double gt = graph_norm(m, f, 0.0, beta_t, FactorSide::BSide);
    const double theta = beta_t / beta;
    CHECK(gt <= std::pow(g0, 1.0 - theta) * std::pow(gb, theta) * (1.0 + 1e-12));
  }
}

TEST_CASE("fractional domain probe flags quadrature-divergent columns") {
  const SpectralModel coarse = build_disk_model(Complex(-1.0, 0.0), 1.0, 16, 32);
  const SpectralModel fine = build_disk_model(Complex(-1.0, 0.0), 1.0, 32, 64);
  // Constant profile: int |mu|^{-2} |b|^2 diverges logarithmically at the
  // tangency, which only refinement exposes.
  const PerturbationFactors const_coarse =
      PerturbationFactors::rank_one(ComplexVector::Ones(coarse.size()),
                                    ComplexVector::Ones(coarse.size()));
  const PerturbationFactors const_fine = PerturbationFactors::rank_one(
      ComplexVector::Ones(fine.size()), ComplexVector::Ones(fine.size()));
  const DomainCheckResult bad = fractional_domain_check(coarse, const_coarse, fine, const_fine,
                                                        0.0, 1.0, FactorSide::BSide);
  CHECK_FALSE(bad.in_domain);

  auto mu_profile = [](const SpectralModel& m) {
    ComplexVector b(m.size());
    for (Index j = 0; j < m.size(); ++j) b[j] = m.eigenvalues()[j];
    return PerturbationFactors::rank_one(b, b);
  };
  const DomainCheckResult good = fractional_domain_check(
      coarse, mu_profile(coarse), fine, mu_profile(fine), 0.0, 1.0, FactorSide::BSide);
  CHECK(good.in_domain);
}

TEST_CASE("moment inequality closed form") {
  ComplexVector ev(2);
  ev << Complex(-1.0, 0.0), Complex(-2.0, 0.0);
  const SpectralModel m = build_custom_model(ev, RealVector::Ones(2), {});
  ComplexVector x(2);
  x << 1.0, 1.0;
  const MomentCheck r =
      check_moment_inequality(m, 0.0, 0.5, 1.0, x, MomentDirection::PositivePower);
  CHECK(r.lhs == Approx(std::sqrt(3.0)).epsilon(1e-13));
  CHECK(r.rhs == Approx(std::sqrt(std::sqrt(2.0) * std::sqrt(5.0))).epsilon(1e-13));
  CHECK(r.constant_used == 1.0);
  CHECK(r.holds);
  CHECK(r.lhs * r.lhs == Approx(3.0).epsilon(1e-13));
  CHECK(r.rhs * r.rhs == Approx(std::sqrt(10.0)).epsilon(1e-13));
}

TEST_CASE("moment inequality saturates on single spectral points") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse_plus_ik(), 10);
  for (Index j : {Index(0), Index(4), Index(9)}) {
    ComplexVector e = ComplexVector::Zero(10);
    e[j] = 1.0;
    const MomentCheck r =
        check_moment_inequality(m, 1.5, 0.7, 2.1, e, MomentDirection::InversePowerB);
    CHECK(std::abs(r.lhs - r.rhs) <= 1e-12 * std::max(1.0, r.lhs));
  }
}

namespace {

// Entrywise brute force: ||(i w - A)^{s} x|| = sqrt(sum w_j |i w - l_j|^{2s} |x_j|^2),
// independent of the complex-power code path.
double brute_force_power_norm(const SpectralModel& m, double omega, double s,
                              const ComplexVector& x, bool adjoint_side) {
  double acc = 0.0;
  for (Index j = 0; j < m.size(); ++j) {
    const Complex lam = m.eigenvalues()[j];
    const Complex base =
        adjoint_side ? (-Complex(0.0, omega) - std::conj(lam)) : (Complex(0.0, omega) - lam);
    acc += m.weights()[j] * std::pow(std::abs(base), 2.0 * s) * std::norm(x[j]);
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("moment inequality holds on random inputs in every direction") {
  DeterministicRng rng(21);
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 100);
  const MomentDirection dirs[] = {MomentDirection::PositivePower,
                                  MomentDirection::InversePowerB,
                                  MomentDirection::InversePowerC};
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = rng.uniform(0.5, 3.0);
    const double alpha_t = rng.uniform(0.05, 0.95) * alpha;
    const double omega = rng.uniform(-2.0, 2.0);
    const ComplexVector x = rng.complex_normal_vector(100);
    const MomentDirection dir = dirs[trial % 3];
    const MomentCheck r = check_moment_inequality(m, omega, alpha_t, alpha, x, dir);
    CHECK(r.holds);
    // Cross-check both sides against the entrywise brute-force evaluation.
    const double sign = dir == MomentDirection::PositivePower ? 1.0 : -1.0;
    const bool adj = dir == MomentDirection::InversePowerC;
    const double bf_lhs = brute_force_power_norm(m, omega, sign * alpha_t, x, adj);
    const double bf_full = brute_force_power_norm(m, omega, sign * alpha, x, adj);
    const double theta = alpha_t / alpha;
    const double bf_rhs =
        std::pow(m.weighted_norm(x), 1.0 - theta) * std::pow(bf_full, theta);
    CHECK(r.lhs == Approx(bf_lhs).epsilon(1e-11));
    CHECK(r.rhs == Approx(bf_rhs).epsilon(1e-11));
  }
}

TEST_CASE("moment inequality rejects out-of-range exponents") {
  const SpectralModel m = example_model(3);
  ComplexVector x = ComplexVector::Ones(3);
  CHECK_THROWS_AS(check_moment_inequality(m, 0.0, 1.5, 1.0, x, MomentDirection::PositivePower),
                  InvalidInputError);
  CHECK_THROWS_AS(check_moment_inequality(m, 0.0, 0.0, 1.0, x, MomentDirection::PositivePower),
                  InvalidInputError);
}
