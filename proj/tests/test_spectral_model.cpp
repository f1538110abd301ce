#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "stabcert/random.hpp"
#include "stabcert/spectral_model.hpp"

using namespace stabcert;
using Catch::Approx;

TEST_CASE("diagonal model from the harmonic rule") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 3);
  REQUIRE(m.size() == 3);
  CHECK(m.eigenvalues()[0] == Complex(-1.0, 0.0));
  CHECK(m.eigenvalues()[1] == Complex(-0.5, 0.0));
  CHECK(m.eigenvalues()[2].real() == Approx(-1.0 / 3.0));
  REQUIRE(m.closure_points().size() == 1);
  CHECK(m.closure_points()[0] == Complex(0.0, 0.0));
  CHECK(m.weights().isOnes());
  CHECK(m.certifiable());
}

TEST_CASE("diagonal model with drifting imaginary parts has no finite closure point") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse_plus_ik(), 2);
  CHECK(m.eigenvalues()[0] == Complex(-1.0, 1.0));
  CHECK(m.eigenvalues()[1] == Complex(-0.5, 2.0));
  CHECK(m.closure_points().empty());
}

TEST_CASE("single-mode exponentially stable model") {
  const SpectralModel m = build_diagonal_model(rule_neg_linear(), 1);
  REQUIRE(m.size() == 1);
  CHECK(m.eigenvalues()[0] == Complex(-1.0, 0.0));
}

TEST_CASE("diagonal builder rejects imaginary-axis and right-half-plane rules") {
  EigenvalueRule on_axis{[](long k) { return Complex(0.0, static_cast<double>(k)); }, {}, ""};
  CHECK_THROWS_AS(build_diagonal_model(on_axis, 3), InvalidInputError);
  EigenvalueRule unstable{[](long k) { return Complex(static_cast<double>(k), 0.0); }, {}, ""};
  CHECK_THROWS_AS(build_diagonal_model(unstable, 2), InvalidInputError);
}

TEST_CASE("disk model nodes, weights and closure") {
  const SpectralModel m = build_disk_model(Complex(-1.0, 0.0), 1.0, 16, 32);
  REQUIRE(m.size() == 512);
  for (Index j = 0; j < m.size(); ++j) {
    CHECK(std::abs(m.eigenvalues()[j] + Complex(1.0, 0.0)) <= 1.0);
    CHECK(m.eigenvalues()[j] != Complex(0.0, 0.0));
  }
  REQUIRE(m.closure_points().size() == 1);
  CHECK(m.closure_points()[0] == Complex(0.0, 0.0));
  // Area weights sum to pi R^2; the radial rule is exact for the area element.
  CHECK(m.weights().sum() == Approx(kPi).epsilon(1e-12));

  const SpectralModel away = build_disk_model(Complex(-2.0, 0.0), 1.0, 8, 16);
  CHECK(away.closure_points().empty());
  CHECK(resolvent_norm_exact(away, Complex(0.0, 0.0)) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disk builder rejects disks crossing the open right half-plane") {
  CHECK_THROWS_AS(build_disk_model(Complex(-0.5, 0.0), 1.0, 8, 16), InvalidInputError);
  CHECK_THROWS_AS(build_disk_model(Complex(-1.0, 0.0), 1.0, 1, 16), InvalidInputError);
}

TEST_CASE("disk resolvent norm depends on the distance only, not the quadrature") {
  const SpectralModel coarse = build_disk_model(Complex(-1.0, 0.0), 1.0, 16, 32);
  const SpectralModel fine = build_disk_model(Complex(-1.0, 0.0), 1.0, 32, 64);
  const double nc = resolvent_norm_exact(coarse, Complex(1.0, 0.0));
  const double nf = resolvent_norm_exact(fine, Complex(1.0, 0.0));
  CHECK(std::abs(nc - nf) <= 1e-12);
  CHECK(nc == Approx(1.0).epsilon(1e-12));  // dist(1, Omega) = 1 through the origin
}

TEST_CASE("disk resolvent norm matches the distance-formula oracle at lambda = i") {
  // dist(i omega, Omega) = sqrt(omega^2 + 1) - 1 evaluated at omega = 1.
  const SpectralModel m = build_disk_model(Complex(-1.0, 0.0), 1.0, 16, 32);
  const double expected = 1.0 / (std::sqrt(2.0) - 1.0);
  CHECK(resolvent_norm_exact(m, Complex(0.0, 1.0)) == Approx(expected).epsilon(1e-12));
  // Near the tangency the cancellation-free form must survive omega ~ 1e-8.
  const double tiny = resolvent_norm_exact(m, Complex(0.0, 1e-8));
  CHECK(tiny == Approx(2.0 / 1e-16).epsilon(1e-6));
}

TEST_CASE("sampled distances converge to the geometric distance from below") {
  const SpectralModel coarse = build_disk_model(Complex(-1.0, 0.0), 1.0, 8, 16);
  const SpectralModel fine = build_disk_model(Complex(-1.0, 0.0), 1.0, 32, 64);
  const Complex lambda(0.0, 1.0);
  const double true_dist = std::sqrt(2.0) - 1.0;
  CHECK(coarse.distance_to_samples(lambda) >= fine.distance_to_samples(lambda));
  CHECK(fine.distance_to_samples(lambda) >= true_dist);
}

TEST_CASE("resolvent application closed forms") {
  ComplexVector ev(2);
  ev << Complex(-1.0, 0.0), Complex(-0.5, 0.0);
  const SpectralModel m = build_custom_model(ev, RealVector::Ones(2), {});
  ComplexVector x(2);
  x << 1.0, 1.0;
  const ComplexVector y = apply_resolvent(m, Complex(1.0, 0.0), x);
  CHECK(std::abs(y[0] - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(y[1] - Complex(2.0 / 3.0, 0.0)) < 1e-15);

  // R(0, A) e1 = e1 for lambda_1 = -1.
  ComplexVector e1(2);
  e1 << 1.0, 0.0;
  const ComplexVector z = apply_resolvent(m, Complex(0.0, 0.0), e1);
  CHECK(std::abs(z[0] - Complex(1.0, 0.0)) < 1e-15);

  // Resolvent decay at infinity.
  const ComplexVector far = apply_resolvent(m, Complex(1e9, 0.0), x);
  CHECK(std::abs(far[0]) < 2e-9);
  CHECK(std::abs(far[1]) < 2e-9);
}

TEST_CASE("resolvent at a spectral point raises a singularity error naming it") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 4);
  ComplexVector x = ComplexVector::Ones(4);
  CHECK_THROWS_AS(apply_resolvent(m, Complex(-1.0, 0.0), x), SingularPointError);
  CHECK_THROWS_AS(apply_resolvent(m, Complex(0.0, 0.0), x), SingularPointError);
  CHECK_THROWS_WITH(apply_resolvent(m, Complex(-0.5, 0.0), x),
                    Catch::Matchers::ContainsSubstring("-0.5"));
  CHECK_THROWS_AS(resolvent_norm_exact(m, Complex(0.0, 0.0)), SingularPointError);
}

TEST_CASE("exact norms for diagonal models") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 100);
  CHECK(resolvent_norm_exact(m, Complex(0.0, 0.5)) == Approx(2.0).epsilon(1e-14));
  // The closure point 0 is the nearest spectral point to any real r > 0.
  CHECK(resolvent_norm_exact(m, Complex(2.0, 0.0)) == Approx(0.5).epsilon(1e-14));
  // Real lambda = r with nearest spectral point -a: norm = 1/(r + a).
  const SpectralModel away = build_diagonal_model(rule_neg_linear(), 10);
  CHECK(resolvent_norm_exact(away, Complex(2.0, 0.0)) == Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("resolvent application is bounded by the exact norm") {
  DeterministicRng rng(7);
  const SpectralModel diag = build_diagonal_model(rule_neg_inverse(), 50);
  const SpectralModel disk = build_disk_model(Complex(-1.0, 0.0), 1.0, 8, 16);
  for (const SpectralModel* m : {&diag, &disk}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Complex lambda(rng.uniform(0.05, 3.0), rng.uniform(-3.0, 3.0));
      ComplexVector x = rng.complex_normal_vector(m->size());
      const double lhs = m->weighted_norm(apply_resolvent(*m, lambda, x));
      const double bound = resolvent_norm_exact(*m, lambda) * m->weighted_norm(x);
      CHECK(lhs <= bound * (1.0 + 1e-12));
    }
  }
  // Equality attained on the nearest sample for point-spectrum models.
  ComplexVector e = ComplexVector::Zero(diag.size());
  const Complex lambda(0.3, 0.0);
  e[diag.nearest_sample(lambda)] = 1.0;
  const double lhs = diag.weighted_norm(apply_resolvent(diag, lambda, e));
  CHECK(lhs == Approx(1.0 / diag.distance_to_samples(lambda)).epsilon(1e-14));
}

TEST_CASE("resolvent identity holds to machine precision") {
  DeterministicRng rng(11);
  const SpectralModel m = build_disk_model(Complex(-1.0, 0.0), 1.0, 8, 16);
  for (int trial = 0; trial < 10; ++trial) {
    const Complex lam(rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0));
    const Complex mu(rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0));
    ComplexVector x = rng.complex_normal_vector(m.size());
    const ComplexVector lhs = apply_resolvent(m, lam, x) - apply_resolvent(m, mu, x);
    const ComplexVector rhs =
        (mu - lam) * apply_resolvent(m, lam, apply_resolvent(m, mu, x));
    CHECK(m.weighted_norm(lhs - rhs) <= 1e-12 * std::max(1.0, m.weighted_norm(lhs)));
  }
}

TEST_CASE("diagonal semigroups are contractions") {
  const SpectralModel m = build_diagonal_model(rule_neg_inverse_plus_ik(), 64);
  for (double t : {0.0, 0.5, 1.0, 10.0, 100.0}) {
    double mx = 0.0;
    for (Index j = 0; j < m.size(); ++j)
      mx = std::max(mx, std::abs(std::exp(t * m.eigenvalues()[j])));
    CHECK(mx <= 1.0 + 1e-15);
  }
}

TEST_CASE("uncertifiable inputs are accepted but flagged") {
  ComplexVector ev(2);
  ev << Complex(0.5, 1.0), Complex(-1.0, 0.0);
  const SpectralModel m = build_custom_model(ev, RealVector::Ones(2), {});
  CHECK_FALSE(m.certifiable());
  CHECK_FALSE(m.spectrum_in_left_half_plane());

  ComplexVector ev2(1);
  ev2 << Complex(0.0, 2.0);
  const SpectralModel axis = build_custom_model(ev2, RealVector::Ones(1), {});
  CHECK_FALSE(axis.certifiable());
  CHECK(axis.has_imaginary_axis_sample());
}

TEST_CASE("model invariant violations are hard errors") {
  ComplexVector ev(2);
  ev << Complex(-1.0, 0.0), Complex(-2.0, 0.0);
  RealVector w(2);
  w << 1.0, 0.0;
  CHECK_THROWS_AS(build_custom_model(ev, w, {}), InvalidInputError);
  CHECK_THROWS_AS(SpectralModel(ModelKind::CustomNormal, ComplexVector(), RealVector(), {}, ""),
                  InvalidInputError);
}

TEST_CASE("perturbation factors validate their shape") {
  ComplexMatrix b = ComplexMatrix::Zero(4, 2);
  ComplexMatrix c = ComplexMatrix::Zero(4, 3);
  CHECK_THROWS_AS(PerturbationFactors(b, c), InvalidInputError);
  ComplexMatrix bad = ComplexMatrix::Zero(4, 2);
  bad(0, 0) = Complex(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_AS(PerturbationFactors(bad, ComplexMatrix::Zero(4, 2)), InvalidInputError);

  const SpectralModel m = build_diagonal_model(rule_neg_inverse(), 4);
  ComplexVector e1 = ComplexVector::Zero(4);
  e1[0] = 2.0;
  const PerturbationFactors f = PerturbationFactors::rank_one(e1, e1);
  CHECK(operator_norm_b(m, f) == Approx(2.0).epsilon(1e-14));
  CHECK(operator_norm_c(m, f) == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("power resolvent norm on the sampled disk") {
  const SpectralModel m = build_disk_model(Complex(-1.0, 0.0), 1.0, 16, 32);
  // max_j |lambda_j|^2 / |lambda - lambda_j| at a far real point ~ sup |mu|^2 / |1 - mu|.
  const double v = power_resolvent_norm(m, 0.0, 2.0, Complex(1.0, 0.0));
  CHECK(v <= 4.0 / 2.0 + 1e-12);  // |mu| <= 2, |1 - mu| >= 1
  CHECK(v > 1.0);
}
