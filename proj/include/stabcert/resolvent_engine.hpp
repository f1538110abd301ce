#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "stabcert/spectral_model.hpp"
#include "stabcert/types.hpp"

namespace stabcert {

struct TransferMatrix {
  Complex lambda;
  ComplexMatrix entries;  // (i,j) = <R(lambda,A) b_j, c_i>_w
};

/// C R(lambda, A) B as an exact p x p matrix: p resolvent applications and
/// p^2 weighted inner products.
inline TransferMatrix transfer_matrix(const SpectralModel& model,
                                      const PerturbationFactors& factors, Complex lambda) {
  const Index p = factors.rank();
  TransferMatrix tm;
  tm.lambda = lambda;
  tm.entries.resize(p, p);
  ComplexMatrix rb(model.size(), p);
  for (Index j = 0; j < p; ++j)
    rb.col(j) = apply_resolvent(model, lambda, factors.b_columns().col(j));
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      tm.entries(i, j) = model.weighted_inner(rb.col(j), factors.c_columns().col(i));
  return tm;
}

/// Largest singular value of the transfer matrix (exact; p is small).
inline double transfer_norm(const SpectralModel& model, const PerturbationFactors& factors,
                            Complex lambda) {
  const TransferMatrix tm = transfer_matrix(model, factors, lambda);
  if (tm.entries.rows() == 1) return std::abs(tm.entries(0, 0));
  Eigen::JacobiSVD<ComplexMatrix> svd(tm.entries);
  return svd.singularValues()(0);
}

inline constexpr double kTransferEigenvalueOneTol = 1e-10;

namespace detail {

/// Throws when 1 is (numerically) an eigenvalue of the transfer matrix, in
/// which case lambda may belong to sigma(A+BC).
inline void require_transfer_invertible(const TransferMatrix& tm) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(tm.entries, /*computeEigenvectors=*/false);
  double mind = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    mind = std::min(mind, std::abs(Complex(1.0, 0.0) - es.eigenvalues()[i]));
  if (mind <= kTransferEigenvalueOneTol)
    throw SingularPointError("transfer matrix has eigenvalue 1 within tolerance at lambda=" +
                             complex_to_string(tm.lambda) +
                             "; lambda may belong to sigma(A+BC)");
}

}  // namespace detail

/// R(lambda, A+BC) x via Sherman-Morrison-Woodbury:
///   R x + R B (I - C R B)^{-1} C R x.
inline ComplexVector perturbed_resolvent_apply(const SpectralModel& model,
                                               const PerturbationFactors& factors,
                                               Complex lambda, const ComplexVector& x) {
  const Index p = factors.rank();
  const ComplexVector rx = apply_resolvent(model, lambda, x);
  ComplexMatrix rb(model.size(), p);
  for (Index j = 0; j < p; ++j)
    rb.col(j) = apply_resolvent(model, lambda, factors.b_columns().col(j));
  TransferMatrix tm;
  tm.lambda = lambda;
  tm.entries.resize(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      tm.entries(i, j) = model.weighted_inner(rb.col(j), factors.c_columns().col(i));
  detail::require_transfer_invertible(tm);
  ComplexVector g(p);
  for (Index i = 0; i < p; ++i) g[i] = model.weighted_inner(rx, factors.c_columns().col(i));
  const ComplexMatrix d = ComplexMatrix::Identity(p, p) - tm.entries;
  const ComplexVector u = d.partialPivLu().solve(g);
  return rx + rb * u;
}

/// R(lambda, A+BC)^* x (weighted adjoint), for norm estimation.
inline ComplexVector perturbed_resolvent_apply_adjoint(const SpectralModel& model,
                                                       const PerturbationFactors& factors,
                                                       Complex lambda,
                                                       const ComplexVector& x) {
  const Index p = factors.rank();
  const ComplexVector t = apply_resolvent_adjoint(model, lambda, x);
  const TransferMatrix tm = transfer_matrix(model, factors, lambda);
  detail::require_transfer_invertible(tm);
  ComplexVector s(p);
  for (Index j = 0; j < p; ++j) s[j] = model.weighted_inner(t, factors.b_columns().col(j));
  const ComplexMatrix dh =
      (ComplexMatrix::Identity(p, p) - tm.entries).adjoint();
  const ComplexVector v = dh.partialPivLu().solve(s);
  const ComplexVector w = factors.c_columns() * v;
  return t + apply_resolvent_adjoint(model, lambda, w);
}

struct NormEstimate {
  double value = 0.0;
  bool converged = false;  // false => value is a certified lower bound only
  int iterations = 0;
};

/// || R(lambda, A+BC) || by power iteration on (adjoint-apply o apply) in the
/// weighted inner product. Deterministic all-ones start vector with one
/// orthogonal restart on stagnation.
inline NormEstimate perturbed_resolvent_norm(
    const SpectralModel& model, const std::optional<PerturbationFactors>& factors,
    Complex lambda, double rel_tol = 1e-8, int max_iter = 400) {
  const Index n = model.size();
  auto apply = [&](const ComplexVector& v) {
    return factors ? perturbed_resolvent_apply(model, *factors, lambda, v)
                   : apply_resolvent(model, lambda, v);
  };
  auto apply_adj = [&](const ComplexVector& v) {
    return factors ? perturbed_resolvent_apply_adjoint(model, *factors, lambda, v)
                   : apply_resolvent_adjoint(model, lambda, v);
  };

  ComplexVector v = ComplexVector::Ones(n);
  v /= model.weighted_norm(v);
  NormEstimate out;
  double prev = 0.0;
  bool restarted = false;
  int settled = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const ComplexVector av = apply(v);
    const double lam = model.weighted_norm(av);  // sqrt of Rayleigh quotient of A*A
    ComplexVector z = apply_adj(av);
    const double zn = model.weighted_norm(z);
    out.iterations = it;
    if (zn == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    v = z / zn;
    if (std::abs(lam - prev) <= rel_tol * std::max(lam, 1e-300)) {
      if (++settled >= 3) {
        out.value = lam;
        out.converged = true;
        if (!restarted) {
          // Guard against a start vector orthogonal to the dominant mode.
          restarted = true;
          ComplexVector alt(n);
          for (Index j = 0; j < n; ++j) alt[j] = (j % 2 == 0) ? 1.0 : -1.0;
          const Complex proj = model.weighted_inner(alt, v);
          alt -= proj * v;
          const double an = model.weighted_norm(alt);
          if (an > 1e-12) {
            alt /= an;
            const double lam_alt = model.weighted_norm(apply(alt));
            if (lam_alt > lam * (1.0 + 10.0 * rel_tol)) {
              v = alt;
              prev = 0.0;
              settled = 0;
              out.converged = false;
              continue;
            }
          }
        }
        return out;
      }
    } else {
      settled = 0;
    }
    prev = lam;
    out.value = lam;
  }
  out.converged = false;  // value is a lower bound
  return out;
}

/// Dense (lambda - A - BC)^{-1} as an N x N matrix on the truncation, by LU
/// factorization; test oracle and small-N verification only.
inline ComplexMatrix dense_resolvent_oracle(const SpectralModel& model,
                                            const PerturbationFactors& factors,
                                            Complex lambda, Index max_n = 2000) {
  const Index n = model.size();
  if (n > max_n)
    throw InvalidInputError("dense_resolvent_oracle: N exceeds dense feasibility bound");
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) m(j, j) = lambda - model.eigenvalues()[j];
  // (BC)x = sum_j <x, c_j>_w b_j; weight-consistent matrix entries.
  const RealVector& w = model.weights();
  for (Index k = 0; k < factors.rank(); ++k) {
    const ComplexVector& b = factors.b_columns().col(k);
    const ComplexVector cw =
        (factors.c_columns().col(k).array().conjugate() * w.array().cast<Complex>()).matrix();
    m.noalias() -= b * cw.transpose();
  }
  Eigen::PartialPivLU<ComplexMatrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw SingularPointError("dense_resolvent_oracle: matrix numerically singular at lambda=" +
                             complex_to_string(lambda) +
                             " (rcond estimate " + std::to_string(rc) + ")");
  return lu.solve(ComplexMatrix::Identity(n, n));
}

/// Dense coefficient matrix of A + BC on the truncation (weight-consistent).
inline ComplexMatrix dense_generator_matrix(const SpectralModel& model,
                                            const PerturbationFactors* factors) {
  const Index n = model.size();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) m(j, j) = model.eigenvalues()[j];
  if (factors) {
    const RealVector& w = model.weights();
    for (Index k = 0; k < factors->rank(); ++k) {
      const ComplexVector& b = factors->b_columns().col(k);
      const ComplexVector cw =
          (factors->c_columns().col(k).array().conjugate() * w.array().cast<Complex>())
              .matrix();
      m.noalias() += b * cw.transpose();
    }
  }
  return m;
}

}  // namespace stabcert
