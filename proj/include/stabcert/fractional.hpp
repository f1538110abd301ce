#pragma once

#include <cmath>
#include <string>

#include "stabcert/spectral_model.hpp"
#include "stabcert/types.hpp"

namespace stabcert {

enum class FactorSide { BSide, CSide };

inline std::string to_string(FactorSide s) {
  return s == FactorSide::BSide ? "B_side" : "C_side";
}

namespace detail {

/// Entrywise spectral factor for (i w - A)^exponent (B side) or
/// (-i w - A^*)^exponent (C side). The base has nonnegative real part when
/// Re lambda_j <= 0, so the principal branch is single-valued; a base at 0
/// is a singularity of the fractional power.
inline ComplexVector fractional_factors(const SpectralModel& model, double omega,
                                        double exponent, FactorSide side) {
  const Complex iw(0.0, omega);
  ComplexVector f(model.size());
  for (Index j = 0; j < model.size(); ++j) {
    const Complex lam = model.eigenvalues()[j];
    const Complex base = (side == FactorSide::BSide) ? (iw - lam) : (-iw - std::conj(lam));
    if (base == Complex(0.0, 0.0))
      throw SingularPointError("fractional power base vanishes at sample " +
                               complex_to_string(lam) + " for omega=" + std::to_string(omega));
    f[j] = (exponent == 0.0) ? Complex(1.0, 0.0) : std::pow(base, Complex(exponent, 0.0));
  }
  return f;
}

}  // namespace detail

/// (i w_k - A)^{-beta} x (B side) or (-i w_k - A^*)^{-beta} x (C side),
/// entrywise via the principal branch.
inline ComplexVector apply_fractional_resolvent_power(const SpectralModel& model,
                                                      double omega_k, double beta,
                                                      const ComplexVector& x, FactorSide side) {
  if (beta < 0.0)
    throw InvalidInputError("apply_fractional_resolvent_power: beta must be >= 0");
  if (x.size() != model.size())
    throw InvalidInputError("apply_fractional_resolvent_power: vector length mismatch");
  const ComplexVector f = detail::fractional_factors(model, omega_k, -beta, side);
  return f.array() * x.array();
}

/// (i w - A)^{+s} x or the C-side analog; used by the moment checks and by
/// the polynomial-stability path (positive powers of -A at omega = 0).
inline ComplexVector apply_fractional_operator_power(const SpectralModel& model, double omega,
                                                     double s, const ComplexVector& x,
                                                     FactorSide side) {
  if (x.size() != model.size())
    throw InvalidInputError("apply_fractional_operator_power: vector length mismatch");
  const ComplexVector f = detail::fractional_factors(model, omega, s, side);
  return f.array() * x.array();
}

/// Graph norm ||(i w_k - A)^{-beta} B|| (B side) or
/// ||(-i w_k - A^*)^{-gamma} C^*|| (C side): the operator norm of the N x p
/// map of fractionally scaled columns, via the weighted p x p Gram matrix.
inline double graph_norm(const SpectralModel& model, const PerturbationFactors& factors,
                         double omega_k, double beta, FactorSide side) {
  if (beta < 0.0) throw InvalidInputError("graph_norm: beta must be >= 0");
  const ComplexMatrix& cols =
      (side == FactorSide::BSide) ? factors.b_columns() : factors.c_columns();
  const ComplexVector f = detail::fractional_factors(model, omega_k, -beta, side);
  ComplexMatrix scaled(cols.rows(), cols.cols());
  for (Index j = 0; j < cols.cols(); ++j) scaled.col(j) = f.array() * cols.col(j).array();
  if (!scaled.allFinite())
    throw InvalidInputError("graph_norm: scaled column outside fractional domain (" +
                            to_string(side) + ", beta=" + std::to_string(beta) + ")");
  const double norm = columns_operator_norm(model, scaled);
  if (!std::isfinite(norm))
    throw InvalidInputError("graph_norm: scaled column outside fractional domain (" +
                            to_string(side) + ", beta=" + std::to_string(beta) + ")");
  return norm;
}

/// Positive-power graph norm ||(-A)^{beta} B|| and the C-side analog
/// (polynomial-stability budgets).
inline double positive_power_graph_norm(const SpectralModel& model,
                                        const PerturbationFactors& factors, double beta,
                                        FactorSide side) {
  if (beta < 0.0) throw InvalidInputError("positive_power_graph_norm: beta must be >= 0");
  const ComplexMatrix& cols =
      (side == FactorSide::BSide) ? factors.b_columns() : factors.c_columns();
  const ComplexVector f = detail::fractional_factors(model, 0.0, beta, side);
  ComplexMatrix scaled(cols.rows(), cols.cols());
  for (Index j = 0; j < cols.cols(); ++j) scaled.col(j) = f.array() * cols.col(j).array();
  return columns_operator_norm(model, scaled);
}

/// Domain-membership probe for quadrature-sampled factors: the scaled norm
/// must be finite and move by less than `rel_change_tol` when the quadrature
/// is refined one step (truncation can mask divergence at closure points).
struct DomainCheckResult {
  double norm_coarse = 0.0;
  double norm_refined = 0.0;
  double relative_change = 0.0;
  bool in_domain = false;
};

inline DomainCheckResult fractional_domain_check(
    const SpectralModel& coarse, const PerturbationFactors& coarse_factors,
    const SpectralModel& refined, const PerturbationFactors& refined_factors, double omega_k,
    double beta, FactorSide side, double rel_change_tol = 0.01) {
  DomainCheckResult out;
  out.norm_coarse = graph_norm(coarse, coarse_factors, omega_k, beta, side);
  out.norm_refined = graph_norm(refined, refined_factors, omega_k, beta, side);
  out.relative_change =
      std::abs(out.norm_refined - out.norm_coarse) / std::max(out.norm_coarse, 1e-300);
  out.in_domain = std::isfinite(out.norm_refined) && out.relative_change < rel_change_tol;
  return out;
}

enum class MomentDirection { PositivePower, InversePowerB, InversePowerC };

inline std::string to_string(MomentDirection d) {
  switch (d) {
    case MomentDirection::PositivePower: return "positive_power";
    case MomentDirection::InversePowerB: return "inverse_power_B";
    case MomentDirection::InversePowerC: return "inverse_power_C";
  }
  return "unknown";
}

struct MomentCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant_used = 1.0;
  bool holds = false;
};

/// Moment (interpolation) inequality with constant 1 on the normal path:
///   ||(i w - A)^{s a~} x|| <= ||x||^{1 - a~/a} ||(i w - A)^{s a} x||^{a~/a}
/// with s = +1 or -1 depending on direction.
inline MomentCheck check_moment_inequality(const SpectralModel& model, double omega,
                                           double alpha_tilde, double alpha,
                                           const ComplexVector& x, MomentDirection direction) {
  if (!(alpha_tilde > 0.0 && alpha_tilde < alpha))
    throw InvalidInputError("check_moment_inequality: need 0 < alpha_tilde < alpha");
  const double sign = (direction == MomentDirection::PositivePower) ? 1.0 : -1.0;
  const FactorSide side =
      (direction == MomentDirection::InversePowerC) ? FactorSide::CSide : FactorSide::BSide;
  const ComplexVector mid =
      apply_fractional_operator_power(model, omega, sign * alpha_tilde, x, side);
  const ComplexVector full =
      apply_fractional_operator_power(model, omega, sign * alpha, x, side);
  const double theta = alpha_tilde / alpha;
  MomentCheck out;
  out.lhs = model.weighted_norm(mid);
  out.rhs = std::pow(model.weighted_norm(x), 1.0 - theta) *
            std::pow(model.weighted_norm(full), theta);
  out.constant_used = 1.0;
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

}  // namespace stabcert
