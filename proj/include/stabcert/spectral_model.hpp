#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stabcert/quadrature.hpp"
#include "stabcert/types.hpp"

namespace stabcert {

enum class ModelKind { DiagonalSequence, DiskMultiplication, CustomNormal };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::DiagonalSequence: return "diagonal_sequence";
    case ModelKind::DiskMultiplication: return "disk_multiplication";
    case ModelKind::CustomNormal: return "custom_normal";
  }
  return "unknown";
}

/// Continuous support of a multiplication operator on a disk. Carried so that
/// spectral distances (hence resolvent norms) are those of the untruncated
/// operator, not of the finite node set.
struct DiskSupport {
  Complex center;
  double radius = 0.0;

  /// dist(lambda, disk) = |lambda-center| - radius, evaluated as
  /// (|u|^2 - R^2) / (|u| + R) to stay accurate near the boundary where the
  /// direct form cancels catastrophically (e.g. i*omega with omega ~ 1e-8
  /// against a disk tangent to the axis).
  double distance(Complex lambda) const {
    const Complex u = lambda - center;
    const double re = u.real(), im = u.imag();
    const double numer = (re - radius) * (re + radius) + im * im;
    const double denom = std::hypot(re, im) + radius;
    return numer / denom;
  }
  /// Tangent to the imaginary axis at a single point.
  bool tangent_to_imaginary_axis(double tol = 1e-14) const {
    return std::abs(center.real() + radius) <= tol;
  }
};

/// A normal operator represented by a finite weighted sample of its spectrum.
class SpectralModel {
 public:
  SpectralModel(ModelKind kind, ComplexVector eigenvalues, RealVector weights,
                std::vector<Complex> closure_points, std::string truncation_note,
                std::optional<DiskSupport> disk = std::nullopt)
      : kind_(kind),
        eigenvalues_(std::move(eigenvalues)),
        weights_(std::move(weights)),
        closure_points_(std::move(closure_points)),
        truncation_note_(std::move(truncation_note)),
        disk_(disk) {
    if (eigenvalues_.size() < 1) throw InvalidInputError("SpectralModel: N must be >= 1");
    if (weights_.size() != eigenvalues_.size())
      throw InvalidInputError("SpectralModel: weights/eigenvalues size mismatch");
    for (Index j = 0; j < weights_.size(); ++j) {
      if (!(weights_[j] > 0.0))
        throw InvalidInputError("SpectralModel: weights must be strictly positive");
    }
    for (Index j = 0; j < eigenvalues_.size(); ++j) {
      if (eigenvalues_[j].real() > 0.0) left_half_plane_ = false;
      if (eigenvalues_[j].real() == 0.0) imaginary_axis_sample_ = true;
    }
  }

  ModelKind kind() const { return kind_; }
  Index size() const { return eigenvalues_.size(); }
  const ComplexVector& eigenvalues() const { return eigenvalues_; }
  const RealVector& weights() const { return weights_; }
  const std::vector<Complex>& closure_points() const { return closure_points_; }
  const std::string& truncation_note() const { return truncation_note_; }
  const std::optional<DiskSupport>& disk_support() const { return disk_; }

  /// Strong-stability certification requires spectrum in the closed left
  /// half-plane with no sampled point exactly on the imaginary axis.
  bool certifiable() const { return left_half_plane_ && !imaginary_axis_sample_; }
  bool spectrum_in_left_half_plane() const { return left_half_plane_; }
  bool has_imaginary_axis_sample() const { return imaginary_axis_sample_; }

  /// Resonance candidates: closure points lying on the imaginary axis
  /// (authoritative per the truncation semantics), returned as sorted
  /// frequencies.
  std::vector<double> imaginary_axis_closure_frequencies() const {
    std::vector<double> out;
    for (const Complex& z : closure_points_) {
      if (z.real() == 0.0) out.push_back(z.imag());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double weighted_norm(const ComplexVector& x) const {
    return std::sqrt((weights_.array() * x.array().abs2()).sum());
  }
  Complex weighted_inner(const ComplexVector& x, const ComplexVector& y) const {
    // <x,y> = sum_j w_j x_j conj(y_j)
    return (weights_.array().cast<Complex>() * x.array() * y.array().conjugate()).sum();
  }

  /// Exact distance from lambda to the spectrum of the untruncated operator.
  double distance_to_spectrum(Complex lambda) const {
    double d = std::numeric_limits<double>::infinity();
    if (disk_) {
      d = std::min(d, disk_->distance(lambda));
    } else {
      for (Index j = 0; j < eigenvalues_.size(); ++j)
        d = std::min(d, std::abs(lambda - eigenvalues_[j]));
    }
    for (const Complex& z : closure_points_) d = std::min(d, std::abs(lambda - z));
    return d;
  }

  /// Distance from lambda to the retained samples only (the operator the
  /// trajectory simulation actually sees).
  double distance_to_samples(Complex lambda) const {
    double d = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < eigenvalues_.size(); ++j)
      d = std::min(d, std::abs(lambda - eigenvalues_[j]));
    return d;
  }

  /// Index of the sample nearest to lambda.
  Index nearest_sample(Complex lambda) const {
    Index best = 0;
    double d = std::abs(lambda - eigenvalues_[0]);
    for (Index j = 1; j < eigenvalues_.size(); ++j) {
      const double dj = std::abs(lambda - eigenvalues_[j]);
      if (dj < d) {
        d = dj;
        best = j;
      }
    }
    return best;
  }

  void require_resolvent_point(Complex lambda, double tol = 0.0) const {
    for (Index j = 0; j < eigenvalues_.size(); ++j) {
      if (std::abs(lambda - eigenvalues_[j]) <= tol)
        throw SingularPointError("resolvent evaluated at spectral sample " +
                                 complex_to_string(eigenvalues_[j]));
    }
    for (const Complex& z : closure_points_) {
      if (std::abs(lambda - z) <= tol)
        throw SingularPointError("resolvent evaluated at spectral closure point " +
                                 complex_to_string(z));
    }
  }

 private:
  ModelKind kind_;
  ComplexVector eigenvalues_;
  RealVector weights_;
  std::vector<Complex> closure_points_;
  std::string truncation_note_;
  std::optional<DiskSupport> disk_;
  bool left_half_plane_ = true;
  bool imaginary_axis_sample_ = false;
};

/// Eigenvalue generator for diagonal models: lambda(k) for k = 1,2,... plus
/// the declared finite limit points of the sequence (authoritative; they are
/// what truncation loses).
struct EigenvalueRule {
  std::function<Complex(long)> lambda;
  std::vector<Complex> limit_points;
  std::string note;
};

inline EigenvalueRule rule_neg_inverse() {
  return {[](long k) { return Complex(-1.0 / static_cast<double>(k), 0.0); },
          {Complex(0.0, 0.0)},
          "lambda_k = -1/k"};
}

inline EigenvalueRule rule_neg_inverse_plus_ik() {
  return {[](long k) {
            return Complex(-1.0 / static_cast<double>(k), static_cast<double>(k));
          },
          {},
          "lambda_k = -1/k + i k"};
}

inline EigenvalueRule rule_neg_linear() {
  return {[](long k) { return Complex(-static_cast<double>(k), 0.0); },
          {},
          "lambda_k = -k"};
}

inline SpectralModel build_diagonal_model(const EigenvalueRule& rule, Index n) {
  if (n < 1) throw InvalidInputError("build_diagonal_model: N must be >= 1");
  ComplexVector ev(n);
  for (Index k = 0; k < n; ++k) {
    const Complex lam = rule.lambda(static_cast<long>(k) + 1);
    if (lam.real() > 0.0)
      throw InvalidInputError("build_diagonal_model: rule produced eigenvalue " +
                              complex_to_string(lam) + " in the open right half-plane (k=" +
                              std::to_string(k + 1) + ")");
    if (lam.real() == 0.0)
      throw InvalidInputError(
          "build_diagonal_model: rule produced eigenvalue " + complex_to_string(lam) +
          " exactly on the imaginary axis (k=" + std::to_string(k + 1) + ")");
    ev[k] = lam;
  }
  RealVector w = RealVector::Ones(n);
  return SpectralModel(ModelKind::DiagonalSequence, std::move(ev), std::move(w),
                       rule.limit_points, rule.note + ", N=" + std::to_string(n));
}

/// Tensor polar quadrature on a disk in the closed left half-plane:
/// Gauss-Legendre radial nodes (strictly interior) x uniform angles, weights
/// the corresponding area elements. The boundary is never sampled, so a
/// tangency point on the imaginary axis is represented through
/// closure_points and the DiskSupport geometry.
inline SpectralModel build_disk_model(Complex center, double radius, int n_radial,
                                      int n_angular) {
  if (!(radius > 0.0)) throw InvalidInputError("build_disk_model: radius must be > 0");
  if (n_radial < 2 || n_angular < 2)
    throw InvalidInputError("build_disk_model: node counts must be >= 2");
  const double reach = center.real() + radius;
  if (reach > 1e-14)
    throw InvalidInputError("build_disk_model: disk crosses into the open right half-plane");

  const GaussLegendreRule radial = gauss_legendre(n_radial);
  ComplexVector ev(static_cast<Index>(n_radial) * n_angular);
  RealVector w(ev.size());
  Index m = 0;
  for (int i = 0; i < n_radial; ++i) {
    const double r = 0.5 * radius * (radial.nodes[i] + 1.0);  // map (-1,1) -> (0,R)
    const double wr = 0.5 * radius * radial.weights[i];
    for (int j = 0; j < n_angular; ++j) {
      const double theta = 2.0 * kPi * j / n_angular;
      ev[m] = center + Complex(r * std::cos(theta), r * std::sin(theta));
      w[m] = wr * r * (2.0 * kPi / n_angular);  // area element r dr dtheta
      ++m;
    }
  }

  DiskSupport disk{center, radius};
  std::vector<Complex> closure;
  if (disk.tangent_to_imaginary_axis()) closure.push_back(Complex(0.0, center.imag()));
  std::string note = "disk center=" + complex_to_string(center) +
                     " radius=" + std::to_string(radius) + " nodes=" +
                     std::to_string(n_radial) + "x" + std::to_string(n_angular);
  return SpectralModel(ModelKind::DiskMultiplication, std::move(ev), std::move(w),
                       std::move(closure), std::move(note), disk);
}

inline SpectralModel build_custom_model(ComplexVector eigenvalues, RealVector weights,
                                        std::vector<Complex> closure_points,
                                        std::string note = "custom") {
  return SpectralModel(ModelKind::CustomNormal, std::move(eigenvalues), std::move(weights),
                       std::move(closure_points), std::move(note));
}

/// R(lambda, A) x computed entrywise in the model coordinates.
inline ComplexVector apply_resolvent(const SpectralModel& model, Complex lambda,
                                     const ComplexVector& x) {
  if (x.size() != model.size())
    throw InvalidInputError("apply_resolvent: vector length mismatch");
  model.require_resolvent_point(lambda);
  return x.array() / (Complex(lambda) - model.eigenvalues().array());
}

/// R(lambda, A)^* x. For a normal operator this is entrywise division by the
/// conjugate factors; the adjoint is taken in the weighted inner product.
inline ComplexVector apply_resolvent_adjoint(const SpectralModel& model, Complex lambda,
                                             const ComplexVector& x) {
  if (x.size() != model.size())
    throw InvalidInputError("apply_resolvent_adjoint: vector length mismatch");
  model.require_resolvent_point(lambda);
  return x.array() / (Complex(lambda) - model.eigenvalues().array()).conjugate();
}

/// || R(lambda, A) || = 1 / dist(lambda, spectrum); exact for normal
/// operators, with the distance taken to the untruncated spectrum.
inline double resolvent_norm_exact(const SpectralModel& model, Complex lambda) {
  const double d = model.distance_to_spectrum(lambda);
  if (d <= 0.0)
    throw SingularPointError("resolvent norm requested at spectral point " +
                             complex_to_string(lambda));
  return 1.0 / d;
}

/// || (i w_k - A)^alpha R(lambda, A) || on the sampled spectrum:
/// max_j |i w_k - lambda_j|^alpha / |lambda - lambda_j|.
inline double power_resolvent_norm(const SpectralModel& model, double omega_k, double alpha,
                                   Complex lambda) {
  model.require_resolvent_point(lambda);
  const Complex iw(0.0, omega_k);
  double best = 0.0;
  for (Index j = 0; j < model.size(); ++j) {
    const Complex lam = model.eigenvalues()[j];
    const double v = std::pow(std::abs(iw - lam), alpha) / std::abs(lambda - lam);
    best = std::max(best, v);
  }
  return best;
}

/// Rank-p factors B (columns b_j) and C (columns c_j) so that
/// BC = sum_j <.,c_j> b_j in the model coordinates.
class PerturbationFactors {
 public:
  PerturbationFactors(ComplexMatrix b_columns, ComplexMatrix c_columns)
      : b_(std::move(b_columns)), c_(std::move(c_columns)) {
    if (b_.cols() != c_.cols())
      throw InvalidInputError("PerturbationFactors: rank mismatch between B and C columns");
    if (b_.cols() < 1) throw InvalidInputError("PerturbationFactors: rank must be >= 1");
    if (b_.rows() != c_.rows())
      throw InvalidInputError("PerturbationFactors: column length mismatch");
    if (!b_.allFinite() || !c_.allFinite())
      throw InvalidInputError("PerturbationFactors: columns must be finite");
  }

  Index rank() const { return b_.cols(); }
  Index dimension() const { return b_.rows(); }
  const ComplexMatrix& b_columns() const { return b_; }
  const ComplexMatrix& c_columns() const { return c_; }

  static PerturbationFactors zero(Index n, Index rank = 1) {
    return PerturbationFactors(ComplexMatrix::Zero(n, rank), ComplexMatrix::Zero(n, rank));
  }

  /// Rank-one <., c> b.
  static PerturbationFactors rank_one(const ComplexVector& b, const ComplexVector& c) {
    ComplexMatrix bm(b.size(), 1), cm(c.size(), 1);
    bm.col(0) = b;
    cm.col(0) = c;
    return PerturbationFactors(std::move(bm), std::move(cm));
  }

  PerturbationFactors scaled(Complex sb, Complex sc) const {
    return PerturbationFactors(sb * b_, sc * c_);
  }

 private:
  ComplexMatrix b_;
  ComplexMatrix c_;
};

/// Operator norm of the map u -> sum_j u_j v_j, i.e. sqrt of the largest
/// eigenvalue of the weighted p x p Gram matrix of the columns.
inline double columns_operator_norm(const SpectralModel& model, const ComplexMatrix& columns) {
  const Index p = columns.cols();
  ComplexMatrix gram(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      gram(i, j) = model.weighted_inner(columns.col(j), columns.col(i));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

inline double operator_norm_b(const SpectralModel& model, const PerturbationFactors& f) {
  return columns_operator_norm(model, f.b_columns());
}
inline double operator_norm_c(const SpectralModel& model, const PerturbationFactors& f) {
  return columns_operator_norm(model, f.c_columns());
}

}  // namespace stabcert
