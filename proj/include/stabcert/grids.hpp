#pragma once

#include <cmath>
#include <vector>

#include "stabcert/types.hpp"

namespace stabcert {

inline std::vector<double> linear_space(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(lo);
    return out;
  }
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

inline std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out;
  if (!(lo > 0.0 && hi > lo)) throw InvalidInputError("log_space: need 0 < lo < hi");
  if (n <= 1) {
    out.push_back(lo);
    return out;
  }
  out.reserve(n);
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(la + (lb - la) * i / (n - 1)));
  return out;
}

/// Polar grid on Omega_k = { Re lambda >= 0, 0 < |lambda - i w_k| <= eps }:
/// log-spaced radii (the interesting behavior is the |lambda - i w_k| -> 0
/// limit) times angles spanning the closed right half of the disk.
inline std::vector<Complex> omega_region_grid(double omega_k, double eps, int n_radii = 40,
                                              int n_angles = 33, double r_min = 1e-8) {
  std::vector<Complex> out;
  const std::vector<double> radii = log_space(r_min, eps, n_radii);
  out.reserve(static_cast<std::size_t>(n_radii) * n_angles);
  for (double r : radii) {
    for (int a = 0; a < n_angles; ++a) {
      const double theta = -0.5 * kPi + kPi * a / (n_angles - 1);
      out.emplace_back(r * std::cos(theta), omega_k + r * std::sin(theta));
    }
  }
  return out;
}

/// Rectangular grid on a closed right half-plane window [0, re_max] x
/// [-im_max, im_max], excluding points inside the Omega_k regions and the
/// points of `exclude`.
inline std::vector<Complex> half_plane_window_grid(double re_max, double im_max, int n_re,
                                                   int n_im,
                                                   const std::vector<double>& resonances = {},
                                                   double eps = 0.0,
                                                   const std::vector<Complex>& exclude = {}) {
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n_re) * n_im);
  for (double re : linear_space(0.0, re_max, n_re)) {
    for (double im : linear_space(-im_max, im_max, n_im)) {
      const Complex z(re, im);
      bool skip = false;
      for (double wk : resonances) {
        if (std::abs(z - Complex(0.0, wk)) <= eps) {
          skip = true;
          break;
        }
      }
      for (const Complex& e : exclude) {
        if (z == e) {
          skip = true;
          break;
        }
      }
      if (!skip) out.push_back(z);
    }
  }
  return out;
}

/// Frequencies on the imaginary axis around a resonance: w_k +/- log-spaced
/// offsets in [off_min, off_max].
inline std::vector<double> resonance_offset_frequencies(double omega_k, double off_min,
                                                        double off_max, int n) {
  std::vector<double> out;
  out.reserve(2 * n);
  for (double off : log_space(off_min, off_max, n)) {
    out.push_back(omega_k - off);
    out.push_back(omega_k + off);
  }
  return out;
}

}  // namespace stabcert
