#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fraclat/lattice.hpp"
#include "fraclat/report.hpp"

namespace fraclat {

/// Jump kernel K_s of the fractional discrete Laplacian (-Delta)^s on Z.
///
///   K_s(m) = 4^s Gamma(1/2+s) / (sqrt(pi) |Gamma(-s)|) * Gamma(|m|-s) / Gamma(|m|+1+s),  K_s(0) = 0.
///
/// Values for |m| <= table_size() come from the forward ratio recurrence
///   K_s(m+1) / K_s(m) = (m - s) / (m + 1 + s)
/// started at K_s(1); larger |m| fall back to a direct Gamma-ratio evaluation.
/// Tails Sum_{m>M} K_s(m) are exact via the telescoping identity
///   Sum_{m>=M+1} Gamma(m-s)/Gamma(m+1+s) = Gamma(M+1-s) / (2s Gamma(M+1+s)).
class FractionalKernel {
 public:
  static constexpr std::int64_t kDefaultTableSize = std::int64_t{1} << 16;

  explicit FractionalKernel(double s, std::int64_t table_size = kDefaultTableSize);

  double s() const { return s_; }
  double prefactor() const { return prefactor_; }
  /// ||K_s||_1 = Sum_{m != 0} K_s(m).
  double l1_norm() const { return l1_norm_; }
  std::int64_t table_size() const { return static_cast<std::int64_t>(values_.size()) - 1; }

  double operator()(std::int64_t m) const;
  /// Sum_{m > M} K_s(m) for M >= 0 (one-sided).
  double tail(std::int64_t M) const;
  /// Sum of K_s(y - x) over lattice points y outside `w` (x may lie anywhere).
  double mass_outside(std::int64_t x, const Window& w) const;

  /// K_s(0..table_size()).
  std::span<const double> values() const { return values_; }

 private:
  double s_;
  double prefactor_;
  double l1_norm_;
  std::vector<double> values_;
};

/// K_s(m), 0 < s < 1.
double kernel_value(double s, std::int64_t m);
/// Sum_{m > M} K_s(m), M >= 0.
double kernel_tail(double s, std::int64_t M);
/// ||K_s||_1 = 2 kernel_tail(s, 0).
double l1_norm(double s);

/// Fourier symbol of L: (4 sin^2(theta/2))^s.
double symbol(double s, double theta);

/// Lf on `out`, using the pointwise nonlocal formula with exact off-window kernel mass.
LatticeFunction apply_L(const FractionalKernel& kernel, const LatticeFunction& f, const Window& out);

/// Compares Sum_m K_s(m)(1 - cos m theta) (summed to |m| <= M plus the exact tail) to the symbol.
VerificationReport multiplier_identity_check(double s, double theta, std::int64_t M);

/// Checks Sum_x Lf(x) = 0 for finitely supported f.
VerificationReport conservation_check(const FractionalKernel& kernel, const LatticeFunction& f);

/// One-step law of the embedded jump chain: p(i, j) = K_s(i - j) / ||K_s||_1.
///
/// Jump magnitudes are drawn by exact inversion: a survival table for |m| <= table_size()
/// and bisection on the closed-form tail beyond it.
class TransitionLaw {
 public:
  /// Magnitudes are capped here so lattice positions stay representable.
  static constexpr std::int64_t kMaxMagnitude = std::int64_t{1} << 60;

  explicit TransitionLaw(FractionalKernel kernel);

  const FractionalKernel& kernel() const { return kernel_; }
  double prob(std::int64_t i, std::int64_t j) const;
  /// P(|jump| > m).
  double magnitude_survival(std::int64_t m) const;
  /// Smallest m >= 1 with P(|jump| > m) <= v, for v in (0, 1].
  std::int64_t magnitude_quantile(double v) const;
  /// Signed displacement from two independent uniforms in (0,1).
  std::int64_t displacement(double u_magnitude, double u_sign) const {
    const std::int64_t m = magnitude_quantile(u_magnitude);
    return u_sign < 0.5 ? -m : m;
  }

 private:
  FractionalKernel kernel_;
  std::vector<double> survival_;  // survival_[m] = P(|jump| > m), decreasing
};

}  // namespace fraclat
