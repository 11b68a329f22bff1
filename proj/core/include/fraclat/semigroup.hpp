#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fraclat/lattice.hpp"

namespace fraclat {

/// h_t(0, d) for the classical discrete Laplacian:
///   (e^{-2t}/pi) Int_0^pi e^{2t cos u} cos(d u) du.
double heat_kernel_classical(double t, std::int64_t d);

/// p_t(0, d) and the generator kernel l_t(d) = (L p_t(0, .))(d) for d = 0..D.
struct HeatKernelTable {
  double t = 0.0;
  std::vector<double> p;
  std::vector<double> lp;

  std::int64_t max_distance() const { return static_cast<std::int64_t>(p.size()) - 1; }
  double operator()(std::int64_t d) const { return p[static_cast<std::size_t>(d < 0 ? -d : d)]; }
  double generator(std::int64_t d) const { return lp[static_cast<std::size_t>(d < 0 ? -d : d)]; }
};

/// Semigroup e^{-tL} for L = (-Delta)^s on Z, evaluated spectrally:
///
///   p_t(0, d) = (1/pi) Int_0^pi exp(-t psi(theta)) cos(d theta) dtheta,  psi = (4 sin^2(theta/2))^s.
///
/// The theta-integral uses composite Gauss-Legendre panels graded geometrically toward the
/// non-smooth point theta = 0, uniform panels sized to the largest requested frequency, and
/// a cutoff where t psi > 40. Far from the origin (d^{2s} >> t) the exact expansion
///
///   p_t(0, d) = Sum_n (-t)^n / n! c_{ns}(d),
///   c_a(d) = -Gamma(2a+1) sin(pi a) / pi * Gamma(d-a) / Gamma(d+a+1)
///
/// is used instead; it also gives the mass beyond any distance in closed form.
/// s = 1 selects the classical discrete Laplacian.
class SemigroupEvaluator {
 public:
  explicit SemigroupEvaluator(double s);

  double s() const { return s_; }
  bool classical() const { return s_ == 1.0; }
  double symbol(double theta) const;

  /// p_t(0, d); t = 0 gives the identity.
  double heat_kernel(double t, std::int64_t d) const;
  /// l_t(d) = -(d/dt) p_t(0, d).
  double generator_kernel(double t, std::int64_t d) const;
  HeatKernelTable table(double t, std::int64_t max_distance) const;

  /// Sum_{d > D} p_t(0, d), one side.
  double mass_tail(double t, std::int64_t D) const;

  /// Smallest distance from which the far-field expansion is used at time t.
  std::int64_t series_threshold(double t) const;

  /// (P_t f)(x) for x in `out`.
  LatticeFunction apply(double t, const LatticeFunction& f, const Window& out) const;
  /// (L P_t f)(x) for x in `out`.
  LatticeFunction apply_generator(double t, const LatticeFunction& f, const Window& out) const;

  struct MaximalValue {
    double value = 0.0;
    double t_argmax = 0.0;  // 0 when the t -> 0+ limit |f(x)| dominates
  };
  /// max_t |P_t f(x)| over the grid, the t -> 0+ limit, and a golden-section refinement
  /// around the best grid point. A lower bound for the true supremum over t > 0.
  MaximalValue maximal_function(const LatticeFunction& f, std::span<const double> t_grid, std::int64_t x) const;

 private:
  struct SpectralNodes {
    std::vector<double> theta;
    std::vector<double> weight;  // includes the 1/pi factor
    std::vector<double> psi;
  };
  SpectralNodes nodes(double t, std::int64_t max_distance) const;
  bool series_pair(double t, std::int64_t d, double& p, double& lp) const;

  double s_;
};

}  // namespace fraclat
