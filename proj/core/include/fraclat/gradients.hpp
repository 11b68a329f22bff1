#pragma once

#include <cstdint>

#include "fraclat/kernel.hpp"
#include "fraclat/lattice.hpp"
#include "fraclat/report.hpp"

namespace fraclat {

enum class GradientKind { full, modified, difference };

struct GradientResult {
  GradientKind kind = GradientKind::full;
  LatticeFunction values;
  // Tails are summed in closed form, so this is zero unless a caller approximates.
  double truncation_error_bound = 0.0;
};

/// |grad f|(x) = (Sum_y K_s(y-x) (f(x)-f(y))^2)^{1/2}.
double grad_full(const FractionalKernel& kernel, const LatticeFunction& f, std::int64_t x);

/// Same sum restricted to {y : |f(x)| > |f(y)|}.
double grad_modified(const FractionalKernel& kernel, const LatticeFunction& f, std::int64_t x);

/// Df(x) = f(x+1) - f(x).
double diff(const LatticeFunction& f, std::int64_t x);

/// Pointwise gradient of one kind over `out`. Difference values are signed unless `modulus`.
GradientResult gradient(const FractionalKernel& kernel, const LatticeFunction& f, GradientKind kind, const Window& out,
                        bool modulus = true);

/// Gamma_q(f)(x) = q f Lf - f^{2-q} L f^q, written as a single kernel sum. f >= 0, q in (1, 2].
/// Uses 0^{2-q} = 0 for q < 2.
double gamma_q_explicit(const FractionalKernel& kernel, const LatticeFunction& f, double q, std::int64_t x);

/// Taylor-remainder form
///   q(q-1) Sum_y K(x-y) (f(x)-f(y))^2 Int_0^1 (1-u) f(x)^{2-q} / ((1-u) f(x) + u f(y))^{2-q} du
/// with a Gauss-Legendre rule in u. Requires f > 0 on its window when q < 2.
double gamma_q_taylor(const FractionalKernel& kernel, const LatticeFunction& f, double q, std::int64_t x,
                      int quad_nodes = 64);

/// Gamma_{q,U}(f)(x) = Gamma_q(f)(x) + (q-1) U(x) f(x)^2.
double gamma_q_schrodinger(const FractionalKernel& kernel, const LatticeFunction& U, const LatticeFunction& f, double q,
                           std::int64_t x);

/// Checks, for every x in `window`,
///   |grad~ f|^2(x) <= 2/(q(q-1)) Gamma_q(f)(x)   and   |Df(x)|^2 <= c_q (Gamma_q(f)(x+1) + Gamma_q(f)(x))
/// with c_q = 2 / (q(q-1) K_s(1)). A universal c_q = 2 is false for q < 2: f = delta_0 at x = -1
/// needs c_q >= 1 / ((q-1) ||K_s||_1). Observations record the smallest constants that would have sufficed.
VerificationReport check_pointwise_bounds(const FractionalKernel& kernel, const LatticeFunction& f, double q,
                                          const Window& window);

}  // namespace fraclat
