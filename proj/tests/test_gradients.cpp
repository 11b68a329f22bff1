#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fraclat/gradients.hpp"
#include "oracles.hpp"

using namespace fraclat;
using std::numbers::pi;

namespace {

LatticeFunction random_f(Window w, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(w.width());
  for (double& x : v) x = u(rng);
  return LatticeFunction(w, std::move(v));
}

// |grad f|^2(x) by brute force over |y - x| <= R plus f(x)^2 times the kernel mass beyond.
double grad_sq_brute(double s, const LatticeFunction& f, std::int64_t x, std::int64_t R) {
  double acc = 0.0;
  for (std::int64_t y = x - R; y <= x + R; ++y) {
    const double d = f(x) - f(y);
    acc += oracle::kernel_lgamma(s, y - x) * d * d;
  }
  return acc + f(x) * f(x) * 2.0 * kernel_tail(s, R);
}

}  // namespace

TEST_SUITE("gradients") {

TEST_CASE("grad_full examples") {
  const FractionalKernel k(0.5);
  CHECK(grad_full(k, LatticeFunction::zeros(Window(-2, 2)), 0) == 0.0);
  CHECK(std::fabs(grad_full(k, LatticeFunction::delta(0), 0) - std::sqrt(4.0 / pi)) < 1e-14);
  CHECK(std::fabs(grad_full(k, LatticeFunction::delta(0), 5) - std::sqrt(k(5))) < 1e-15);
}

TEST_CASE("grad_full against brute force") {
  for (double s : {0.25, 0.75}) {
    const FractionalKernel k(s);
    const LatticeFunction f = random_f(Window(-6, 6), -1.0, 1.0, 5);
    for (std::int64_t x = -9; x <= 9; ++x) {
      const double g = grad_full(k, f, x);
      CHECK(std::fabs(g * g - grad_sq_brute(s, f, x, 400)) < 1e-12);
    }
  }
}

TEST_CASE("grad_modified examples") {
  const FractionalKernel k(0.5);
  CHECK(std::fabs(grad_modified(k, LatticeFunction::delta(0), 0) - std::sqrt(4.0 / pi)) < 1e-14);
  CHECK(grad_modified(k, LatticeFunction::delta(0), 5) == 0.0);
  // Constant 2 on a window: only the zero values outside it count, giving 4 x (kernel mass outside).
  const Window w(-3, 3);
  const LatticeFunction c(w, std::vector<double>(7, 2.0));
  for (std::int64_t x = -2; x <= 2; ++x) {
    const double g = grad_modified(k, c, x);
    CHECK(std::fabs(g * g - 4.0 * k.mass_outside(x, w)) < 1e-14);
    CHECK(grad_modified(k, c, x) == doctest::Approx(grad_full(k, c, x)));
  }
}

TEST_CASE("modified gradient is dominated by the full one") {
  const FractionalKernel k(0.25);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const LatticeFunction f = random_f(Window(-8, 8), -1.0, 1.0, seed);
    for (std::int64_t x = -10; x <= 10; ++x) CHECK(grad_modified(k, f, x) <= grad_full(k, f, x) + 1e-15);
  }
}

TEST_CASE("diff examples") {
  const LatticeFunction d = LatticeFunction::delta(0);
  CHECK(diff(d, -1) == 1.0);
  CHECK(diff(d, 0) == -1.0);
  CHECK(diff(d, 3) == 0.0);
  const GradientResult r = gradient(FractionalKernel(0.5), d, GradientKind::difference, Window(-1, 0), true);
  CHECK(r.values(-1) == 1.0);
  CHECK(r.values(0) == 1.0);
  const GradientResult signed_r = gradient(FractionalKernel(0.5), d, GradientKind::difference, Window(-1, 0), false);
  CHECK(signed_r.values(0) == -1.0);
}

TEST_CASE("Gamma_q examples") {
  const FractionalKernel k(0.5);
  CHECK(std::fabs(gamma_q_explicit(k, LatticeFunction::delta(0), 1.5, 0) - 2.0 / pi) < 1e-14);
  // Constant c on a window: each zero outside contributes c^{2-q} (q c^{q-1} c - c^q) = (q - 1) c^2.
  const Window w(-3, 3);
  const LatticeFunction c(w, std::vector<double>(7, 0.7));
  for (std::int64_t x = -3; x <= 3; ++x) {
    const double want = 0.5 * 0.49 * k.mass_outside(x, w);
    CHECK(std::fabs(gamma_q_explicit(k, c, 1.5, x) - want) < 1e-14);
    CHECK(std::fabs(gamma_q_taylor(k, c, 1.5, x) - want) < 1e-13);
  }
}

TEST_CASE("Gamma_2 is the squared gradient") {
  for (double s : {0.25, 0.5, 0.75}) {
    const FractionalKernel k(s);
    for (unsigned seed = 0; seed < 10; ++seed) {
      const LatticeFunction f = random_f(Window(-10, 10), 0.0, 1.0, seed);
      for (std::int64_t x = -12; x <= 12; ++x) {
        const double g = grad_full(k, f, x);
        CHECK(std::fabs(gamma_q_explicit(k, f, 2.0, x) - g * g) < 1e-10);
        CHECK(std::fabs(gamma_q_taylor(k, f, 2.0, x) - g * g) < 1e-10);
      }
    }
  }
}

TEST_CASE("Taylor form agrees with the explicit form") {
  const FractionalKernel k(0.25);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const LatticeFunction f = random_f(Window(-10, 10), 0.05, 1.0, 40 + seed);
    for (std::int64_t x = -10; x <= 10; ++x)
      CHECK(std::fabs(gamma_q_taylor(k, f, 1.3, x) - gamma_q_explicit(k, f, 1.3, x)) < 1e-8);
  }
  // Zeros inside the window make the inner integral singular for q < 2.
  CHECK_THROWS_AS(gamma_q_taylor(k, LatticeFunction(Window(0, 1), {1.0, 0.0}), 1.5, 0), std::invalid_argument);
}

TEST_CASE("Schrodinger pseudo-gradient") {
  const FractionalKernel k(0.5);
  const LatticeFunction f = random_f(Window(-5, 5), 0.0, 1.0, 9);
  const LatticeFunction zero = LatticeFunction::zeros(Window(-5, 5));
  const LatticeFunction U = random_f(Window(-5, 5), 0.0, 2.0, 10);
  for (std::int64_t x = -5; x <= 5; ++x) {
    CHECK(gamma_q_schrodinger(k, zero, f, 1.5, x) == gamma_q_explicit(k, f, 1.5, x));
    const double g = grad_full(k, f, x);
    CHECK(std::fabs(gamma_q_schrodinger(k, U, f, 2.0, x) - (g * g + U(x) * f(x) * f(x))) < 1e-12);
  }
  CHECK(std::fabs(gamma_q_schrodinger(k, LatticeFunction::delta(0), LatticeFunction::delta(0), 1.5, 0) -
                  (2.0 / pi + 0.5)) < 1e-14);
}

TEST_CASE("pointwise bounds") {
  const FractionalKernel k(0.5);
  // Equality case for the modified gradient at q = 2.
  const double gm = grad_modified(k, LatticeFunction::delta(0), 0);
  CHECK(std::fabs(gm * gm - gamma_q_explicit(k, LatticeFunction::delta(0), 2.0, 0)) < 1e-14);
  const LatticeFunction c(Window(-3, 3), std::vector<double>(7, 1.0));
  CHECK(check_pointwise_bounds(k, c, 1.5, Window(-1, 1)).passed);

  for (double s : {0.25, 0.75})
    for (double q : {1.1, 1.5, 2.0}) {
      const FractionalKernel ks(s);
      for (unsigned seed = 0; seed < 50; ++seed) {
        const LatticeFunction f = random_f(Window(-15, 15), 0.0, 1.0, seed);
        const VerificationReport r = check_pointwise_bounds(ks, f, q, Window(-17, 17));
        CAPTURE(s);
        CAPTURE(q);
        CHECK(r.observations.at("violations") == 0.0);
        CHECK(r.observations.at("empirical_constant_modified") <= 2.0 / (q * (q - 1.0)) * (1 + 1e-12));
      }
    }
}

TEST_CASE("difference bound needs a q-dependent constant") {
  // f = delta_0 at x = -1: |Df|^2 = 1 while Gamma_q(f)(-1) = 0 and Gamma_q(f)(0) = (q - 1) ||K||_1.
  for (double s : {0.25, 0.75})
    for (double q : {1.1, 1.5}) {
      const FractionalKernel k(s);
      const LatticeFunction d = LatticeFunction::delta(0);
      CHECK(gamma_q_explicit(k, d, q, -1) == 0.0);
      CHECK(std::fabs(gamma_q_explicit(k, d, q, 0) - (q - 1.0) * k.l1_norm()) < 1e-13);
      const double needed = 1.0 / ((q - 1.0) * k.l1_norm());
      const VerificationReport r = check_pointwise_bounds(k, d, q, Window(-1, -1));
      CHECK(std::fabs(r.observations.at("empirical_constant_difference") - needed) < 1e-12);
      CHECK(r.observations.at("constant_difference") >= needed);
    }
}

TEST_CASE("domain errors") {
  const FractionalKernel k(0.5);
  CHECK_THROWS_AS(gamma_q_explicit(k, LatticeFunction::delta(0), 2.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_q_explicit(k, LatticeFunction::delta(0).scaled(-1.0), 1.5, 0), std::invalid_argument);
}

}
