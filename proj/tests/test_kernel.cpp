#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fraclat/kernel.hpp"
#include "oracles.hpp"

using namespace fraclat;
using std::numbers::pi;

TEST_SUITE("kernel") {

TEST_CASE("kernel_value examples") {
  CHECK(kernel_value(0.5, 0) == 0.0);
  CHECK(std::fabs(kernel_value(0.5, 1) - 4.0 / (3.0 * pi)) < 1e-15);
  CHECK(kernel_value(0.5, -1) == kernel_value(0.5, 1));
}

TEST_CASE("closed form at s = 1/2") {
  const FractionalKernel k(0.5);
  for (std::int64_t m : {1, 2, 3, 10, 100, 1000, 65536, 65537, 1000000, 123456789})
    CHECK(std::fabs(k(m) - oracle::kernel_half(m)) <= 1e-13 * oracle::kernel_half(m));
}

TEST_CASE("kernel agrees with Fourier inversion of the symbol") {
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const FractionalKernel k(s);
    for (std::int64_t m = 1; m <= 20; ++m) {
      CAPTURE(s);
      CAPTURE(m);
      CHECK(std::fabs(k(m) - oracle::kernel_fourier(s, m)) <= 1e-10 * k(m));
    }
  }
}

TEST_CASE("table and direct evaluation meet smoothly") {
  for (double s : {0.25, 0.75}) {
    const FractionalKernel k(s, 1000);
    for (std::int64_t m = 990; m <= 1010; ++m) CHECK(std::fabs(k(m) - oracle::kernel_lgamma(s, m)) <= 1e-10 * k(m));
  }
}

TEST_CASE("tail examples") {
  CHECK(std::fabs(kernel_tail(0.5, 0) - 2.0 / pi) < 1e-14);
  // Summation oracle at s = 1/2: partial fractions give Sum_{m > M} = 1 / (pi (M + 1/2)).
  for (std::int64_t M : {0, 1, 7, 1000, 100000})
    CHECK(std::fabs(kernel_tail(0.5, M) - 1.0 / (pi * (M + 0.5))) <= 1e-13 * kernel_tail(0.5, M));
}

TEST_CASE("tail telescoping") {
  for (double s : {0.1, 0.25, 0.5, 0.9}) {
    const FractionalKernel k(s);
    for (std::int64_t M : {0, 1, 5, 100, 5000, 70000})
      CHECK(std::fabs(k.tail(M) - k.tail(M + 1) - k(M + 1)) <= 1e-13 * k.tail(M));
  }
}

TEST_CASE("s = 0.25, M = 1000: brute-force remainder") {
  // Sum K over (1000, 10^6] by brute force, plus the Euler-Maclaurin integral for the rest.
  const double s = 0.25;
  const FractionalKernel k(s);
  long double acc = 0.0L;
  for (std::int64_t m = 1000000; m > 1000; --m) acc += k(m);
  const double c = k.prefactor();
  const double N = 1e6;
  // Sum_{m > N} c m^{-1-2s} (1 + O(1/m)) ~ c N^{-2s} / (2s) - c N^{-1-2s} / 2.
  const double far = c * std::pow(N, -2.0 * s) / (2.0 * s) - 0.5 * c * std::pow(N, -1.0 - 2.0 * s);
  const double brute = static_cast<double>(acc) + far;
  CHECK(std::fabs(kernel_tail(s, 1000) - brute) <= 1e-6 * kernel_tail(s, 1000));
}

TEST_CASE("l1 norm") {
  CHECK(std::fabs(l1_norm(0.5) - 4.0 / pi) < 1e-14);
  for (double s : {0.25, 0.5, 0.75}) {
    CHECK(l1_norm(s) == 2.0 * kernel_tail(s, 0));
    const double closed = std::pow(4.0, s) * std::tgamma(0.5 + s) / (std::sqrt(pi) * std::tgamma(1.0 + s));
    CHECK(std::fabs(l1_norm(s) - closed) < 1e-13);
  }
}

TEST_CASE("symbol identity") {
  CHECK(multiplier_identity_check(0.5, 0.0, 1000).observations.at("lhs") == 0.0);
  const auto at_pi = multiplier_identity_check(0.5, pi, 100000);
  CHECK(at_pi.passed);
  CHECK(std::fabs(at_pi.observations.at("lhs") - 2.0) < 1e-10);
  CHECK(multiplier_identity_check(0.25, pi / 2, 100000).max_abs_error <= 1e-8);
  // Closed form at s = 1/2: Sum 2 (1 - cos m th) / (pi (m^2 - 1/4)) = 2 sin(th/2).
  for (double th : {0.01, 0.3, 1.0, 2.5}) CHECK(std::fabs(symbol(0.5, th) - 2.0 * std::sin(th / 2)) < 1e-15);
}

TEST_CASE("apply_L on simple inputs") {
  const FractionalKernel k(0.75);
  const Window out(-5, 5);
  const LatticeFunction zero = apply_L(k, LatticeFunction::zeros(Window(-3, 3)), out);
  for (std::int64_t x = -5; x <= 5; ++x) CHECK(zero(x) == 0.0);

  // Constant on a wide window: at the center only the mass beyond the window contributes.
  const std::int64_t R = 2000;
  const LatticeFunction one(Window(-R, R), std::vector<double>(2 * R + 1, 1.0));
  CHECK(std::fabs(apply_L(k, one, Window(0, 0))(0) - 2.0 * k.tail(R)) < 1e-14);

  // cos(th x) sampled widely: Lf(0) / f(0) approaches the symbol.
  const double th = 0.7;
  const std::int64_t W = 200000;
  std::vector<double> v(2 * W + 1);
  for (std::int64_t x = -W; x <= W; ++x) v[static_cast<std::size_t>(x + W)] = std::cos(th * static_cast<double>(x));
  const LatticeFunction c(Window(-W, W), std::move(v));
  const double ratio = apply_L(k, c, Window(0, 0))(0);
  // Truncation: the missing oscillatory tail is at most 2 K(W) / sin(th/2) plus the flat tail 2 tail(W).
  CHECK(std::fabs(ratio - symbol(0.75, th)) <= 2.0 * k(W) / std::sin(th / 2) + 2.0 * k.tail(W));
}

TEST_CASE("Lf sums to zero") {
  const FractionalKernel k(0.75);
  CHECK(conservation_check(k, LatticeFunction::delta(0)).passed);
  CHECK(conservation_check(k, LatticeFunction::zeros(Window(0, 4))).max_abs_error == 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(41);
  for (double& x : v) x = u(rng);
  CHECK(conservation_check(k, LatticeFunction(Window(-20, 20), v)).max_abs_error <= 1e-8);
}

TEST_CASE("transition law") {
  const TransitionLaw law{FractionalKernel(0.5)};
  CHECK(std::fabs(law.prob(0, 1) - (4.0 / (3.0 * pi)) / (4.0 / pi)) < 1e-15);
  CHECK(law.prob(3, 3) == 0.0);
  CHECK(std::fabs(law.magnitude_survival(0) - 1.0) < 1e-15);
  CHECK(std::fabs(law.magnitude_survival(1) - (1.0 - 2.0 / 3.0)) < 1e-14);
  CHECK(law.magnitude_quantile(1.0) == 1);
  CHECK(law.magnitude_quantile(0.34) == 1);
  CHECK(law.magnitude_quantile(0.33) == 2);
  // Far quantile through the closed-form tail: P(|J| > m) = tail(m) / tail(0) = 1 / (2m + 1) at s = 1/2.
  const std::int64_t m = law.magnitude_quantile(1e-9);
  CHECK(law.magnitude_survival(m) <= 1e-9);
  CHECK(law.magnitude_survival(m - 1) > 1e-9);
  CHECK(law.magnitude_quantile(1e-300) == TransitionLaw::kMaxMagnitude);
}

TEST_CASE("invalid order") {
  CHECK_THROWS_AS(FractionalKernel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(FractionalKernel(1.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_tail(0.5, -1), std::invalid_argument);
}

}
