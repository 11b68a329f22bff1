#include "fraclat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace fraclat {

namespace {

void require_order(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional order s must lie in (0,1)");
}

// 4^s Gamma(1/2+s) / (sqrt(pi) |Gamma(-s)|), using |Gamma(-s)| = Gamma(1-s)/s.
double kernel_prefactor(double s) {
  return std::pow(4.0, s) * s * std::tgamma(0.5 + s) / (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - s));
}

// Gamma(m - s) / Gamma(m + 1 + s) for m >= 1.
double gamma_ratio(double s, std::int64_t m) {
  return boost::math::tgamma_delta_ratio(static_cast<double>(m) - s, 1.0 + 2.0 * s);
}

}  // namespace

double kernel_value(double s, std::int64_t m) {
  require_order(s);
  if (m == 0) return 0.0;
  const std::int64_t a = m < 0 ? -m : m;
  return kernel_prefactor(s) * gamma_ratio(s, a);
}

double kernel_tail(double s, std::int64_t M) {
  require_order(s);
  if (M < 0) throw std::invalid_argument("kernel_tail: M must be >= 0");
  // Sum_{m>M} K(m) = K(M+1) (M+1+s) / (2s).
  return kernel_value(s, M + 1) * (static_cast<double>(M) + 1.0 + s) / (2.0 * s);
}

double l1_norm(double s) { return 2.0 * kernel_tail(s, 0); }

double symbol(double s, double theta) {
  const double half = 2.0 * std::sin(0.5 * theta);
  return std::pow(half * half, s);
}

FractionalKernel::FractionalKernel(double s, std::int64_t table_size)
    : s_(s), prefactor_(0.0), l1_norm_(0.0) {
  require_order(s);
  if (table_size < 1) throw std::invalid_argument("FractionalKernel: table_size must be >= 1");
  prefactor_ = kernel_prefactor(s);
  values_.assign(static_cast<std::size_t>(table_size) + 1, 0.0);
  values_[1] = std::pow(4.0, s) * s * std::tgamma(0.5 + s) / (std::sqrt(std::numbers::pi) * std::tgamma(2.0 + s));
  for (std::int64_t m = 1; m < table_size; ++m) {
    const double md = static_cast<double>(m);
    values_[static_cast<std::size_t>(m + 1)] = values_[static_cast<std::size_t>(m)] * (md - s) / (md + 1.0 + s);
  }
  l1_norm_ = 2.0 * tail(0);
}

double FractionalKernel::operator()(std::int64_t m) const {
  const std::int64_t a = m < 0 ? -m : m;
  if (a < static_cast<std::int64_t>(values_.size())) return values_[static_cast<std::size_t>(a)];
  return prefactor_ * gamma_ratio(s_, a);
}

double FractionalKernel::tail(std::int64_t M) const {
  if (M < 0) throw std::invalid_argument("FractionalKernel::tail: M must be >= 0");
  return (*this)(M + 1) * (static_cast<double>(M) + 1.0 + s_) / (2.0 * s_);
}

double FractionalKernel::mass_outside(std::int64_t x, const Window& w) const {
  if (w.contains(x)) return tail(x - w.lo) + tail(w.hi - x);
  // Everything except the block of distances covered by w.
  const std::int64_t near = x < w.lo ? w.lo - x : x - w.hi;
  const std::int64_t far = x < w.lo ? w.hi - x : x - w.lo;
  const double inside = tail(near - 1) - tail(far);
  return l1_norm_ - inside;
}

LatticeFunction apply_L(const FractionalKernel& kernel, const LatticeFunction& f, const Window& out) {
  const Window& w = f.window();
  const auto fv = f.values();
  std::vector<double> result(out.width(), 0.0);
  for (std::int64_t j = out.lo; j <= out.hi; ++j) {
    const double fj = f(j);
    double acc = 0.0;
    for (std::int64_t m = w.lo; m <= w.hi; ++m) {
      if (m == j) continue;
      acc += (fj - fv[static_cast<std::size_t>(m - w.lo)]) * kernel(j - m);
    }
    if (fj != 0.0) acc += fj * kernel.mass_outside(j, w);
    result[static_cast<std::size_t>(j - out.lo)] = acc;
  }
  return LatticeFunction(out, std::move(result));
}

namespace {

// Sum_{m >= N} a_m z^m for a smooth decreasing sequence a_m = K(m), |z| = 1, z != 1,
// by two rounds of summation by parts; the dropped remainder is of order a_N / (N |1-z|^3).
std::complex<double> oscillatory_tail(const FractionalKernel& k, std::int64_t N, double theta) {
  const std::complex<double> z = std::polar(1.0, theta);
  const std::complex<double> one_minus_z = 1.0 - z;
  const double a0 = k(N), a1 = k(N + 1), a2 = k(N + 2);
  const double d1 = a1 - a0;                 // first difference at N+1
  const double d2 = (a2 - a1) - (a1 - a0);   // second difference at N+2
  const std::complex<double> zN = std::polar(1.0, theta * static_cast<double>(N));
  const std::complex<double> s2 = d2 * zN * z * z / one_minus_z;
  const std::complex<double> s1 = (d1 * zN * z + s2) / one_minus_z;
  return (a0 * zN + s1) / one_minus_z;
}

}  // namespace

VerificationReport multiplier_identity_check(double s, double theta, std::int64_t M) {
  require_order(s);
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw std::invalid_argument("theta must lie in [0, pi]");
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  const FractionalKernel k(s, std::max<std::int64_t>(M + 3, 16));
  VerificationReport r("kernel.multiplier_identity", 1e-8);
  r.parameters = {{"s", s}, {"theta", theta}, {"M", static_cast<double>(M)}};
  const double rhs = symbol(s, theta);
  double lhs = 0.0;
  if (theta > 0.0) {
    double acc = 0.0;
    for (std::int64_t m = 1; m <= M; ++m) acc += k(m) * (1.0 - std::cos(static_cast<double>(m) * theta));
    const double tail_flat = k.tail(M);
    const double tail_osc = oscillatory_tail(k, M + 1, theta).real();
    lhs = 2.0 * (acc + tail_flat - tail_osc);
  }
  const double err = rhs > 0.0 ? std::fabs(lhs - rhs) / rhs : std::fabs(lhs - rhs);
  r.observations = {{"lhs", lhs}, {"symbol", rhs}};
  r.record(err);
  r.note = "relative error";
  return r.finalize();
}

VerificationReport conservation_check(const FractionalKernel& kernel, const LatticeFunction& f) {
  VerificationReport r("kernel.conservation", 1e-8);
  r.parameters = {{"s", kernel.s()}};
  const Window& w = f.window();
  const double norm1 = lq_norm(f, 1.0);
  if (norm1 == 0.0) {
    r.observations = {{"sum_Lf", 0.0}};
    return r.finalize();
  }
  const Window ext = w.expanded(static_cast<std::int64_t>(w.width()));
  const LatticeFunction lf = apply_L(kernel, f, ext);
  double inside = 0.0;
  for (double v : lf.values()) inside += v;
  // For x outside ext, Lf(x) = -Sum_m f(m) K(x-m).
  double outside = 0.0;
  for (std::int64_t m = w.lo; m <= w.hi; ++m) outside -= f(m) * kernel.mass_outside(m, ext);
  const double total = inside + outside;
  r.observations = {{"sum_Lf", total}, {"l1_norm_f", norm1}};
  r.record(std::fabs(total) / norm1);
  r.note = "|Sum_x Lf(x)| / ||f||_1";
  return r.finalize();
}

TransitionLaw::TransitionLaw(FractionalKernel kernel) : kernel_(std::move(kernel)) {
  const std::int64_t n = kernel_.table_size();
  survival_.resize(static_cast<std::size_t>(n) + 1);
  const double t0 = kernel_.tail(0);
  for (std::int64_t m = 0; m <= n; ++m) survival_[static_cast<std::size_t>(m)] = kernel_.tail(m) / t0;
}

double TransitionLaw::prob(std::int64_t i, std::int64_t j) const { return kernel_(i - j) / kernel_.l1_norm(); }

double TransitionLaw::magnitude_survival(std::int64_t m) const {
  if (m < 0) return 1.0;
  if (m < static_cast<std::int64_t>(survival_.size())) return survival_[static_cast<std::size_t>(m)];
  return kernel_.tail(m) / kernel_.tail(0);
}

std::int64_t TransitionLaw::magnitude_quantile(double v) const {
  if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("magnitude_quantile: v must lie in (0,1]");
  const std::int64_t n = static_cast<std::int64_t>(survival_.size()) - 1;
  if (v >= survival_.back()) {
    // First m with survival_[m] <= v; survival_ is strictly decreasing.
    auto it = std::lower_bound(survival_.begin(), survival_.end(), v, [](double a, double b) { return a > b; });
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(it - survival_.begin()));
  }
  std::int64_t lo = n, hi = n;
  while (magnitude_survival(hi) > v) {
    lo = hi;
    if (hi >= kMaxMagnitude / 2) return kMaxMagnitude;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (magnitude_survival(mid) > v) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace fraclat
