#include "fraclat/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "fraclat/kernel.hpp"
#include "fraclat/quadrature.hpp"

namespace fraclat {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-40) ~ 4e-18: beyond this the integrand is dropped.
constexpr double kDecayCutoff = 40.0;
constexpr int kPanelNodes = 16;
constexpr int kGradedPanels = 20;
constexpr int kMaxSeriesTerms = 80;

// sin(pi a) with exact zeros at integers.
double sin_pi(double a) {
  const double r = std::round(a);
  const double frac = a - r;
  if (std::fabs(frac) < 1e-13) return 0.0;
  const double sgn = (static_cast<long long>(r) % 2 == 0) ? 1.0 : -1.0;
  return sgn * std::sin(kPi * frac);
}

}  // namespace

double heat_kernel_classical(double t, std::int64_t d) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel_classical: t must be > 0");
  const double dd = static_cast<double>(d < 0 ? -d : d);
  const int panels = std::max({8, static_cast<int>(std::ceil(dd / 2.0)), static_cast<int>(std::ceil(2.0 * std::sqrt(t)))});
  std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) breaks[static_cast<std::size_t>(i)] = kPi * i / panels;
  const QuadratureRule rule = composite_rule(breaks, 20);
  // e^{-2t} e^{2t cos u} = e^{-4t sin^2(u/2)} avoids overflow for large t.
  const double integral = rule.integrate([&](double u) {
    const double h = std::sin(0.5 * u);
    return std::exp(-4.0 * t * h * h) * std::cos(dd * u);
  });
  return integral / kPi;
}

SemigroupEvaluator::SemigroupEvaluator(double s) : s_(s) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("SemigroupEvaluator: s must lie in (0,1]");
}

double SemigroupEvaluator::symbol(double theta) const {
  const double h = 2.0 * std::sin(0.5 * theta);
  return std::pow(h * h, s_);
}

std::int64_t SemigroupEvaluator::series_threshold(double t) const {
  if (classical()) return std::numeric_limits<std::int64_t>::max();
  // The expansion is in powers of x = t d^{-2s}. It converges for s < 1/2 and is asymptotic
  // for s > 1/2, so the admissible x shrinks with s.
  const double x_max = s_ < 0.4 ? 1.0 : (s_ <= 0.5 ? 0.25 : 1.0 / 32.0);
  const double d = std::ceil(std::pow(t / x_max, 1.0 / (2.0 * s_)));
  if (!(d < 1e15)) return std::numeric_limits<std::int64_t>::max();
  return std::max<std::int64_t>(64, static_cast<std::int64_t>(d));
}

bool SemigroupEvaluator::series_pair(double t, std::int64_t d, double& p, double& lp) const {
  if (classical() || d < 64) return false;
  const double dd = static_cast<double>(d);
  const double log_t = std::log(t);
  p = 0.0;
  lp = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= kMaxSeriesTerms; ++n) {
    const double a = n * s_;
    if (a > 0.5 * dd) return false;
    const double sp = sin_pi(a);
    if (sp != 0.0) {
      const double ratio = boost::math::tgamma_delta_ratio(dd - a, 2.0 * a + 1.0);
      // (-t)^n / n! * c_a(d), c_a(d) = -Gamma(2a+1) sin(pi a)/pi * ratio
      const double mag = std::exp(n * log_t - std::lgamma(n + 1.0) + std::lgamma(2.0 * a + 1.0)) * ratio / kPi;
      const double sign = ((n % 2 == 0) ? 1.0 : -1.0) * -1.0 * (sp > 0 ? 1.0 : -1.0);
      const double term = sign * mag * std::fabs(sp);
      p += term;
      lp += -(n / t) * term;
      const double at = std::fabs(term);
      if (n > 3 && at > prev && at > 1e-18 * std::fabs(p)) return false;
      if (at <= 1e-17 * std::fabs(p) && n * (n / t) * at <= 1e-17 * std::fabs(lp) + 1e-300) return true;
      prev = at;
    }
  }
  return false;
}

SemigroupEvaluator::SpectralNodes SemigroupEvaluator::nodes(double t, std::int64_t max_distance) const {
  double theta_c = kPi;
  if (t * std::pow(4.0, s_) > kDecayCutoff) {
    const double h = 0.5 * std::pow(kDecayCutoff / t, 1.0 / (2.0 * s_));
    theta_c = 2.0 * std::asin(std::min(1.0, h));
  }
  const double D = static_cast<double>(std::max<std::int64_t>(max_distance, 1));
  const double w = std::min(8.0 / D, theta_c / 8.0);

  std::vector<double> breaks;
  double edge = w;
  for (int k = 0; k < kGradedPanels; ++k) edge *= 0.25;
  const double head = edge;
  breaks.push_back(edge);
  for (int k = 0; k < kGradedPanels; ++k) {
    edge *= 4.0;
    breaks.push_back(edge);
  }
  const auto n_uniform = static_cast<std::int64_t>(std::ceil((theta_c - w) / w));
  for (std::int64_t i = 1; i <= n_uniform; ++i)
    breaks.push_back(w + (theta_c - w) * static_cast<double>(i) / static_cast<double>(n_uniform));

  QuadratureRule rule = composite_rule(breaks, kPanelNodes);
  // [0, head]: integrand is 1 to within t * head^{2s}.
  rule.nodes.push_back(0.5 * head);
  rule.weights.push_back(head);

  SpectralNodes out;
  out.theta = std::move(rule.nodes);
  out.weight = std::move(rule.weights);
  for (double& x : out.weight) x /= kPi;
  out.psi.resize(out.theta.size());
  for (std::size_t i = 0; i < out.theta.size(); ++i) out.psi[i] = symbol(out.theta[i]);
  return out;
}

double SemigroupEvaluator::heat_kernel(double t, std::int64_t d) const {
  if (t < 0.0) throw std::invalid_argument("heat_kernel: t must be >= 0");
  if (d < 0) d = -d;
  if (t == 0.0) return d == 0 ? 1.0 : 0.0;
  double p = 0.0, lp = 0.0;
  if (d >= series_threshold(t) && series_pair(t, d, p, lp)) return p;
  const SpectralNodes n = nodes(t, d);
  double acc = 0.0;
  const double dd = static_cast<double>(d);
  for (std::size_t k = 0; k < n.theta.size(); ++k) acc += n.weight[k] * std::exp(-t * n.psi[k]) * std::cos(dd * n.theta[k]);
  return acc;
}

double SemigroupEvaluator::generator_kernel(double t, std::int64_t d) const {
  if (t < 0.0) throw std::invalid_argument("generator_kernel: t must be >= 0");
  if (d < 0) d = -d;
  if (t == 0.0) {
    if (classical()) return d == 0 ? 2.0 : (d == 1 ? -1.0 : 0.0);
    return d == 0 ? l1_norm(s_) : -kernel_value(s_, d);
  }
  double p = 0.0, lp = 0.0;
  if (d >= series_threshold(t) && series_pair(t, d, p, lp)) return lp;
  const SpectralNodes n = nodes(t, d);
  double acc = 0.0;
  const double dd = static_cast<double>(d);
  for (std::size_t k = 0; k < n.theta.size(); ++k)
    acc += n.weight[k] * n.psi[k] * std::exp(-t * n.psi[k]) * std::cos(dd * n.theta[k]);
  return acc;
}

HeatKernelTable SemigroupEvaluator::table(double t, std::int64_t max_distance) const {
  if (t < 0.0) throw std::invalid_argument("table: t must be >= 0");
  if (max_distance < 0) throw std::invalid_argument("table: max_distance must be >= 0");
  HeatKernelTable tab;
  tab.t = t;
  const auto size = static_cast<std::size_t>(max_distance) + 1;
  tab.p.assign(size, 0.0);
  tab.lp.assign(size, 0.0);
  if (t == 0.0) {
    // L applied to delta_0.
    tab.p[0] = 1.0;
    if (!classical()) {
      const FractionalKernel kk(s_, std::max<std::int64_t>(max_distance, 1));
      tab.lp[0] = kk.l1_norm();
      for (std::int64_t d = 1; d <= max_distance; ++d) tab.lp[static_cast<std::size_t>(d)] = -kk(d);
    } else {
      tab.lp[0] = 2.0;
      if (max_distance >= 1) tab.lp[1] = -1.0;
    }
    return tab;
  }

  // Far field by series, scanning down from the top so failures push the quadrature range up.
  std::int64_t quad_max = max_distance;
  const std::int64_t thr = series_threshold(t);
  if (thr <= max_distance) {
    std::int64_t d = max_distance;
    for (; d >= thr; --d) {
      double p = 0.0, lp = 0.0;
      if (!series_pair(t, d, p, lp)) break;
      tab.p[static_cast<std::size_t>(d)] = p;
      tab.lp[static_cast<std::size_t>(d)] = lp;
    }
    quad_max = d;
  }
  if (quad_max < 0) return tab;

  const SpectralNodes n = nodes(t, quad_max);
  const std::size_t nn = n.theta.size();
  std::vector<double> a(nn), b(nn), re(nn, 1.0), im(nn, 0.0), cr(nn), ci(nn);
  for (std::size_t k = 0; k < nn; ++k) {
    const double e = n.weight[k] * std::exp(-t * n.psi[k]);
    a[k] = e;
    b[k] = e * n.psi[k];
    cr[k] = std::cos(n.theta[k]);
    ci[k] = std::sin(n.theta[k]);
  }
  for (std::int64_t d = 0; d <= quad_max; ++d) {
    double sp = 0.0, sl = 0.0;
    for (std::size_t k = 0; k < nn; ++k) {
      sp += a[k] * re[k];
      sl += b[k] * re[k];
    }
    tab.p[static_cast<std::size_t>(d)] = sp;
    tab.lp[static_cast<std::size_t>(d)] = sl;
    for (std::size_t k = 0; k < nn; ++k) {
      const double r = re[k] * cr[k] - im[k] * ci[k];
      im[k] = re[k] * ci[k] + im[k] * cr[k];
      re[k] = r;
    }
  }
  return tab;
}

double SemigroupEvaluator::mass_tail(double t, std::int64_t D) const {
  if (D < 0) throw std::invalid_argument("mass_tail: D must be >= 0");
  if (t == 0.0) return 0.0;
  const std::int64_t thr = series_threshold(t);
  if (classical() || thr == std::numeric_limits<std::int64_t>::max()) {
    // Light tails: sum until negligible.
    double acc = 0.0;
    for (std::int64_t d = D + 1;; ++d) {
      const double p = heat_kernel(t, d);
      acc += p;
      if (std::fabs(p) < 1e-30 || d > D + 100000) break;
    }
    return acc;
  }
  const std::int64_t start = std::max(D, thr);
  double between = 0.0;
  if (start > D) {
    const HeatKernelTable tab = table(t, start);
    for (std::int64_t d = D + 1; d <= start; ++d) between += tab(d);
  }
  // Closed-form Sum_{d > start} c_a(d) = -Gamma(2a+1) sin(pi a)/pi * Gamma(start+1-a) / (2a Gamma(start+1+a)).
  const double Dd = static_cast<double>(start);
  double acc = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= kMaxSeriesTerms; ++n) {
    const double a = n * s_;
    if (a > 0.5 * Dd) break;
    const double sp = sin_pi(a);
    if (sp == 0.0) continue;
    const double ratio = boost::math::tgamma_delta_ratio(Dd + 1.0 - a, 2.0 * a) / (2.0 * a);
    const double mag = std::exp(n * std::log(t) - std::lgamma(n + 1.0) + std::lgamma(2.0 * a + 1.0)) * ratio / kPi;
    const double term = ((n % 2 == 0) ? 1.0 : -1.0) * -1.0 * sp * mag;
    acc += term;
    const double at = std::fabs(term);
    if (at <= 1e-17 * std::fabs(acc)) break;
    if (n > 3 && at > prev) break;
    prev = at;
  }
  return between + acc;
}

LatticeFunction SemigroupEvaluator::apply(double t, const LatticeFunction& f, const Window& out) const {
  if (t < 0.0) throw std::invalid_argument("apply: t must be >= 0");
  if (t == 0.0) return f.restricted(out);
  const Window& w = f.window();
  const std::int64_t dmax = std::max(std::abs(out.hi - w.lo), std::abs(out.lo - w.hi));
  const HeatKernelTable tab = table(t, dmax);
  std::vector<double> v(out.width(), 0.0);
  const auto fv = f.values();
  for (std::int64_t x = out.lo; x <= out.hi; ++x) {
    double acc = 0.0;
    for (std::int64_t y = w.lo; y <= w.hi; ++y) acc += tab(x - y) * fv[static_cast<std::size_t>(y - w.lo)];
    v[static_cast<std::size_t>(x - out.lo)] = acc;
  }
  return LatticeFunction(out, std::move(v));
}

LatticeFunction SemigroupEvaluator::apply_generator(double t, const LatticeFunction& f, const Window& out) const {
  if (t < 0.0) throw std::invalid_argument("apply_generator: t must be >= 0");
  const Window& w = f.window();
  const std::int64_t dmax = std::max(std::abs(out.hi - w.lo), std::abs(out.lo - w.hi));
  const HeatKernelTable tab = table(t, dmax);
  std::vector<double> v(out.width(), 0.0);
  const auto fv = f.values();
  for (std::int64_t x = out.lo; x <= out.hi; ++x) {
    double acc = 0.0;
    for (std::int64_t y = w.lo; y <= w.hi; ++y) acc += tab.generator(x - y) * fv[static_cast<std::size_t>(y - w.lo)];
    v[static_cast<std::size_t>(x - out.lo)] = acc;
  }
  return LatticeFunction(out, std::move(v));
}

SemigroupEvaluator::MaximalValue SemigroupEvaluator::maximal_function(const LatticeFunction& f,
                                                                      std::span<const double> t_grid,
                                                                      std::int64_t x) const {
  if (t_grid.empty()) throw std::invalid_argument("maximal_function: empty t grid");
  const Window& w = f.window();
  const std::int64_t dmax = std::max(std::abs(x - w.lo), std::abs(x - w.hi));
  auto value_at = [&](double t) {
    double acc = 0.0;
    if (dmax <= 256) {
      const HeatKernelTable tab = table(t, dmax);
      for (std::int64_t y = w.lo; y <= w.hi; ++y) acc += tab(x - y) * f(y);
    } else {
      for (std::int64_t y = w.lo; y <= w.hi; ++y)
        if (f(y) != 0.0) acc += heat_kernel(t, x - y) * f(y);
    }
    return std::fabs(acc);
  };

  MaximalValue best{std::fabs(f(x)), 0.0};
  std::vector<double> grid(t_grid.begin(), t_grid.end());
  std::sort(grid.begin(), grid.end());
  std::vector<double> vals(grid.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("maximal_function: t grid must be positive");
    vals[i] = value_at(grid[i]);
    if (vals[i] > vals[arg]) arg = i;
  }
  if (vals[arg] > best.value) best = {vals[arg], grid[arg]};

  // Golden-section search in log t around the best grid point.
  if (grid.size() >= 2) {
    double a = std::log(grid[arg == 0 ? 0 : arg - 1]);
    double b = std::log(grid[std::min(arg + 1, grid.size() - 1)]);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = value_at(std::exp(c)), fd = value_at(std::exp(d));
    for (int it = 0; it < 40 && b - a > 1e-10; ++it) {
      if (fc > fd) {
        b = d; d = c; fd = fc; c = b - g * (b - a); fc = value_at(std::exp(c));
      } else {
        a = c; c = d; fc = fd; d = a + g * (b - a); fd = value_at(std::exp(d));
      }
    }
    const double tm = std::exp(0.5 * (a + b));
    const double vm = value_at(tm);
    if (vm > best.value) best = {vm, tm};
  }
  return best;
}

}  // namespace fraclat
