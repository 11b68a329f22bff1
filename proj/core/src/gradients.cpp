#include "fraclat/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fraclat/quadrature.hpp"

namespace fraclat {

namespace {

void require_q(double q, const char* who) {
  if (!(q > 1.0 && q <= 2.0)) throw std::invalid_argument(std::string(who) + ": q must lie in (1, 2]");
}

void require_nonnegative(const LatticeFunction& f, const char* who) {
  if (!f.nonnegative()) throw std::invalid_argument(std::string(who) + ": function must be nonnegative");
}

double grad_sq(const FractionalKernel& kernel, const LatticeFunction& f, std::int64_t x, bool modified) {
  const Window& w = f.window();
  const double fx = f(x);
  const double ax = std::fabs(fx);
  double acc = 0.0;
  for (std::int64_t y = w.lo; y <= w.hi; ++y) {
    if (y == x) continue;
    const double fy = f(y);
    if (modified && !(ax > std::fabs(fy))) continue;
    const double d = fx - fy;
    acc += kernel(y - x) * d * d;
  }
  if (fx != 0.0) acc += fx * fx * kernel.mass_outside(x, w);
  return acc;
}

}  // namespace

double grad_full(const FractionalKernel& kernel, const LatticeFunction& f, std::int64_t x) {
  return std::sqrt(grad_sq(kernel, f, x, false));
}

double grad_modified(const FractionalKernel& kernel, const LatticeFunction& f, std::int64_t x) {
  return std::sqrt(grad_sq(kernel, f, x, true));
}

double diff(const LatticeFunction& f, std::int64_t x) { return f(x + 1) - f(x); }

GradientResult gradient(const FractionalKernel& kernel, const LatticeFunction& f, GradientKind kind, const Window& out,
                        bool modulus) {
  std::vector<double> v(out.width());
  for (std::int64_t x = out.lo; x <= out.hi; ++x) {
    double g = 0.0;
    switch (kind) {
      case GradientKind::full: g = grad_full(kernel, f, x); break;
      case GradientKind::modified: g = grad_modified(kernel, f, x); break;
      case GradientKind::difference: g = modulus ? std::fabs(diff(f, x)) : diff(f, x); break;
    }
    v[static_cast<std::size_t>(x - out.lo)] = g;
  }
  return GradientResult{kind, LatticeFunction(out, std::move(v)), 0.0};
}

double gamma_q_explicit(const FractionalKernel& kernel, const LatticeFunction& f, double q, std::int64_t x) {
  require_q(q, "gamma_q_explicit");
  require_nonnegative(f, "gamma_q_explicit");
  const double fx = f(x);
  if (fx == 0.0 && q < 2.0) return 0.0;
  const double fx_low = std::pow(fx, 2.0 - q);
  const double fx_q = std::pow(fx, q);
  const Window& w = f.window();
  double acc = 0.0;
  for (std::int64_t y = w.lo; y <= w.hi; ++y) {
    if (y == x) continue;
    const double fy = f(y);
    acc += kernel(y - x) * (q * fx * (fx - fy) - fx_low * (fx_q - std::pow(fy, q)));
  }
  // f(y) = 0 off the window: q f^2 - f^{2-q} f^q = (q-1) f^2.
  acc += (q - 1.0) * fx * fx * kernel.mass_outside(x, w);
  return acc;
}

double gamma_q_taylor(const FractionalKernel& kernel, const LatticeFunction& f, double q, std::int64_t x,
                      int quad_nodes) {
  require_q(q, "gamma_q_taylor");
  require_nonnegative(f, "gamma_q_taylor");
  if (quad_nodes < 2) throw std::invalid_argument("gamma_q_taylor: quad_nodes must be >= 2");
  const Window& w = f.window();
  if (q < 2.0)
    for (double v : f.values())
      if (v == 0.0) throw std::invalid_argument("gamma_q_taylor: f must be strictly positive on its window for q < 2");
  const double fx = f(x);
  if (fx == 0.0 && q < 2.0) return 0.0;
  const QuadratureRule& gl = gauss_legendre(static_cast<std::size_t>(quad_nodes));
  const double e = 2.0 - q;
  auto inner = [&](double fy) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double u = 0.5 * (gl.nodes[i] + 1.0);
      acc += 0.5 * gl.weights[i] * (1.0 - u) * std::pow(fx / ((1.0 - u) * fx + u * fy), e);
    }
    return acc;
  };
  double acc = 0.0;
  for (std::int64_t y = w.lo; y <= w.hi; ++y) {
    if (y == x) continue;
    const double d = fx - f(y);
    if (d == 0.0) continue;
    acc += kernel(y - x) * d * d * inner(f(y));
  }
  // Off the window f(y) = 0 and the inner integral is Int (1-u)^{q-1} du = 1/q.
  acc *= q * (q - 1.0);
  acc += (q - 1.0) * fx * fx * kernel.mass_outside(x, w);
  return acc;
}

double gamma_q_schrodinger(const FractionalKernel& kernel, const LatticeFunction& U, const LatticeFunction& f, double q,
                           std::int64_t x) {
  if (!U.nonnegative()) throw std::invalid_argument("gamma_q_schrodinger: potential must be nonnegative");
  const double fx = f(x);
  return gamma_q_explicit(kernel, f, q, x) + (q - 1.0) * U(x) * fx * fx;
}

VerificationReport check_pointwise_bounds(const FractionalKernel& kernel, const LatticeFunction& f, double q,
                                          const Window& window) {
  require_q(q, "check_pointwise_bounds");
  require_nonnegative(f, "check_pointwise_bounds");
  VerificationReport rep("gradients.pointwise_bounds", 0.0);
  rep.parameters = {{"s", kernel.s()}, {"q", q}, {"lo", double(window.lo)}, {"hi", double(window.hi)}};
  const double c_mod = 2.0 / (q * (q - 1.0));
  // Gamma_q(f)(x+1) >= q(q-1) K_s(1) (Df(x))^2 / 2 when f(x+1) >= f(x), and symmetrically at x.
  const double c_diff = 2.0 / (q * (q - 1.0) * kernel(1));
  double best_mod = 0.0, best_diff = 0.0;
  std::size_t violations = 0;
  double gamma_next = gamma_q_explicit(kernel, f, q, window.lo);
  for (std::int64_t x = window.lo; x <= window.hi; ++x) {
    const double g_x = gamma_next;
    gamma_next = gamma_q_explicit(kernel, f, q, x + 1);
    const double gm = grad_modified(kernel, f, x);
    const double lhs_mod = gm * gm;
    const double d = diff(f, x);
    const double lhs_diff = d * d;
    const double rhs_mod = c_mod * g_x;
    const double rhs_diff = c_diff * (gamma_next + g_x);
    // Rounding allowance relative to the magnitude of the terms.
    const double slack_mod = lhs_mod - rhs_mod - 1e-12 * (lhs_mod + rhs_mod);
    const double slack_diff = lhs_diff - rhs_diff - 1e-12 * (lhs_diff + rhs_diff);
    if (slack_mod > 0.0 || slack_diff > 0.0) ++violations;
    rep.record(std::max({0.0, slack_mod, slack_diff}));
    if (g_x > 0.0) best_mod = std::max(best_mod, lhs_mod / g_x);
    if (gamma_next + g_x > 0.0) best_diff = std::max(best_diff, lhs_diff / (gamma_next + g_x));
  }
  rep.observations["violations"] = static_cast<double>(violations);
  rep.observations["empirical_constant_modified"] = best_mod;
  rep.observations["empirical_constant_difference"] = best_diff;
  rep.observations["constant_modified"] = c_mod;
  rep.observations["constant_difference"] = c_diff;
  return rep.finalize();
}

}  // namespace fraclat
