#include "fraclat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fraclat {

namespace {
constexpr std::int64_t kMaxWidth = std::int64_t{1} << 40;
}

Window::Window(std::int64_t lo_, std::int64_t hi_) : lo(lo_), hi(hi_) {
  if (lo > hi) throw std::invalid_argument("Window: lo > hi");
  if (hi - lo >= kMaxWidth) throw std::invalid_argument("Window: width too large");
}

Window Window::expanded(std::int64_t margin) const { return Window(lo - margin, hi + margin); }

Window Window::hull(const Window& a, const Window& b) {
  return Window(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

LatticeFunction::LatticeFunction(Window w) : window_(w), values_(w.width(), 0.0) {}

LatticeFunction::LatticeFunction(Window w, std::vector<double> values)
    : window_(w), values_(std::move(values)) {
  if (values_.size() != window_.width())
    throw std::invalid_argument("LatticeFunction: values length " + std::to_string(values_.size()) +
                                " does not match window width " + std::to_string(window_.width()));
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("LatticeFunction: non-finite value");
}

LatticeFunction LatticeFunction::delta(std::int64_t x) {
  return LatticeFunction(Window(x, x), {1.0});
}

LatticeFunction LatticeFunction::restricted(Window w) const {
  std::vector<double> v(w.width());
  for (std::int64_t x = w.lo; x <= w.hi; ++x) v[static_cast<std::size_t>(x - w.lo)] = (*this)(x);
  return LatticeFunction(w, std::move(v));
}

LatticeFunction LatticeFunction::scaled(double a) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= a;
  return LatticeFunction(window_, std::move(v));
}

LatticeFunction LatticeFunction::abs() const {
  std::vector<double> v(values_);
  for (double& x : v) x = std::fabs(x);
  return LatticeFunction(window_, std::move(v));
}

bool LatticeFunction::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

bool LatticeFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

LatticeFunction operator+(const LatticeFunction& a, const LatticeFunction& b) {
  const Window w = Window::hull(a.window(), b.window());
  std::vector<double> v(w.width());
  for (std::int64_t x = w.lo; x <= w.hi; ++x) v[static_cast<std::size_t>(x - w.lo)] = a(x) + b(x);
  return LatticeFunction(w, std::move(v));
}

double lq_norm(const LatticeFunction& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1");
  const auto v = f.values();
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
  // Scale by the sup norm so large q does not overflow.
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += std::pow(std::fabs(x) / m, q);
  return m * std::pow(acc, 1.0 / q);
}

bool in_Ds(const LatticeFunction& f, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("in_Ds: s must lie in (0,1)");
  double acc = 0.0;
  for (std::int64_t x = f.window().lo; x <= f.window().hi; ++x)
    acc += std::fabs(f(x)) * std::pow(1.0 + std::fabs(static_cast<double>(x)), -(1.0 + 2.0 * s));
  return std::isfinite(acc);
}

void to_json(nlohmann::json& j, const LatticeFunction& f) {
  j = nlohmann::json{{"lo", f.window().lo},
                     {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

void from_json(const nlohmann::json& j, LatticeFunction& f) {
  const auto lo = j.at("lo").get<std::int64_t>();
  auto values = j.at("values").get<std::vector<double>>();
  if (values.empty()) throw std::invalid_argument("LatticeFunction JSON: empty values");
  const auto hi = lo + static_cast<std::int64_t>(values.size()) - 1;
  f = LatticeFunction(Window(lo, hi), std::move(values));
}

}  // namespace fraclat
