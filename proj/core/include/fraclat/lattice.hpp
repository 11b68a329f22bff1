#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace fraclat {

/// Closed integer interval [lo, hi] on the lattice.
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  Window() = default;
  Window(std::int64_t lo_, std::int64_t hi_);

  std::size_t width() const { return static_cast<std::size_t>(hi - lo + 1); }
  bool contains(std::int64_t x) const { return x >= lo && x <= hi; }

  /// Window grown by `margin` points on each side.
  Window expanded(std::int64_t margin) const;

  /// Smallest window containing both.
  static Window hull(const Window& a, const Window& b);

  friend bool operator==(const Window&, const Window&) = default;
};

/// Finitely supported real function on Z. Values outside the window are 0.
class LatticeFunction {
 public:
  LatticeFunction() : LatticeFunction(Window{0, 0}) {}
  explicit LatticeFunction(Window w);
  LatticeFunction(Window w, std::vector<double> values);

  /// Unit mass at `x`.
  static LatticeFunction delta(std::int64_t x);
  /// Zero function on `w`.
  static LatticeFunction zeros(Window w) { return LatticeFunction(w); }

  const Window& window() const { return window_; }
  std::span<const double> values() const { return values_; }

  /// f(x), zero outside the window.
  double operator()(std::int64_t x) const {
    return window_.contains(x) ? values_[static_cast<std::size_t>(x - window_.lo)] : 0.0;
  }

  /// Same function re-represented on `w` (truncating if `w` is smaller).
  LatticeFunction restricted(Window w) const;

  LatticeFunction scaled(double a) const;
  LatticeFunction abs() const;
  bool nonnegative() const;
  bool is_zero() const;

  friend LatticeFunction operator+(const LatticeFunction& a, const LatticeFunction& b);

 private:
  Window window_;
  std::vector<double> values_;
};

/// l^q norm for q in [1, inf]; pass q = +infinity for the sup norm.
double lq_norm(const LatticeFunction& f, double q);

/// Membership in D_s. Always true for finitely supported f; requires 0 < s < 1.
bool in_Ds(const LatticeFunction& f, double s);

void to_json(nlohmann::json& j, const LatticeFunction& f);
void from_json(const nlohmann::json& j, LatticeFunction& f);

}  // namespace fraclat
