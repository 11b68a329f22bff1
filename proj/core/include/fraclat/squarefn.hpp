#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fraclat/kernel.hpp"
#include "fraclat/lattice.hpp"
#include "fraclat/report.hpp"
#include "fraclat/semigroup.hpp"

namespace fraclat {

class SchrodingerEvaluator;

/// Rule for Int_0^{t_max} g(t) dt: one Gauss-Legendre panel on [0, t_min], then panels
/// equally spaced in log t up to t_max with Gauss-Legendre nodes in the log variable.
struct TimeQuadrature {
  double t_min = 1e-6;
  double t_max = 0.0;
  int panels_per_decade = 2;
  int nodes_per_panel = 16;
  std::vector<double> breaks;
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Certified bound on the discarded Int_{t_max}^infty; filled in by evaluators.
  double tail_bound = 0.0;

  static TimeQuadrature log_panels(double t_max, int panels_per_decade = 2, int nodes_per_panel = 16,
                                   double t_min = 1e-6);
  std::size_t size() const { return nodes.size(); }
};

enum class SquareKind {
  G,      // |grad P_t f|^2
  Gt,     // modified gradient
  H,      // |D P_t f|^2
  Hq,     // Gamma_q(P_t f), f >= 0
  Gstar,  // Sum_z p_t(x, z) |grad P_t f|^2(z)
};

const char* to_string(SquareKind k);
SquareKind square_kind_from_string(const std::string& name);

struct SquareOptions {
  double q = 1.5;                // used by Hq
  double tail_tolerance = 1e-9;  // absolute, on the squared value
  /// 0 picks the smallest power-of-two horizon whose certified tail meets the tolerance.
  double t_max = 0.0;
  /// Finite horizon: integrate over (0, horizon] with no tail (G_{*,T} and friends).
  double horizon = 0.0;
  int panels_per_decade = 2;
  int nodes_per_panel = 16;
  /// Half-width of the lattice window on which P_t f is tabulated around the x-range.
  /// 0 selects max(256, width of the x-range).
  std::int64_t margin = 0;
  /// Half-width of the z-window for Gstar. 0 selects max(128, margin / 2).
  std::int64_t gstar_radius = 0;
};

struct SquareResult {
  SquareKind kind = SquareKind::G;
  Window window;
  std::vector<double> squared;  // Int g(t, x) dt
  std::vector<double> values;   // square roots
  double time_tail_bound = 0.0;
  /// Bound on the error from estimating sums beyond the tabulation window.
  double truncation_bound = 0.0;
  TimeQuadrature quadrature;
  double operator()(std::int64_t x) const { return values[static_cast<std::size_t>(x - window.lo)]; }
};

/// Certified bound on Int_T^infty g(t, x) dt for the given kind, uniform in x:
///   G, Gt:  2 p_{T/2}(0,0) ||P_{T/2} f||_2^2
///   H:      the G bound / K_s(1)
///   Hq:     (q - 1) times the G bound
///   Gstar:  p_T(0,0) ||P_T f||_2^2
double time_tail_bound(const SemigroupEvaluator& ev, const FractionalKernel& kernel, const LatticeFunction& f,
                       SquareKind kind, double q, double T);

/// Smallest T = 2^k >= 8 with time_tail_bound <= tol. Throws if none below 2^40.
double certified_horizon(const SemigroupEvaluator& ev, const FractionalKernel& kernel, const LatticeFunction& f,
                         SquareKind kind, double q, double tol);

/// Evaluates square functions of one kind over a range of x. Heat-kernel tables for the time
/// nodes are cached and reused across calls, which is what makes randomized suites cheap.
class SquareFunctionEngine {
 public:
  SquareFunctionEngine(const FractionalKernel& kernel, const SemigroupEvaluator& ev);

  const FractionalKernel& kernel() const { return kernel_; }
  const SemigroupEvaluator& evaluator() const { return ev_; }

  SquareResult evaluate(const LatticeFunction& f, SquareKind kind, const Window& xs,
                        const SquareOptions& opt = {}) const;

  /// Table of p_t(0, .) up to at least `max_distance`, memoized.
  std::shared_ptr<const HeatKernelTable> table(double t, std::int64_t max_distance) const;

 private:
  const FractionalKernel& kernel_;
  const SemigroupEvaluator& ev_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const HeatKernelTable>> cache_;
};

/// P_t f, L P_t f and |grad P_t f|^2 on `points`, from a table of p_t covering
/// max |points +- margin - supp f|. Sums beyond `points` expanded by `margin` use the mean
/// estimate; `error_bound` bounds what that estimate can miss at any single point.
struct OrbitSnapshot {
  Window points;
  std::vector<double> u;
  std::vector<double> lu;
  std::vector<double> grad_sq;
  double error_bound = 0.0;
};
OrbitSnapshot orbit_snapshot(const FractionalKernel& kernel, const HeatKernelTable& tab, const LatticeFunction& f,
                             const Window& points, std::int64_t margin);
/// Table size needed by orbit_snapshot.
std::int64_t orbit_snapshot_distance(const LatticeFunction& f, const Window& points, std::int64_t margin);

double square_G(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                std::int64_t x, const SquareOptions& opt = {});
double square_Gtilde(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                     std::int64_t x, const SquareOptions& opt = {});
double square_H(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                std::int64_t x, const SquareOptions& opt = {});
double square_Hq(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f, double q,
                 std::int64_t x, const SquareOptions& opt = {});
/// G_*(f)(x) for T = infinity (T <= 0), G_{*,T}(f)(x) otherwise.
double square_Gstar(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                    std::int64_t x, double T, const SquareOptions& opt = {});

/// Sum_x G(f)(x)^2 computed pointwise over |x - c| <= x_radius, with the remaining x summed
/// through |grad u|^2 = ||K|| u^2 - 2 u (K*u) + K*u^2 and exact kernel tails, plus
/// ||P_T f||_2^2 for t > T. Should equal ||f||_2^2.
struct IsometryResult {
  double total = 0.0;
  double pointwise_part = 0.0;
  double far_part = 0.0;
  double remainder = 0.0;
  double error_bound = 0.0;
};
IsometryResult isometry_sum(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                            double T, std::int64_t x_radius, std::int64_t z_radius, int panels_per_decade = 2);

/// Decay and divergence diagnostics for G(delta_1) at s: values for x = 2..N, a log-log slope fit
/// over [fit_lo, N], partial sums S_n = Sum_{x=2}^n G^q and doubling increments S_{2m} - S_m for
/// m = fit_lo, 2 fit_lo, ... < N.
struct CounterexampleData {
  double s = 0.25;
  double q = 4.0 / 3.0;
  std::vector<std::int64_t> x;
  std::vector<double> G;
  std::vector<double> partial_sums;
  std::vector<std::int64_t> doubling_points;
  std::vector<double> increments;
  double slope = 0.0;
  double error_bound = 0.0;
};
CounterexampleData counterexample_data(double s, double q, std::int64_t N, std::int64_t fit_lo = 32,
                                       double tail_tolerance = 1e-12);

/// Wraps counterexample_data into a report. For q <= 4/3 the check is that every doubling
/// increment stays at least half of the largest one and consecutive ratios exceed 0.85
/// (flat increments, the signature of a divergent sum); otherwise consecutive ratios must
/// stay below 0.6. The slope must lie in [-0.80, -0.70].
VerificationReport counterexample_report(double s, double q, std::int64_t N);

/// G~_U(f)(x)^2 = Int ( |grad~ P^U_t f|^2 + U (P^U_t f)^2 )(x) dt on the evaluator window.
double square_Gtilde_U(const SchrodingerEvaluator& sch, const LatticeFunction& f, std::int64_t x,
                       double tail_tolerance = 1e-9);

}  // namespace fraclat
