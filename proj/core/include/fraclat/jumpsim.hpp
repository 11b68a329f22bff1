#pragma once

#include <cstdint>
#include <vector>

#include "fraclat/kernel.hpp"
#include "fraclat/lattice.hpp"
#include "fraclat/report.hpp"
#include "fraclat/semigroup.hpp"

namespace fraclat {

/// One trajectory of the continuous-time chain generated by -L on [0, T].
struct JumpPath {
  std::int64_t start = 0;
  double horizon = 0.0;
  std::vector<double> jump_times;     // strictly increasing, in (0, T]
  std::vector<std::int64_t> states;   // states[0] = start, states[k] after the k-th jump
  std::uint64_t seed = 0;

  std::int64_t end_state() const { return states.back(); }
  std::size_t jumps() const { return jump_times.size(); }
};

/// SplitMix64 step, used to derive independent per-path seeds from (base seed, index).
std::uint64_t splitmix64(std::uint64_t x);

/// Exponential holding times with rate ||K_s||_1, jumps drawn from the transition law.
JumpPath sample_path(const TransitionLaw& law, std::int64_t start, double T, std::uint64_t seed);

/// u(r, z) = P_r f(z) and the gradient energy g(r, z) = |grad P_r f|^2(z) for r in [0, T],
/// tabulated on a uniform r-grid for |z| <= radius, with Phi(r, z) = Int_0^r g dr.
/// Off the grid u uses cubic Hermite interpolation with du/dr = -Lu, and Phi uses Hermite
/// interpolation with dPhi/dr = g. Points beyond the radius are evaluated directly from the
/// pointwise heat kernel (u) and from the decomposition
///   g = ||K|| u(z)^2 - 2 u(z) (K*u)(z) + (K*u^2)(z)
/// with the convolutions restricted to the tabulated points.
class OrbitCache {
 public:
  OrbitCache(const FractionalKernel& kernel, const SemigroupEvaluator& ev, LatticeFunction f, double T,
             std::int64_t radius = 256, int cells = 256, std::int64_t margin = 256);

  double horizon() const { return T_; }
  std::int64_t radius() const { return radius_; }
  const LatticeFunction& function() const { return f_; }
  double u(double r, std::int64_t z) const;
  double grad_sq(double r, std::int64_t z) const;
  /// Int_{r0}^{r1} g(r, z) dr, 0 <= r0 <= r1 <= T.
  double grad_integral(double r0, double r1, std::int64_t z) const;
  /// Tabulation nodes r_j = j h / 2, j = 0 .. node_count() - 1.
  std::size_t node_count() const { return 2 * static_cast<std::size_t>(cells_) + 1; }
  double node_time(std::size_t j) const { return 0.5 * h_ * static_cast<double>(j); }
  double grad_sq_at_node(std::size_t j, std::int64_t z) const { return g_[idx(j, z)]; }
  /// Largest per-point bound from the snapshot truncation estimates.
  double snapshot_error() const { return snapshot_error_; }

 private:
  double phi(double r, std::int64_t z) const;
  double far_u(double r, std::int64_t z) const;
  double far_grad_sq(double r, std::int64_t z) const;
  std::size_t idx(std::size_t j, std::int64_t z) const {
    return j * width_ + static_cast<std::size_t>(z + radius_);
  }

  const FractionalKernel& kernel_;
  const SemigroupEvaluator& ev_;
  LatticeFunction f_;
  double T_;
  std::int64_t radius_;
  int cells_;
  double h_;  // coarse cell width; values are stored at spacing h/2
  std::size_t width_;
  std::vector<double> u_, lu_, g_, phi_;
  double snapshot_error_ = 0.0;
};

struct MartingaleFunctionals {
  double M_T = 0.0;            // f(X_T) - P_T f(X_0)
  double angle_bracket = 0.0;  // <M>_T = Int_0^T g(T - t, X_t) dt
  double square_bracket = 0.0; // [M]_T = Sum over jumps of (P_{T-tau} f(X_tau) - P_{T-tau} f(X_tau-))^2
};

MartingaleFunctionals martingale_functionals(const JumpPath& path, const OrbitCache& cache);

struct MonteCarloStat {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Compensator check from `start`: E[M_T] = 0 and
/// E[M_T^2] = E<M>_T = E[M]_T = P_T(f^2)(start) - (P_T f(start))^2, each within 3 standard errors.
/// Also records the observed ratio E[<M>^{3/2}] / E[[M]^{3/2}].
VerificationReport verify_compensator(const TransitionLaw& law, const SemigroupEvaluator& ev, const LatticeFunction& f,
                                      double T, std::size_t n_paths, std::uint64_t seed, std::int64_t start = 0);

/// Monte Carlo estimate of Sum_{z in window_z} E_z[<M>_T 1{X_T = x}] against the deterministic
/// G_{*,T}(f)(x)^2. The allowance is 3 standard errors plus the mass contributed by starts outside
/// window_z, computed deterministically. Too few paths ending at x makes the report inconclusive.
VerificationReport verify_Gstar_representation(const TransitionLaw& law, const SemigroupEvaluator& ev,
                                               const LatticeFunction& f, double T, std::int64_t x,
                                               const Window& window_z, std::size_t n_paths_per_start,
                                               std::uint64_t seed);

}  // namespace fraclat
