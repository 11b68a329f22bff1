#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fraclat/jumpsim.hpp"
#include "fraclat/kernel.hpp"
#include "fraclat/lattice.hpp"
#include "fraclat/report.hpp"
#include "fraclat/semigroup.hpp"
#include "fraclat/squarefn.hpp"

namespace fraclat {

/// e^{A} by scaling and squaring with the degree-13 Pade approximant.
Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& A);

/// e^{-t L_U} for L_U = L + U restricted to a window, with the kernel mass leaving the window
/// kept on the diagonal (the chain is killed when it jumps out). The result is a genuinely
/// sub-Markovian semigroup that sits below the full-lattice one.
class SchrodingerEvaluator {
 public:
  SchrodingerEvaluator(const FractionalKernel& kernel, LatticeFunction U, Window window,
                       std::span<const double> t_grid = {});

  const FractionalKernel& kernel() const { return kernel_; }
  const LatticeFunction& potential() const { return U_; }
  const Window& window() const { return window_; }
  const Eigen::MatrixXd& generator() const { return A_; }
  /// Smallest eigenvalue of the truncated generator (> 0).
  double lambda_min() const { return evals_(0); }

  /// e^{-t L_U} on the window, through Pade scaling and squaring; memoized per t.
  const Eigen::MatrixXd& semigroup_matrix(double t) const;
  /// Same operator through the eigendecomposition.
  Eigen::MatrixXd semigroup_matrix_spectral(double t) const;

  /// P^U_t f on the window (f must be supported inside it).
  LatticeFunction apply(double t, const LatticeFunction& f) const;
  /// Spectral route, used when many t are needed.
  Eigen::VectorXd apply_spectral(double t, const Eigen::VectorXd& f) const;
  Eigen::VectorXd to_vector(const LatticeFunction& f) const;

  /// 1 - Sum_j e^{-t L}(start, j) for the truncated generator without potential: the probability
  /// that the chain has left the window by time t.
  double escape_probability(double t, std::int64_t start) const;

 private:
  const FractionalKernel& kernel_;
  LatticeFunction U_;
  Window window_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
  mutable std::mutex mu_;
  mutable std::map<double, Eigen::MatrixXd> exp_cache_;
};

LatticeFunction apply_schrodinger_semigroup(const SchrodingerEvaluator& sch, double t, const LatticeFunction& f);

/// 0 <= P^U_t f <= P_t f on the window for all t in the grid (f >= 0), with P_t the full-lattice
/// semigroup. A rounding allowance of 1e-12 (1 + |P_t f|) is applied.
VerificationReport verify_domination(const SchrodingerEvaluator& sch, const SemigroupEvaluator& ev,
                                     const LatticeFunction& f, std::span<const double> t_grid);

/// E_start[exp(-Int_0^T U(X_r) dr) f(X_T)] over simulated paths; the exponent is an exact finite sum.
MonteCarloStat feynman_kac_estimate(const TransitionLaw& law, const LatticeFunction& U, const LatticeFunction& f,
                                    std::int64_t start, double T, std::size_t n_paths, std::uint64_t seed);

enum class SchrodingerSquareKind {
  GtU,  // |grad~ P^U_t f|^2 + U (P^U_t f)^2
  HqU,  // Gamma_{q,U}(P^U_t f), f >= 0
};

/// Square functions of the truncated Schrodinger semigroup over `xs` (inside the window).
/// The orbit vanishes off the window, so gradients there use f(y) = 0 with exact kernel tails.
/// The time tail uses ||P^U_t f||_inf <= e^{-lambda_min t} ||f||_2 and
///   |grad u|^2 + U u^2 <= (4 ||K|| + max U) ||u||_inf^2,
/// scaled by (q - 1) for HqU.
SquareResult schrodinger_square(const SchrodingerEvaluator& sch, const LatticeFunction& f, SchrodingerSquareKind kind,
                                const Window& xs, double q = 1.5, double tail_tolerance = 1e-9,
                                int panels_per_decade = 2);

double square_Hq_schrodinger(const SchrodingerEvaluator& sch, const LatticeFunction& f, double q, std::int64_t x,
                             double tail_tolerance = 1e-9);

}  // namespace fraclat
