#include "fraclat/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fraclat/gradients.hpp"

namespace fraclat {

Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("expm_pade13: matrix must be square");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const Eigen::MatrixXd X = A / std::ldexp(1.0, squarings);
  const auto n = X.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd X2 = X * X, X4 = X2 * X2, X6 = X4 * X2;
  const Eigen::MatrixXd Uin = X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I;
  const Eigen::MatrixXd Up = X * Uin;
  const Eigen::MatrixXd Vp = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I;
  Eigen::MatrixXd R = (Vp - Up).partialPivLu().solve(Vp + Up);
  for (int i = 0; i < squarings; ++i) R = R * R;
  return R;
}

SchrodingerEvaluator::SchrodingerEvaluator(const FractionalKernel& kernel, LatticeFunction U, Window window,
                                           std::span<const double> t_grid)
    : kernel_(kernel), U_(std::move(U)), window_(window) {
  if (!U_.nonnegative()) throw std::invalid_argument("SchrodingerEvaluator: potential must be nonnegative");
  const auto n = static_cast<Eigen::Index>(window.width());
  A_.resize(n, n);
  const double norm_k = kernel.l1_norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t x = window.lo + i;
    A_(i, i) = norm_k + U_(x);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) A_(i, j) = -kernel(static_cast<std::int64_t>(i - j));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_);
  if (es.info() != Eigen::Success) throw std::runtime_error("SchrodingerEvaluator: eigendecomposition failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  for (double t : t_grid) semigroup_matrix(t);
}

const Eigen::MatrixXd& SchrodingerEvaluator::semigroup_matrix(double t) const {
  if (t < 0.0) throw std::invalid_argument("semigroup_matrix: t must be >= 0");
  std::lock_guard<std::mutex> lock(mu_);
  auto it = exp_cache_.find(t);
  if (it != exp_cache_.end()) return it->second;
  return exp_cache_.emplace(t, expm_pade13(-t * A_)).first->second;
}

Eigen::MatrixXd SchrodingerEvaluator::semigroup_matrix_spectral(double t) const {
  const Eigen::VectorXd e = (-t * evals_).array().exp();
  return evecs_ * e.asDiagonal() * evecs_.transpose();
}

Eigen::VectorXd SchrodingerEvaluator::to_vector(const LatticeFunction& f) const {
  const Window& w = f.window();
  for (std::int64_t y = w.lo; y <= w.hi; ++y)
    if (!window_.contains(y) && f(y) != 0.0)
      throw std::invalid_argument("SchrodingerEvaluator: f must be supported inside the window");
  Eigen::VectorXd v(static_cast<Eigen::Index>(window_.width()));
  for (std::int64_t x = window_.lo; x <= window_.hi; ++x) v(x - window_.lo) = f(x);
  return v;
}

LatticeFunction SchrodingerEvaluator::apply(double t, const LatticeFunction& f) const {
  if (t < 0.0) throw std::invalid_argument("apply_schrodinger_semigroup: t must be >= 0");
  const Eigen::VectorXd v = to_vector(f);
  if (t == 0.0) return LatticeFunction(window_, std::vector<double>(v.data(), v.data() + v.size()));
  const Eigen::VectorXd r = semigroup_matrix(t) * v;
  return LatticeFunction(window_, std::vector<double>(r.data(), r.data() + r.size()));
}

Eigen::VectorXd SchrodingerEvaluator::apply_spectral(double t, const Eigen::VectorXd& f) const {
  const Eigen::VectorXd c = evecs_.transpose() * f;
  return evecs_ * ((-t * evals_).array().exp() * c.array()).matrix();
}

double SchrodingerEvaluator::escape_probability(double t, std::int64_t start) const {
  if (!window_.contains(start)) return 1.0;
  Eigen::MatrixXd A0 = A_;
  for (Eigen::Index i = 0; i < A0.rows(); ++i) A0(i, i) -= U_(window_.lo + i);
  const Eigen::MatrixXd E = expm_pade13(-t * A0);
  return std::max(0.0, 1.0 - E.row(start - window_.lo).sum());
}

LatticeFunction apply_schrodinger_semigroup(const SchrodingerEvaluator& sch, double t, const LatticeFunction& f) {
  return sch.apply(t, f);
}

VerificationReport verify_domination(const SchrodingerEvaluator& sch, const SemigroupEvaluator& ev,
                                     const LatticeFunction& f, std::span<const double> t_grid) {
  if (!f.nonnegative()) throw std::invalid_argument("verify_domination: f must be nonnegative");
  VerificationReport rep("schrodinger.domination", 0.0);
  rep.parameters = {{"s", sch.kernel().s()}, {"lo", double(sch.window().lo)}, {"hi", double(sch.window().hi)}};
  std::size_t violations = 0;
  double min_gap = INFINITY;
  for (double t : t_grid) {
    const LatticeFunction pu = sch.apply(t, f);
    const LatticeFunction p = ev.apply(t, f, sch.window());
    for (std::int64_t x = sch.window().lo; x <= sch.window().hi; ++x) {
      const double a = pu(x), b = p(x);
      const double allow = 1e-12 * (1.0 + std::fabs(b));
      const double v = std::max(-a - allow, a - b - allow);
      if (v > 0.0) ++violations;
      rep.record(std::max(0.0, v));
      min_gap = std::min(min_gap, b - a);
    }
  }
  rep.observations["violations"] = static_cast<double>(violations);
  rep.observations["min_gap"] = min_gap;
  return rep.finalize();
}

MonteCarloStat feynman_kac_estimate(const TransitionLaw& law, const LatticeFunction& U, const LatticeFunction& f,
                                    std::int64_t start, double T, std::size_t n_paths, std::uint64_t seed) {
  if (!U.nonnegative()) throw std::invalid_argument("feynman_kac_estimate: potential must be nonnegative");
  if (n_paths < 2) throw std::invalid_argument("feynman_kac_estimate: need at least 2 paths");
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const JumpPath p = sample_path(law, start, T, splitmix64(seed ^ splitmix64(i)));
    double expo = 0.0, t_prev = 0.0;
    for (std::size_t k = 0; k <= p.jumps(); ++k) {
      const double t_next = k < p.jumps() ? p.jump_times[k] : T;
      expo += U(p.states[k]) * (t_next - t_prev);
      t_prev = t_next;
    }
    const double v = std::exp(-expo) * f(p.end_state());
    s += v;
    s2 += v * v;
  }
  MonteCarloStat st;
  st.n = n_paths;
  st.mean = s / static_cast<double>(n_paths);
  const double var = std::max(0.0, (s2 - s * st.mean) / static_cast<double>(n_paths - 1));
  st.se = std::sqrt(var / static_cast<double>(n_paths));
  return st;
}

SquareResult schrodinger_square(const SchrodingerEvaluator& sch, const LatticeFunction& f, SchrodingerSquareKind kind,
                                const Window& xs, double q, double tail_tolerance, int panels_per_decade) {
  const Window& W = sch.window();
  if (!W.contains(xs.lo) || !W.contains(xs.hi))
    throw std::invalid_argument("schrodinger_square: evaluation points must lie in the window");
  if (kind == SchrodingerSquareKind::HqU) {
    if (!(q > 1.0 && q <= 2.0)) throw std::invalid_argument("schrodinger_square: q must lie in (1, 2]");
    if (!f.nonnegative()) throw std::invalid_argument("schrodinger_square: f must be nonnegative");
  }
  const FractionalKernel& kernel = sch.kernel();
  const LatticeFunction& U = sch.potential();
  SquareResult res;
  res.kind = SquareKind::Gt;
  res.window = xs;
  res.squared.assign(xs.width(), 0.0);
  res.values.assign(xs.width(), 0.0);
  const Eigen::VectorXd f0 = sch.to_vector(f);
  if (f0.isZero(0.0)) return res;

  double umax = 0.0;
  for (double v : U.values()) umax = std::max(umax, v);
  const double lam = sch.lambda_min();
  const double scale = (kind == SchrodingerSquareKind::HqU ? (q - 1.0) : 1.0) *
                       (4.0 * kernel.l1_norm() + umax) * f0.squaredNorm() / (2.0 * lam);
  // Smallest T with scale e^{-2 lam T} <= tol.
  const double T = std::max(1.0, std::log(std::max(scale / tail_tolerance, 1.0)) / (2.0 * lam));
  res.time_tail_bound = scale * std::exp(-2.0 * lam * T);
  res.quadrature = TimeQuadrature::log_panels(T, panels_per_decade, 16);
  res.quadrature.tail_bound = res.time_tail_bound;

  const Eigen::VectorXd c = sch.to_vector(f);
  for (std::size_t i = 0; i < res.quadrature.size(); ++i) {
    const double t = res.quadrature.nodes[i];
    const double w = res.quadrature.weights[i];
    Eigen::VectorXd v = sch.apply_spectral(t, c);
    if (kind == SchrodingerSquareKind::HqU) v = v.cwiseMax(0.0);
    const LatticeFunction u(W, std::vector<double>(v.data(), v.data() + v.size()));
    for (std::int64_t x = xs.lo; x <= xs.hi; ++x) {
      double g = 0.0;
      if (kind == SchrodingerSquareKind::GtU) {
        const double gm = grad_modified(kernel, u, x);
        g = gm * gm + U(x) * u(x) * u(x);
      } else {
        g = gamma_q_schrodinger(kernel, U, u, q, x);
      }
      res.squared[static_cast<std::size_t>(x - xs.lo)] += w * g;
    }
  }
  for (std::size_t i = 0; i < res.squared.size(); ++i) {
    res.squared[i] = std::max(res.squared[i], 0.0);
    res.values[i] = std::sqrt(res.squared[i]);
  }
  return res;
}

double square_Gtilde_U(const SchrodingerEvaluator& sch, const LatticeFunction& f, std::int64_t x,
                       double tail_tolerance) {
  return schrodinger_square(sch, f, SchrodingerSquareKind::GtU, Window(x, x), 1.5, tail_tolerance).values[0];
}

double square_Hq_schrodinger(const SchrodingerEvaluator& sch, const LatticeFunction& f, double q, std::int64_t x,
                             double tail_tolerance) {
  return schrodinger_square(sch, f, SchrodingerSquareKind::HqU, Window(x, x), q, tail_tolerance).values[0];
}

}  // namespace fraclat
