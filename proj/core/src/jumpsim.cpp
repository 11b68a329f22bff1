#include "fraclat/jumpsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fraclat/quadrature.hpp"
#include "fraclat/squarefn.hpp"

namespace fraclat {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

JumpPath sample_path(const TransitionLaw& law, std::int64_t start, double T, std::uint64_t seed) {
  if (!(T > 0.0)) throw std::invalid_argument("sample_path: T must be > 0");
  JumpPath path;
  path.start = start;
  path.horizon = T;
  path.seed = seed;
  path.states.push_back(start);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> hold(law.kernel().l1_norm());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  std::int64_t x = start;
  for (;;) {
    t += hold(rng);
    if (t > T) break;
    const double v = 1.0 - unif(rng);  // (0, 1]
    const double w = unif(rng);
    // Saturate far from the origin; every finitely supported f sees these states as infinity.
    constexpr std::int64_t kFar = std::int64_t{1} << 62;
    x = std::clamp(x + law.displacement(v, w), -kFar, kFar);
    path.jump_times.push_back(t);
    path.states.push_back(x);
  }
  return path;
}

OrbitCache::OrbitCache(const FractionalKernel& kernel, const SemigroupEvaluator& ev, LatticeFunction f, double T,
                       std::int64_t radius, int cells, std::int64_t margin)
    : kernel_(kernel), ev_(ev), f_(std::move(f)), T_(T), radius_(radius), cells_(cells) {
  if (!(T > 0.0)) throw std::invalid_argument("OrbitCache: T must be > 0");
  if (radius < 1 || cells < 2 || margin < 1) throw std::invalid_argument("OrbitCache: bad grid parameters");
  h_ = T / cells;
  width_ = static_cast<std::size_t>(2 * radius + 1);
  const std::size_t nodes = node_count();
  u_.assign(nodes * width_, 0.0);
  lu_.assign(nodes * width_, 0.0);
  g_.assign(nodes * width_, 0.0);
  phi_.assign((static_cast<std::size_t>(cells) + 1) * width_, 0.0);
  const Window P(-radius, radius);
  const std::int64_t D = orbit_snapshot_distance(f_, P, margin);
  for (std::size_t j = 0; j < nodes; ++j) {
    const HeatKernelTable tab = ev.table(node_time(j), D);
    const OrbitSnapshot snap = orbit_snapshot(kernel, tab, f_, P, margin);
    std::copy(snap.u.begin(), snap.u.end(), u_.begin() + static_cast<std::ptrdiff_t>(j * width_));
    std::copy(snap.lu.begin(), snap.lu.end(), lu_.begin() + static_cast<std::ptrdiff_t>(j * width_));
    std::copy(snap.grad_sq.begin(), snap.grad_sq.end(), g_.begin() + static_cast<std::ptrdiff_t>(j * width_));
    snapshot_error_ = std::max(snapshot_error_, snap.error_bound);
  }
  // Simpson on each coarse cell.
  for (int k = 0; k < cells; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i < width_; ++i)
      phi_[(kk + 1) * width_ + i] = phi_[kk * width_ + i] +
                                    h_ / 6.0 * (g_[2 * kk * width_ + i] + 4.0 * g_[(2 * kk + 1) * width_ + i] +
                                                g_[(2 * kk + 2) * width_ + i]);
  }
}

double OrbitCache::far_u(double r, std::int64_t z) const {
  if (r == 0.0) return f_(z);
  const Window& w = f_.window();
  double acc = 0.0;
  for (std::int64_t y = w.lo; y <= w.hi; ++y)
    if (f_(y) != 0.0) acc += f_(y) * ev_.heat_kernel(r, z - y);
  return acc;
}

double OrbitCache::far_grad_sq(double r, std::int64_t z) const {
  const double uz = far_u(r, z);
  double ku = 0.0, ku2 = 0.0;
  for (std::int64_t y = -radius_; y <= radius_; ++y) {
    const double k = kernel_(z - y);
    const double uy = u(r, y);
    ku += k * uy;
    ku2 += k * uy * uy;
  }
  return std::max(0.0, kernel_.l1_norm() * uz * uz - 2.0 * uz * ku + ku2);
}

double OrbitCache::u(double r, std::int64_t z) const {
  if (r < 0.0 || r > T_ * (1.0 + 1e-12)) throw std::invalid_argument("OrbitCache::u: r outside [0, T]");
  if (z < -radius_ || z > radius_) return far_u(r, z);
  const double hh = 0.5 * h_;
  const std::size_t last = 2 * static_cast<std::size_t>(cells_) - 1;
  const std::size_t j = std::min(static_cast<std::size_t>(r / hh), last);
  const double tau = std::clamp((r - hh * static_cast<double>(j)) / hh, 0.0, 1.0);
  const double t2 = tau * tau, t3 = t2 * tau;
  const double y0 = u_[idx(j, z)], y1 = u_[idx(j + 1, z)];
  const double m0 = -lu_[idx(j, z)] * hh, m1 = -lu_[idx(j + 1, z)] * hh;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tau) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
}

double OrbitCache::grad_sq(double r, std::int64_t z) const {
  if (z < -radius_ || z > radius_) return far_grad_sq(r, z);
  const double hh = 0.5 * h_;
  const std::size_t last = 2 * static_cast<std::size_t>(cells_) - 1;
  const std::size_t j = std::min(static_cast<std::size_t>(r / hh), last);
  const double tau = std::clamp((r - hh * static_cast<double>(j)) / hh, 0.0, 1.0);
  return (1.0 - tau) * g_[idx(j, z)] + tau * g_[idx(j + 1, z)];
}

double OrbitCache::phi(double r, std::int64_t z) const {
  // Integral of the quadratic through the three samples of the cell, consistent with Simpson.
  const std::size_t k = std::min(static_cast<std::size_t>(r / h_), static_cast<std::size_t>(cells_) - 1);
  const double tau = std::clamp((r - h_ * static_cast<double>(k)) / h_, 0.0, 1.0);
  const double t2 = tau * tau, t3 = t2 * tau;
  const double i0 = 2.0 / 3.0 * t3 - 1.5 * t2 + tau;
  const double i1 = -4.0 / 3.0 * t3 + 2.0 * t2;
  const double i2 = 2.0 / 3.0 * t3 - 0.5 * t2;
  const std::size_t zi = static_cast<std::size_t>(z + radius_);
  return phi_[k * width_ + zi] +
         h_ * (i0 * g_[idx(2 * k, z)] + i1 * g_[idx(2 * k + 1, z)] + i2 * g_[idx(2 * k + 2, z)]);
}

double OrbitCache::grad_integral(double r0, double r1, std::int64_t z) const {
  if (!(r0 >= 0.0 && r1 >= r0 && r1 <= T_ * (1.0 + 1e-12)))
    throw std::invalid_argument("OrbitCache::grad_integral: need 0 <= r0 <= r1 <= T");
  r1 = std::min(r1, T_);
  if (z >= -radius_ && z <= radius_) return phi(r1, z) - phi(r0, z);
  const QuadratureRule& gl = gauss_legendre(8);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gl.nodes[i];
    acc += gl.weights[i] * far_grad_sq(r, z);
  }
  return 0.5 * (r1 - r0) * acc;
}

MartingaleFunctionals martingale_functionals(const JumpPath& path, const OrbitCache& cache) {
  const double T = path.horizon;
  if (std::fabs(T - cache.horizon()) > 1e-12 * T)
    throw std::invalid_argument("martingale_functionals: path horizon differs from the cache horizon");
  MartingaleFunctionals m;
  const std::size_t k = path.jumps();
  double t_prev = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double t_next = i < k ? path.jump_times[i] : T;
    m.angle_bracket += cache.grad_integral(T - t_next, T - t_prev, path.states[i]);
    if (i < k) {
      const double r = T - t_next;
      const double d = cache.u(r, path.states[i + 1]) - cache.u(r, path.states[i]);
      m.square_bracket += d * d;
    }
    t_prev = t_next;
  }
  m.M_T = cache.function()(path.end_state()) - cache.u(T, path.start);
  return m;
}

namespace {

struct Acc {
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  void add(double v) { s += v; s2 += v * v; ++n; }
  MonteCarloStat stat() const {
    MonteCarloStat r;
    r.n = n;
    if (n == 0) return r;
    r.mean = s / static_cast<double>(n);
    const double var = n > 1 ? std::max(0.0, (s2 - s * r.mean) / static_cast<double>(n - 1)) : 0.0;
    r.se = std::sqrt(var / static_cast<double>(n));
    return r;
  }
};

std::uint64_t path_seed(std::uint64_t base, std::uint64_t index) { return splitmix64(base ^ splitmix64(index)); }

}  // namespace

VerificationReport verify_compensator(const TransitionLaw& law, const SemigroupEvaluator& ev, const LatticeFunction& f,
                                      double T, std::size_t n_paths, std::uint64_t seed, std::int64_t start) {
  if (n_paths < 2) throw std::invalid_argument("verify_compensator: need at least 2 paths");
  const FractionalKernel& kernel = law.kernel();
  VerificationReport rep("jumpsim.compensator", 0.0);
  rep.parameters = {{"s", kernel.s()}, {"T", T}, {"paths", double(n_paths)}, {"start", double(start)},
                    {"seed", double(seed)}};
  const LatticeFunction f2(f.window(), [&] {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (double& a : v) a *= a;
    return v;
  }());
  const Window at(start, start);
  const double pf = ev.apply(T, f, at).values()[0];
  const double pf2 = ev.apply(T, f2, at).values()[0];
  const double V = pf2 - pf * pf;
  rep.observations["variance_exact"] = V;
  if (f.is_zero()) {
    rep.observations["M_mean"] = 0.0;
    return rep.finalize();
  }
  const OrbitCache cache(kernel, ev, f, T, std::max<std::int64_t>(256, std::abs(start) + 64));
  Acc M, M2, A, S, A3, S3, J;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const JumpPath p = sample_path(law, start, T, path_seed(seed, i));
    const MartingaleFunctionals m = martingale_functionals(p, cache);
    M.add(m.M_T);
    M2.add(m.M_T * m.M_T);
    A.add(m.angle_bracket);
    S.add(m.square_bracket);
    A3.add(std::pow(m.angle_bracket, 1.5));
    S3.add(std::pow(m.square_bracket, 1.5));
    J.add(static_cast<double>(p.jumps()));
  }
  auto put = [&](const std::string& name, const MonteCarloStat& st) {
    rep.observations[name + "_mean"] = st.mean;
    rep.observations[name + "_se"] = st.se;
  };
  const MonteCarloStat m = M.stat(), m2 = M2.stat(), a = A.stat(), sq = S.stat();
  put("M", m);
  put("M2", m2);
  put("angle", a);
  put("square", sq);
  put("jumps", J.stat());
  rep.record(std::max(0.0, std::fabs(m.mean) - 3.0 * m.se));
  for (const MonteCarloStat* st : {&m2, &a, &sq}) rep.record(std::max(0.0, std::fabs(st->mean - V) - 3.0 * st->se));
  const MonteCarloStat a3 = A3.stat(), s3 = S3.stat();
  if (s3.mean > 0.0) rep.observations["moment_ratio_q3"] = a3.mean / s3.mean;
  rep.observations["cache_error"] = cache.snapshot_error();
  return rep.finalize();
}

VerificationReport verify_Gstar_representation(const TransitionLaw& law, const SemigroupEvaluator& ev,
                                               const LatticeFunction& f, double T, std::int64_t x,
                                               const Window& window_z, std::size_t n_paths_per_start,
                                               std::uint64_t seed) {
  if (n_paths_per_start < 2) throw std::invalid_argument("verify_Gstar_representation: need at least 2 paths");
  const FractionalKernel& kernel = law.kernel();
  VerificationReport rep("jumpsim.gstar_representation", 0.0);
  rep.parameters = {{"s", kernel.s()},          {"T", T},
                    {"x", double(x)},           {"z_lo", double(window_z.lo)},
                    {"z_hi", double(window_z.hi)}, {"paths_per_start", double(n_paths_per_start)}};
  if (f.is_zero()) {
    rep.observations["estimate"] = 0.0;
    rep.observations["exact"] = 0.0;
    return rep.finalize();
  }
  const std::int64_t reach = std::max({std::abs(window_z.lo), std::abs(window_z.hi), std::abs(x)});
  const std::int64_t radius = std::max<std::int64_t>(256, reach + 64);
  const OrbitCache cache(kernel, ev, f, T, radius);

  double est = 0.0, var = 0.0;
  std::size_t hits = 0;
  std::uint64_t index = 0;
  for (std::int64_t z = window_z.lo; z <= window_z.hi; ++z) {
    Acc a;
    for (std::size_t i = 0; i < n_paths_per_start; ++i) {
      const JumpPath p = sample_path(law, z, T, path_seed(seed, index++));
      double v = 0.0;
      if (p.end_state() == x) {
        v = martingale_functionals(p, cache).angle_bracket;
        ++hits;
      }
      a.add(v);
    }
    const MonteCarloStat st = a.stat();
    est += st.mean;
    var += st.se * st.se;
  }
  const double se = std::sqrt(var);

  SquareOptions opt;
  opt.horizon = T;
  const double exact = std::pow(square_Gstar(kernel, ev, f, x, T, opt), 2);

  // Starts outside window_z: Int_0^T Sum_w p_r(x, w) g(r, w) (1 - m_{T-r}(w)) dr, m_t(w) = Sum_{z in W} p_t(z, w).
  const std::size_t nodes = cache.node_count();
  const std::int64_t D = 2 * radius + 2 * reach + 2;
  std::vector<HeatKernelTable> tabs;
  tabs.reserve(nodes);
  for (std::size_t j = 0; j < nodes; ++j) tabs.push_back(ev.table(cache.node_time(j), D));
  std::vector<double> integrand(nodes, 0.0);
  for (std::size_t j = 0; j < nodes; ++j) {
    const HeatKernelTable& pr = tabs[j];
    const HeatKernelTable& pm = tabs[nodes - 1 - j];
    double acc = 0.0;
    for (std::int64_t w = -radius; w <= radius; ++w) {
      const double pxw = pr(x - w);
      if (pxw == 0.0) continue;
      double m = 0.0;
      for (std::int64_t z = window_z.lo; z <= window_z.hi; ++z) m += pm(z - w);
      acc += pxw * cache.grad_sq_at_node(j, w) * std::max(0.0, 1.0 - m);
    }
    integrand[j] = acc;
  }
  double outside = 0.0;
  const double h = 2.0 * cache.node_time(1);
  for (std::size_t k = 0; 2 * k + 2 < nodes; ++k)
    outside += h / 6.0 * (integrand[2 * k] + 4.0 * integrand[2 * k + 1] + integrand[2 * k + 2]);
  // Targets beyond the cache radius.
  const double beyond = T * 2.0 * ev.mass_tail(T, radius - reach) * 4.0 * kernel.l1_norm() *
                        std::pow(lq_norm(f, INFINITY), 2);
  const double bound = outside + beyond;

  rep.observations["estimate"] = est;
  rep.observations["se"] = se;
  rep.observations["exact"] = exact;
  rep.observations["truncation_bound"] = bound;
  rep.observations["endpoint_hits"] = static_cast<double>(hits);
  rep.record(std::max(0.0, std::fabs(est - exact) - 3.0 * se - bound));
  if (hits < 100) {
    rep.inconclusive = true;
    rep.note = "too few paths ended at x";
  }
  return rep.finalize();
}

}  // namespace fraclat
