#include "fraclat/squarefn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fraclat/quadrature.hpp"

namespace fraclat {

TimeQuadrature TimeQuadrature::log_panels(double t_max, int panels_per_decade, int nodes_per_panel, double t_min) {
  if (!(t_max > 0.0)) throw std::invalid_argument("TimeQuadrature: t_max must be > 0");
  if (panels_per_decade < 1 || nodes_per_panel < 2) throw std::invalid_argument("TimeQuadrature: bad panel counts");
  TimeQuadrature q;
  q.t_min = std::min(t_min, t_max);
  q.t_max = t_max;
  q.panels_per_decade = panels_per_decade;
  q.nodes_per_panel = nodes_per_panel;
  const QuadratureRule& gl = gauss_legendre(static_cast<std::size_t>(nodes_per_panel));
  q.breaks = {0.0, q.t_min};
  for (std::size_t i = 0; i < gl.size(); ++i) {
    q.nodes.push_back(0.5 * q.t_min * (gl.nodes[i] + 1.0));
    q.weights.push_back(0.5 * q.t_min * gl.weights[i]);
  }
  if (t_max > q.t_min) {
    const double decades = std::log10(t_max / q.t_min);
    const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade - 1e-9)));
    const double la = std::log(q.t_min), lb = std::log(t_max);
    for (int p = 0; p < panels; ++p) {
      const double a = la + (lb - la) * p / panels;
      const double b = la + (lb - la) * (p + 1) / panels;
      q.breaks.push_back(std::exp(b));
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double l = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
        const double t = std::exp(l);
        q.nodes.push_back(t);
        q.weights.push_back(0.5 * (b - a) * gl.weights[i] * t);
      }
    }
    q.breaks.back() = t_max;
  }
  return q;
}

const char* to_string(SquareKind k) {
  switch (k) {
    case SquareKind::G: return "G";
    case SquareKind::Gt: return "Gt";
    case SquareKind::H: return "H";
    case SquareKind::Hq: return "Hq";
    case SquareKind::Gstar: return "Gstar";
  }
  return "?";
}

SquareKind square_kind_from_string(const std::string& name) {
  if (name == "G") return SquareKind::G;
  if (name == "Gt") return SquareKind::Gt;
  if (name == "H") return SquareKind::H;
  if (name == "Hq") return SquareKind::Hq;
  if (name == "Gstar") return SquareKind::Gstar;
  throw std::invalid_argument("unknown square function kind: " + name);
}

namespace {

// ||P_r f||_2^2 = Sum_{y,y'} f(y) f(y') p_{2r}(y - y').
double semigroup_l2_sq(const SemigroupEvaluator& ev, const LatticeFunction& f, double r) {
  const Window& w = f.window();
  const HeatKernelTable tab = ev.table(2.0 * r, static_cast<std::int64_t>(w.width()) - 1);
  double acc = 0.0;
  for (std::int64_t a = w.lo; a <= w.hi; ++a) {
    const double fa = f(a);
    if (fa == 0.0) continue;
    for (std::int64_t b = w.lo; b <= w.hi; ++b) acc += fa * f(b) * tab(a - b);
  }
  return std::max(acc, 0.0);
}

double two_sided_tail(const SemigroupEvaluator& ev, double t, std::int64_t d_from) {
  // Mass of p_t(0, .) at |d| >= d_from.
  if (d_from <= 0) return 1.0;
  return 2.0 * ev.mass_tail(t, d_from - 1);
}

struct Workspace {
  Window Z;
  std::vector<double> u;   // P_t f on Z
  std::vector<double> lu;  // L P_t f on the gradient points
  Window P;                // gradient points
  double m_out = 0.0;      // sup |P_t f| off Z
};

}  // namespace

double time_tail_bound(const SemigroupEvaluator& ev, const FractionalKernel& kernel, const LatticeFunction& f,
                       SquareKind kind, double q, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("time_tail_bound: T must be > 0");
  if (kind == SquareKind::Gstar) return ev.heat_kernel(T, 0) * semigroup_l2_sq(ev, f, T);
  const double g = 2.0 * ev.heat_kernel(0.5 * T, 0) * semigroup_l2_sq(ev, f, 0.5 * T);
  switch (kind) {
    case SquareKind::H: return g / kernel(1);
    case SquareKind::Hq: return (q - 1.0) * g;
    default: return g;
  }
}

double certified_horizon(const SemigroupEvaluator& ev, const FractionalKernel& kernel, const LatticeFunction& f,
                         SquareKind kind, double q, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("certified_horizon: tolerance must be > 0");
  for (double T = 8.0; T <= std::ldexp(1.0, 40); T *= 2.0)
    if (time_tail_bound(ev, kernel, f, kind, q, T) <= tol) return T;
  throw std::runtime_error("certified_horizon: time tail cannot meet the tolerance");
}

SquareFunctionEngine::SquareFunctionEngine(const FractionalKernel& kernel, const SemigroupEvaluator& ev)
    : kernel_(kernel), ev_(ev) {
  if (ev.classical() || std::fabs(ev.s() - kernel.s()) > 0.0)
    throw std::invalid_argument("SquareFunctionEngine: kernel and evaluator must share the same s");
}

std::shared_ptr<const HeatKernelTable> SquareFunctionEngine::table(double t, std::int64_t max_distance) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(t);
    if (it != cache_.end() && it->second->max_distance() >= max_distance) return it->second;
  }
  auto tab = std::make_shared<const HeatKernelTable>(ev_.table(t, max_distance));
  std::lock_guard<std::mutex> lock(mu_);
  auto& slot = cache_[t];
  if (!slot || slot->max_distance() < tab->max_distance()) slot = tab;
  return slot;
}

SquareResult SquareFunctionEngine::evaluate(const LatticeFunction& f, SquareKind kind, const Window& xs,
                                            const SquareOptions& opt) const {
  const double q = opt.q;
  if (kind == SquareKind::Hq) {
    if (!(q > 1.0 && q <= 2.0)) throw std::invalid_argument("square function Hq: q must lie in (1, 2]");
    if (!f.nonnegative()) throw std::invalid_argument("square function Hq: f must be nonnegative");
  }
  SquareResult res;
  res.kind = kind;
  res.window = xs;
  res.squared.assign(xs.width(), 0.0);
  res.values.assign(xs.width(), 0.0);

  double T = 0.0;
  if (opt.horizon > 0.0) {
    T = opt.horizon;
  } else if (!f.is_zero()) {
    T = opt.t_max > 0.0 ? opt.t_max : certified_horizon(ev_, kernel_, f, kind, q, opt.tail_tolerance);
    res.time_tail_bound = time_tail_bound(ev_, kernel_, f, kind, q, T);
    if (res.time_tail_bound > opt.tail_tolerance)
      throw std::runtime_error("square function: time tail bound exceeds the tolerance at the requested t_max");
  }
  if (f.is_zero()) return res;
  res.quadrature = TimeQuadrature::log_panels(T, opt.panels_per_decade, opt.nodes_per_panel);
  res.quadrature.tail_bound = res.time_tail_bound;

  const Window& wf = f.window();
  const std::int64_t R = opt.margin > 0 ? opt.margin : std::max<std::int64_t>(256, static_cast<std::int64_t>(xs.width()));
  const std::int64_t Rs = opt.gstar_radius > 0 ? opt.gstar_radius : std::max<std::int64_t>(128, R / 2);
  Window P = xs;
  if (kind == SquareKind::Gstar) P = xs.expanded(Rs);
  if (kind == SquareKind::H) P = Window(xs.lo, xs.hi + 1);
  const Window Z = Window::hull(P.expanded(R), wf.expanded(R));
  const std::int64_t d_out = std::min(wf.lo - Z.lo, Z.hi - wf.hi) + 1;  // distance from f to points off Z
  std::int64_t D = std::max({Z.hi - wf.lo, wf.hi - Z.lo, d_out});
  if (kind == SquareKind::Gstar) D = std::max(D, Rs + static_cast<std::int64_t>(xs.width()));

  const double norm_k = kernel_.l1_norm();
  const double f_l1 = lq_norm(f, 1.0);
  const auto zw = static_cast<std::int64_t>(Z.width());
  std::vector<double> kv(static_cast<std::size_t>(zw) + 1);
  for (std::int64_t m = 0; m <= zw; ++m) kv[static_cast<std::size_t>(m)] = kernel_(m);
  auto K = [&](std::int64_t m) { return kv[static_cast<std::size_t>(m < 0 ? -m : m)]; };
  std::vector<double> t_out(P.width());
  for (std::int64_t x = P.lo; x <= P.hi; ++x) t_out[static_cast<std::size_t>(x - P.lo)] = kernel_.mass_outside(x, Z);

  std::vector<double> u(Z.width()), lu(P.width()), g(P.width()), gerr(P.width());
  const auto fv = f.values();
  const TimeQuadrature& tq = res.quadrature;
  double trunc = 0.0;

  for (std::size_t i = 0; i < tq.size(); ++i) {
    const double t = tq.nodes[i];
    const double w = tq.weights[i];
    const auto tab = table(t, D);
    for (std::int64_t z = Z.lo; z <= Z.hi; ++z) {
      double acc = 0.0;
      for (std::int64_t y = wf.lo; y <= wf.hi; ++y) acc += (*tab)(z - y) * fv[static_cast<std::size_t>(y - wf.lo)];
      u[static_cast<std::size_t>(z - Z.lo)] = acc;
    }
    auto U = [&](std::int64_t z) { return u[static_cast<std::size_t>(z - Z.lo)]; };
    const double m_out = f_l1 * std::fabs((*tab)(d_out));
    double err_t = 0.0;

    if (kind == SquareKind::H) {
      for (std::int64_t x = xs.lo; x <= xs.hi; ++x) {
        const double d = U(x + 1) - U(x);
        res.squared[static_cast<std::size_t>(x - xs.lo)] += w * d * d;
      }
      continue;
    }

    for (std::int64_t x = P.lo; x <= P.hi; ++x) {
      double acc = 0.0;
      for (std::int64_t y = wf.lo; y <= wf.hi; ++y) acc += tab->generator(x - y) * fv[static_cast<std::size_t>(y - wf.lo)];
      lu[static_cast<std::size_t>(x - P.lo)] = acc;
    }

    for (std::int64_t x = P.lo; x <= P.hi; ++x) {
      const std::size_t ix = static_cast<std::size_t>(x - P.lo);
      const double ux = U(x);
      const double tout = t_out[ix];
      double in = 0.0, s_in = 0.0;
      double val = 0.0, err = 0.0;
      if (kind == SquareKind::Hq) {
        const double a = std::max(ux, 0.0);
        if (a == 0.0 && q < 2.0) {
          g[ix] = 0.0;
          gerr[ix] = 0.0;
          continue;
        }
        const double a_low = std::pow(a, 2.0 - q), a_q = std::pow(a, q);
        for (std::int64_t y = Z.lo; y <= Z.hi; ++y) {
          if (y == x) continue;
          const double k = K(y - x);
          const double b = std::max(U(y), 0.0);
          in += k * (q * a * (a - b) - a_low * (a_q - std::pow(b, q)));
          s_in += k * U(y);
        }
        const double s1 = std::max(0.0, norm_k * ux - lu[ix] - s_in);
        double sq_est = 0.0;
        if (tout > 0.0) sq_est = tout * std::pow(s1 / tout, q);
        // Off-window part: q a^2 T - q a S1 - a^2 T + a^{2-q} Sum K u^q.
        val = in + q * a * a * tout - q * a * s1 - a * a * tout + a_low * sq_est;
        err = a_low * std::pow(m_out, q - 1.0) * s1;
      } else {
        const bool modified = kind == SquareKind::Gt;
        const double ax = std::fabs(ux);
        for (std::int64_t y = Z.lo; y <= Z.hi; ++y) {
          if (y == x) continue;
          const double k = K(y - x);
          const double uy = U(y);
          s_in += k * uy;
          if (modified && !(ax > std::fabs(uy))) continue;
          const double d = ux - uy;
          in += k * d * d;
        }
        const double s1 = norm_k * ux - lu[ix] - s_in;
        double est = 0.0;
        if (tout > 0.0) est = tout * ux * ux - 2.0 * ux * s1 + s1 * s1 / tout;
        est = std::max(est, 0.0);
        val = in;
        if (!modified || ax > m_out) {
          val += est;
          err = tout * m_out * m_out;
        } else {
          if (tout > 0.0 && ax > std::fabs(s1 / tout)) val += est;
          err = tout * (ax + m_out) * (ax + m_out);
        }
      }
      g[ix] = val;
      gerr[ix] = err;
    }

    if (kind == SquareKind::Gstar) {
      const double p_out = two_sided_tail(ev_, t, Rs + 1);
      const double umax = std::min(lq_norm(f, INFINITY), f_l1 * (*tab)(0));
      for (std::int64_t x = xs.lo; x <= xs.hi; ++x) {
        double acc = 0.0, e = 0.0;
        for (std::int64_t z = x - Rs; z <= x + Rs; ++z) {
          const std::size_t iz = static_cast<std::size_t>(z - P.lo);
          const double p = (*tab)(x - z);
          acc += p * g[iz];
          e += std::fabs(p) * gerr[iz];
        }
        e += p_out * 4.0 * norm_k * umax * umax;
        res.squared[static_cast<std::size_t>(x - xs.lo)] += w * acc;
        err_t = std::max(err_t, e);
      }
    } else {
      for (std::int64_t x = xs.lo; x <= xs.hi; ++x) {
        const std::size_t ix = static_cast<std::size_t>(x - P.lo);
        res.squared[static_cast<std::size_t>(x - xs.lo)] += w * g[ix];
        err_t = std::max(err_t, gerr[ix]);
      }
    }
    trunc += w * err_t;
  }
  for (std::size_t i = 0; i < res.squared.size(); ++i) {
    res.squared[i] = std::max(res.squared[i], 0.0);
    res.values[i] = std::sqrt(res.squared[i]);
  }
  res.truncation_bound = trunc;
  return res;
}

std::int64_t orbit_snapshot_distance(const LatticeFunction& f, const Window& points, std::int64_t margin) {
  const Window& wf = f.window();
  const Window Z = Window::hull(points.expanded(margin), wf.expanded(margin));
  return std::max(Z.hi - wf.lo, wf.hi - Z.lo) + 1;
}

OrbitSnapshot orbit_snapshot(const FractionalKernel& kernel, const HeatKernelTable& tab, const LatticeFunction& f,
                             const Window& points, std::int64_t margin) {
  if (margin < 1) throw std::invalid_argument("orbit_snapshot: margin must be >= 1");
  const Window& wf = f.window();
  const Window Z = Window::hull(points.expanded(margin), wf.expanded(margin));
  if (tab.max_distance() < orbit_snapshot_distance(f, points, margin))
    throw std::invalid_argument("orbit_snapshot: heat kernel table too short");
  const std::int64_t d_out = std::min(wf.lo - Z.lo, Z.hi - wf.hi) + 1;
  const double norm_k = kernel.l1_norm();
  const double m_out = lq_norm(f, 1.0) * std::fabs(tab(d_out));
  const auto fv = f.values();
  std::vector<double> u(Z.width());
  for (std::int64_t z = Z.lo; z <= Z.hi; ++z) {
    double acc = 0.0;
    for (std::int64_t y = wf.lo; y <= wf.hi; ++y) acc += tab(z - y) * fv[static_cast<std::size_t>(y - wf.lo)];
    u[static_cast<std::size_t>(z - Z.lo)] = acc;
  }
  const auto zw = static_cast<std::int64_t>(Z.width());
  std::vector<double> kv(static_cast<std::size_t>(zw) + 1);
  for (std::int64_t m = 0; m <= zw; ++m) kv[static_cast<std::size_t>(m)] = kernel(m);

  OrbitSnapshot snap;
  snap.points = points;
  snap.u.resize(points.width());
  snap.lu.resize(points.width());
  snap.grad_sq.resize(points.width());
  for (std::int64_t x = points.lo; x <= points.hi; ++x) {
    const std::size_t ix = static_cast<std::size_t>(x - points.lo);
    double lu = 0.0;
    for (std::int64_t y = wf.lo; y <= wf.hi; ++y) lu += tab.generator(x - y) * fv[static_cast<std::size_t>(y - wf.lo)];
    const double ux = u[static_cast<std::size_t>(x - Z.lo)];
    double in = 0.0, s_in = 0.0;
    for (std::int64_t y = Z.lo; y <= Z.hi; ++y) {
      if (y == x) continue;
      const double k = kv[static_cast<std::size_t>(y > x ? y - x : x - y)];
      const double uy = u[static_cast<std::size_t>(y - Z.lo)];
      const double d = ux - uy;
      in += k * d * d;
      s_in += k * uy;
    }
    const double tout = kernel.mass_outside(x, Z);
    const double s1 = norm_k * ux - lu - s_in;
    if (tout > 0.0) in += std::max(0.0, tout * ux * ux - 2.0 * ux * s1 + s1 * s1 / tout);
    snap.u[ix] = ux;
    snap.lu[ix] = lu;
    snap.grad_sq[ix] = in;
    snap.error_bound = std::max(snap.error_bound, tout * m_out * m_out);
  }
  return snap;
}

namespace {

double single(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f, SquareKind kind,
              std::int64_t x, const SquareOptions& opt) {
  SquareFunctionEngine eng(kernel, ev);
  return eng.evaluate(f, kind, Window(x, x), opt).values[0];
}

}  // namespace

double square_G(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                std::int64_t x, const SquareOptions& opt) {
  return single(kernel, ev, f, SquareKind::G, x, opt);
}

double square_Gtilde(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                     std::int64_t x, const SquareOptions& opt) {
  return single(kernel, ev, f, SquareKind::Gt, x, opt);
}

double square_H(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                std::int64_t x, const SquareOptions& opt) {
  return single(kernel, ev, f, SquareKind::H, x, opt);
}

double square_Hq(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f, double q,
                 std::int64_t x, const SquareOptions& opt) {
  SquareOptions o = opt;
  o.q = q;
  return single(kernel, ev, f, SquareKind::Hq, x, o);
}

double square_Gstar(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                    std::int64_t x, double T, const SquareOptions& opt) {
  SquareOptions o = opt;
  if (T > 0.0 && std::isfinite(T)) o.horizon = T;
  return single(kernel, ev, f, SquareKind::Gstar, x, o);
}

IsometryResult isometry_sum(const FractionalKernel& kernel, const SemigroupEvaluator& ev, const LatticeFunction& f,
                            double T, std::int64_t x_radius, std::int64_t z_radius, int panels_per_decade) {
  if (x_radius < 1 || z_radius <= x_radius) throw std::invalid_argument("isometry_sum: need 1 <= x_radius < z_radius");
  IsometryResult out;
  if (f.is_zero()) return out;
  const Window& wf = f.window();
  const Window X = Window::hull(Window(-x_radius, x_radius), wf);
  const Window Z = Window::hull(Window(-z_radius, z_radius), wf.expanded(x_radius));
  const std::int64_t R = std::min(wf.lo - Z.lo, Z.hi - wf.hi);  // distance from f to the edge of Z
  const std::int64_t D = std::max(Z.hi - wf.lo, wf.hi - Z.lo) + 1;
  const double norm_k = kernel.l1_norm();
  const double f_l1 = lq_norm(f, 1.0);
  const TimeQuadrature tq = TimeQuadrature::log_panels(T, panels_per_decade, 16);
  const auto fv = f.values();

  std::vector<double> kout_x(Z.width()), tout_z(X.width());
  for (std::int64_t y = Z.lo; y <= Z.hi; ++y) kout_x[static_cast<std::size_t>(y - Z.lo)] = kernel.mass_outside(y, X);
  for (std::int64_t x = X.lo; x <= X.hi; ++x) tout_z[static_cast<std::size_t>(x - X.lo)] = kernel.mass_outside(x, Z);
  std::vector<double> u(Z.width()), lu(Z.width());

  for (std::size_t i = 0; i < tq.size(); ++i) {
    const double t = tq.nodes[i];
    const double w = tq.weights[i];
    const HeatKernelTable tab = ev.table(t, D);
    for (std::int64_t z = Z.lo; z <= Z.hi; ++z) {
      double a = 0.0, b = 0.0;
      for (std::int64_t y = wf.lo; y <= wf.hi; ++y) {
        const double fy = fv[static_cast<std::size_t>(y - wf.lo)];
        a += tab(z - y) * fy;
        b += tab.generator(z - y) * fy;
      }
      u[static_cast<std::size_t>(z - Z.lo)] = a;
      lu[static_cast<std::size_t>(z - Z.lo)] = b;
    }
    auto U = [&](std::int64_t z) { return u[static_cast<std::size_t>(z - Z.lo)]; };
    const double m_out = f_l1 * std::fabs(tab(R + 1));

    // Pointwise |grad u|^2 on X, off-Z part by its mean estimate.
    double pw = 0.0, err = 0.0;
    for (std::int64_t x = X.lo; x <= X.hi; ++x) {
      const double ux = U(x);
      double in = 0.0, s_in = 0.0;
      for (std::int64_t y = Z.lo; y <= Z.hi; ++y) {
        if (y == x) continue;
        const double k = kernel(y - x);
        const double d = ux - U(y);
        in += k * d * d;
        s_in += k * U(y);
      }
      const double tout = tout_z[static_cast<std::size_t>(x - X.lo)];
      const double s1 = norm_k * ux - lu[static_cast<std::size_t>(x - Z.lo)] - s_in;
      if (tout > 0.0) in += std::max(0.0, tout * ux * ux - 2.0 * ux * s1 + s1 * s1 / tout);
      pw += in;
      err += tout * m_out * m_out;
    }

    // Sum over x off X of ||K|| u^2 - 2 u (K*u) + K*u^2.
    double far = 0.0;
    for (std::int64_t y = Z.lo; y <= Z.hi; ++y) {
      const double uy = U(y);
      far += uy * uy * kout_x[static_cast<std::size_t>(y - Z.lo)];
      if (X.contains(y)) continue;
      const double ku = norm_k * uy - lu[static_cast<std::size_t>(y - Z.lo)];
      far += norm_k * uy * uy - 2.0 * uy * ku;
    }
    const double mass_off = f_l1 * two_sided_tail(ev, t, R + 1);
    const double half = static_cast<double>(R / 2);
    const double ku_far = f_l1 * (norm_k * std::fabs(tab(R / 2)) + kernel(static_cast<std::int64_t>(half)));
    err += norm_k * m_out * mass_off + mass_off * (norm_k * m_out + 2.0 * ku_far);

    out.pointwise_part += w * pw;
    out.far_part += w * far;
    out.error_bound += w * err;
  }
  out.remainder = semigroup_l2_sq(ev, f, T);
  out.total = out.pointwise_part + out.far_part + out.remainder;
  return out;
}

CounterexampleData counterexample_data(double s, double q, std::int64_t N, std::int64_t fit_lo, double tail_tolerance) {
  if (N < 2 * fit_lo || fit_lo < 2) throw std::invalid_argument("counterexample_data: need 2 <= fit_lo and N >= 2 fit_lo");
  if (!(q > 1.0)) throw std::invalid_argument("counterexample_data: q must be > 1");
  const FractionalKernel kernel(s);
  const SemigroupEvaluator ev(s);
  const SquareFunctionEngine eng(kernel, ev);
  const LatticeFunction f = LatticeFunction::delta(1);
  SquareOptions opt;
  opt.tail_tolerance = tail_tolerance;
  const SquareResult r = eng.evaluate(f, SquareKind::G, Window(2, N), opt);

  CounterexampleData d;
  d.s = s;
  d.q = q;
  d.error_bound = r.time_tail_bound + r.truncation_bound;
  double S = 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::int64_t x = 2; x <= N; ++x) {
    const double g = r(x);
    d.x.push_back(x);
    d.G.push_back(g);
    S += std::pow(g, q);
    d.partial_sums.push_back(S);
    if (x >= fit_lo) {
      const double lx = std::log(static_cast<double>(x - 1)), ly = std::log(g);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; ++n;
    }
  }
  d.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  auto S_at = [&](std::int64_t m) { return d.partial_sums[static_cast<std::size_t>(m - 2)]; };
  for (std::int64_t m = fit_lo; 2 * m <= N; m *= 2) {
    d.doubling_points.push_back(m);
    d.increments.push_back(S_at(2 * m) - S_at(m));
  }
  return d;
}

VerificationReport counterexample_report(double s, double q, std::int64_t N) {
  const CounterexampleData d = counterexample_data(s, q, N);
  const bool divergent_branch = q <= 4.0 / 3.0 + 1e-12;
  VerificationReport rep(divergent_branch ? "squarefn.counterexample_divergence" : "squarefn.counterexample_convergence", 0.0);
  rep.parameters = {{"s", s}, {"q", q}, {"N", double(N)}};
  rep.observations["slope"] = d.slope;
  rep.observations["error_bound"] = d.error_bound;
  rep.observations["S_N"] = d.partial_sums.back();
  // Each failed condition contributes its shortfall to max_abs_error.
  rep.record(std::max(0.0, -0.80 - d.slope));
  rep.record(std::max(0.0, d.slope + 0.70));
  const double inc_max = *std::max_element(d.increments.begin(), d.increments.end());
  for (std::size_t i = 0; i < d.increments.size(); ++i) {
    rep.add_detail("increment_" + std::to_string(d.doubling_points[i]), d.increments[i], 0.0);
    if (divergent_branch) rep.record(std::max(0.0, 0.5 * inc_max - d.increments[i]));
    if (i == 0) continue;
    const double ratio = d.increments[i] / d.increments[i - 1];
    rep.observations["ratio_" + std::to_string(d.doubling_points[i])] = ratio;
    if (divergent_branch) rep.record(std::max(0.0, 0.85 - ratio));
    else rep.record(std::max(0.0, ratio - 0.6));
  }
  if (d.increments.size() < 4) {
    rep.inconclusive = true;
    rep.note = "fewer than 4 doublings available";
  } else {
    rep.note = divergent_branch ? "divergence read off flat doubling increments; no finite computation proves it"
                                : "convergence read off geometrically shrinking doubling increments";
  }
  return rep.finalize();
}

}  // namespace fraclat
