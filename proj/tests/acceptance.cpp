// Acceptance run: one PASS/FAIL line per criterion, all tolerances fixed here.
//
// Two criteria are kept exactly as stated even though they cannot hold; they are listed in
// kExpectedFailures and still print FAIL. The process exits non-zero on any other failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fraclat/gradients.hpp"
#include "fraclat/jumpsim.hpp"
#include "fraclat/kernel.hpp"
#include "fraclat/schrodinger.hpp"
#include "fraclat/semigroup.hpp"
#include "fraclat/squarefn.hpp"
#include "oracles.hpp"

using namespace fraclat;
using std::numbers::pi;

namespace {

// Difference bound with constant 2 fails for q < 2 (f = delta_0 at x = -1 needs 1 / ((q-1) ||K||_1)).
// At q = 2 the doubling increments of Sum G(delta_1)^2 decay like m^{-1/2}, ratio -> 0.707.
const std::set<int> kExpectedFailures = {6, 8};

struct Outcome {
  bool pass = false;
  std::string detail;
};

LatticeFunction random_f(Window w, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(w.width());
  for (double& x : v) x = u(rng);
  return LatticeFunction(w, std::move(v));
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// 1
Outcome kernel_exactness() {
  const double s = 0.5;
  const FractionalKernel k(s);
  const double e1 = std::fabs(k(1) - 4.0 / (3.0 * pi));
  double rec = 0.0;
  double prev = k(1);
  for (std::int64_t m = 1; m < 1000000; ++m) {
    const double next = k(m + 1);
    const double want = (m - s) / (m + 1.0 + s);
    rec = std::max(rec, std::fabs(next / prev - want) / want);
    prev = next;
  }
  // Summation oracle: Sum_{|m| <= 10^6} K(m) plus the integral remainder 2 / (pi (M + 1/2)).
  long double acc = 0.0L;
  const std::int64_t M = 1000000;
  for (std::int64_t m = M; m >= 1; --m) acc += k(m);
  const double oracle_l1 = 2.0 * static_cast<double>(acc) + 2.0 / (pi * (M + 0.5));
  const double e3 = std::max(std::fabs(k.l1_norm() - oracle_l1), std::fabs(oracle_l1 - 4.0 / pi));
  return {e1 <= 1e-12 && rec <= 1e-13 && e3 <= 1e-10,
          fmt("|K(1)-4/(3pi)|=%.2e  ratio rel err=%.2e  |l1-oracle|=%.2e", e1, rec, e3)};
}

// 2
Outcome fourier_symbol() {
  double worst = 0.0;
  for (double s : {0.25, 0.5, 0.75})
    for (int i = 1; i <= 50; ++i) worst = std::max(worst, multiplier_identity_check(s, pi * i / 50.0, 100000).max_abs_error);
  return {worst <= 1e-8, fmt("max relative error %.2e over 150 (s, theta) pairs", worst)};
}

// 3
Outcome classical_heat() {
  double worst = 0.0;
  for (double t : {0.1, 1.0, 5.0})
    for (std::int64_t d = 0; d <= 20; ++d)
      worst = std::max(worst, std::fabs(heat_kernel_classical(t, d) - oracle::bessel_heat_series(t, d)));
  return {worst <= 1e-10, fmt("max |quadrature - Bessel series| = %.2e", worst)};
}

// 4
Outcome fractional_heat() {
  double mass = 0.0;
  for (double s : {0.25, 0.5, 0.75}) {
    const SemigroupEvaluator ev(s);
    for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const HeatKernelTable tab = ev.table(t, 1000);
      double m = tab(0);
      for (std::int64_t d = 1; d <= 1000; ++d) m += 2.0 * tab(d);
      m += 2.0 * ev.mass_tail(t, 1000);
      mass = std::max(mass, std::fabs(m - 1.0));
    }
  }
  // Chapman-Kolmogorov at s = 1/2, where the truncation beyond |z| = Z is far below the tolerance.
  double ck = 0.0;
  {
    const SemigroupEvaluator ev(0.5);
    const std::int64_t Z = 20000;
    const HeatKernelTable a = ev.table(0.5, Z + 20);
    for (std::int64_t d = 0; d <= 20; ++d) {
      long double acc = 0.0L;
      for (std::int64_t z = -Z; z <= Z; ++z) acc += a(z) * a(d - z);
      const double trunc = 2.0 * a(Z - 20) * ev.mass_tail(0.5, Z);
      ck = std::max(ck, std::fabs(static_cast<double>(acc) - ev.heat_kernel(1.0, d)) + trunc);
    }
  }
  double sub = 0.0;
  {
    const SemigroupEvaluator ev(0.5);
    for (double t : {0.1, 1.0, 10.0})
      for (std::int64_t d = 0; d <= 10; ++d)
        sub = std::max(sub, std::fabs(ev.heat_kernel(t, d) - oracle::heat_kernel_half_subordinated(t, d)));
  }
  return {mass <= 1e-8 && ck <= 1e-8 && sub <= 1e-8,
          fmt("mass err %.2e  Chapman-Kolmogorov err %.2e  subordination err %.2e", mass, ck, sub)};
}

// 5
Outcome gamma_coherence() {
  double tay = 0.0, g2 = 0.0;
  const double qs[] = {1.1, 1.3, 1.5, 1.7, 1.9};
  const FractionalKernel ks[] = {FractionalKernel(0.25), FractionalKernel(0.5), FractionalKernel(0.75)};
  for (int i = 0; i < 1000; ++i) {
    const FractionalKernel& k = ks[i % 3];
    const double q = qs[i % 5];
    const LatticeFunction f = random_f(Window(-10, 10), 0.05, 1.0, 5000 + i);
    for (std::int64_t x = -12; x <= 12; ++x) {
      tay = std::max(tay, std::fabs(gamma_q_taylor(k, f, q, x) - gamma_q_explicit(k, f, q, x)));
      const double g = grad_full(k, f, x);
      g2 = std::max(g2, std::fabs(gamma_q_explicit(k, f, 2.0, x) - g * g));
    }
  }
  return {tay <= 1e-8 && g2 <= 1e-10, fmt("|taylor - explicit| = %.2e  |Gamma_2 - |grad|^2| = %.2e", tay, g2)};
}

// 6
Outcome pointwise_bounds() {
  std::size_t v_mod = 0, v_diff2 = 0, v_diff_proof = 0;
  double worst_c = 0.0;
  for (double s : {0.25, 0.75}) {
    const FractionalKernel k(s);
    for (double q : {1.1, 1.5, 2.0}) {
      const double c_mod = 2.0 / (q * (q - 1.0));
      const double c_proof = 2.0 / (q * (q - 1.0) * k(1));
      for (int i = 0; i < 1000; ++i) {
        const LatticeFunction f = random_f(Window(-15, 15), 0.0, 1.0, 9000 + i);
        double g_next = gamma_q_explicit(k, f, q, -17);
        for (std::int64_t x = -17; x <= 17; ++x) {
          const double g = g_next;
          g_next = gamma_q_explicit(k, f, q, x + 1);
          const double gm = grad_modified(k, f, x);
          const double d = diff(f, x);
          const double round = 1e-12;
          if (gm * gm > c_mod * g * (1 + round)) ++v_mod;
          if (d * d > 2.0 * (g + g_next) * (1 + round)) ++v_diff2;
          if (d * d > c_proof * (g + g_next) * (1 + round)) ++v_diff_proof;
          if (g + g_next > 0.0) worst_c = std::max(worst_c, d * d / (g + g_next));
        }
      }
    }
  }
  return {v_mod == 0 && v_diff2 == 0,
          fmt("modified-gradient bound violations %zu; difference bound with constant 2: %zu violations "
              "(largest needed constant %.2f); with 2/(q(q-1)K(1)): %zu violations",
              v_mod, v_diff2, worst_c, v_diff_proof)};
}

// 7
Outcome isometry() {
  std::string d;
  bool ok = true;
  for (auto [s, T] : {std::pair{0.25, 30.0}, std::pair{0.5, 100.0}}) {
    const FractionalKernel k(s);
    const SemigroupEvaluator ev(s);
    const IsometryResult r = isometry_sum(k, ev, LatticeFunction::delta(0), T, 64, 1024);
    const double norm = std::sqrt(r.total);
    ok = ok && std::fabs(norm - 1.0) <= 1e-3;
    d += fmt("s=%.2f: ||G(delta_0)||_2 = %.7f (error bound %.1e)  ", s, norm, r.error_bound);
  }
  return {ok, d};
}

// 8
Outcome counterexample() {
  const VerificationReport div = counterexample_report(0.25, 4.0 / 3.0, 512);
  const VerificationReport conv = counterexample_report(0.25, 2.0, 512);
  const double slope = div.observations.at("slope");
  const bool slope_ok = slope >= -0.80 && slope <= -0.70;
  std::string inc43, ratio2;
  for (const auto& [name, v] : div.observations)
    if (name.rfind("ratio_", 0) == 0) inc43 += fmt(" %.3f", v);
  for (const auto& [name, v] : conv.observations)
    if (name.rfind("ratio_", 0) == 0) ratio2 += fmt(" %.3f", v);
  return {slope_ok && div.passed && conv.passed,
          fmt("slope %.4f; q=4/3 increment ratios%s (%s); q=2 increment ratios%s (need < 0.6)", slope, inc43.c_str(),
              div.passed ? "non-vanishing" : "not flat", ratio2.c_str())};
}

// 9
Outcome gstar_domination() {
  const FractionalKernel k(0.5);
  const SemigroupEvaluator ev(0.5);
  const SquareFunctionEngine eng(k, ev);
  const Window xs(-10, 10);
  std::size_t violations = 0;
  double worst = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const LatticeFunction f = i == 0 ? LatticeFunction::delta(1) : random_f(Window(-5, 5), -1.0, 1.0, 700 + i);
    const SquareResult G = eng.evaluate(f, SquareKind::G, xs);
    const SquareResult S = eng.evaluate(f, SquareKind::Gstar, xs);
    const double allow = G.time_tail_bound + G.truncation_bound + 2.0 * (S.time_tail_bound + S.truncation_bound);
    for (std::int64_t x = xs.lo; x <= xs.hi; ++x) {
      const auto j = static_cast<std::size_t>(x - xs.lo);
      if (G.squared[j] > 2.0 * S.squared[j] + allow) ++violations;
      if (S.squared[j] > 0.0) worst = std::max(worst, std::sqrt(G.squared[j] / S.squared[j]));
    }
  }
  return {violations == 0, fmt("%zu violations over 51 inputs x 21 points; largest G/G_* = %.4f (limit 1.4142)",
                               violations, worst)};
}

// 10
Outcome martingale() {
  const FractionalKernel k(0.5);
  const SemigroupEvaluator ev(0.5);
  const TransitionLaw law(k);
  const VerificationReport r = verify_compensator(law, ev, LatticeFunction::delta(0), 1.0, 100000, 20240601);
  auto ob = [&](const char* n) { return r.observations.count(n) ? r.observations.at(n) : std::nan(""); };
  return {r.passed, fmt("exact %.6f  E[M^2] %.6f  E<M>_T %.6f  E[M]_T %.6f  E M_T %.1e", ob("variance_exact"),
                        ob("M2_mean"), ob("angle_mean"), ob("square_mean"), ob("M_mean"))};
}

// 11
Outcome gstar_representation() {
  const FractionalKernel k(0.5);
  const SemigroupEvaluator ev(0.5);
  const TransitionLaw law(k);
  const VerificationReport r =
      verify_Gstar_representation(law, ev, LatticeFunction::delta(0), 0.5, 0, Window(-30, 30), 20000, 77);
  auto ob = [&](const char* n) { return r.observations.count(n) ? r.observations.at(n) : std::nan(""); };
  return {r.passed, fmt("estimate %.5f  exact %.5f  SE %.5f  truncation bound %.5f", ob("estimate"), ob("exact"),
                        ob("se"), ob("truncation_bound"))};
}

// 12
Outcome schrodinger() {
  const FractionalKernel k(0.5);
  const SemigroupEvaluator ev(0.5);
  const Window w(-40, 40);
  const std::vector<double> grid = {0.01, 0.1, 1.0, 10.0};
  std::size_t dom_fail = 0;
  for (int i = 0; i < 100; ++i) {
    const SchrodingerEvaluator sch(k, random_f(Window(-5, 5), 0.0, 2.0, 3000 + i), w);
    if (!verify_domination(sch, ev, random_f(Window(-5, 5), 0.0, 1.0, 4000 + i), grid).passed) ++dom_fail;
  }
  double fact = 0.0;
  {
    const double c = 0.8;
    const SchrodingerEvaluator free_sch(k, LatticeFunction::zeros(w), w);
    const SchrodingerEvaluator c_sch(k, LatticeFunction(w, std::vector<double>(w.width(), c)), w);
    const LatticeFunction f = random_f(Window(-5, 5), 0.0, 1.0, 5);
    for (double t : {0.1, 1.0, 5.0}) {
      const LatticeFunction a = c_sch.apply(t, f), b = free_sch.apply(t, f);
      for (std::int64_t x = w.lo; x <= w.hi; ++x) fact = std::max(fact, std::fabs(a(x) - std::exp(-c * t) * b(x)));
    }
  }
  bool fk_ok;
  double fk_diff, fk_allow;
  {
    const Window wf(-200, 200);
    const SchrodingerEvaluator sch(k, LatticeFunction::delta(0), wf);
    const TransitionLaw law(k);
    const MonteCarloStat st = feynman_kac_estimate(law, LatticeFunction::delta(0), LatticeFunction::delta(0), 0, 1.0,
                                                   100000, 99);
    const double exact = sch.apply(1.0, LatticeFunction::delta(0))(0);
    fk_diff = std::fabs(st.mean - exact);
    fk_allow = 3.0 * st.se + sch.escape_probability(1.0, 0);
    fk_ok = fk_diff <= fk_allow;
  }
  return {dom_fail == 0 && fact <= 1e-8 && fk_ok,
          fmt("domination failures %zu/100  factorization err %.2e  Feynman-Kac |diff| %.2e <= %.2e", dom_fail,
              fact, fk_diff, fk_allow)};
}

// 13
Outcome boundedness() {
  struct Kind {
    std::string name;
    double q;
    bool nonneg;
    std::function<std::vector<double>(const LatticeFunction&, const Window&, std::uint64_t)> eval;
  };
  const double s = 0.5;
  const FractionalKernel k(s);
  const SemigroupEvaluator ev(s);
  const SquareFunctionEngine eng(k, ev);
  auto engine_kind = [&](SquareKind kind, double q) {
    return [&, kind, q](const LatticeFunction& f, const Window& xs, std::uint64_t) {
      SquareOptions o;
      o.q = q;
      o.tail_tolerance = 1e-8;
      return eng.evaluate(f, kind, xs, o).values;
    };
  };
  std::vector<Kind> kinds = {
      {"Gt q=1.5", 1.5, false, engine_kind(SquareKind::Gt, 1.5)},
      {"H q=1.2", 1.2, false, engine_kind(SquareKind::H, 1.2)},
      {"G q=2", 2.0, false, engine_kind(SquareKind::G, 2.0)},
      {"G q=3", 3.0, false, engine_kind(SquareKind::G, 3.0)},
      {"Hq q=1.5", 1.5, true, engine_kind(SquareKind::Hq, 1.5)},
      {"GtU q=1.5", 1.5, true,
       [&](const LatticeFunction& f, const Window& xs, std::uint64_t seed) {
         const LatticeFunction U = random_f(Window(-5, 5), 0.0, 1.0, seed ^ 0x5555);
         const SchrodingerEvaluator sch(k, U, xs.expanded(20));
         return schrodinger_square(sch, f, SchrodingerSquareKind::GtU, xs, 1.5, 1e-8).values;
       }},
  };
  const double ceiling = 10.0, growth_ceiling = 1.5;
  bool ok = true;
  std::string d;
  for (const Kind& kind : kinds) {
    double max_by_width[3] = {0, 0, 0};
    const std::int64_t halves[3] = {10, 20, 40};
    for (int i = 0; i < 200; ++i) {
      const int wi = i % 3;
      const Window fw(-halves[wi], halves[wi]);
      const LatticeFunction f = random_f(fw, kind.nonneg ? 0.0 : -1.0, 1.0, 100000 + 7 * i);
      const Window xs = fw.expanded(20);
      const std::vector<double> v = kind.eval(f, xs, 100000 + 7 * i);
      const double r = lq_norm(LatticeFunction(xs, v), kind.q) / lq_norm(f, kind.q);
      max_by_width[wi] = std::max(max_by_width[wi], r);
    }
    const double top = std::max({max_by_width[0], max_by_width[1], max_by_width[2]});
    const double growth = max_by_width[2] / max_by_width[0];
    ok = ok && top <= ceiling && growth <= growth_ceiling;
    d += fmt("%s max %.3f growth %.3f; ", kind.name.c_str(), top, growth);
  }
  return {ok, d};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "kernel exactness", kernel_exactness},
      {2, "Fourier symbol identity", fourier_symbol},
      {3, "classical heat kernel", classical_heat},
      {4, "fractional heat kernel", fractional_heat},
      {5, "Gamma_q coherence", gamma_coherence},
      {6, "pointwise Gamma_q bounds", pointwise_bounds},
      {7, "l2 isometry", isometry},
      {8, "s = 1/4 counterexample", counterexample},
      {9, "G <= sqrt2 G_*", gstar_domination},
      {10, "martingale compensator", martingale},
      {11, "G_*,T representation", gstar_representation},
      {12, "Schrodinger semigroup", schrodinger},
      {13, "empirical boundedness", boundedness},
  };
  int unexpected = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool expected_fail = kExpectedFailures.count(c.id) > 0;
    const char* tag = o.pass ? (expected_fail ? "PASS (listed as expected failure)" : "PASS")
                             : (expected_fail ? "FAIL (expected)" : "FAIL");
    if (!o.pass && !expected_fail) ++unexpected;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", tag, c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
