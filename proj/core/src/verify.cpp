#include "fraclat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fraclat/gradients.hpp"
#include "fraclat/jumpsim.hpp"
#include "fraclat/kernel.hpp"
#include "fraclat/schrodinger.hpp"
#include "fraclat/semigroup.hpp"
#include "fraclat/squarefn.hpp"

namespace fraclat {

void RunConfig::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("config: s must lie in (0, 1)");
  if (!(q > 1.0)) throw std::invalid_argument("config: q must be > 1");
  if (!(t_tolerance > 0.0)) throw std::invalid_argument("config: t_tolerance must be > 0");
  if (mc_paths < 2) throw std::invalid_argument("config: mc_paths must be >= 2");
  if (output_format != "json" && output_format != "csv") throw std::invalid_argument("config: format must be json or csv");
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"s", c.s},
                     {"q", c.q},
                     {"window", {c.window.lo, c.window.hi}},
                     {"t_tolerance", c.t_tolerance},
                     {"mc_paths", c.mc_paths},
                     {"seed", c.seed},
                     {"format", c.output_format},
                     {"checks", c.checks}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (j.contains("s")) c.s = j.at("s").get<double>();
  if (j.contains("q")) c.q = j.at("q").get<double>();
  if (j.contains("window")) {
    const auto& w = j.at("window");
    c.window = Window(w.at(0).get<std::int64_t>(), w.at(1).get<std::int64_t>());
  }
  if (j.contains("t_tolerance")) c.t_tolerance = j.at("t_tolerance").get<double>();
  if (j.contains("mc_paths")) c.mc_paths = j.at("mc_paths").get<std::size_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("format")) c.output_format = j.at("format").get<std::string>();
  if (j.contains("checks")) c.checks = j.at("checks").get<std::vector<std::string>>();
}

const std::vector<std::string>& available_suites() {
  static const std::vector<std::string> names = {"kernel",  "semigroup", "gradients",  "squarefn",
                                                 "counterexample", "jumpsim", "schrodinger"};
  return names;
}

LatticeFunction random_function(const Window& w, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(w.width());
  for (double& x : v) x = d(rng);
  return LatticeFunction(w, std::move(v));
}

namespace {

using Reports = std::vector<VerificationReport>;

void suite_kernel(const RunConfig& c, Reports& out) {
  const FractionalKernel k(c.s);
  VerificationReport sym("kernel.multiplier_identity_grid", 1e-8);
  sym.parameters = {{"s", c.s}};
  for (int i = 0; i <= 20; ++i) {
    const double theta = std::numbers::pi * i / 20.0;
    sym.record(multiplier_identity_check(c.s, theta, 100000).max_abs_error);
  }
  out.push_back(sym.finalize());
  VerificationReport cons = conservation_check(k, LatticeFunction::delta(0));
  const VerificationReport cons_rand = conservation_check(k, random_function(c.window, -1.0, 1.0, c.seed));
  cons.record(cons_rand.max_abs_error);
  cons.observations["sum_Lf_random"] = cons_rand.observations.at("sum_Lf");
  out.push_back(cons.finalize());

  VerificationReport rec("kernel.ratio_recurrence", 1e-13);
  rec.parameters = {{"s", c.s}};
  double lo = INFINITY, hi = 0.0;
  for (std::int64_t m = 1; m < k.table_size(); ++m) {
    const double a = k(m), b = k(m + 1);
    rec.record(std::fabs(b * (m + 1 + c.s) - a * (m - c.s)) / (a * (m - c.s)));
    const double r = a * std::pow(static_cast<double>(m), 1.0 + 2.0 * c.s);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rec.observations["decay_ratio_min"] = lo;
  rec.observations["decay_ratio_max"] = hi;
  out.push_back(rec.finalize());

  VerificationReport tail("kernel.tail_telescoping", 1e-13);
  tail.parameters = {{"s", c.s}};
  for (std::int64_t M = 0; M < 2000; ++M)
    tail.record(std::fabs(k.tail(M) - k.tail(M + 1) - k(M + 1)) / k.tail(M));
  tail.record(std::fabs(2.0 * k.tail(0) - k.l1_norm()) / k.l1_norm());
  out.push_back(tail.finalize());
}

// e^{-2t} I_d(2t) by its power series.
double bessel_heat(double t, std::int64_t d) {
  double term = std::exp(-2.0 * t + d * std::log(t) - std::lgamma(d + 1.0));
  double acc = term;
  for (int k = 1; k < 400; ++k) {
    term *= t * t / (k * static_cast<double>(k + d));
    acc += term;
    if (term < 1e-18 * acc) break;
  }
  return acc;
}

void suite_semigroup(const RunConfig& c, Reports& out) {
  const SemigroupEvaluator ev(c.s);
  VerificationReport mass("semigroup.mass_conservation", 1e-8);
  mass.parameters = {{"s", c.s}};
  for (double t : {0.1, 1.0, 10.0}) {
    const HeatKernelTable tab = ev.table(t, 400);
    double m = tab(0);
    for (std::int64_t d = 1; d <= 400; ++d) m += 2.0 * tab(d);
    m += 2.0 * ev.mass_tail(t, 400);
    mass.record(std::fabs(m - 1.0));
    mass.observations["mass_t" + std::to_string(t)] = m;
  }
  out.push_back(mass.finalize());

  VerificationReport ck("semigroup.chapman_kolmogorov", 1e-8);
  ck.parameters = {{"s", c.s}, {"t", 0.5}, {"u", 0.5}};
  {
    const std::int64_t Z = 2000;
    const HeatKernelTable a = ev.table(0.5, Z + 10);
    const HeatKernelTable b = ev.table(1.0, 10);
    double raw = 0.0;
    for (std::int64_t d = 0; d <= 10; ++d) {
      double acc = 0.0;
      for (std::int64_t z = -Z; z <= Z; ++z) acc += a(z) * a(d - z);
      // Mass beyond |z| = Z contributes at most 2 p_{0.5}(Z - d) * tail.
      const double trunc = 2.0 * a(Z - 10) * ev.mass_tail(0.5, Z);
      ck.record(std::max(0.0, std::fabs(acc - b(d)) - trunc));
      raw = std::max(raw, std::fabs(acc - b(d)));
    }
    ck.observations["raw_difference"] = raw;
  }
  out.push_back(ck.finalize());

  VerificationReport gen("semigroup.generator_consistency", 1e-5);
  gen.parameters = {{"s", c.s}, {"t", 1.0}};
  {
    const double t = 1.0, h = 1e-3;
    for (std::int64_t d = 0; d <= 10; ++d) {
      const double fd = -(ev.heat_kernel(t + h, d) - ev.heat_kernel(t - h, d)) / (2.0 * h);
      const double lp = ev.generator_kernel(t, d);
      gen.record(std::fabs(fd - lp) / std::max(std::fabs(lp), 1e-12));
    }
  }
  out.push_back(gen.finalize());

  VerificationReport cl("semigroup.classical_bessel", 1e-10);
  for (double t : {0.1, 1.0, 5.0})
    for (std::int64_t d = 0; d <= 20; ++d) cl.record(std::fabs(heat_kernel_classical(t, d) - bessel_heat(t, d)));
  out.push_back(cl.finalize());

  VerificationReport pos("semigroup.positivity", 1e-10);
  pos.parameters = {{"s", c.s}};
  for (double t : {0.01, 1.0, 100.0}) {
    const HeatKernelTable tab = ev.table(t, 1000);
    for (double p : tab.p) pos.record(std::max(0.0, -p));
  }
  out.push_back(pos.finalize());
}

void suite_gradients(const RunConfig& c, Reports& out) {
  const FractionalKernel k(c.s);
  const double q = std::min(c.q, 2.0);
  VerificationReport agg("gradients.pointwise_bounds_random", 0.0);
  agg.parameters = {{"s", c.s}, {"q", q}, {"trials", 100}};
  double v = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const LatticeFunction f = random_function(c.window, 0.0, 1.0, c.seed + i);
    const VerificationReport r = check_pointwise_bounds(k, f, q, c.window.expanded(2));
    agg.record(r.max_abs_error);
    v += r.observations.at("violations");
  }
  agg.observations["violations"] = v;
  out.push_back(agg.finalize());

  VerificationReport g2("gradients.gamma2_equals_grad_sq", 1e-10);
  g2.parameters = {{"s", c.s}};
  VerificationReport tay("gradients.gamma_taylor_form", 1e-8);
  tay.parameters = {{"s", c.s}, {"q", q}};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const LatticeFunction f = random_function(c.window, 0.1, 1.0, c.seed + 1000 + i);
    for (std::int64_t x = c.window.lo - 2; x <= c.window.hi + 2; ++x) {
      const double gf = grad_full(k, f, x);
      g2.record(std::fabs(gamma_q_explicit(k, f, 2.0, x) - gf * gf));
      tay.record(std::fabs(gamma_q_taylor(k, f, q, x) - gamma_q_explicit(k, f, q, x)));
    }
  }
  out.push_back(g2.finalize());
  out.push_back(tay.finalize());
}

void suite_squarefn(const RunConfig& c, Reports& out) {
  const FractionalKernel k(c.s);
  const SemigroupEvaluator ev(c.s);
  const SquareFunctionEngine eng(k, ev);

  VerificationReport iso("squarefn.l2_isometry", 1e-3);
  iso.parameters = {{"s", c.s}};
  const IsometryResult ir = isometry_sum(k, ev, LatticeFunction::delta(0), c.s >= 0.5 ? 100.0 : 30.0, 64, 1024);
  iso.observations["total"] = ir.total;
  iso.observations["error_bound"] = ir.error_bound;
  iso.record(std::fabs(ir.total - 1.0));
  out.push_back(iso.finalize());

  VerificationReport cmp("squarefn.G_vs_sqrt2_Gstar", 0.0);
  cmp.parameters = {{"s", c.s}};
  {
    SquareOptions opt;
    opt.tail_tolerance = c.t_tolerance;
    const LatticeFunction f = LatticeFunction::delta(1);
    const Window xs(-10, 10);
    const SquareResult g = eng.evaluate(f, SquareKind::G, xs, opt);
    const SquareResult gs = eng.evaluate(f, SquareKind::Gstar, xs, opt);
    double worst = INFINITY;
    for (std::int64_t x = xs.lo; x <= xs.hi; ++x) {
      const double slack = 2.0 * gs(x) * gs(x) - g(x) * g(x);
      worst = std::min(worst, slack);
      cmp.record(std::max(0.0, -slack - g.truncation_bound - gs.truncation_bound - g.time_tail_bound));
    }
    cmp.observations["min_slack"] = worst;
  }
  out.push_back(cmp.finalize());

  VerificationReport h2("squarefn.H2_equals_G", 1e-8);
  h2.parameters = {{"s", c.s}};
  {
    SquareOptions opt;
    opt.q = 2.0;
    opt.tail_tolerance = c.t_tolerance;
    const LatticeFunction f = random_function(Window(-5, 5), 0.0, 1.0, c.seed);
    const Window xs(-8, 8);
    SquareOptions og = opt;
    og.t_max = certified_horizon(ev, k, f, SquareKind::G, 2.0, c.t_tolerance);
    opt.t_max = og.t_max;
    const SquareResult a = eng.evaluate(f, SquareKind::Hq, xs, opt);
    const SquareResult b = eng.evaluate(f, SquareKind::G, xs, og);
    for (std::int64_t x = xs.lo; x <= xs.hi; ++x) h2.record(std::fabs(a.squared[x - xs.lo] - b.squared[x - xs.lo]));
  }
  out.push_back(h2.finalize());
}

void suite_counterexample(const RunConfig& c, Reports& out) {
  out.push_back(counterexample_report(0.25, c.q, 512));
}

void suite_jumpsim(const RunConfig& c, Reports& out) {
  const FractionalKernel k(c.s);
  const SemigroupEvaluator ev(c.s);
  const TransitionLaw law(k);
  out.push_back(verify_compensator(law, ev, LatticeFunction::delta(0), 1.0, c.mc_paths, c.seed));
  out.push_back(verify_Gstar_representation(law, ev, LatticeFunction::delta(0), 0.5, 0, Window(-30, 30),
                                            std::max<std::size_t>(c.mc_paths / 5, 1000), c.seed + 1));
}

void suite_schrodinger(const RunConfig& c, Reports& out) {
  const FractionalKernel k(c.s);
  const SemigroupEvaluator ev(c.s);
  const Window w(-40, 40);
  const std::vector<double> ts = {0.1, 1.0};

  VerificationReport dom("schrodinger.domination_random", 0.0);
  dom.parameters = {{"s", c.s}, {"trials", 20}};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const LatticeFunction U = random_function(Window(-5, 5), 0.0, 2.0, c.seed + 2 * i);
    const LatticeFunction f = random_function(Window(-5, 5), 0.0, 1.0, c.seed + 2 * i + 1);
    const SchrodingerEvaluator sch(k, U, w);
    dom.record(verify_domination(sch, ev, f, ts).max_abs_error);
  }
  out.push_back(dom.finalize());

  VerificationReport cst("schrodinger.constant_potential", 1e-8);
  cst.parameters = {{"s", c.s}, {"c", 1.0}};
  {
    const SchrodingerEvaluator s0(k, LatticeFunction::zeros(w), w);
    const SchrodingerEvaluator s1(k, LatticeFunction(w, std::vector<double>(w.width(), 1.0)), w);
    const LatticeFunction f = random_function(Window(-5, 5), 0.0, 1.0, c.seed);
    for (double t : ts) {
      const LatticeFunction a = s1.apply(t, f), b = s0.apply(t, f);
      for (std::int64_t x = w.lo; x <= w.hi; ++x) cst.record(std::fabs(a(x) - std::exp(-t) * b(x)));
    }
  }
  out.push_back(cst.finalize());

  VerificationReport fk("schrodinger.feynman_kac", 0.0);
  fk.parameters = {{"s", c.s}, {"T", 1.0}, {"paths", double(c.mc_paths)}};
  {
    const LatticeFunction U = LatticeFunction::delta(0);
    const LatticeFunction f = LatticeFunction::delta(0);
    const SchrodingerEvaluator sch(k, U, Window(-200, 200));
    const double exact = sch.apply(1.0, f)(0);
    const double trunc = sch.escape_probability(1.0, 0);
    const MonteCarloStat st = feynman_kac_estimate(TransitionLaw(k), U, f, 0, 1.0, c.mc_paths, c.seed);
    fk.observations["matrix"] = exact;
    fk.observations["monte_carlo"] = st.mean;
    fk.observations["se"] = st.se;
    fk.observations["truncation_bound"] = trunc;
    fk.record(std::max(0.0, std::fabs(st.mean - exact) - 3.0 * st.se - trunc));
  }
  out.push_back(fk.finalize());
}

}  // namespace

std::vector<VerificationReport> run_verify(const RunConfig& config) {
  config.validate();
  if (config.checks.empty()) throw std::invalid_argument("verify: no checks selected");
  using Suite = void (*)(const RunConfig&, Reports&);
  static const std::map<std::string, Suite> suites = {
      {"kernel", suite_kernel},         {"semigroup", suite_semigroup},
      {"gradients", suite_gradients},   {"squarefn", suite_squarefn},
      {"counterexample", suite_counterexample}, {"jumpsim", suite_jumpsim},
      {"schrodinger", suite_schrodinger}};
  std::vector<Suite> selected;
  for (const std::string& name : config.checks) {
    const auto it = suites.find(name);
    if (it == suites.end()) throw std::invalid_argument("verify: unknown suite '" + name + "'");
    selected.push_back(it->second);
  }

  // Suites are independent; each fills its own vector, merged in selection order.
  std::vector<Reports> partial(selected.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t i = 0; i < selected.size(); ++i)
    jobs.push_back(std::async(std::launch::async, selected[i], std::cref(config), std::ref(partial[i])));
  for (auto& j : jobs) j.get();

  Reports out;
  for (auto& p : partial) std::move(p.begin(), p.end(), std::back_inserter(out));
  std::stable_sort(out.begin(), out.end(),
                   [](const VerificationReport& a, const VerificationReport& b) { return a.check_name < b.check_name; });
  return out;
}

}  // namespace fraclat
