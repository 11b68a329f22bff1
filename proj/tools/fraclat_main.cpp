// fraclat: command-line front end for the fraclat library.
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fraclat/gradients.hpp"
#include "fraclat/jumpsim.hpp"
#include "fraclat/kernel.hpp"
#include "fraclat/lattice.hpp"
#include "fraclat/schrodinger.hpp"
#include "fraclat/semigroup.hpp"
#include "fraclat/squarefn.hpp"
#include "fraclat/verify.hpp"

using namespace fraclat;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  RunConfig cfg;
  std::string out_path;
  std::string config_path;
  CLI::Option* s_opt = nullptr;
  CLI::Option* q_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* format_opt = nullptr;
};

Window parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("window must be given as lo,hi");
  try {
    return Window(std::stoll(text.substr(0, comma)), std::stoll(text.substr(comma + 1)));
  } catch (const std::logic_error& e) {
    throw UsageError(std::string("bad window '") + text + "': " + e.what());
  }
}

LatticeFunction read_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  json j;
  try {
    in >> j;
    return j.get<LatticeFunction>();
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Applies --config first, then any flag given explicitly on the command line.
void resolve_config(Globals& g, double s, double q, std::uint64_t seed, const std::string& format) {
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw UsageError("cannot open config " + g.config_path);
    try {
      json j;
      in >> j;
      from_json(j, g.cfg);
    } catch (const json::exception& e) {
      throw UsageError(g.config_path + ": " + e.what());
    }
  }
  if (g.s_opt->count() > 0) g.cfg.s = s;
  if (g.q_opt->count() > 0) g.cfg.q = q;
  if (g.seed_opt->count() > 0) g.cfg.seed = seed;
  if (g.format_opt->count() > 0) g.cfg.output_format = format;
  try {
    g.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void emit(const Globals& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(g.out_path);
  if (!out) throw std::runtime_error("cannot write " + g.out_path);
  out << text;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json square_json(const SquareResult& r) {
  json values = json::object();
  for (std::int64_t x = r.window.lo; x <= r.window.hi; ++x) values[std::to_string(x)] = r(x);
  return {{"values", values},
          {"time_tail_bound", r.time_tail_bound},
          {"truncation_bound", r.truncation_bound},
          {"t_max", r.quadrature.t_max}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional discrete Laplacian on Z: heat semigroups, square functions, jump-process checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  double s = 0.5, q = 1.5;
  std::uint64_t seed = 1;
  std::string format = "json";
  g.s_opt = app.add_option("--s", s, "Order of the fractional Laplacian, in (0,1)");
  g.q_opt = app.add_option("--q", q, "Exponent q");
  g.seed_opt = app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", g.out_path, "Write output to this file instead of stdout");
  g.format_opt = app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--config", g.config_path, "JSON run configuration; explicit flags override it");

  // kernel
  auto* kernel_cmd = app.add_subcommand("kernel", "Tabulate K_s(m), K_s(m) m^{1+2s} and cumulative sums");
  std::int64_t max_m = 20;
  kernel_cmd->add_option("--max-m", max_m, "Largest m")->check(CLI::PositiveNumber);
  kernel_cmd->add_flag_callback("--json", [&] { format = "json"; g.format_opt->add_result("json"); });
  kernel_cmd->add_flag_callback("--csv", [&] { format = "csv"; g.format_opt->add_result("csv"); });

  // evolve
  auto* evolve_cmd = app.add_subcommand("evolve", "Apply P_t to a lattice function");
  double t = 1.0;
  std::string input, window_text, potential;
  evolve_cmd->add_option("--t", t, "Time")->required();
  evolve_cmd->add_option("--input", input, "Lattice function JSON")->required();
  evolve_cmd->add_option("--window", window_text, "Output window lo,hi")->required();

  // heatkernel
  auto* hk_cmd = app.add_subcommand("heatkernel", "Tabulate p_t(0, d)");
  std::int64_t dmax = 20;
  bool classical = false;
  hk_cmd->add_option("--t", t, "Time")->required();
  hk_cmd->add_option("--dmax", dmax, "Largest distance")->check(CLI::NonNegativeNumber);
  hk_cmd->add_flag("--classical", classical, "Use the discrete Laplacian itself");

  // gamma
  auto* gamma_cmd = app.add_subcommand("gamma", "Evaluate Gamma_q(f)(x)");
  std::int64_t x = 0;
  std::string form = "explicit";
  gamma_cmd->add_option("--input", input, "Lattice function JSON")->required();
  gamma_cmd->add_option("--x", x, "Lattice point")->required();
  gamma_cmd->add_option("--form", form, "explicit or taylor")->check(CLI::IsMember({"explicit", "taylor"}));

  // square
  auto* square_cmd = app.add_subcommand("square", "Evaluate a square function over a window");
  std::string kind = "G";
  double t_tol = 1e-9, horizon = 0.0;
  square_cmd->add_option("--kind", kind, "G, Gt, H, Hq, Gstar or GtU")
      ->check(CLI::IsMember({"G", "Gt", "H", "Hq", "Gstar", "GtU"}));
  square_cmd->add_option("--t-tol", t_tol, "Tolerance on the discarded time tail")->check(CLI::PositiveNumber);
  square_cmd->add_option("--input", input, "Lattice function JSON")->required();
  square_cmd->add_option("--window", window_text, "Evaluation window lo,hi")->required();
  square_cmd->add_option("--horizon", horizon, "Finite time horizon (Gstar only)");
  square_cmd->add_option("--potential", potential, "Potential JSON (GtU only)");

  // counterexample
  auto* ce_cmd = app.add_subcommand("counterexample", "G(delta_1) at s = 1/4, partial sums and doubling increments");
  std::int64_t n = 512;
  ce_cmd->add_option("--n", n, "Largest x")->check(CLI::Range(64, 1 << 16));

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo checks on the jump process");
  std::int64_t start = 0;
  std::size_t paths = 100000;
  std::string check = "compensator";
  sim_cmd->add_option("--t", t, "Horizon T")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--start", start, "Start state (or endpoint x for gstar)");
  sim_cmd->add_option("--paths", paths, "Number of paths (per start for gstar)")->check(CLI::Range(2, 100000000));
  sim_cmd->add_option("--check", check, "compensator or gstar")->check(CLI::IsMember({"compensator", "gstar"}));
  sim_cmd->add_option("--input", input, "Lattice function JSON (default delta_0)");

  // schrodinger
  auto* sch_cmd = app.add_subcommand("schrodinger", "Apply e^{-t(L+U)} on a truncated window");
  std::string method = "exp";
  sch_cmd->add_option("--t", t, "Time")->required();
  sch_cmd->add_option("--potential", potential, "Potential JSON")->required();
  sch_cmd->add_option("--input", input, "Lattice function JSON")->required();
  sch_cmd->add_option("--window", window_text, "Truncation window lo,hi (default -100,100)");
  sch_cmd->add_option("--method", method, "exp or fk")->check(CLI::IsMember({"exp", "fk"}));
  sch_cmd->add_option("--paths", paths, "Paths for the fk method")->check(CLI::Range(2, 100000000));

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run verification suites");
  std::vector<std::string> suites;
  verify_cmd->add_option("--suite", suites, "Suite name (repeatable); 'all' selects every suite");
  verify_cmd->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::Range(2, 100000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    resolve_config(g, s, q, seed, format);
    const RunConfig& cfg = g.cfg;
    const bool csv = cfg.output_format == "csv";

    if (*kernel_cmd) {
      const FractionalKernel k(cfg.s, std::max<std::int64_t>(max_m, 16));
      std::ostringstream os;
      json rows = json::array();
      if (csv) os << "m,K,K_scaled,cumulative\n";
      double cum = 0.0;
      for (std::int64_t m = 1; m <= max_m; ++m) {
        const double v = k(m);
        cum += 2.0 * v;
        const double scaled = v * std::pow(static_cast<double>(m), 1.0 + 2.0 * cfg.s);
        if (csv) os << m << ',' << fmt(v) << ',' << fmt(scaled) << ',' << fmt(cum) << '\n';
        else rows.push_back({{"m", m}, {"K", v}, {"K_scaled", scaled}, {"cumulative", cum}});
      }
      if (!csv) os << json{{"s", cfg.s}, {"l1_norm", k.l1_norm()}, {"rows", rows}}.dump(2);
      emit(g, os.str());
      return kExitOk;
    }

    if (*evolve_cmd) {
      const SemigroupEvaluator ev(cfg.s);
      if (t < 0.0) throw UsageError("--t must be >= 0");
      emit(g, json(ev.apply(t, read_function(input), parse_window(window_text))).dump(2));
      return kExitOk;
    }

    if (*hk_cmd) {
      if (!(t > 0.0)) throw UsageError("--t must be > 0");
      std::ostringstream os;
      if (classical) {
        os << "d,p\n";
        for (std::int64_t d = 0; d <= dmax; ++d) os << d << ',' << fmt(heat_kernel_classical(t, d)) << '\n';
      } else {
        const SemigroupEvaluator ev(cfg.s);
        const HeatKernelTable tab = ev.table(t, dmax);
        if (cfg.output_format == "json" && g.format_opt->count() > 0) {
          os << json{{"s", cfg.s}, {"t", t}, {"p", tab.p}}.dump(2);
        } else {
          os << "d,p\n";
          for (std::int64_t d = 0; d <= dmax; ++d) os << d << ',' << fmt(tab(d)) << '\n';
        }
      }
      emit(g, os.str());
      return kExitOk;
    }

    if (*gamma_cmd) {
      const FractionalKernel k(cfg.s);
      const LatticeFunction f = read_function(input);
      if (!(cfg.q > 1.0 && cfg.q <= 2.0)) throw UsageError("--q must lie in (1, 2] for gamma");
      const double v = form == "taylor" ? gamma_q_taylor(k, f, cfg.q, x) : gamma_q_explicit(k, f, cfg.q, x);
      emit(g, json{{"s", cfg.s}, {"q", cfg.q}, {"x", x}, {"form", form}, {"value", v}}.dump(2));
      return kExitOk;
    }

    if (*square_cmd) {
      const FractionalKernel k(cfg.s);
      const LatticeFunction f = read_function(input);
      const Window xs = parse_window(window_text);
      json out;
      if (kind == "GtU") {
        if (potential.empty()) throw UsageError("--potential is required for GtU");
        const LatticeFunction U = read_function(potential);
        const Window w = Window::hull(Window::hull(xs, f.window()), U.window()).expanded(40);
        const SchrodingerEvaluator sch(k, U, w);
        out = square_json(schrodinger_square(sch, f, SchrodingerSquareKind::GtU, xs, cfg.q, t_tol));
      } else {
        const SemigroupEvaluator ev(cfg.s);
        const SquareFunctionEngine eng(k, ev);
        SquareOptions opt;
        opt.q = cfg.q;
        opt.tail_tolerance = t_tol;
        if (horizon > 0.0) opt.horizon = horizon;
        out = square_json(eng.evaluate(f, square_kind_from_string(kind), xs, opt));
      }
      out["kind"] = kind;
      out["s"] = cfg.s;
      emit(g, out.dump(2));
      return kExitOk;
    }

    if (*ce_cmd) {
      const CounterexampleData d = counterexample_data(0.25, cfg.q, n);
      const VerificationReport rep = counterexample_report(0.25, cfg.q, n);
      std::ostringstream os;
      if (csv) {
        os << "x,G,partial_sum\n";
        for (std::size_t i = 0; i < d.x.size(); ++i) os << d.x[i] << ',' << fmt(d.G[i]) << ',' << fmt(d.partial_sums[i]) << '\n';
        os << "\nm,increment\n";
        for (std::size_t i = 0; i < d.increments.size(); ++i) os << d.doubling_points[i] << ',' << fmt(d.increments[i]) << '\n';
      } else {
        os << json{{"s", 0.25}, {"q", cfg.q}, {"x", d.x}, {"G", d.G}, {"partial_sums", d.partial_sums},
                   {"doubling_points", d.doubling_points}, {"increments", d.increments}, {"slope", d.slope},
                   {"report", rep}}
                  .dump(2);
      }
      emit(g, os.str());
      std::cerr << rep.check_name << ": " << (rep.passed ? "PASS" : "FAIL") << '\n';
      return rep.passed ? kExitOk : kExitCheckFailed;
    }

    if (*sim_cmd) {
      const FractionalKernel k(cfg.s);
      const SemigroupEvaluator ev(cfg.s);
      const TransitionLaw law(k);
      const LatticeFunction f = input.empty() ? LatticeFunction::delta(0) : read_function(input);
      const VerificationReport rep =
          check == "gstar" ? verify_Gstar_representation(law, ev, f, t, start, Window(start - 30, start + 30), paths, cfg.seed)
                           : verify_compensator(law, ev, f, t, paths, cfg.seed, start);
      emit(g, json(rep).dump(2));
      return rep.passed ? kExitOk : kExitCheckFailed;
    }

    if (*sch_cmd) {
      const FractionalKernel k(cfg.s);
      const LatticeFunction U = read_function(potential);
      const LatticeFunction f = read_function(input);
      const Window w = window_text.empty() ? Window(-100, 100) : parse_window(window_text);
      const SchrodingerEvaluator sch(k, U, w);
      json out;
      if (method == "fk") {
        const TransitionLaw law(k);
        json vals = json::object();
        for (std::int64_t y = f.window().lo; y <= f.window().hi; ++y) {
          const MonteCarloStat st = feynman_kac_estimate(law, U, f, y, t, paths, cfg.seed);
          vals[std::to_string(y)] = {{"mean", st.mean}, {"se", st.se}};
        }
        out = {{"method", "fk"}, {"estimates", vals}};
      } else {
        const LatticeFunction r = sch.apply(t, f);
        double min_row = 1.0;
        const Eigen::MatrixXd& E = sch.semigroup_matrix(t);
        for (Eigen::Index i = 0; i < E.rows(); ++i) min_row = std::min(min_row, E.row(i).sum());
        out = {{"method", "exp"}, {"result", r}, {"lambda_min", sch.lambda_min()}, {"min_row_sum", min_row}};
      }
      out["t"] = t;
      emit(g, out.dump(2));
      return kExitOk;
    }

    if (*verify_cmd) {
      RunConfig run = cfg;
      if (paths != 100000 || run.mc_paths == 0) run.mc_paths = paths;
      if (!suites.empty()) run.checks = suites;
      if (run.checks.size() == 1 && run.checks[0] == "all") run.checks = available_suites();
      if (run.checks.empty()) throw UsageError("verify: no checks selected (use --suite)");
      std::vector<VerificationReport> reps;
      try {
        reps = run_verify(run);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      bool ok = true;
      for (const auto& r : reps) {
        ok = ok && r.passed;
        std::cerr << (r.passed ? "PASS " : (r.inconclusive ? "INCONCLUSIVE " : "FAIL ")) << r.check_name
                  << "  err=" << r.max_abs_error << " tol=" << r.tolerance << '\n';
      }
      json meta = {{"version", "0.1.0"}, {"config", run}};
      emit(g, json{{"meta", meta}, {"reports", reps}}.dump(2));
      return ok ? kExitOk : kExitCheckFailed;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}
