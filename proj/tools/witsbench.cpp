// witsbench — command-line surface of the library: evaluate controllers,
// cross-validate closed forms against simulation, trace Pareto frontiers,
// and emit density/diagnostic artifacts as CSV/DAT files.
//
// Exit codes: 0 success, 1 validation failure, 2 usage/parse error,
// 3 numerical non-convergence.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "witsbench/costs.hpp"
#include "witsbench/firstorder.hpp"
#include "witsbench/gaussian.hpp"
#include "witsbench/montecarlo.hpp"
#include "witsbench/optimizer.hpp"
#include "witsbench/version.hpp"

namespace {

using namespace witsbench;
namespace stdfs = std::filesystem;
using steady = std::chrono::steady_clock;

constexpr int exit_ok = 0;
constexpr int exit_validation_failure = 1;
constexpr int exit_usage = 2;
constexpr int exit_nonconvergence = 3;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double elapsed_seconds(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Flag bundles shared between subcommands.  Every flag has a config-file
// equivalent (plain key=value, read via --config); command-line values
// override the file.
// ---------------------------------------------------------------------------

struct problem_flags {
  double Q = 1.0;
  double N = 0.1;

  problem_config config() const {
    problem_config cfg;
    cfg.Q = Q;
    cfg.N = N;
    cfg.validate();
    return cfg;
  }
};

void add_problem_flags(CLI::App* cmd, problem_flags& f) {
  cmd->add_option("--Q", f.Q, "Source variance Q")->capture_default_str();
  cmd->add_option("--N", f.N, "Observation-noise variance N")
      ->capture_default_str();
}

struct quad_flags {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double tail_sigmas = 10.0;
  int max_subdivisions = 2000;

  quadrature_config config() const {
    quadrature_config qc;
    qc.abs_tol = abs_tol;
    qc.rel_tol = rel_tol;
    qc.tail_sigmas = tail_sigmas;
    qc.max_subdivisions = max_subdivisions;
    qc.validate();
    return qc;
  }
};

void add_quad_flags(CLI::App* cmd, quad_flags& f) {
  cmd->add_option("--abs-tol", f.abs_tol, "Quadrature absolute tolerance")
      ->capture_default_str();
  cmd->add_option("--rel-tol", f.rel_tol, "Quadrature relative tolerance")
      ->capture_default_str();
  cmd->add_option("--tail-sigmas", f.tail_sigmas,
                  "Integration reach in observation standard deviations")
      ->capture_default_str();
  cmd->add_option("--max-subdivisions", f.max_subdivisions,
                  "Adaptive subdivision budget")
      ->capture_default_str();
}

struct sim_flags {
  double samples = 1e6;  // double so 1e6-style spellings parse
  std::uint64_t seed = 1;
  std::uint64_t batch = 65536;
  bool antithetic = false;
  int threads = 0;

  sim_config config() const {
    if (!std::isfinite(samples) || samples < 1.0 || samples > 9e18) {
      throw std::invalid_argument("--samples must be a count in [1, 9e18]");
    }
    sim_config sim;
    sim.samples = static_cast<std::uint64_t>(std::llround(samples));
    sim.seed = seed;
    sim.batch = batch;
    sim.antithetic = antithetic;
    sim.threads = threads;
    sim.validate();
    return sim;
  }
};

void add_sim_flags(CLI::App* cmd, sim_flags& f) {
  cmd->add_option("--samples", f.samples, "Monte-Carlo sample count")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--batch", f.batch, "Accumulation batch size")
      ->capture_default_str();
  cmd->add_flag("--antithetic", f.antithetic,
                "Pair each odd sample with its negation");
  cmd->add_option("--threads", f.threads,
                  "Worker cap (0 = hardware parallelism)")
      ->envname("WITSBENCH_THREADS")
      ->capture_default_str();
}

struct opt_flags {
  int restarts = 8;
  int max_iters = 0;
  double x_tol = 1e-6;
  double f_tol = 1e-9;
  int warm_restarts = 4;
  double refine_gap = 0.01;
  int refine_budget = 128;

  sweep_options sweep(const quadrature_config& qc) const {
    sweep_options so;
    so.opt.restarts = restarts;
    so.opt.max_iters = max_iters;
    so.opt.x_tol = x_tol;
    so.opt.f_tol = f_tol;
    so.qc = qc;
    so.warm_restarts = warm_restarts;
    so.refine_gap = refine_gap;
    so.refine_budget = refine_budget;
    return so;
  }
};

void add_opt_flags(CLI::App* cmd, opt_flags& f) {
  cmd->add_option("--restarts", f.restarts, "Cold starts per grid point")
      ->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters,
                  "Simplex iteration cap per start (0 = automatic)")
      ->capture_default_str();
  cmd->add_option("--x-tol", f.x_tol, "Simplex coordinate tolerance")
      ->capture_default_str();
  cmd->add_option("--f-tol", f.f_tol, "Simplex objective tolerance")
      ->capture_default_str();
  cmd->add_option("--warm-restarts", f.warm_restarts,
                  "Cold starts at warm-chained grid points")
      ->capture_default_str();
  cmd->add_option("--refine-gap", f.refine_gap,
                  "Refine adjacent records whose P differ by more than this")
      ->capture_default_str();
  cmd->add_option("--refine-budget", f.refine_budget,
                  "Extra optimizations spent on knee refinement")
      ->capture_default_str();
}

// ---------------------------------------------------------------------------
// Strategy specification: exactly one of the inline forms or a file.
// ---------------------------------------------------------------------------

struct strategy_flags {
  bool zero = false;
  std::optional<double> linear_p;
  std::optional<double> bpsk_a;
  std::optional<double> two_point_a;
  std::vector<std::string> lope_tokens;
  std::string file;
};

void add_strategy_flags(CLI::App* cmd, strategy_flags& f) {
  cmd->add_flag("--zero", f.zero, "Do-nothing first stage (u1 = 0)");
  cmd->add_option("--linear", f.linear_p,
                  "Best linear controller with power target P");
  cmd->add_option("--bpsk", f.bpsk_a, "One-step controller u1 = -A sign(x0)");
  cmd->add_option("--two-point", f.two_point_a,
                  "Two-point controller u1 = A sign(x0) - x0");
  cmd->add_option("--lope", f.lope_tokens,
                  "n-step controller, two tokens: a=A1,..,An B=B1,..,Bn")
      ->expected(2);
  cmd->add_option("--strategy-file", f.file,
                  "File in the strategy key=value format");
}

std::vector<double> parse_csv_doubles(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      throw parse_error(what + ": bad number '" + token + "'", 1,
                        static_cast<int>(pos) + 1);
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

strategy resolve_strategy(const strategy_flags& f) {
  const int given = (f.zero ? 1 : 0) + (f.linear_p ? 1 : 0) +
                    (f.bpsk_a ? 1 : 0) + (f.two_point_a ? 1 : 0) +
                    (f.lope_tokens.empty() ? 0 : 1) + (f.file.empty() ? 0 : 1);
  if (given != 1) {
    throw std::invalid_argument(
        "exactly one of --zero, --linear, --bpsk, --two-point, --lope, "
        "--strategy-file is required");
  }
  if (f.zero) return zero_strategy{};
  if (f.linear_p) return linear_strategy{*f.linear_p};
  if (f.bpsk_a) return bpsk_strategy{*f.bpsk_a};
  if (f.two_point_a) return two_point_strategy{*f.two_point_a};
  if (!f.lope_tokens.empty()) {
    std::optional<std::vector<double>> a, b;
    for (const std::string& token : f.lope_tokens) {
      const std::size_t eq = token.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument(
            "--lope tokens must look like a=0.2,0.5 or B=0,0.8");
      }
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "a") {
        a = parse_csv_doubles(value, "--lope a");
      } else if (key == "B") {
        b = parse_csv_doubles(value, "--lope B");
      } else {
        throw std::invalid_argument("--lope token key must be 'a' or 'B'");
      }
    }
    if (!a || !b) {
      throw std::invalid_argument("--lope needs both an a= and a B= token");
    }
    lope_params p;
    p.n = static_cast<int>(a->size());
    p.a = *a;
    p.B = *b;
    return lope_strategy{std::move(p)};
  }
  std::ifstream in(f.file);
  if (!in) {
    throw std::invalid_argument("cannot open strategy file: " + f.file);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_strategy(buffer.str());
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

// start:end:count, endpoints inclusive.
std::vector<double> parse_grid_spec(const std::string& spec) {
  const auto fail = [&](const std::string& why, std::size_t column) {
    throw parse_error("grid '" + spec + "': " + why, 1,
                      static_cast<int>(column) + 1);
  };
  const std::size_t c1 = spec.find(':');
  const std::size_t c2 =
      c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos ||
      spec.find(':', c2 + 1) != std::string::npos) {
    fail("expected start:end:count", 0);
  }
  const auto parse_num = [&](std::size_t from, std::size_t len) {
    const std::string token = spec.substr(from, len);
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) {
      fail("bad number '" + token + "'", from);
    }
    return v;
  };
  const double start = parse_num(0, c1);
  const double stop = parse_num(c1 + 1, c2 - c1 - 1);
  const double count_d = parse_num(c2 + 1, std::string::npos);
  if (count_d < 1.0 || count_d != std::floor(count_d) || count_d > 1e6) {
    fail("count must be a positive integer", c2 + 1);
  }
  const int count = static_cast<int>(count_d);
  if (count == 1) {
    if (start != stop) fail("count 1 needs start == end", 0);
    return {start};
  }
  std::vector<double> grid(count);
  const double step = (stop - start) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = start + i * step;
  grid.front() = start;
  grid.back() = stop;
  return grid;
}

// ---------------------------------------------------------------------------
// Run manifests: plain key=value lines, directly reusable as a --config file
// (`witsbench <command> --config <manifest>` replays the run).  Keys are
// prefixed with the command name so they resolve onto that subcommand's
// flags; values that the config reader would split (commas, spaces) are
// quoted.  Run metadata (version, duration, outputs) lives in comments so a
// replay is unaffected by it.
// ---------------------------------------------------------------------------

std::string config_quote(const std::string& v) {
  if (v.find_first_of(", \t#;=") == std::string::npos && !v.empty()) return v;
  return "\"" + v + "\"";
}

struct run_manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;

  void add(const std::string& key, const std::string& value) {
    keys.emplace_back(key, value);
  }

  std::string text() const {
    std::ostringstream os;
    os << "# witsbench " << version_string << " run manifest\n";
    os << "# command: " << command << "\n";
    os << "# duration-seconds: " << fmt(duration_seconds) << "\n";
    for (const std::string& o : outputs) os << "# output: " << o << "\n";
    for (const auto& [k, v] : keys) {
      os << command << '.' << k << '=' << config_quote(v) << "\n";
    }
    return os.str();
  }
};

void write_file(const stdfs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void manifest_problem(run_manifest& m, const problem_flags& f) {
  m.add("Q", fmt(f.Q));
  m.add("N", fmt(f.N));
}

void manifest_quad(run_manifest& m, const quad_flags& f) {
  m.add("abs-tol", fmt(f.abs_tol));
  m.add("rel-tol", fmt(f.rel_tol));
  m.add("tail-sigmas", fmt(f.tail_sigmas));
  m.add("max-subdivisions", std::to_string(f.max_subdivisions));
}

void manifest_sim(run_manifest& m, const sim_config& sim) {
  m.add("samples", std::to_string(sim.samples));
  m.add("seed", std::to_string(sim.seed));
  m.add("batch", std::to_string(sim.batch));
  m.add("antithetic", sim.antithetic ? "true" : "false");
  m.add("threads", std::to_string(sim.threads));
}

void manifest_opt(run_manifest& m, const opt_flags& f) {
  m.add("restarts", std::to_string(f.restarts));
  m.add("max-iters", std::to_string(f.max_iters));
  m.add("x-tol", fmt(f.x_tol));
  m.add("f-tol", fmt(f.f_tol));
  m.add("warm-restarts", std::to_string(f.warm_restarts));
  m.add("refine-gap", fmt(f.refine_gap));
  m.add("refine-budget", std::to_string(f.refine_budget));
}

// Serializes the resolved strategy next to the main output and points the
// manifest at it, so a rerun from the manifest needs no inline flags.
void manifest_strategy(run_manifest& m, const strategy& s,
                       const stdfs::path& main_output) {
  const stdfs::path side = main_output.string() + ".strategy";
  write_file(side, serialize_strategy(s));
  m.outputs.push_back(side.string());
  m.add("strategy-file", side.string());
}

void finish_manifest(run_manifest& m, const stdfs::path& main_output,
                     steady::time_point t0) {
  m.duration_seconds = elapsed_seconds(t0);
  write_file(main_output.string() + ".manifest", m.text());
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct eval_state {
  strategy_flags strat;
  problem_flags prob;
  quad_flags quad;
  std::string out;
};

int run_eval(const eval_state& st) {
  const auto t0 = steady::now();
  const strategy s = resolve_strategy(st.strat);
  const problem_config cfg = st.prob.config();
  const quadrature_config qc = st.quad.config();
  validate_strategy(s, cfg);

  const cost_point cp = strategy_cost(s, cfg, qc);
  std::cout << "P = " << fmt(cp.P) << "\n"
            << "S = " << fmt(cp.S) << "\n"
            << "quad_error_estimate = " << fmt(cp.quad_error_estimate) << "\n";

  if (!st.out.empty()) {
    std::string csv = "schema,1\nP,S,quad_error\n";
    csv += fmt(cp.P) + "," + fmt(cp.S) + "," + fmt(cp.quad_error_estimate) +
           "\n";
    write_file(st.out, csv);

    run_manifest m;
    m.command = "eval";
    m.outputs.push_back(st.out);
    manifest_strategy(m, s, st.out);
    manifest_problem(m, st.prob);
    manifest_quad(m, st.quad);
    m.add("out", st.out);
    finish_manifest(m, st.out, t0);
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct validate_state {
  strategy_flags strat;
  problem_flags prob;
  quad_flags quad;
  sim_flags sim;
  std::string decoder_name = "exact";
  double z_max = 4.0;
  std::string out;
};

int run_validate(const validate_state& st) {
  const auto t0 = steady::now();
  const strategy s = resolve_strategy(st.strat);
  const problem_config cfg = st.prob.config();
  const quadrature_config qc = st.quad.config();
  const sim_config sim = st.sim.config();
  validate_strategy(s, cfg);
  if (!(st.z_max > 0.0)) {
    throw std::invalid_argument("--z-max must be > 0");
  }
  const decoder dec = st.decoder_name == "identity" ? decoder::identity()
                                                    : decoder::exact_mmse();

  const cost_point cp = strategy_cost(s, cfg, qc);
  const sim_result mr = simulate(s, cfg, sim, dec);
  const double zp = z_score(cp.P, mr.p_hat, mr.p_stderr);
  const double zs = z_score(cp.S, mr.s_hat, mr.s_stderr);
  const double worst = std::max(std::abs(zp), std::abs(zs));
  const bool pass = worst <= st.z_max;

  std::string table = "schema,1\nquantity,closed_form,monte_carlo,std_error,z\n";
  table += "P," + fmt(cp.P) + "," + fmt(mr.p_hat) + "," + fmt(mr.p_stderr) +
           "," + fmt(zp) + "\n";
  table += "S," + fmt(cp.S) + "," + fmt(mr.s_hat) + "," + fmt(mr.s_stderr) +
           "," + fmt(zs) + "\n";

  std::cout << table;
  std::cout << "samples = " << sim.samples << ", seed = " << sim.seed
            << ", decoder = " << st.decoder_name << "\n";
  std::cout << "verdict: " << (pass ? "PASS" : "FAIL") << " (max |z| = "
            << fmt(worst) << ", limit " << fmt(st.z_max) << ")\n";

  if (!st.out.empty()) {
    write_file(st.out, table);
    run_manifest m;
    m.command = "validate";
    m.outputs.push_back(st.out);
    manifest_strategy(m, s, st.out);
    manifest_problem(m, st.prob);
    manifest_quad(m, st.quad);
    manifest_sim(m, sim);
    m.add("decoder", st.decoder_name);
    m.add("z-max", fmt(st.z_max));
    m.add("out", st.out);
    finish_manifest(m, st.out, t0);
  }
  return pass ? exit_ok : exit_validation_failure;
}

// ---------------------------------------------------------------------------
// baselines
// ---------------------------------------------------------------------------

struct baselines_state {
  problem_flags prob;
  std::string p_grid_spec;
  std::string out;
};

int run_baselines(const baselines_state& st) {
  const auto t0 = steady::now();
  const problem_config cfg = st.prob.config();
  const std::string spec =
      st.p_grid_spec.empty() ? "0:" + fmt(cfg.Q) + ":101" : st.p_grid_spec;
  const std::vector<double> grid = parse_grid_spec(spec);

  const gaussian_envelope envelope(cfg);
  std::string csv = "schema,1\nP,S_linear,S_gaussian\n";
  for (double p : grid) {
    csv += fmt(p) + "," + fmt(linear_cost(p, cfg)) + "," + fmt(envelope(p)) +
           "\n";
  }

  if (st.out.empty()) {
    std::cout << csv;
  } else {
    write_file(st.out, csv);
    std::cout << "wrote " << st.out << " (" << grid.size() << " rows)\n";
    run_manifest m;
    m.command = "baselines";
    m.outputs.push_back(st.out);
    manifest_problem(m, st.prob);
    m.add("p-grid", spec);
    m.add("out", st.out);
    finish_manifest(m, st.out, t0);
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// foc
// ---------------------------------------------------------------------------

struct foc_state {
  std::string tag = "bpsk";
  problem_flags prob;
  quad_flags quad;
  std::string p_grid = "1e-2,1e-3,1e-4,1e-5";
  std::string out;
};

int run_foc(const foc_state& st) {
  const auto t0 = steady::now();
  const problem_config cfg = st.prob.config();
  const quadrature_config qc = st.quad.config();
  const std::vector<double> grid = parse_csv_doubles(st.p_grid, "--p-grid");

  const slope_diagnostic_result d = slope_diagnostic(st.tag, cfg, grid, qc);

  std::string csv = "schema,1\nP,slope,ratio\n";
  for (std::size_t i = 0; i < d.p_grid.size(); ++i) {
    csv += fmt(d.p_grid[i]) + "," + fmt(d.slopes[i]) + ",";
    if (i > 0) csv += fmt(d.divergence_ratio[i - 1]);
    csv += "\n";
  }

  if (st.out.empty()) {
    std::cout << csv;
  } else {
    write_file(st.out, csv);
    std::cout << "wrote " << st.out << "\n";
  }

  const bool ok = d.certified();
  const double decades = std::log10(d.p_grid.front() / d.p_grid.back());
  std::cout << "certification: " << (ok ? "PASSED" : "FAILED")
            << " (slopes negative with monotone magnitude growth over "
            << fmt(decades) << " decades of P)\n";

  if (!st.out.empty()) {
    run_manifest m;
    m.command = "foc";
    m.outputs.push_back(st.out);
    manifest_problem(m, st.prob);
    manifest_quad(m, st.quad);
    m.add("tag", st.tag);
    m.add("p-grid", st.p_grid);
    m.add("out", st.out);
    finish_manifest(m, st.out, t0);
  }
  return ok ? exit_ok : exit_validation_failure;
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

struct density_state {
  strategy_flags strat;
  problem_flags prob;
  std::optional<double> x_min;
  std::optional<double> x_max;
  int points = 2001;
  std::string out;
};

std::string density_dat(const std::vector<std::pair<double, double>>& table) {
  std::string dat = "x fX\n";
  for (const auto& [x, f] : table) dat += fmt(x) + " " + fmt(f) + "\n";
  return dat;
}

// Mirror-exact symmetric coordinates for closed-form (jump-free) densities.
std::vector<double> symmetric_coords(double hi, int points) {
  const int half = std::max(1, points / 2);
  const double step = hi / half;
  std::vector<double> xs;
  xs.reserve(2 * half + 1);
  for (int i = half; i >= 1; --i) xs.push_back(-(i * step));
  xs.push_back(0.0);
  for (int i = 1; i <= half; ++i) xs.push_back(i * step);
  return xs;
}

int run_density(const density_state& st) {
  const auto t0 = steady::now();
  const strategy s = resolve_strategy(st.strat);
  const problem_config cfg = st.prob.config();
  validate_strategy(s, cfg);
  if (st.points < 2) throw std::invalid_argument("--points must be >= 2");

  lope_params lp;
  const bool staircase = as_lope(s, lp);
  double sigma = 0.0;  // linear case
  if (!staircase) {
    const auto* lin = std::get_if<linear_strategy>(&s);
    if (lin == nullptr) {
      throw std::invalid_argument(
          "the two-point state is discrete (two atoms); it has no density "
          "to tabulate");
    }
    sigma = std::abs(std::sqrt(cfg.Q) - std::sqrt(lin->power_target));
    if (sigma == 0.0) {
      throw std::invalid_argument(
          "the linear state at P = Q is a point mass; it has no density");
    }
  }

  double lo, hi;
  if (st.x_min && st.x_max) {
    lo = *st.x_min;
    hi = *st.x_max;
    if (!(lo < hi)) throw std::invalid_argument("--x-min must be < --x-max");
  } else if (!st.x_min && !st.x_max) {
    const double reach =
        staircase ? std::max(lp.a.back(), lp.B.back()) + 6.0 * std::sqrt(cfg.Q)
                  : 8.0 * sigma;
    lo = -reach;
    hi = reach;
  } else {
    throw std::invalid_argument("--x-min and --x-max must be given together");
  }

  std::vector<std::pair<double, double>> table;
  if (staircase) {
    table = state_density_table(lp, cfg, lo, hi, st.points);
  } else {
    std::vector<double> xs;
    if (lo == -hi) {
      xs = symmetric_coords(hi, st.points);
    } else {
      const double step = (hi - lo) / (st.points - 1);
      for (int i = 0; i < st.points - 1; ++i) xs.push_back(lo + i * step);
      xs.push_back(hi);
    }
    table.reserve(xs.size());
    for (double x : xs) {
      table.emplace_back(x, std_normal_pdf(x / sigma) / sigma);
    }
  }

  write_file(st.out, density_dat(table));
  std::cout << "wrote " << st.out << " (" << table.size() << " rows over ["
            << fmt(lo) << ", " << fmt(hi) << "])\n";

  run_manifest m;
  m.command = "density";
  m.outputs.push_back(st.out);
  manifest_strategy(m, s, st.out);
  manifest_problem(m, st.prob);
  m.add("x-min", fmt(lo));
  m.add("x-max", fmt(hi));
  m.add("points", std::to_string(st.points));
  m.add("out", st.out);
  finish_manifest(m, st.out, t0);
  return exit_ok;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct sweep_state {
  int n = 0;
  problem_flags prob;
  quad_flags quad;
  opt_flags opt;
  std::string omegas = "0:1:101";
  int density_points = 1201;
  std::string out;
};

int run_sweep(const sweep_state& st) {
  const auto t0 = steady::now();
  if (st.n < 1) throw std::invalid_argument("--n must be >= 1");
  if (st.density_points < 2) {
    throw std::invalid_argument("--density-points must be >= 2");
  }
  const problem_config cfg = st.prob.config();
  const quadrature_config qc = st.quad.config();
  const std::vector<double> grid = parse_grid_spec(st.omegas);
  const sweep_options so = st.opt.sweep(qc);

  const frontier_sweep fsw = sweep(st.n, cfg, grid, so);

  const stdfs::path dir(st.out);
  stdfs::create_directories(dir);

  run_manifest m;
  m.command = "sweep";

  const stdfs::path frontier_path = dir / "frontier.csv";
  {
    std::ostringstream os;
    write_frontier_csv(os, fsw);
    write_file(frontier_path, os.str());
    m.outputs.push_back(frontier_path.string());
  }

  // One density artifact per requested omega (refinement records appear in
  // the CSV only).
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const frontier_record* rec = nullptr;
    for (const frontier_record& r : fsw.records) {
      if (r.omega == grid[i]) {
        rec = &r;
        break;
      }
    }
    if (rec == nullptr) continue;
    const double reach =
        std::max(rec->params.a.back(), rec->params.B.back()) +
        6.0 * std::sqrt(cfg.Q);
    const auto table = state_density_table(rec->params, cfg, -reach, reach,
                                           st.density_points);
    char name[32];
    std::snprintf(name, sizeof name, "density_w%03zu.dat", i);
    const stdfs::path dat_path = dir / name;
    write_file(dat_path, density_dat(table));
    m.outputs.push_back(dat_path.string());
  }

  int dominated = 0, unconverged = 0;
  for (const frontier_record& r : fsw.records) {
    dominated += r.dominated ? 1 : 0;
    unconverged += r.converged ? 0 : 1;
  }
  std::cout << "sweep n=" << st.n << ": " << fsw.records.size() << " records ("
            << grid.size() << " requested, "
            << fsw.records.size() - grid.size() << " refined), " << dominated
            << " dominated, " << unconverged << " unconverged\n";
  std::cout << "wrote " << frontier_path.string() << "\n";

  m.add("n", std::to_string(st.n));
  manifest_problem(m, st.prob);
  manifest_quad(m, st.quad);
  manifest_opt(m, st.opt);
  m.add("omegas", st.omegas);
  m.add("density-points", std::to_string(st.density_points));
  m.add("out", st.out);
  m.duration_seconds = elapsed_seconds(t0);
  write_file(dir / "manifest.txt", m.text());
  return exit_ok;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"witsbench — two-stage control/estimation cost workbench"};
  app.set_version_flag("--version", std::string(version_string));
  app.require_subcommand(1);
  // One config option serves every subcommand: manifests use command-prefixed
  // keys (eval.Q=1), and fallthrough lets `witsbench eval --config file` find
  // the option even though it is defined here.
  app.set_config("--config", "",
                 "Replay flags from a run manifest (key=value file)");

  eval_state ev;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Closed-form power and estimation cost of one controller");
  add_strategy_flags(eval_cmd, ev.strat);
  add_problem_flags(eval_cmd, ev.prob);
  add_quad_flags(eval_cmd, ev.quad);
  eval_cmd->add_option("--out", ev.out, "CSV output path");
  eval_cmd->fallthrough();

  validate_state va;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Cross-check closed forms against Monte-Carlo simulation");
  add_strategy_flags(validate_cmd, va.strat);
  add_problem_flags(validate_cmd, va.prob);
  add_quad_flags(validate_cmd, va.quad);
  add_sim_flags(validate_cmd, va.sim);
  validate_cmd
      ->add_option("--decoder", va.decoder_name,
                   "Second-stage decoder: exact or identity")
      ->check(CLI::IsMember({"exact", "identity"}))
      ->capture_default_str();
  validate_cmd->add_option("--z-max", va.z_max, "Failure threshold on |z|")
      ->capture_default_str();
  validate_cmd->add_option("--out", va.out, "CSV output path");
  validate_cmd->fallthrough();

  baselines_state ba;
  CLI::App* baselines_cmd = app.add_subcommand(
      "baselines", "Linear and randomized-envelope cost curves");
  add_problem_flags(baselines_cmd, ba.prob);
  baselines_cmd->add_option("--p-grid", ba.p_grid_spec,
                            "Power grid start:end:count (default 0:Q:101)");
  baselines_cmd->add_option("--out", ba.out, "CSV output path");
  baselines_cmd->fallthrough();

  foc_state fo;
  CLI::App* foc_cmd = app.add_subcommand(
      "foc", "First-order slope diagnostic toward P = 0");
  foc_cmd->add_option("--tag", fo.tag, "Strategy family: linear or bpsk")
      ->check(CLI::IsMember({"linear", "bpsk"}))
      ->capture_default_str();
  add_problem_flags(foc_cmd, fo.prob);
  add_quad_flags(foc_cmd, fo.quad);
  foc_cmd->add_option("--p-grid", fo.p_grid,
                      "Comma-separated decreasing powers")
      ->capture_default_str();
  foc_cmd->add_option("--out", fo.out, "CSV output path");
  foc_cmd->fallthrough();

  density_state de;
  CLI::App* density_cmd = app.add_subcommand(
      "density", "Tabulate the post-action state density to a DAT file");
  add_strategy_flags(density_cmd, de.strat);
  add_problem_flags(density_cmd, de.prob);
  density_cmd->add_option("--x-min", de.x_min, "Grid lower edge");
  density_cmd->add_option("--x-max", de.x_max, "Grid upper edge");
  density_cmd->add_option("--points", de.points, "Base grid point count")
      ->capture_default_str();
  density_cmd->add_option("--out", de.out, "DAT output path")->required();
  density_cmd->fallthrough();

  sweep_state sw;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Trace the power-estimation frontier over an omega grid");
  sweep_cmd->add_option("--n", sw.n, "Staircase step count")->required();
  add_problem_flags(sweep_cmd, sw.prob);
  add_quad_flags(sweep_cmd, sw.quad);
  add_opt_flags(sweep_cmd, sw.opt);
  sweep_cmd->add_option("--omegas", sw.omegas,
                        "Weight grid start:end:count, endpoints inclusive")
      ->capture_default_str();
  sweep_cmd->add_option("--density-points", sw.density_points,
                        "Grid size of per-omega density artifacts")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "Output directory")->required();
  sweep_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return exit_usage;
  }

  try {
    if (app.got_subcommand(eval_cmd)) return run_eval(ev);
    if (app.got_subcommand(validate_cmd)) return run_validate(va);
    if (app.got_subcommand(baselines_cmd)) return run_baselines(ba);
    if (app.got_subcommand(foc_cmd)) return run_foc(fo);
    if (app.got_subcommand(density_cmd)) return run_density(de);
    if (app.got_subcommand(sweep_cmd)) return run_sweep(sw);
  } catch (const parse_error& e) {
    std::cerr << "parse error (line " << e.line() << ", column " << e.column()
              << "): " << e.what() << "\n";
    return exit_usage;
  } catch (const quadrature_error& e) {
    std::cerr << "numerical non-convergence: " << e.what()
              << "\npartial value = " << fmt(e.partial_value())
              << ", error estimate = " << fmt(e.error_estimate()) << "\n";
    return exit_nonconvergence;
  } catch (const overflow_error& e) {
    std::cerr << "numerical overflow: " << e.what()
              << " (log magnitude " << fmt(e.log_magnitude()) << ")\n";
    return exit_nonconvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation_failure;
  }
  return exit_usage;
}
