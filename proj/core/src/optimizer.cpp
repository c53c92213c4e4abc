#include "witsbench/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace witsbench {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Simplex search (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
// Deterministic: fixed initial offsets, stable ordering, no randomness.
// ---------------------------------------------------------------------------

struct nm_result {
  std::vector<double> x;
  double fx = k_inf;
  int iters = 0;
  bool converged = false;
};

nm_result nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, int max_iters, double x_tol, double f_tol) {
  const int dim = static_cast<int>(x0.size());
  struct vertex {
    std::vector<double> x;
    double fx;
  };
  std::vector<vertex> simp;
  simp.reserve(dim + 1);
  simp.push_back({x0, f(x0)});
  for (int i = 0; i < dim; ++i) {
    std::vector<double> xi = x0;
    xi[i] += std::max(0.05, 0.1 * std::abs(xi[i]));
    const double fxi = f(xi);
    simp.push_back({std::move(xi), fxi});
  }
  const auto by_value = [](const vertex& a, const vertex& b) {
    return a.fx < b.fx;
  };
  std::stable_sort(simp.begin(), simp.end(), by_value);

  nm_result out;
  int it = 0;
  for (; it < max_iters; ++it) {
    const double f_spread = simp.back().fx - simp.front().fx;
    double x_spread = 0.0;
    for (const vertex& v : simp) {
      for (int i = 0; i < dim; ++i) {
        x_spread = std::max(x_spread, std::abs(v.x[i] - simp.front().x[i]));
      }
    }
    if (f_spread <= f_tol && x_spread <= x_tol) {
      out.converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (int v = 0; v < dim; ++v) {
      for (int i = 0; i < dim; ++i) centroid[i] += simp[v].x[i];
    }
    for (int i = 0; i < dim; ++i) centroid[i] /= dim;

    const std::vector<double>& worst = simp.back().x;
    const double f_worst = simp.back().fx;

    std::vector<double> xr(dim);
    for (int i = 0; i < dim; ++i) xr[i] = 2.0 * centroid[i] - worst[i];
    const double fr = f(xr);

    if (fr < simp.front().fx) {
      std::vector<double> xe(dim);
      for (int i = 0; i < dim; ++i) xe[i] = 3.0 * centroid[i] - 2.0 * worst[i];
      const double fe = f(xe);
      if (fe < fr) {
        simp.back() = {std::move(xe), fe};
      } else {
        simp.back() = {std::move(xr), fr};
      }
    } else if (fr < simp[dim - 1].fx) {
      simp.back() = {std::move(xr), fr};
    } else {
      const bool outside = fr < f_worst;
      std::vector<double> xc(dim);
      for (int i = 0; i < dim; ++i) {
        xc[i] = outside ? centroid[i] + 0.5 * (xr[i] - centroid[i])
                        : centroid[i] + 0.5 * (worst[i] - centroid[i]);
      }
      const double fc = f(xc);
      if ((outside && fc <= fr) || (!outside && fc < f_worst)) {
        simp.back() = {std::move(xc), fc};
      } else {
        for (int v = 1; v <= dim; ++v) {
          for (int i = 0; i < dim; ++i) {
            simp[v].x[i] = simp[0].x[i] + 0.5 * (simp[v].x[i] - simp[0].x[i]);
          }
          simp[v].fx = f(simp[v].x);
        }
      }
    }
    std::stable_sort(simp.begin(), simp.end(), by_value);
  }
  out.iters = it;
  out.x = simp.front().x;
  out.fx = simp.front().fx;
  return out;
}

// Searches run on a mildly relaxed tolerance; winners are re-evaluated at
// the caller's own tolerance before anything is stored or compared across
// step counts.
quadrature_config relaxed_search_config(const quadrature_config& qc) {
  quadrature_config r = qc;
  r.abs_tol = std::max(qc.abs_tol, 1e-9);
  r.rel_tol = std::max(qc.rel_tol, 1e-7);
  return r;
}

bool lex_less(const lope_params& x, const lope_params& y) {
  for (int i = 0; i < x.n && i < y.n; ++i) {
    if (x.a[i] != y.a[i]) return x.a[i] < y.a[i];
  }
  for (int i = 0; i < x.n && i < y.n; ++i) {
    if (x.B[i] != y.B[i]) return x.B[i] < y.B[i];
  }
  return x.n < y.n;
}

// Objective wrapper used inside the simplex loop: numerical failures of the
// quadrature are treated as infinitely bad points (the search walks away
// from them) instead of aborting the run.
double guarded_value(const std::function<double()>& eval) {
  try {
    const double v = eval();
    return std::isnan(v) ? k_inf : v;
  } catch (const quadrature_error&) {
    return k_inf;
  } catch (const overflow_error&) {
    return k_inf;
  }
}

struct multistart_best {
  nm_result result;
  lope_params params;
  bool any_converged = false;
  int starts_used = 0;
};

multistart_best run_starts(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<lope_params>& starts, int max_iters, double x_tol,
    double f_tol) {
  multistart_best best;
  bool have = false;
  for (const lope_params& s : starts) {
    nm_result r = nelder_mead(f, free_params::encode(s).v, max_iters, x_tol,
                              f_tol);
    best.any_converged = best.any_converged || r.converged;
    ++best.starts_used;
    free_params fp;
    fp.v = r.x;
    lope_params rp = fp.decode();
    if (!have || r.fx < best.result.fx ||
        (r.fx == best.result.fx && lex_less(rp, best.params))) {
      best.result = std::move(r);
      best.params = std::move(rp);
      have = true;
    }
  }
  return best;
}

int auto_iters(const optimize_options& opts, int dim) {
  if (opts.max_iters > 0) return opts.max_iters;
  return 400 + 200 * dim;
}

void check_options(const optimize_options& opts) {
  if (opts.restarts < 0) {
    throw std::invalid_argument("optimize_options.restarts must be >= 0");
  }
  if (!(opts.x_tol > 0.0) || !(opts.f_tol > 0.0)) {
    throw std::invalid_argument("optimize_options tolerances must be > 0");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// weighted_objective / free_params
// ---------------------------------------------------------------------------

double weighted_objective::k_squared() const {
  if (omega >= 1.0) return k_inf;
  return omega / (1.0 - omega);
}

double weighted_objective::omega_from_k_squared(double k2) {
  if (std::isnan(k2) || k2 < 0.0) {
    throw std::invalid_argument("k_squared must be >= 0");
  }
  if (std::isinf(k2)) return 1.0;
  return k2 / (k2 + 1.0);
}

void weighted_objective::validate() const {
  if (!std::isfinite(omega) || omega < 0.0 || omega > 1.0) {
    throw std::invalid_argument("omega must lie in [0, 1]");
  }
  if (n < 1) throw std::invalid_argument("step count n must be >= 1");
  cfg.validate();
  qc.validate();
}

void free_params::validate() const {
  if (v.empty() || v.size() % 2 == 0) {
    throw std::invalid_argument("free_params needs odd positive length 2n-1");
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("free_params entries must be finite");
    }
  }
}

free_params free_params::encode(const lope_params& p) {
  p.validate();
  free_params fp;
  fp.v.resize(2 * static_cast<std::size_t>(p.n) - 1);
  double prev = 0.0;
  for (int i = 0; i < p.n; ++i) {
    fp.v[i] = std::sqrt(p.a[i] - prev);
    prev = p.a[i];
  }
  for (int i = 1; i < p.n; ++i) {
    fp.v[p.n + i - 1] = std::sqrt(p.B[i] - p.B[i - 1]);
  }
  return fp;
}

lope_params free_params::decode() const {
  validate();
  const int steps = n();
  lope_params p;
  p.n = steps;
  p.a.resize(steps);
  p.B.resize(steps);
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    acc += v[i] * v[i];
    p.a[i] = acc;
  }
  p.B[0] = 0.0;
  acc = 0.0;
  for (int i = 1; i < steps; ++i) {
    acc += v[steps + i - 1] * v[steps + i - 1];
    p.B[i] = acc;
  }
  return p;
}

double evaluate_objective(const free_params& fp,
                          const weighted_objective& obj) {
  obj.validate();
  if (fp.n() != obj.n) {
    throw std::invalid_argument(
        "free_params length does not match the objective's step count");
  }
  const lope_params p = fp.decode();
  const double power = power_cost(p, obj.cfg);
  if (obj.omega == 1.0) return power;  // weight degeneracy: power alone
  const double s = estimation_cost(p, obj.cfg, obj.qc).S;
  return obj.omega * power + (1.0 - obj.omega) * s;
}

// ---------------------------------------------------------------------------
// Starts
// ---------------------------------------------------------------------------

namespace {

lope_params uniform_quantizer(int n, double d) {
  lope_params p;
  p.n = n;
  p.a.resize(n);
  p.B.resize(n);
  for (int i = 0; i < n; ++i) {
    p.a[i] = (i + 0.5) * d;
    p.B[i] = i * d;
  }
  return p;
}

}  // namespace

std::vector<lope_params> cold_starts(int n, const problem_config& cfg) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("step count n must be >= 1");
  const double sq = std::sqrt(cfg.Q);

  std::vector<lope_params> out;
  out.reserve(8);
  for (double span : {0.15, 0.5, 1.0, 1.5, 2.25, 3.0}) {
    out.push_back(uniform_quantizer(n, span * sq / n));
  }

  // 0.8 (not 0.75) keeps this start distinct from the span-1.5 uniform
  // quantizer when n = 1, so no restart is wasted on a duplicate.
  lope_params two_point_like;
  two_point_like.n = n;
  two_point_like.a.assign(n, 0.8 * sq);
  two_point_like.B.resize(n);
  for (int i = 0; i < n; ++i) two_point_like.B[i] = 0.02 * sq * i;
  out.push_back(std::move(two_point_like));

  lope_params spread;
  spread.n = n;
  spread.a.assign(n, 0.35 * sq);
  spread.B.resize(n);
  for (int i = 0; i < n; ++i) spread.B[i] = 0.6 * sq * i;
  out.push_back(std::move(spread));

  return out;
}

lope_params quantizer_start(int n, double p_target,
                            const problem_config& cfg) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("step count n must be >= 1");
  if (!std::isfinite(p_target) || p_target < 0.0) {
    throw std::invalid_argument("power target must be finite and >= 0");
  }
  const int scan_points = 4096;
  const double d_max = 6.0 * std::sqrt(cfg.Q) / std::sqrt(double(n));
  double best_d = 0.0;
  double best_miss = p_target;  // d = 0 gives power 0
  for (int k = 1; k <= scan_points; ++k) {
    const double d = d_max * k / scan_points;
    const double miss = std::abs(power_cost(uniform_quantizer(n, d), cfg) -
                                 p_target);
    if (miss < best_miss) {
      best_miss = miss;
      best_d = d;
    }
  }
  return uniform_quantizer(n, best_d);
}

// ---------------------------------------------------------------------------
// optimize_at
// ---------------------------------------------------------------------------

frontier_record optimize_at(const weighted_objective& obj,
                            const optimize_options& opts) {
  obj.validate();
  check_options(opts);
  const int dim = 2 * obj.n - 1;

  std::vector<lope_params> starts;
  {
    const std::vector<lope_params> colds = cold_starts(obj.n, obj.cfg);
    const int kept = std::min<int>(opts.restarts,
                                   static_cast<int>(colds.size()));
    starts.assign(colds.begin(), colds.begin() + kept);
  }
  for (const lope_params& e : opts.extra_starts) {
    e.validate();
    if (e.n != obj.n) {
      throw std::invalid_argument("extra start has the wrong step count");
    }
    starts.push_back(e);
  }
  if (opts.use_warm) {
    opts.warm_params.validate();
    if (opts.warm_params.n != obj.n) {
      throw std::invalid_argument("warm start has the wrong step count");
    }
    starts.push_back(opts.warm_params);
  }
  if (starts.empty()) {
    throw std::invalid_argument("optimize_at needs at least one start");
  }

  weighted_objective search = obj;
  search.qc = relaxed_search_config(obj.qc);
  const auto f = [&](const std::vector<double>& x) {
    return guarded_value([&] {
      free_params fp;
      fp.v = x;
      return evaluate_objective(fp, search);
    });
  };

  const multistart_best best = run_starts(f, starts, auto_iters(opts, dim),
                                          opts.x_tol, opts.f_tol);

  frontier_record rec;
  rec.omega = obj.omega;
  rec.k_squared = obj.k_squared();
  rec.params = best.params;
  rec.converged = best.any_converged;
  rec.restarts_used = best.starts_used;
  try {
    rec.point = estimation_cost(best.params, obj.cfg, obj.qc);
  } catch (const quadrature_error& e) {
    rec.point.P = power_cost(best.params, obj.cfg);
    rec.point.S = e.partial_value();
    rec.point.quad_error_estimate = e.error_estimate();
    rec.converged = false;
  }
  rec.objective_value =
      obj.omega * rec.point.P + (1.0 - obj.omega) * rec.point.S;
  return rec;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::vector<double> default_omega_grid() {
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = i / 100.0;
  return grid;
}

frontier_sweep sweep(int n, const problem_config& cfg,
                     const std::vector<double>& omegas,
                     const sweep_options& opts) {
  cfg.validate();
  opts.qc.validate();
  check_options(opts.opt);
  if (n < 1) throw std::invalid_argument("step count n must be >= 1");
  if (omegas.empty()) {
    throw std::invalid_argument("sweep needs a nonempty omega grid");
  }
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!std::isfinite(omegas[i]) || omegas[i] < 0.0 || omegas[i] > 1.0) {
      throw std::invalid_argument("omega grid entries must lie in [0, 1]");
    }
    if (i > 0 && omegas[i] < omegas[i - 1]) {
      throw std::invalid_argument("omega grid must be sorted ascending");
    }
  }

  // High omega means low power; chaining downward grows the solution from
  // the zero-power end, which deforms continuously along most of the curve.
  std::vector<frontier_record> recs;
  recs.reserve(omegas.size());
  bool have_warm = false;
  lope_params warm;
  for (std::size_t i = omegas.size(); i-- > 0;) {
    weighted_objective obj{omegas[i], n, cfg, opts.qc};
    optimize_options o = opts.opt;
    if (have_warm) {
      o.use_warm = true;
      o.warm_params = warm;
      o.restarts = std::min(o.restarts, opts.warm_restarts);
    }
    frontier_record rec = optimize_at(obj, o);
    warm = rec.params;
    have_warm = true;
    recs.push_back(std::move(rec));
  }
  std::reverse(recs.begin(), recs.end());

  // Knee refinement.  A jump in P between adjacent grid records is a spike
  // in the second differences of P(omega) — the signature of the frontier's
  // high-curvature knee, where the scalarized solution hops between
  // regimes.  The two endpoints of the widest jump are re-optimized at
  // their indifference weight (the omega whose supporting line passes
  // through both), with quantizer starts pinned inside the gap so interior
  // solutions can win.
  std::set<double> used(omegas.begin(), omegas.end());
  std::set<std::pair<double, double>> blocked;
  const auto collides = [&](double w) {
    auto it = used.lower_bound(w - 1e-12);
    return it != used.end() && *it <= w + 1e-12;
  };
  int budget = opts.refine_budget;
  while (budget > 0) {
    int widest = -1;
    double widest_gap = opts.refine_gap;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
      if (blocked.count({recs[i].omega, recs[i + 1].omega})) continue;
      const double gap = std::abs(recs[i].point.P - recs[i + 1].point.P);
      if (gap > widest_gap) {
        widest_gap = gap;
        widest = static_cast<int>(i);
      }
    }
    if (widest < 0) break;

    const frontier_record& lo = recs[widest];      // smaller omega, larger P
    const frontier_record& hi = recs[widest + 1];  // larger omega, smaller P
    const double dp = lo.point.P - hi.point.P;
    const double ds = lo.point.S - hi.point.S;
    double wstar = 0.5 * (lo.omega + hi.omega);
    if (std::abs(dp) > 1e-12) {
      const double slope = std::abs(ds / dp);
      const double indifference = slope / (1.0 + slope);
      if (indifference > lo.omega + 1e-9 && indifference < hi.omega - 1e-9) {
        wstar = indifference;
      }
    }
    if (collides(wstar)) {
      const double mid = 0.5 * (lo.omega + hi.omega);
      if (collides(mid)) {
        blocked.insert({lo.omega, hi.omega});
        continue;
      }
      wstar = mid;
    }

    const double p_small = std::min(lo.point.P, hi.point.P);
    const double p_big = std::max(lo.point.P, hi.point.P);
    optimize_options o = opts.opt;
    o.restarts = 0;
    o.use_warm = false;
    o.extra_starts.clear();
    o.extra_starts.push_back(lo.params);
    o.extra_starts.push_back(hi.params);
    for (double frac : {0.25, 0.5, 0.75}) {
      o.extra_starts.push_back(
          quantizer_start(n, p_small + frac * (p_big - p_small), cfg));
    }
    weighted_objective obj{wstar, n, cfg, opts.qc};
    frontier_record rec = optimize_at(obj, o);
    used.insert(wstar);
    recs.insert(recs.begin() + widest + 1, std::move(rec));
    --budget;
  }

  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t j = 0; j < recs.size(); ++j) {
      if (i == j) continue;
      const cost_point& a = recs[i].point;
      const cost_point& b = recs[j].point;
      if (b.P <= a.P && b.S <= a.S && (b.P < a.P || b.S < a.S)) {
        recs[i].dominated = true;
        break;
      }
    }
  }

  frontier_sweep fs;
  fs.n = n;
  fs.cfg = cfg;
  fs.records = std::move(recs);
  return fs;
}

// ---------------------------------------------------------------------------
// Power-targeted optimization and nesting support
// ---------------------------------------------------------------------------

targeted_result optimize_power_targeted(int n, double p_target,
                                        const problem_config& cfg,
                                        const quadrature_config& qc,
                                        const optimize_options& opts,
                                        double penalty_weight) {
  cfg.validate();
  qc.validate();
  check_options(opts);
  if (n < 1) throw std::invalid_argument("step count n must be >= 1");
  if (!std::isfinite(p_target) || p_target < 0.0) {
    throw std::invalid_argument("power target must be finite and >= 0");
  }
  if (!(penalty_weight > 0.0)) {
    throw std::invalid_argument("penalty weight must be > 0");
  }
  const int dim = 2 * n - 1;

  std::vector<lope_params> starts;
  for (double scale : {1.0, 0.75, 1.3}) {
    starts.push_back(quantizer_start(n, scale * p_target, cfg));
  }
  for (const lope_params& e : opts.extra_starts) {
    e.validate();
    if (e.n != n) {
      throw std::invalid_argument("extra start has the wrong step count");
    }
    starts.push_back(e);
  }
  if (opts.use_warm) {
    opts.warm_params.validate();
    if (opts.warm_params.n != n) {
      throw std::invalid_argument("warm start has the wrong step count");
    }
    starts.push_back(opts.warm_params);
  }

  const quadrature_config search_qc = relaxed_search_config(qc);
  const auto f = [&](const std::vector<double>& x) {
    return guarded_value([&] {
      free_params fp;
      fp.v = x;
      const lope_params p = fp.decode();
      const double power = power_cost(p, cfg);
      const double s = estimation_cost(p, cfg, search_qc).S;
      const double miss = power - p_target;
      return s + penalty_weight * miss * miss;
    });
  };

  const multistart_best best = run_starts(f, starts, auto_iters(opts, dim),
                                          opts.x_tol, opts.f_tol);

  targeted_result out;
  out.params = best.params;
  out.converged = best.any_converged;
  out.restarts_used = best.starts_used;
  try {
    out.point = estimation_cost(best.params, cfg, qc);
  } catch (const quadrature_error& e) {
    out.point.P = power_cost(best.params, cfg);
    out.point.S = e.partial_value();
    out.point.quad_error_estimate = e.error_estimate();
    out.converged = false;
  }
  return out;
}

lope_params pad_params(const lope_params& p, int n_target) {
  p.validate();
  if (n_target < p.n) {
    throw std::invalid_argument("cannot pad to fewer steps");
  }
  lope_params out = p;
  out.n = n_target;
  out.a.resize(n_target, p.a.back());
  out.B.resize(n_target, p.B.back());
  return out;
}

// ---------------------------------------------------------------------------
// CSV serialization
// ---------------------------------------------------------------------------

void write_frontier_csv(std::ostream& os, const frontier_sweep& fs) {
  os << "schema,1\n";
  os << "omega,k_squared,P,S,objective,converged";
  for (int i = 1; i <= fs.n; ++i) os << ",a_" << i;
  for (int i = 1; i <= fs.n; ++i) os << ",B_" << i;
  os << "\n";
  for (const frontier_record& rec : fs.records) {
    os << fmt_double(rec.omega) << ',' << fmt_double(rec.k_squared) << ','
       << fmt_double(rec.point.P) << ',' << fmt_double(rec.point.S) << ','
       << fmt_double(rec.objective_value) << ',' << (rec.converged ? 1 : 0);
    for (int i = 0; i < fs.n; ++i) os << ',' << fmt_double(rec.params.a[i]);
    for (int i = 0; i < fs.n; ++i) os << ',' << fmt_double(rec.params.B[i]);
    os << "\n";
  }
}

}  // namespace witsbench
