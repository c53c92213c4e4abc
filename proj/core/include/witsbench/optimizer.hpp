#pragma once

#include <iosfwd>
#include <vector>

#include "witsbench/costs.hpp"

namespace witsbench {

/// Scalarized objective omega * P + (1 - omega) * S over the n-step
/// staircase family.  omega = 1 minimizes power alone, omega = 0 minimizes
/// estimation cost alone; the trade-off constant is k^2 = omega / (1 -
/// omega).
struct weighted_objective {
  double omega = 0.5;
  int n = 1;
  problem_config cfg;
  quadrature_config qc;

  /// k^2 = omega / (1 - omega); +infinity at omega = 1.
  double k_squared() const;

  /// Inverse map omega = k^2 / (k^2 + 1) for k^2 >= 0.
  static double omega_from_k_squared(double k2);

  /// Throws std::invalid_argument unless omega is finite in [0, 1], n >= 1,
  /// and cfg / qc validate.
  void validate() const;
};

/// Unconstrained coordinates for an n-step controller: a length-(2n-1)
/// vector of square roots of increments,
///
///   a_1 = v_0^2,        a_{i+1} = a_i + v_i^2        (i = 1..n-1)
///   B_1 = 0,            B_{i+1} = B_i + v_{n+i-1}^2  (i = 1..n-1)
///
/// so every decoded parameter set satisfies the ordering constraints by
/// construction and the search needs no feasibility handling at all.
struct free_params {
  std::vector<double> v;

  /// Steps encoded: n = (v.size() + 1) / 2.
  int n() const { return static_cast<int>((v.size() + 1) / 2); }

  /// Throws std::invalid_argument unless v has odd positive length and all
  /// entries are finite.
  void validate() const;

  static free_params encode(const lope_params& p);
  lope_params decode() const;
};

double evaluate_objective(const free_params& fp, const weighted_objective& obj);

/// Options of one local search.  Cold starts are a fixed, deterministic set
/// of dispersed initializations scaled by sqrt(Q) (see cold_starts);
/// restarts caps how many of them are used.  A warm start and any
/// caller-supplied extra starts are searched in addition to the cold set.
struct optimize_options {
  int restarts = 8;    ///< cold starts used (clamped to the available 8)
  int max_iters = 0;   ///< per start; 0 selects 400 + 200 * dimension
  double x_tol = 1e-6;
  double f_tol = 1e-9;
  bool use_warm = false;
  lope_params warm_params;                ///< consulted when use_warm
  std::vector<lope_params> extra_starts;  ///< additional start points
};

/// One optimized point of the trade-off curve.
struct frontier_record {
  double omega = 0.0;
  double k_squared = 0.0;
  lope_params params;
  cost_point point;
  double objective_value = 0.0;
  bool converged = false;   ///< true when some start met the tolerances
  int restarts_used = 0;    ///< total starts searched
  bool dominated = false;   ///< flagged by sweep(); records are never deleted
};

/// Records of a full omega sweep, kept in ascending omega order.
struct frontier_sweep {
  int n = 1;
  problem_config cfg;
  std::vector<frontier_record> records;
};

/// The 8 deterministic cold starts for an n-step search: six uniform
/// quantizers of increasing scale (the finest reaching 3 sqrt(Q)), one
/// two-point-like start (large equal amplitudes, breakpoints near 0), and
/// one spread start with moderate amplitudes.
std::vector<lope_params> cold_starts(int n, const problem_config& cfg);

/// Uniform-quantizer parameters (a_i = (i - 1/2) d, B_i = (i - 1) d) whose
/// closed-form power is as close as possible to p_target, found by a
/// deterministic scan over the step size d.
lope_params quantizer_start(int n, double p_target, const problem_config& cfg);

/// Derivative-free local search: a reflection/expansion/contraction simplex
/// scheme run from every start, searching in free_params space with a
/// mildly relaxed quadrature tolerance, then re-evaluating the winner at the
/// objective's own tolerances.  Ties between starts are broken by lowest
/// objective, then lexicographically smallest decoded parameter vector.
/// Never throws for non-convergence; the flag is recorded instead.
frontier_record optimize_at(const weighted_objective& obj,
                            const optimize_options& opts = {});

/// Sweep controls.  The omega grid is swept from high omega (low power) to
/// low omega with warm-started chaining; afterwards the sweep refines the
/// high-curvature knee of the frontier: wherever second differences of P
/// along the grid spike (adjacent records more than refine_gap apart in P),
/// the indifference weight of the two endpoints is inserted and optimized
/// with gap-interior quantizer starts until gaps close or the budget runs
/// out.
struct sweep_options {
  optimize_options opt;
  quadrature_config qc;
  int warm_restarts = 4;   ///< cold starts at warm-chained grid points
  double refine_gap = 0.01;
  int refine_budget = 128;
};

/// The default 101-point uniform omega grid on [0, 1].
std::vector<double> default_omega_grid();

/// Warm-started sweep across an ascending omega grid; records come back
/// sorted by omega with dominated points flagged (not deleted).
frontier_sweep sweep(int n, const problem_config& cfg,
                     const std::vector<double>& omegas,
                     const sweep_options& opts = {});

/// Result of a power-targeted optimization (see optimize_power_targeted).
struct targeted_result {
  lope_params params;
  cost_point point;
  bool converged = false;
  int restarts_used = 0;
};

/// Minimizes S + penalty_weight * (P - p_target)^2, pinning the optimized
/// point to a prescribed power level; used for matched-power comparisons
/// across step counts.  Starts from quantizers bracketing the target plus
/// any caller-supplied extras.
targeted_result optimize_power_targeted(int n, double p_target,
                                        const problem_config& cfg,
                                        const quadrature_config& qc = {},
                                        const optimize_options& opts = {},
                                        double penalty_weight = 1e4);

/// Embeds an n-step controller into the n_target-step family by repeating
/// its last (a, B) pair; the extra segments carry zero probability, so the
/// padded controller reproduces the original (P, S) exactly.
lope_params pad_params(const lope_params& p, int n_target);

/// CSV serialization: a `schema,1` version row, a header row
/// omega,k_squared,P,S,objective,converged,a_1..a_n,B_1..B_n, then one row
/// per record with doubles printed round-trip exact.
void write_frontier_csv(std::ostream& os, const frontier_sweep& fs);

}  // namespace witsbench
