#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "witsbench/errors.hpp"

namespace witsbench {

/// The ambient two-stage estimation problem: a Gaussian source of variance Q
/// is acted on by the first decision maker, then observed through additive
/// Gaussian noise of variance N by the second.
struct problem_config {
  double Q = 1.0;  ///< variance of the source x0 ~ N(0, Q)
  double N = 0.1;  ///< variance of the observation noise z1 ~ N(0, N)

  /// Derived signal-to-noise ratio Q/N (reported, never stored).
  double snr() const { return Q / N; }

  /// Throws std::invalid_argument unless Q > 0 and N > 0 (finite).
  void validate() const;
};

/// Parameters of an n-step staircase controller ("LoPE" family): the first
/// decision maker subtracts amplitude a_i from the source magnitude whenever
/// |x0| falls in [B_i, B_{i+1}), acting with the opposite sign of x0.
///
///   0 <= a_1 <= a_2 <= ... <= a_n  (amplitudes)
///   0  = B_1 <= B_2 <= ... <= B_n  (breakpoints; virtual B_{n+1} = +inf)
///
/// Coincident breakpoints are legal and simply give the squeezed segment
/// zero probability; the optimizer's reparameterization can land on them.
struct lope_params {
  int n = 1;
  std::vector<double> a;
  std::vector<double> B;

  /// Throws std::invalid_argument on any violation of the ordering
  /// constraints above, size mismatches, or non-finite entries.
  void validate() const;

  /// Index in [0, n) of the segment containing magnitude t = |x0|, i.e. the
  /// largest i with B[i] <= t.  Requires t >= 0.
  int segment_index(double t) const;
};

/// First-decision-maker families.  The second decision maker is never a
/// stored object: it is always the exact conditional-mean estimator, realized
/// by costs::conditional_mean and the decoder choices in montecarlo.
struct zero_strategy {};

/// Best linear controller, parameterized by its power target P so the two
/// regimes (attenuate toward zero for P <= Q, overshoot to a constant for
/// P > Q) are selected exactly as in the classical linear analysis.
struct linear_strategy {
  double power_target = 0.0;
};

/// One-step special case u1 = -a * sign(x0) (binary antipodal signaling).
struct bpsk_strategy {
  double a = 0.0;
};

/// u1 = a * sign(x0) - x0: collapses the state to the two points +/-a.
struct two_point_strategy {
  double a = 0.0;
};

struct lope_strategy {
  lope_params params;
};

using strategy = std::variant<zero_strategy, linear_strategy, bpsk_strategy,
                              two_point_strategy, lope_strategy>;

/// Stable lowercase tag for a strategy ("zero", "linear", "bpsk",
/// "two_point", "lope"), used by serialization and output files.
std::string strategy_kind(const strategy& s);

/// Validates the strategy's own parameters (amplitudes >= 0, lope ordering,
/// linear power target >= 0).  Throws std::invalid_argument.
void validate_strategy(const strategy& s, const problem_config& cfg);

/// The lope_params equivalent of a strategy, when one exists exactly:
/// lope stays itself, bpsk(a) maps to n=1, a=[a], B=[0], zero maps to n=1,
/// a=[0], B=[0].  Returns false for linear and two-point.
bool as_lope(const strategy& s, lope_params& out);

/// First decision maker's action u1 = gamma1(x0).  sign(0) resolves to +1,
/// and the staircase segments are half-open: [B_i, B_{i+1}) on the right,
/// (-B_{i+1}, -B_i] on the left.  Throws std::domain_error for non-finite
/// x0.
double apply_gamma1(const strategy& s, double x0, const problem_config& cfg);

/// Post-action state x1 = x0 + u1.  Piecewise linear with slope one in each
/// segment for the staircase families.
double system_state(const strategy& s, double x0, const problem_config& cfg);

/// Per-segment probabilities p_i = Phi(B_{i+1}/sqrt(Q)) - Phi(B_i/sqrt(Q)).
/// Each half-line carries total mass 1/2: 2 * sum(p) == 1.
std::vector<double> segment_probabilities(const lope_params& p,
                                          const problem_config& cfg);

/// Density of the post-action state x1 under a staircase controller: a sum
/// of shifted truncated-Gaussian pieces that may overlap.  Boundary
/// ownership follows the same half-open conventions as apply_gamma1 (the
/// pushforward partition is disjoint, so the density integrates to exactly
/// one).
double state_density(const lope_params& p, const problem_config& cfg,
                     double x);

/// One-sided limits of state_density, needed to tabulate the (generally
/// discontinuous) density on a grid without smearing its jumps.
double state_density_left_limit(const lope_params& p,
                                const problem_config& cfg, double x);
double state_density_right_limit(const lope_params& p,
                                 const problem_config& cfg, double x);

/// Sorted, deduplicated x locations where state_density can jump:
/// +/-(B_i - a_i) and +/-(B_{i+1} - a_i) for interior boundaries.
std::vector<double> state_density_breakpoints(const lope_params& p);

/// Exact mass of state_density over [lo, hi] (extended reals allowed),
/// computed piecewise from normal CDF differences — no quadrature involved.
double state_mass(const lope_params& p, const problem_config& cfg, double lo,
                  double hi);

/// Tabulates state_density over [lo, hi] for file emission and plotting:
/// a uniform grid of about base_points rows, with every interior jump
/// location present twice — once with the left limit, once with the right —
/// so trapezoid integration over the rows never smears a discontinuity.
/// When the window is symmetric (lo == -hi) the grid coordinates are exact
/// negations of each other, pairing row i with row (size-1-i).
std::vector<std::pair<double, double>> state_density_table(
    const lope_params& p, const problem_config& cfg, double lo, double hi,
    int base_points);

/// Serializes a strategy to the plain-text key=value format consumed by the
/// CLI (kind, then the family's parameters; vectors comma-separated, doubles
/// round-trip exact).
std::string serialize_strategy(const strategy& s);

/// Parses the serialize_strategy format.  Lines starting with '#' and blank
/// lines are ignored.  Throws parse_error with 1-based line/column
/// information on malformed input.
strategy parse_strategy(const std::string& text);

}  // namespace witsbench
