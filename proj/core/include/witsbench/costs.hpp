#pragma once

#include <vector>

#include "witsbench/quadrature.hpp"
#include "witsbench/strategies.hpp"

namespace witsbench {

/// An evaluated (P, S) pair in the power-estimation plane.
struct cost_point {
  double P = 0.0;  ///< expected control power E[u1^2]
  double S = 0.0;  ///< estimation MMSE E[(x1 - u2)^2] under the exact decoder
  enum class method_tag { closed_form, monte_carlo } method =
      method_tag::closed_form;
  double quad_error_estimate = 0.0;  ///< for closed_form results
};

/// The per-segment building blocks of the observation density and the
/// conditional mean at one observation value y.
///
/// f_neg[i] / f_pos[i] integrate the joint density of (x1, y1 = y) over the
/// negative / positive source half-line's i-th segment, so their total is
/// the observation density f_Y(y).  e_neg[i] / e_pos[i] are the matching
/// first-moment integrals, so the conditional mean E[x1 | y1 = y] is
/// sum(e) / sum(f).
struct fe_terms_result {
  double y = 0.0;
  std::vector<double> f_neg, f_pos, e_neg, e_pos;

  double f_total() const;
  double e_total() const;
};

/// Closed-form power cost P = 2 * sum_i a_i^2 p_i.
double power_cost(const lope_params& p, const problem_config& cfg);

/// Closed-form second moment of the post-action state:
///   E[x1^2] = Q - 4 sqrt(Q) sum_i a_i (phi(B_i/sqrt(Q)) - phi(B_{i+1}/sqrt(Q)))
///             + 2 sum_i a_i^2 p_i
double state_second_moment(const lope_params& p, const problem_config& cfg);

/// Evaluates the F/E building blocks at observation y.  Every f entry is a
/// nonnegative mass; deep-tail terms underflow gracefully to zero.  The
/// CDF differences inside are computed tail-aware (gaussian::cdf_difference)
/// because both arguments routinely land far out in the same tail.
fe_terms_result fe_terms(const lope_params& p, const problem_config& cfg,
                         double y);

/// Observation density f_Y(y) = sum(f_neg + f_pos); strictly positive for
/// finite y (up to underflow far beyond the truncation range).
double observation_density(const lope_params& p, const problem_config& cfg,
                           double y);

/// Exact conditional-mean decoder E[x1 | y1 = y] = sum(e) / sum(f); odd in
/// y.  When the denominator underflows to zero (|y| astronomically large)
/// the decoder returns the outermost segment's affine asymptote
/// (Q y - sign(y) a_n N) / (Q + N) instead of 0/0.
double conditional_mean(const lope_params& p, const problem_config& cfg,
                        double y);

/// Closed-form estimation cost
///   S = E[x1^2] - integral (sum e)^2 / (sum f) dy,
/// the decoder's mean-squared error under the exact conditional mean.  The
/// integral runs over |y| <= a_n + tail_sigmas * sqrt(Q + N) by adaptive
/// quadrature (the integrand is even, so only the positive half is
/// evaluated).  Throws quadrature_error on non-convergence, carrying the
/// partial result.
cost_point estimation_cost(const lope_params& p, const problem_config& cfg,
                           const quadrature_config& qc = {});

/// Best linear controller's estimation cost at power target P:
///   S_l(P) = (sqrt(Q) - sqrt(P))^2 N / ((sqrt(Q) - sqrt(P))^2 + N)
/// for P in [0, Q], and 0 beyond (the overshoot branch estimates exactly).
double linear_cost(double P, const problem_config& cfg);

/// Analytic derivative of linear_cost on (0, Q):
///   S_l'(P) = -N^2 (sqrt(Q) - sqrt(P)) / (sqrt(P) [(sqrt(Q)-sqrt(P))^2 + N]^2)
double linear_cost_derivative(double P, const problem_config& cfg);

/// Lower convex envelope of the linear-cost curve over [0, Q], the cost of
/// the best randomized ("Gaussian") strategy.  Computed numerically: the
/// curve is sampled on grid_size points and the lower hull is interpolated
/// linearly.  There is no closed form here by design; the envelope is a
/// numerical construction.
class gaussian_envelope {
 public:
  gaussian_envelope(const problem_config& cfg, int grid_size = 10000);

  /// Envelope value at P in [0, Q]; matches linear_cost at both endpoints
  /// and never exceeds it in between.  (The hull interpolant is capped at
  /// linear_cost itself: between sample points a chord can otherwise sit a
  /// few ulps above a strictly convex stretch of the curve.)
  double operator()(double P) const;

 private:
  problem_config cfg_;
  std::vector<double> hull_p_, hull_s_;
};

/// Convenience wrapper constructing the envelope on the fly.
double gaussian_envelope_cost(double P, const problem_config& cfg,
                              int grid_size = 10000);

/// Closed-form cost of the two-point controller with amplitude a: the state
/// collapses to +/-a, the exact decoder is a * tanh(a y / N), and
///   P = Q - 2 a sqrt(2Q/pi) + a^2
///   S = a^2 - integral f_Y(y) (a tanh(a y / N))^2 dy.
cost_point two_point_cost(double a, const problem_config& cfg,
                          const quadrature_config& qc = {});

/// (P, S) for any strategy family under the exact decoder: staircase
/// families via estimation_cost, linear/zero via the linear formulas,
/// two-point via two_point_cost.
cost_point strategy_cost(const strategy& s, const problem_config& cfg,
                         const quadrature_config& qc = {});

}  // namespace witsbench
