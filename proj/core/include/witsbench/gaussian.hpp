#pragma once

#include "witsbench/errors.hpp"

namespace witsbench {

/// Standard-normal special functions and two closed-form Gaussian integrals.
///
/// These scalar kernels are the numeric bedrock of every cost formula in the
/// library: the estimation-cost integrand is assembled from products of
/// normal densities and differences of normal CDFs, evaluated deep in the
/// tails where naive formulations lose all precision.

/// Largest exponent (natural-log scale) that exp() can produce as a finite
/// double; used as the overflow guard for the closed-form integrals.
inline constexpr double max_safe_exponent = 700.0;

/// Standard normal density phi(x) = exp(-x^2/2) / sqrt(2*pi).
/// Throws std::domain_error for non-finite x.
double std_normal_pdf(double x);

/// Standard normal CDF Phi(x), computed through the complementary error
/// function so that tail values keep full relative accuracy down to the
/// smallest normal doubles.  Accepts +/-infinity (limits 1 and 0); throws
/// std::domain_error for NaN.
double std_normal_cdf(double x);

/// Phi(hi) - Phi(lo) evaluated as a single tail-aware difference.
///
/// When both endpoints sit in the same tail the subtraction is performed on
/// the complementary error function of that tail, avoiding the catastrophic
/// cancellation that Phi(hi) - Phi(lo) suffers once both CDF values round to
/// the same double.  Requires lo <= hi (NaN rejected); +/-infinity allowed.
/// The result is clamped to be nonnegative.
double cdf_difference(double lo, double hi);

/// Parameters of the two closed-form Gaussian integrals over [A, B]:
///
///   I1 = integral of exp(-a x^2 + b x + c) dx
///   I2 = integral of x * exp(-a x^2 + b x + c) dx
///
/// A and B are extended reals: +/-infinity (IEEE) denote half-open or
/// doubly infinite domains.  a must be strictly positive (the integrals
/// diverge otherwise) and A <= B.
struct gaussian_integral_params {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double lower = 0.0;  ///< A; may be -infinity
  double upper = 0.0;  ///< B; may be +infinity

  /// Throws std::invalid_argument when a <= 0, any of a/b/c is non-finite,
  /// either limit is NaN, or lower > upper.
  void validate() const;
};

/// Closed form of I1:
///   sqrt(pi/a) * exp(c + b^2/(4a)) *
///     [Phi(sqrt(2a)(B - b/(2a))) - Phi(sqrt(2a)(A - b/(2a)))]
/// Nonnegative for A <= B.  Throws overflow_error when c + b^2/(4a)
/// exceeds max_safe_exponent instead of silently returning infinity.
double integral_i1(const gaussian_integral_params& p);

/// Closed form of I2:
///   (1/(2a)) * [ b * I1 - (exp(-a B^2 + b B + c) - exp(-a A^2 + b A + c)) ]
/// with the boundary exponentials taken as 0 at infinite limits.  Shares
/// integral_i1's overflow contract (boundary exponents are also guarded).
double integral_i2(const gaussian_integral_params& p);

}  // namespace witsbench
