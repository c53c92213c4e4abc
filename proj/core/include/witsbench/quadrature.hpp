#pragma once

#include <functional>

#include "witsbench/errors.hpp"

namespace witsbench {

/// Tolerances and budget for the adaptive quadrature used by the cost
/// integrals.  tail_sigmas fixes how far (in standard deviations of the
/// observation) the improper cost integrals are truncated.
struct quadrature_config {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double tail_sigmas = 10.0;
  int max_subdivisions = 2000;

  /// Throws std::invalid_argument unless abs_tol, rel_tol > 0,
  /// tail_sigmas >= 6 and max_subdivisions >= 1.
  void validate() const;
};

/// Outcome of one adaptive integration.
struct quadrature_result {
  double value = 0.0;
  double error_estimate = 0.0;  ///< sum of per-panel error bounds
  int subdivisions = 0;         ///< panels evaluated
  bool converged = true;
};

/// Adaptive Gauss-Kronrod (7,15) integration of f over the finite interval
/// [lo, hi].
///
/// Panels failing their share of the tolerance are bisected depth-first,
/// left half first, and accepted panels are accumulated strictly left to
/// right, so the floating-point result is a deterministic function of
/// (f, lo, hi, qc) alone — independent of any caller-side threading.
///
/// On budget exhaustion the remaining panels are accepted as-is and the
/// result is flagged converged = false; callers that require convergence
/// should raise quadrature_error with the partial value.
quadrature_result integrate(const std::function<double(double)>& f, double lo,
                            double hi, const quadrature_config& qc);

}  // namespace witsbench
