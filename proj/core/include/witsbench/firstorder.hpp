#pragma once

#include <string>
#include <vector>

#include "witsbench/costs.hpp"

namespace witsbench {

/// Numerical slope diagnostics near P = 0: both the best linear controller
/// and binary signaling have estimation-cost slopes that diverge like
/// -1/sqrt(P), the steepest possible initial descent.  Divergence is
/// certified by monotone slope-magnitude growth across the grid, never by a
/// single large number.
struct slope_diagnostic_result {
  std::string strategy_tag;            ///< "linear" or "bpsk"
  std::vector<double> p_grid;          ///< strictly decreasing powers
  std::vector<double> slopes;          ///< dS/dP at each grid power
  std::vector<double> divergence_ratio;  ///< |slope[i+1]| / |slope[i]|

  /// True when every slope is negative, |slope| grows strictly along the
  /// grid, and the grid spans at least three decades of P.
  bool certified() const;
};

/// Closed-form second moment of the binary-signaling state:
///   T1(a) = Q - 2 a sqrt(2Q/pi) + a^2.
double t1(double a, const problem_config& cfg);

/// The decomposition S = T1 - T2 for one-step signaling with amplitude a:
/// T1 is the state's second moment, T2 the decoder's second moment
/// (the same quadrature integral as in estimation_cost with n = 1).
struct bpsk_decomposition_result {
  double a = 0.0;
  double T1 = 0.0;
  double T2 = 0.0;
  double S = 0.0;  ///< T1 - T2
};

bpsk_decomposition_result bpsk_decomposition(double a,
                                             const problem_config& cfg,
                                             const quadrature_config& qc = {});

/// Slope diagnostic over a strictly decreasing power grid (entries in
/// [1e-10, inf)).  The linear tag uses the analytic derivative of
/// linear_cost; the bpsk tag differences the closed-form cost in the
/// amplitude a = sqrt(P) and applies the chain rule dS/dP = (dS/da) / (2a),
/// which is far better conditioned near P = 0 than differencing in P.
slope_diagnostic_result slope_diagnostic(const std::string& tag,
                                         const problem_config& cfg,
                                         const std::vector<double>& p_grid,
                                         const quadrature_config& qc = {});

}  // namespace witsbench
