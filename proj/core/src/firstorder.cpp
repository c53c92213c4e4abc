#include "witsbench/firstorder.hpp"

#include <cmath>
#include <stdexcept>

namespace witsbench {

bool slope_diagnostic_result::certified() const {
  if (p_grid.size() < 2) return false;
  for (double s : slopes) {
    if (!(s < 0.0)) return false;
  }
  for (double r : divergence_ratio) {
    if (!(r > 1.0)) return false;
  }
  // Three decades of span, with slack for quotient rounding (1e-2 / 1e-5
  // evaluates to 999.999...9 in binary floating point).
  return p_grid.front() / p_grid.back() >= 1e3 * (1.0 - 1e-9);
}

double t1(double a, const problem_config& cfg) {
  cfg.validate();
  if (!std::isfinite(a) || a < 0.0) {
    throw std::invalid_argument("t1 requires a >= 0");
  }
  return cfg.Q - 2.0 * a * std::sqrt(2.0 * cfg.Q / M_PI) + a * a;
}

bpsk_decomposition_result bpsk_decomposition(double a,
                                             const problem_config& cfg,
                                             const quadrature_config& qc) {
  const lope_params params{1, {a}, {0.0}};
  const cost_point cp = estimation_cost(params, cfg, qc);

  bpsk_decomposition_result out;
  out.a = a;
  out.T1 = t1(a, cfg);
  // estimation_cost computes S = E[x1^2] - T2 with E[x1^2] from the same
  // closed form as T1, so T2 falls out by rearrangement.
  out.T2 = state_second_moment(params, cfg) - cp.S;
  out.S = out.T1 - out.T2;
  return out;
}

slope_diagnostic_result slope_diagnostic(const std::string& tag,
                                         const problem_config& cfg,
                                         const std::vector<double>& p_grid,
                                         const quadrature_config& qc) {
  cfg.validate();
  if (tag != "linear" && tag != "bpsk") {
    throw std::invalid_argument("slope_diagnostic tag must be linear or bpsk");
  }
  if (p_grid.size() < 2) {
    throw std::invalid_argument("slope_diagnostic requires >= 2 grid powers");
  }
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] >= 1e-10)) {
      throw std::invalid_argument("slope_diagnostic powers must be >= 1e-10");
    }
    if (i && !(p_grid[i] < p_grid[i - 1])) {
      throw std::invalid_argument(
          "slope_diagnostic requires strictly decreasing powers");
    }
  }

  slope_diagnostic_result out;
  out.strategy_tag = tag;
  out.p_grid = p_grid;
  out.slopes.reserve(p_grid.size());

  for (double p : p_grid) {
    if (tag == "linear") {
      out.slopes.push_back(linear_cost_derivative(p, cfg));
    } else {
      // One-step signaling spends P = a^2: difference the closed-form cost
      // centrally in a and chain through dP/da = 2a.
      const double a = std::sqrt(p);
      const double h = std::max(1e-6, 1e-4 * a);
      const double lo = std::max(a - h, 0.0);
      const double hi = a + h;
      const double s_hi =
          estimation_cost(lope_params{1, {hi}, {0.0}}, cfg, qc).S;
      const double s_lo =
          estimation_cost(lope_params{1, {lo}, {0.0}}, cfg, qc).S;
      const double ds_da = (s_hi - s_lo) / (hi - lo);
      out.slopes.push_back(ds_da / (2.0 * a));
    }
  }
  for (std::size_t i = 0; i + 1 < out.slopes.size(); ++i) {
    out.divergence_ratio.push_back(
        std::abs(out.slopes[i + 1]) / std::abs(out.slopes[i]));
  }
  return out;
}

}  // namespace witsbench
