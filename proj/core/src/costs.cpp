#include "witsbench/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "witsbench/gaussian.hpp"

namespace witsbench {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double underflow_floor = 1e-300;

/// Shared per-problem constants of the F/E closed forms.
struct fe_context {
  double sq;   // sqrt(Q + N): observation standard deviation per branch
  double s;    // sqrt((Q+N)/(Q N)): inverse posterior standard deviation
  double r;    // Q / (Q + N): posterior shrinkage factor
  double ce;   // sqrt(Q N) / (2 pi (Q + N)): boundary-correction scale
  double qn2;  // 2 Q N: denominator of the boundary exponents

  explicit fe_context(const problem_config& cfg)
      : sq(std::sqrt(cfg.Q + cfg.N)),
        s(std::sqrt((cfg.Q + cfg.N) / (cfg.Q * cfg.N))),
        r(cfg.Q / (cfg.Q + cfg.N)),
        ce(std::sqrt(cfg.Q * cfg.N) / (2.0 * M_PI * (cfg.Q + cfg.N))),
        qn2(2.0 * cfg.Q * cfg.N) {}
};

/// exp of the completed-square boundary exponent
///   -(Q (B + d)^2 + N B^2) / (2 Q N),
/// taken as 0 at B = +infinity (the exponent diverges to -infinity).
double boundary_term(const fe_context& ctx, const problem_config& cfg,
                     double b, double d) {
  if (std::isinf(b)) return 0.0;
  const double u = b + d;
  return std::exp(-(cfg.Q * u * u + cfg.N * b * b) / ctx.qn2);
}

}  // namespace

double fe_terms_result::f_total() const {
  double sum = 0.0;
  for (double v : f_neg) sum += v;
  for (double v : f_pos) sum += v;
  return sum;
}

double fe_terms_result::e_total() const {
  double sum = 0.0;
  for (double v : e_neg) sum += v;
  for (double v : e_pos) sum += v;
  return sum;
}

double power_cost(const lope_params& p, const problem_config& cfg) {
  const std::vector<double> probs = segment_probabilities(p, cfg);
  double sum = 0.0;
  for (int i = 0; i < p.n; ++i) sum += p.a[i] * p.a[i] * probs[i];
  return 2.0 * sum;
}

double state_second_moment(const lope_params& p, const problem_config& cfg) {
  p.validate();
  cfg.validate();
  const double rq = std::sqrt(cfg.Q);
  const std::vector<double> probs = segment_probabilities(p, cfg);
  double cross = 0.0, quad = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const double pdf_lo = std_normal_pdf(p.B[i] / rq);
    const double pdf_hi =
        (i + 1 < p.n) ? std_normal_pdf(p.B[i + 1] / rq) : 0.0;
    cross += p.a[i] * (pdf_lo - pdf_hi);
    quad += p.a[i] * p.a[i] * probs[i];
  }
  return cfg.Q - 4.0 * rq * cross + 2.0 * quad;
}

fe_terms_result fe_terms(const lope_params& p, const problem_config& cfg,
                         double y) {
  if (!std::isfinite(y)) throw std::domain_error("fe_terms requires finite y");
  const fe_context ctx(cfg);

  fe_terms_result out;
  out.y = y;
  out.f_neg.resize(p.n);
  out.f_pos.resize(p.n);
  out.e_neg.resize(p.n);
  out.e_pos.resize(p.n);

  for (int i = 0; i < p.n; ++i) {
    const double a = p.a[i];
    const double b_lo = p.B[i];
    const double b_hi = (i + 1 < p.n) ? p.B[i + 1] : inf;

    // Negative source half-line (u1 = +a): the x1-marginal factor is a
    // normal density in (y - a) and the segment mass is a posterior CDF
    // difference around the shrunk observation.
    {
      const double d = ctx.r * (y - a);
      const double g = std_normal_pdf((y - a) / ctx.sq) / ctx.sq;
      const double f =
          g * cdf_difference(ctx.s * (b_lo + d),
                             std::isinf(b_hi) ? inf : ctx.s * (b_hi + d));
      const double mean = (a * cfg.N + y * cfg.Q) / (cfg.Q + cfg.N);
      const double corr = boundary_term(ctx, cfg, b_lo, y - a) -
                          boundary_term(ctx, cfg, b_hi, y - a);
      out.f_neg[i] = f;
      out.e_neg[i] = mean * f - ctx.ce * corr;
    }

    // Positive source half-line (u1 = -a): mirror image in y and a.
    {
      const double d = ctx.r * (y + a);
      const double g = std_normal_pdf((y + a) / ctx.sq) / ctx.sq;
      const double f =
          g * cdf_difference(ctx.s * (b_lo - d),
                             std::isinf(b_hi) ? inf : ctx.s * (b_hi - d));
      const double mean = (-a * cfg.N + y * cfg.Q) / (cfg.Q + cfg.N);
      const double corr = boundary_term(ctx, cfg, b_hi, -a - y) -
                          boundary_term(ctx, cfg, b_lo, -a - y);
      out.f_pos[i] = f;
      out.e_pos[i] = mean * f - ctx.ce * corr;
    }
  }
  return out;
}

double observation_density(const lope_params& p, const problem_config& cfg,
                           double y) {
  return fe_terms(p, cfg, y).f_total();
}

double conditional_mean(const lope_params& p, const problem_config& cfg,
                        double y) {
  const fe_terms_result fe = fe_terms(p, cfg, y);
  const double f = fe.f_total();
  if (f < underflow_floor) {
    // Observation so extreme that every mass term underflows: fall back to
    // the outermost segment's affine posterior mean, the decoder's exact
    // asymptote as |y| grows.
    const double a_n = p.a[p.n - 1];
    const double sign_y = y >= 0.0 ? 1.0 : -1.0;
    return (cfg.Q * y - sign_y * a_n * cfg.N) / (cfg.Q + cfg.N);
  }
  return fe.e_total() / f;
}

cost_point estimation_cost(const lope_params& p, const problem_config& cfg,
                           const quadrature_config& qc) {
  p.validate();
  cfg.validate();
  qc.validate();

  const double m2 = state_second_moment(p, cfg);
  const double reach = p.a[p.n - 1] + qc.tail_sigmas * std::sqrt(cfg.Q + cfg.N);

  // Decoder second moment E[(E[x1|y1])^2] = integral (sum e)^2 / (sum f) dy.
  // The integrand is even in y (e changes sign, f does not), so integrate
  // the positive half and double it.
  const auto integrand = [&](double y) {
    const fe_terms_result fe = fe_terms(p, cfg, y);
    const double f = fe.f_total();
    if (f < underflow_floor) return 0.0;  // vanishing observation density
    const double e = fe.e_total();
    return e * e / f;
  };
  const quadrature_result quad = integrate(integrand, 0.0, reach, qc);
  const double decoder_m2 = 2.0 * quad.value;

  cost_point out;
  out.P = power_cost(p, cfg);
  out.S = m2 - decoder_m2;
  out.method = cost_point::method_tag::closed_form;
  out.quad_error_estimate = 2.0 * quad.error_estimate;
  if (!quad.converged) {
    throw quadrature_error(
        "estimation cost quadrature did not converge within budget", out.S,
        out.quad_error_estimate);
  }
  // Guard against harmless sign noise when the true cost is ~0.
  if (out.S < 0.0 && out.S > -1e-9) out.S = 0.0;
  return out;
}

double linear_cost(double P, const problem_config& cfg) {
  cfg.validate();
  if (!(P >= 0.0)) throw std::domain_error("linear_cost requires P >= 0");
  if (P >= cfg.Q) return 0.0;
  const double d = std::sqrt(cfg.Q) - std::sqrt(P);
  return d * d * cfg.N / (d * d + cfg.N);
}

double linear_cost_derivative(double P, const problem_config& cfg) {
  cfg.validate();
  if (!(P > 0.0)) {
    throw std::domain_error("linear_cost_derivative requires P > 0");
  }
  if (P >= cfg.Q) return 0.0;
  const double rp = std::sqrt(P);
  const double d = std::sqrt(cfg.Q) - rp;
  const double denom = d * d + cfg.N;
  return -cfg.N * cfg.N * d / (rp * denom * denom);
}

gaussian_envelope::gaussian_envelope(const problem_config& cfg,
                                     int grid_size)
    : cfg_(cfg) {
  cfg.validate();
  if (grid_size < 2) {
    throw std::invalid_argument("gaussian_envelope requires grid_size >= 2");
  }
  // Lower convex hull (monotone chain) of the sampled linear-cost curve.
  std::vector<double> px(grid_size), sx(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    px[i] = cfg.Q * static_cast<double>(i) / (grid_size - 1);
    sx[i] = linear_cost(px[i], cfg);
  }
  for (int i = 0; i < grid_size; ++i) {
    while (hull_p_.size() >= 2) {
      const std::size_t m = hull_p_.size();
      const double cross =
          (hull_p_[m - 1] - hull_p_[m - 2]) * (sx[i] - hull_s_[m - 2]) -
          (hull_s_[m - 1] - hull_s_[m - 2]) * (px[i] - hull_p_[m - 2]);
      if (cross > 0.0) break;  // keeps only counterclockwise (convex) turns
      hull_p_.pop_back();
      hull_s_.pop_back();
    }
    hull_p_.push_back(px[i]);
    hull_s_.push_back(sx[i]);
  }
}

double gaussian_envelope::operator()(double P) const {
  const double p = std::clamp(P, hull_p_.front(), hull_p_.back());
  const auto it = std::upper_bound(hull_p_.begin(), hull_p_.end(), p);
  const std::size_t hi = std::min<std::size_t>(it - hull_p_.begin(),
                                               hull_p_.size() - 1);
  if (hi == 0) return hull_s_.front();
  const std::size_t lo = hi - 1;
  const double t = (p - hull_p_[lo]) / (hull_p_[hi] - hull_p_[lo]);
  const double interp = hull_s_[lo] + t * (hull_s_[hi] - hull_s_[lo]);
  // A hull chord can overshoot a strictly convex curve between its sample
  // nodes by O(step^2); cap at the curve so the envelope never exceeds it.
  return std::min(interp, linear_cost(p, cfg_));
}

double gaussian_envelope_cost(double P, const problem_config& cfg,
                              int grid_size) {
  return gaussian_envelope(cfg, grid_size)(P);
}

cost_point two_point_cost(double a, const problem_config& cfg,
                          const quadrature_config& qc) {
  cfg.validate();
  qc.validate();
  if (!std::isfinite(a) || a < 0.0) {
    throw std::invalid_argument("two_point_cost requires a >= 0");
  }
  const double rn = std::sqrt(cfg.N);
  // The state is +/-a with equal probability; the decoder a*tanh(a y / N)
  // is the exact posterior mean for that symmetric two-point prior.
  const auto integrand = [&](double y) {
    const double fy =
        0.5 * (std_normal_pdf((y - a) / rn) + std_normal_pdf((y + a) / rn)) /
        rn;
    const double u = a * std::tanh(a * y / cfg.N);
    return fy * u * u;
  };
  const double reach = a + qc.tail_sigmas * rn;
  const quadrature_result quad = integrate(integrand, 0.0, reach, qc);

  cost_point out;
  out.P = cfg.Q - 2.0 * a * std::sqrt(2.0 * cfg.Q / M_PI) + a * a;
  out.S = a * a - 2.0 * quad.value;
  out.method = cost_point::method_tag::closed_form;
  out.quad_error_estimate = 2.0 * quad.error_estimate;
  if (!quad.converged) {
    throw quadrature_error(
        "two-point cost quadrature did not converge within budget", out.S,
        out.quad_error_estimate);
  }
  if (out.S < 0.0 && out.S > -1e-9) out.S = 0.0;
  return out;
}

cost_point strategy_cost(const strategy& s, const problem_config& cfg,
                         const quadrature_config& qc) {
  validate_strategy(s, cfg);
  if (const auto* lin = std::get_if<linear_strategy>(&s)) {
    // Both linear regimes spend exactly their power target, and the
    // attenuation branch has the classical closed-form MMSE.
    cost_point out;
    out.P = lin->power_target;
    out.S = linear_cost(lin->power_target, cfg);
    out.method = cost_point::method_tag::closed_form;
    return out;
  }
  if (const auto* tp = std::get_if<two_point_strategy>(&s)) {
    return two_point_cost(tp->a, cfg, qc);
  }
  if (std::holds_alternative<zero_strategy>(s)) {
    cost_point out;
    out.P = 0.0;
    out.S = cfg.Q * cfg.N / (cfg.Q + cfg.N);
    out.method = cost_point::method_tag::closed_form;
    return out;
  }
  lope_params params;
  as_lope(s, params);
  return estimation_cost(params, cfg, qc);
}

}  // namespace witsbench
