#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "witsbench/strategies.hpp"

namespace witsbench {

/// Configuration of one simulation run.  Accumulation happens in fixed-size
/// batches merged in index order, so results are bit-identical for a given
/// (samples, seed, batch, antithetic) regardless of the worker count.
struct sim_config {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t batch = 65536;  ///< samples per accumulation batch
  bool antithetic = false;      ///< pair each odd sample with its negation
  int threads = 0;              ///< worker cap; 0 = hardware concurrency

  /// Throws std::invalid_argument unless samples >= 1000 and batch >= 1.
  void validate() const;
};

/// Empirical (P, S) with standard errors.
struct sim_result {
  double p_hat = 0.0;
  double p_stderr = 0.0;
  double s_hat = 0.0;
  double s_stderr = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Second-decision-maker choices for simulation: the exact conditional-mean
/// decoder for the given strategy, the raw observation itself, or a custom
/// mean function.
struct decoder {
  enum class kind_tag { exact_mmse, identity, custom } kind =
      kind_tag::exact_mmse;
  std::function<double(double)> fn;  ///< used when kind == custom

  static decoder exact_mmse() { return {kind_tag::exact_mmse, {}}; }
  static decoder identity() { return {kind_tag::identity, {}}; }
  static decoder custom(std::function<double(double)> f) {
    return {kind_tag::custom, std::move(f)};
  }
};

/// Deterministic counter-based Gaussian stream: normal_pair(seed, i) is a
/// pure function of its arguments, so any partition of sample indices across
/// workers reproduces the serial stream exactly.
struct normal_pair_result {
  double first, second;
};
normal_pair_result normal_pair(std::uint64_t seed, std::uint64_t index);

/// Simulates the full two-stage chain x0 -> u1 -> x1 -> y1 -> u2 and
/// reports empirical power and estimation costs with standard errors.
/// Identical (strategy, cfg, sim) inputs give bit-identical results.
sim_result simulate(const strategy& s, const problem_config& cfg,
                    const sim_config& sim, const decoder& dec);

/// Histogram of the post-action state x1 over [lo, hi).
struct state_histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_samples = 0;  ///< includes out-of-range draws
  std::uint64_t out_of_range = 0;

  double bin_width() const;
  /// Empirical density of bin i: counts[i] / (total_samples * bin_width).
  double density(int i) const;
};

/// Deterministic empirical counterpart of state_density.  Throws
/// std::invalid_argument when bins < 1 or lo >= hi.
state_histogram empirical_state_histogram(const strategy& s,
                                          const problem_config& cfg,
                                          const sim_config& sim, int bins,
                                          double lo, double hi);

/// z-score of a closed-form value against a Monte-Carlo estimate.  Some
/// draws are degenerate — a one-step controller has constant |u1|, so the
/// power sample has zero variance and zero standard error — and a
/// statistical test is meaningless there.  Those fall back to a strict
/// numerical-equality check (1e-12 relative), reported as z = 0 when it
/// holds and +/-infinity when it does not.
double z_score(double closed_form, double mc_estimate, double std_error);

}  // namespace witsbench
