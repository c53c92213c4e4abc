#include "witsbench/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <variant>

#include "witsbench/costs.hpp"

namespace witsbench {

namespace {

/// SplitMix64 stream: hash of (seed, counter).  Statistically solid for
/// Monte-Carlo use and, crucially, a pure function of its inputs — the
/// foundation of the reproducibility contract.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform draw in (0, 1]: the +1 keeps log() finite at the bottom end.
double uniform_open(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>((splitmix64(seed, counter) >> 11) + 1) * 0x1p-53;
}

/// Resolves the exact conditional-mean decoder for each strategy family.
std::function<double(double)> exact_mean_fn(const strategy& s,
                                            const problem_config& cfg) {
  if (std::holds_alternative<zero_strategy>(s)) {
    const double gain = cfg.Q / (cfg.Q + cfg.N);
    return [gain](double y) { return gain * y; };
  }
  if (const auto* lin = std::get_if<linear_strategy>(&s)) {
    const double p = lin->power_target;
    if (p <= cfg.Q) {
      const double d = std::sqrt(cfg.Q) - std::sqrt(p);
      const double var = d * d;  // post-action state variance
      const double gain = var / (var + cfg.N);
      return [gain](double y) { return gain * y; };
    }
    const double c = std::sqrt(p - cfg.Q);  // state is this constant
    return [c](double) { return c; };
  }
  if (const auto* tp = std::get_if<two_point_strategy>(&s)) {
    // Symmetric two-point prior on {-a, +a}: Bayes' rule gives the
    // hyperbolic-tangent posterior mean.
    const double a = tp->a;
    const double n = cfg.N;
    return [a, n](double y) { return a * std::tanh(a * y / n); };
  }
  lope_params params;
  as_lope(s, params);  // lope and bpsk
  return [params, cfg](double y) { return conditional_mean(params, cfg, y); };
}

struct batch_sums {
  double p = 0.0, p2 = 0.0, s = 0.0, s2 = 0.0;
};

/// Kahan-Neumaier compensated accumulator; used for the cross-batch merge so
/// the final reduction is both accurate and order-fixed.
struct compensated_sum {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

template <typename PerSample>
void run_batches(const sim_config& sim, std::uint64_t n_batches,
                 const PerSample& per_sample) {
  int workers = sim.threads > 0
                    ? sim.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (static_cast<std::uint64_t>(workers) > n_batches) {
    workers = static_cast<int>(n_batches);
  }

  const auto worker_fn = [&](int w) {
    for (std::uint64_t b = static_cast<std::uint64_t>(w); b < n_batches;
         b += static_cast<std::uint64_t>(workers)) {
      const std::uint64_t begin = b * sim.batch;
      const std::uint64_t end = std::min(begin + sim.batch, sim.samples);
      per_sample(b, begin, end);
    }
  };

  if (workers == 1) {
    worker_fn(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
  for (std::thread& t : pool) t.join();
}

}  // namespace

void sim_config::validate() const {
  if (samples < 1000) {
    throw std::invalid_argument("sim_config requires samples >= 1000");
  }
  if (batch < 1) throw std::invalid_argument("sim_config requires batch >= 1");
}

normal_pair_result normal_pair(std::uint64_t seed, std::uint64_t index) {
  // Box-Muller on two counter-indexed uniforms; both outputs are exact
  // functions of (seed, index).
  const double u1 = uniform_open(seed, 2 * index);
  const double u2 = uniform_open(seed, 2 * index + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double state_histogram::bin_width() const {
  return (hi - lo) / static_cast<double>(counts.size());
}

double state_histogram::density(int i) const {
  return static_cast<double>(counts.at(static_cast<std::size_t>(i))) /
         (static_cast<double>(total_samples) * bin_width());
}

sim_result simulate(const strategy& s, const problem_config& cfg,
                    const sim_config& sim, const decoder& dec) {
  validate_strategy(s, cfg);
  sim.validate();

  std::function<double(double)> mean_fn;
  switch (dec.kind) {
    case decoder::kind_tag::exact_mmse:
      mean_fn = exact_mean_fn(s, cfg);
      break;
    case decoder::kind_tag::identity:
      mean_fn = [](double y) { return y; };
      break;
    case decoder::kind_tag::custom:
      if (!dec.fn) {
        throw std::invalid_argument("custom decoder requires a mean function");
      }
      mean_fn = dec.fn;
      break;
  }

  const double rq = std::sqrt(cfg.Q);
  const double rn = std::sqrt(cfg.N);
  const std::uint64_t n_batches = (sim.samples + sim.batch - 1) / sim.batch;
  std::vector<batch_sums> sums(n_batches);

  run_batches(sim, n_batches,
              [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
                batch_sums acc;
                for (std::uint64_t i = begin; i < end; ++i) {
                  // Antithetic pairing reuses the even index's normals with
                  // flipped signs, keeping the stream counter-addressable.
                  const std::uint64_t base = sim.antithetic ? (i & ~1ULL) : i;
                  normal_pair_result g = normal_pair(sim.seed, base);
                  if (sim.antithetic && (i & 1ULL)) {
                    g.first = -g.first;
                    g.second = -g.second;
                  }
                  const double x0 = rq * g.first;
                  const double z1 = rn * g.second;
                  const double u1 = apply_gamma1(s, x0, cfg);
                  const double x1 = x0 + u1;
                  const double y1 = x1 + z1;
                  const double err = x1 - mean_fn(y1);
                  const double vp = u1 * u1;
                  const double vs = err * err;
                  acc.p += vp;
                  acc.p2 += vp * vp;
                  acc.s += vs;
                  acc.s2 += vs * vs;
                }
                sums[b] = acc;
              });

  compensated_sum p, p2, sv, s2;
  for (const batch_sums& b : sums) {
    p.add(b.p);
    p2.add(b.p2);
    sv.add(b.s);
    s2.add(b.s2);
  }

  const double m = static_cast<double>(sim.samples);
  sim_result out;
  out.samples = sim.samples;
  out.seed = sim.seed;
  out.p_hat = p.value() / m;
  out.s_hat = sv.value() / m;
  const double var_p =
      std::max(0.0, (p2.value() - m * out.p_hat * out.p_hat) / (m - 1.0));
  const double var_s =
      std::max(0.0, (s2.value() - m * out.s_hat * out.s_hat) / (m - 1.0));
  out.p_stderr = std::sqrt(var_p / m);
  out.s_stderr = std::sqrt(var_s / m);
  return out;
}

state_histogram empirical_state_histogram(const strategy& s,
                                          const problem_config& cfg,
                                          const sim_config& sim, int bins,
                                          double lo, double hi) {
  validate_strategy(s, cfg);
  sim.validate();
  if (bins < 1) {
    throw std::invalid_argument("empirical_state_histogram requires bins >= 1");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("empirical_state_histogram requires lo < hi");
  }

  const double rq = std::sqrt(cfg.Q);
  const double scale = static_cast<double>(bins) / (hi - lo);
  const std::uint64_t n_batches = (sim.samples + sim.batch - 1) / sim.batch;

  struct batch_hist {
    std::vector<std::uint64_t> counts;
    std::uint64_t out_of_range = 0;
  };
  std::vector<batch_hist> partial(n_batches);

  run_batches(sim, n_batches,
              [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
                batch_hist acc;
                acc.counts.assign(static_cast<std::size_t>(bins), 0);
                for (std::uint64_t i = begin; i < end; ++i) {
                  const std::uint64_t base = sim.antithetic ? (i & ~1ULL) : i;
                  normal_pair_result g = normal_pair(sim.seed, base);
                  if (sim.antithetic && (i & 1ULL)) g.first = -g.first;
                  const double x0 = rq * g.first;
                  const double x1 = system_state(s, x0, cfg);
                  const double t = (x1 - lo) * scale;
                  if (t >= 0.0 && t < static_cast<double>(bins)) {
                    ++acc.counts[static_cast<std::size_t>(t)];
                  } else {
                    ++acc.out_of_range;
                  }
                }
                partial[b] = std::move(acc);
              });

  state_histogram out;
  out.lo = lo;
  out.hi = hi;
  out.counts.assign(static_cast<std::size_t>(bins), 0);
  out.total_samples = sim.samples;
  for (const batch_hist& b : partial) {
    out.out_of_range += b.out_of_range;
    for (int i = 0; i < bins; ++i) {
      out.counts[static_cast<std::size_t>(i)] +=
          b.counts[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

double z_score(double closed_form, double mc_estimate, double std_error) {
  const double diff = mc_estimate - closed_form;
  if (std_error > 0.0) return diff / std_error;
  const double scale = std::max(1.0, std::abs(closed_form));
  if (std::abs(diff) <= 1e-12 * scale) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), diff);
}

}  // namespace witsbench
