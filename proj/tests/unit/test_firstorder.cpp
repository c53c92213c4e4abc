#include <cmath>

#include <doctest.h>

#include "witsbench/costs.hpp"
#include "witsbench/firstorder.hpp"

using namespace witsbench;

namespace {

const problem_config kCfg{};  // Q = 1, N = 0.1

lope_params bpsk_lope(double a) {
  lope_params p;
  p.n = 1;
  p.a = {a};
  p.B = {0.0};
  return p;
}

}  // namespace

TEST_CASE("t1 matches the closed form and the generic second moment") {
  const double pi = std::acos(-1.0);
  for (double a : {0.0, 0.1, 0.4, 1.0, 2.5}) {
    const double expected =
        kCfg.Q - 2.0 * a * std::sqrt(2.0 * kCfg.Q / pi) + a * a;
    CHECK(t1(a, kCfg) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(t1(a, kCfg) ==
          doctest::Approx(state_second_moment(bpsk_lope(a), kCfg))
              .epsilon(1e-13));
  }
  CHECK(t1(0.4, kCfg) == doctest::Approx(0.521692351357708).epsilon(1e-12));
  CHECK_THROWS_AS(t1(-0.1, kCfg), std::invalid_argument);
}

TEST_CASE("t1 derivative at zero via second-order differences") {
  // dT1/da = -2 sqrt(2 Q / pi) + 2a; at a = 0 the one-sided second-order
  // difference must converge at rate h^2.
  const double pi = std::acos(-1.0);
  const double exact = -2.0 * std::sqrt(2.0 * kCfg.Q / pi);
  const auto fd = [&](double h) {
    return (-3.0 * t1(0.0, kCfg) + 4.0 * t1(h, kCfg) - t1(2.0 * h, kCfg)) /
           (2.0 * h);
  };
  CHECK(fd(1e-4) == doctest::Approx(exact).epsilon(1e-9));

  const double e1 = std::abs(fd(1e-2) - exact);
  const double e2 = std::abs(fd(1e-3) - exact);
  // One decade in h must buy about two decades of accuracy.
  if (e2 > 1e-13) {  // guard against hitting roundoff
    CHECK(e1 / e2 > 30.0);
  }
}

TEST_CASE("bpsk_decomposition satisfies S = T1 - T2") {
  for (double a : {0.0, 0.1, 0.4, 1.0}) {
    const bpsk_decomposition_result d = bpsk_decomposition(a, kCfg);
    CHECK(d.a == a);
    CHECK(d.S == doctest::Approx(d.T1 - d.T2).epsilon(1e-12));
    CHECK(d.T1 == doctest::Approx(t1(a, kCfg)).epsilon(1e-14));
    // The decomposition's S is the library's estimation cost.
    const cost_point cp = estimation_cost(bpsk_lope(a), kCfg);
    CHECK(d.S == doctest::Approx(cp.S).epsilon(1e-10));
    CHECK(d.T2 >= 0.0);
  }
  const bpsk_decomposition_result d = bpsk_decomposition(0.4, kCfg);
  CHECK(d.T1 == doctest::Approx(0.521692351357708).epsilon(1e-12));
  CHECK(d.T2 == doctest::Approx(0.441198558782896).epsilon(1e-9));
}

TEST_CASE("linear slope diagnostic matches the analytic derivative") {
  const std::vector<double> grid = {1e-2, 1e-3, 1e-4, 1e-5};
  const slope_diagnostic_result d = slope_diagnostic("linear", kCfg, grid);
  CHECK(d.strategy_tag == "linear");
  REQUIRE(d.slopes.size() == grid.size());
  REQUIRE(d.divergence_ratio.size() == grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(d.slopes[i] ==
          doctest::Approx(linear_cost_derivative(grid[i], kCfg))
              .epsilon(1e-12));
    CHECK(d.slopes[i] < 0.0);
  }
  // Ratios approach sqrt(10) per decade (the 1/sqrt(P) law).
  CHECK(d.divergence_ratio.back() ==
        doctest::Approx(std::sqrt(10.0)).epsilon(0.02));
  CHECK(d.certified());
}

TEST_CASE("bpsk slope diagnostic certifies slope divergence") {
  const std::vector<double> grid = {1e-2, 1e-3, 1e-4, 1e-5};
  const slope_diagnostic_result d = slope_diagnostic("bpsk", kCfg, grid);
  CHECK(d.strategy_tag == "bpsk");
  REQUIRE(d.slopes.size() == 4);
  for (double s : d.slopes) CHECK(s < 0.0);
  for (double r : d.divergence_ratio) CHECK(r > 1.0);
  CHECK(d.certified());

  // Frozen first slope from the finite-difference construction.
  CHECK(d.slopes[0] == doctest::Approx(-0.132918).epsilon(1e-4));
}

TEST_CASE("certification requires three decades of grid span") {
  const slope_diagnostic_result narrow =
      slope_diagnostic("linear", kCfg, {1e-2, 1e-3});
  for (double s : narrow.slopes) CHECK(s < 0.0);
  CHECK_FALSE(narrow.certified());  // only one decade of span

  const slope_diagnostic_result wide =
      slope_diagnostic("linear", kCfg, {1e-2, 1e-3, 1e-4, 1e-5});
  CHECK(wide.certified());
}

TEST_CASE("slope_diagnostic validates its inputs") {
  CHECK_THROWS_AS(slope_diagnostic("cubic", kCfg, {1e-2, 1e-3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(slope_diagnostic("linear", kCfg, {1e-3, 1e-2}),
                  std::invalid_argument);  // must decrease
  CHECK_THROWS_AS(slope_diagnostic("linear", kCfg, {1e-2}),
                  std::invalid_argument);  // need at least two points
  CHECK_THROWS_AS(slope_diagnostic("linear", kCfg, {1e-2, 1e-12}),
                  std::invalid_argument);  // below the supported floor
}
