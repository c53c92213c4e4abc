#include <cmath>
#include <limits>
#include <variant>

#include <doctest.h>

#include "oracle_quadrature.hpp"
#include "witsbench/strategies.hpp"

using namespace witsbench;

namespace {

const problem_config kCfg{};  // Q = 1, N = 0.1

lope_params make_lope2() {
  lope_params p;
  p.n = 2;
  p.a = {0.2, 0.5};
  p.B = {0.0, 0.8};
  return p;
}

}  // namespace

TEST_CASE("problem_config validation") {
  problem_config cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.snr() == doctest::Approx(10.0));
  cfg.Q = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.N = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.Q = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("lope_params validation enforces the ordering constraints") {
  lope_params p = make_lope2();
  CHECK_NOTHROW(p.validate());

  SUBCASE("amplitudes must be nondecreasing") {
    p.a = {0.5, 0.2};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("amplitudes must be nonnegative") {
    p.a = {-0.1, 0.5};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("first breakpoint must be zero") {
    p.B = {0.1, 0.8};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("breakpoints must be nondecreasing") {
    p.n = 3;
    p.a = {0.1, 0.2, 0.3};
    p.B = {0.0, 0.9, 0.4};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("sizes must match n") {
    p.a = {0.2};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("entries must be finite") {
    p.a = {0.2, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("coincident breakpoints are legal") {
    p.n = 3;
    p.a = {0.2, 0.5, 0.5};
    p.B = {0.0, 0.8, 0.8};
    CHECK_NOTHROW(p.validate());
  }
}

TEST_CASE("segment_index respects half-open boundaries") {
  const lope_params p = make_lope2();
  CHECK(p.segment_index(0.0) == 0);
  CHECK(p.segment_index(0.79) == 0);
  CHECK(p.segment_index(0.8) == 1);  // boundary belongs to the upper segment
  CHECK(p.segment_index(5.0) == 1);
}

TEST_CASE("apply_gamma1 conventions") {
  const strategy lope = lope_strategy{make_lope2()};
  // Opposite sign of x0; sign(0) resolves to +1.
  CHECK(apply_gamma1(lope, 0.0, kCfg) == -0.2);
  CHECK(apply_gamma1(lope, 0.5, kCfg) == -0.2);
  CHECK(apply_gamma1(lope, 0.8, kCfg) == -0.5);   // boundary: upper segment
  CHECK(apply_gamma1(lope, -0.5, kCfg) == 0.2);
  CHECK(apply_gamma1(lope, -0.8, kCfg) == 0.5);   // mirrored boundary
  CHECK(apply_gamma1(lope, 3.0, kCfg) == -0.5);

  const strategy zero = zero_strategy{};
  CHECK(apply_gamma1(zero, 1.3, kCfg) == 0.0);

  const strategy bpsk = bpsk_strategy{0.4};
  CHECK(apply_gamma1(bpsk, 2.0, kCfg) == -0.4);
  CHECK(apply_gamma1(bpsk, -2.0, kCfg) == 0.4);
  CHECK(apply_gamma1(bpsk, 0.0, kCfg) == -0.4);

  const strategy two_point = two_point_strategy{0.8};
  CHECK(apply_gamma1(two_point, 0.3, kCfg) == doctest::Approx(0.5));
  CHECK(system_state(two_point, 0.3, kCfg) == doctest::Approx(0.8));
  CHECK(system_state(two_point, -1.7, kCfg) == doctest::Approx(-0.8));
  CHECK(system_state(two_point, 0.0, kCfg) == doctest::Approx(0.8));

  CHECK_THROWS_AS(
      apply_gamma1(lope, std::numeric_limits<double>::quiet_NaN(), kCfg),
      std::domain_error);
}

TEST_CASE("system_state is piecewise slope one for staircase strategies") {
  const strategy lope = lope_strategy{make_lope2()};
  const double h = 1e-4;
  for (double x0 : {0.1, 0.5, 1.0, 2.0, -0.3, -1.5}) {
    const double slope =
        (system_state(lope, x0 + h, kCfg) - system_state(lope, x0, kCfg)) / h;
    CHECK(slope == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("segment probabilities sum to one half per half-line") {
  for (int n : {1, 2, 4, 8}) {
    lope_params p;
    p.n = n;
    for (int i = 0; i < n; ++i) {
      p.a.push_back(0.1 * (i + 1));
      p.B.push_back(i == 0 ? 0.0 : 0.4 * i);
    }
    const auto probs = segment_probabilities(p, kCfg);
    REQUIRE(static_cast<int>(probs.size()) == n);
    double total = 0.0;
    for (double q : probs) {
      CHECK(q >= 0.0);
      total += q;
    }
    CHECK(2.0 * total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("state_density integrates to one and matches its mass function") {
  const lope_params p = make_lope2();

  CHECK(state_mass(p, kCfg, -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Quadrature of the density over a window vs the closed-form mass.
  for (auto [lo, hi] : {std::pair{-1.0, 1.0}, {0.1, 0.4}, {-3.0, -0.2}}) {
    const double quad = testsupport::integrate_simpson(
        [&](double x) { return state_density(p, kCfg, x); }, lo, hi,
        {1e-12, 60});
    CHECK(state_mass(p, kCfg, lo, hi) ==
          doctest::Approx(quad).epsilon(1e-8));
  }
}

TEST_CASE("state_density one-sided limits bracket each jump") {
  const lope_params p = make_lope2();
  const auto jumps = state_density_breakpoints(p);
  CHECK(!jumps.empty());
  for (std::size_t i = 1; i < jumps.size(); ++i) {
    CHECK(jumps[i - 1] < jumps[i]);  // sorted, deduplicated
  }
  const double eps = 1e-9;
  for (double x : jumps) {
    const double left = state_density_left_limit(p, kCfg, x);
    const double right = state_density_right_limit(p, kCfg, x);
    CHECK(left == doctest::Approx(state_density(p, kCfg, x - eps))
                      .epsilon(1e-6));
    CHECK(right == doctest::Approx(state_density(p, kCfg, x + eps))
                       .epsilon(1e-6));
  }
  // At least one breakpoint must be a genuine discontinuity.
  bool any_jump = false;
  for (double x : jumps) {
    if (std::abs(state_density_left_limit(p, kCfg, x) -
                 state_density_right_limit(p, kCfg, x)) > 1e-6) {
      any_jump = true;
    }
  }
  CHECK(any_jump);
}

TEST_CASE("state_density_table mirrors symmetric windows exactly") {
  const lope_params p = make_lope2();
  const auto table = state_density_table(p, kCfg, -4.0, 4.0, 201);
  REQUIRE(table.size() >= 201);

  // Exact negation pairing of coordinates.
  const std::size_t m = table.size();
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(table[i].first == -table[m - 1 - i].first);
  }
  // The density itself is even, so mirrored values agree to roundoff.
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(table[i].second ==
          doctest::Approx(table[m - 1 - i].second).epsilon(1e-12));
  }

  // Every interior jump location appears exactly twice (left/right limits).
  for (double x : state_density_breakpoints(p)) {
    if (x <= -4.0 || x >= 4.0) continue;
    int count = 0;
    for (const auto& row : table) {
      if (row.first == x) ++count;
    }
    CHECK(count == 2);
  }

  // Trapezoid mass over the emitted rows reproduces the closed-form mass.
  // The doubled jump rows make the discontinuities exact, so only the
  // O(step^2) smooth-curvature error remains; a fine grid puts that well
  // below the tolerance.
  const auto fine = state_density_table(p, kCfg, -4.0, 4.0, 20001);
  double mass = 0.0;
  for (std::size_t i = 1; i < fine.size(); ++i) {
    mass += 0.5 * (fine[i].second + fine[i - 1].second) *
            (fine[i].first - fine[i - 1].first);
  }
  CHECK(mass == doctest::Approx(state_mass(p, kCfg, -4.0, 4.0)).epsilon(1e-6));
}

TEST_CASE("state_density_table rejects bad windows") {
  const lope_params p = make_lope2();
  CHECK_THROWS_AS(state_density_table(p, kCfg, 1.0, -1.0, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(state_density_table(p, kCfg, -1.0, 1.0, 1),
                  std::invalid_argument);
}

TEST_CASE("strategy serialization round-trips every family") {
  std::vector<strategy> all = {
      zero_strategy{}, linear_strategy{0.3721}, bpsk_strategy{0.4},
      two_point_strategy{0.876625}, lope_strategy{make_lope2()}};
  for (const strategy& s : all) {
    const std::string text = serialize_strategy(s);
    const strategy back = parse_strategy(text);
    CHECK(strategy_kind(back) == strategy_kind(s));
    CHECK(serialize_strategy(back) == text);  // byte-stable round trip
  }

  // Doubles survive exactly, including ones with no short decimal form.
  lope_params p;
  p.n = 1;
  p.a = {0.1 + 0.2};  // 0.30000000000000004
  p.B = {0.0};
  const strategy s = lope_strategy{p};
  const strategy back = parse_strategy(serialize_strategy(s));
  const auto& q = std::get<lope_strategy>(back).params;
  CHECK(q.a[0] == p.a[0]);
}

TEST_CASE("parse_strategy reports line and column on malformed input") {
  CHECK_THROWS_AS(parse_strategy("kind=banana\n"), parse_error);
  try {
    parse_strategy("kind=lope\nn=2\na=0.2,zzz\nB=0,0.8\n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
  }
  // Comments and blank lines are tolerated.
  CHECK_NOTHROW(parse_strategy("# comment\n\nkind=zero\n"));
}

TEST_CASE("strategy_kind and as_lope mappings") {
  CHECK(strategy_kind(zero_strategy{}) == "zero");
  CHECK(strategy_kind(linear_strategy{0.1}) == "linear");
  CHECK(strategy_kind(bpsk_strategy{0.2}) == "bpsk");
  CHECK(strategy_kind(two_point_strategy{0.3}) == "two_point");
  CHECK(strategy_kind(lope_strategy{make_lope2()}) == "lope");

  lope_params out;
  CHECK(as_lope(bpsk_strategy{0.4}, out));
  CHECK(out.n == 1);
  CHECK(out.a == std::vector<double>{0.4});
  CHECK(out.B == std::vector<double>{0.0});

  CHECK(as_lope(zero_strategy{}, out));
  CHECK(out.a == std::vector<double>{0.0});

  CHECK_FALSE(as_lope(linear_strategy{0.1}, out));
  CHECK_FALSE(as_lope(two_point_strategy{0.3}, out));
}

TEST_CASE("validate_strategy rejects invalid family parameters") {
  CHECK_THROWS_AS(validate_strategy(bpsk_strategy{-0.1}, kCfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_strategy(linear_strategy{-1.0}, kCfg),
                  std::invalid_argument);
  lope_params bad = make_lope2();
  bad.B = {0.0, -0.5};
  CHECK_THROWS_AS(validate_strategy(lope_strategy{bad}, kCfg),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_strategy(zero_strategy{}, kCfg));
}
