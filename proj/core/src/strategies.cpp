#include "witsbench/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "witsbench/gaussian.hpp"

namespace witsbench {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(v[i]);
  }
  return out;
}

/// One truncated-Gaussian piece of the state density: contributes
/// phi(x0/sqrt(Q))/sqrt(Q) at x0 = x + shift whenever x lies in the
/// half-open interval [lo_x, hi_x) / (lo_x, hi_x] described by the
/// ownership flags.  Membership is decided in x space against edges
/// rounded once at construction — the same values state_density_breakpoints
/// reports — so pointwise evaluation, one-sided limits, and the published
/// jump locations always agree bitwise.  (Testing x + shift against the
/// x0-space edges instead can misclassify points within an ulp of a jump,
/// because that comparison rounds the edge a second time.)
struct density_piece {
  double lo, hi;      // x0-space edges, used by the mass integrals
  double lo_x, hi_x;  // x-space edges, used for pointwise membership
  bool own_lo, own_hi;
  double shift;  // x0 = x + shift
};

std::vector<density_piece> density_pieces(const lope_params& p) {
  std::vector<density_piece> pieces;
  pieces.reserve(2 * static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    const double hi_b = (i + 1 < p.n) ? p.B[i + 1] : inf;
    if (p.B[i] == hi_b) continue;  // squeezed segment, zero probability
    // Right half-line: x0 in [B_i, B_{i+1}), u1 = -a_i, x = x0 - a_i.
    pieces.push_back({p.B[i], hi_b, p.B[i] - p.a[i], hi_b - p.a[i], true,
                      false, p.a[i]});
    // Left half-line: x0 in (-B_{i+1}, -B_i], u1 = +a_i, x = x0 + a_i.
    // The innermost piece does not own its right endpoint: x0 = 0 belongs to
    // the right half-line because sign(0) resolves to +1.
    pieces.push_back({-hi_b, -p.B[i], -hi_b + p.a[i], -p.B[i] + p.a[i], false,
                      i > 0, -p.a[i]});
  }
  return pieces;
}

enum class eval_mode { point, left_limit, right_limit };

double density_eval(const lope_params& p, const problem_config& cfg, double x,
                    eval_mode mode) {
  if (!std::isfinite(x)) {
    throw std::domain_error("state_density requires finite x");
  }
  const double rq = std::sqrt(cfg.Q);
  double sum = 0.0;
  for (const density_piece& piece : density_pieces(p)) {
    bool member;
    switch (mode) {
      case eval_mode::point:
        member = (piece.own_lo ? x >= piece.lo_x : x > piece.lo_x) &&
                 (piece.own_hi ? x <= piece.hi_x : x < piece.hi_x);
        break;
      case eval_mode::left_limit:
        // Approaching x from below, the piece contributes iff x is inside
        // or at the right edge.
        member = x > piece.lo_x && x <= piece.hi_x;
        break;
      case eval_mode::right_limit:
        member = x >= piece.lo_x && x < piece.hi_x;
        break;
    }
    if (member) sum += std_normal_pdf((x + piece.shift) / rq) / rq;
  }
  return sum;
}

}  // namespace

void problem_config::validate() const {
  if (!std::isfinite(Q) || Q <= 0.0 || !std::isfinite(N) || N <= 0.0) {
    throw std::invalid_argument("problem_config requires finite Q > 0, N > 0");
  }
}

void lope_params::validate() const {
  if (n < 1) throw std::invalid_argument("lope_params requires n >= 1");
  if (a.size() != static_cast<std::size_t>(n) ||
      B.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("lope_params vectors must have length n");
  }
  double prev_a = 0.0, prev_b = 0.0;
  if (B[0] != 0.0) {
    throw std::invalid_argument("lope_params requires B[0] == 0");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(B[i])) {
      throw std::invalid_argument("lope_params entries must be finite");
    }
    if (a[i] < prev_a) {
      throw std::invalid_argument(
          "lope_params amplitudes must be nonnegative and nondecreasing");
    }
    if (B[i] < prev_b) {
      throw std::invalid_argument(
          "lope_params breakpoints must be nondecreasing");
    }
    prev_a = a[i];
    prev_b = B[i];
  }
}

int lope_params::segment_index(double t) const {
  if (t < 0.0 || std::isnan(t)) {
    throw std::domain_error("segment_index requires t >= 0");
  }
  // Largest i with B[i] <= t; correct even with coincident breakpoints
  // (squeezed segments are skipped in favour of the last matching one).
  const auto it = std::upper_bound(B.begin(), B.end(), t);
  return static_cast<int>(it - B.begin()) - 1;
}

std::string strategy_kind(const strategy& s) {
  struct visitor {
    std::string operator()(const zero_strategy&) const { return "zero"; }
    std::string operator()(const linear_strategy&) const { return "linear"; }
    std::string operator()(const bpsk_strategy&) const { return "bpsk"; }
    std::string operator()(const two_point_strategy&) const {
      return "two_point";
    }
    std::string operator()(const lope_strategy&) const { return "lope"; }
  };
  return std::visit(visitor{}, s);
}

void validate_strategy(const strategy& s, const problem_config& cfg) {
  cfg.validate();
  if (const auto* lin = std::get_if<linear_strategy>(&s)) {
    if (!std::isfinite(lin->power_target) || lin->power_target < 0.0) {
      throw std::invalid_argument("linear strategy requires power target >= 0");
    }
  } else if (const auto* b = std::get_if<bpsk_strategy>(&s)) {
    if (!std::isfinite(b->a) || b->a < 0.0) {
      throw std::invalid_argument("bpsk strategy requires a >= 0");
    }
  } else if (const auto* tp = std::get_if<two_point_strategy>(&s)) {
    if (!std::isfinite(tp->a) || tp->a < 0.0) {
      throw std::invalid_argument("two_point strategy requires a >= 0");
    }
  } else if (const auto* lp = std::get_if<lope_strategy>(&s)) {
    lp->params.validate();
  }
}

bool as_lope(const strategy& s, lope_params& out) {
  if (const auto* lp = std::get_if<lope_strategy>(&s)) {
    out = lp->params;
    return true;
  }
  if (const auto* b = std::get_if<bpsk_strategy>(&s)) {
    out = lope_params{1, {b->a}, {0.0}};
    return true;
  }
  if (std::holds_alternative<zero_strategy>(s)) {
    out = lope_params{1, {0.0}, {0.0}};
    return true;
  }
  return false;
}

double apply_gamma1(const strategy& s, double x0, const problem_config& cfg) {
  if (!std::isfinite(x0)) {
    throw std::domain_error("apply_gamma1 requires finite x0");
  }
  struct visitor {
    double x0;
    const problem_config& cfg;

    double operator()(const zero_strategy&) const { return 0.0; }
    double operator()(const linear_strategy& lin) const {
      const double p = lin.power_target;
      if (p <= cfg.Q) return -std::sqrt(p / cfg.Q) * x0;
      return -x0 + std::sqrt(p - cfg.Q);
    }
    double operator()(const bpsk_strategy& b) const {
      return x0 >= 0.0 ? -b.a : b.a;  // sign(0) := +1
    }
    double operator()(const two_point_strategy& tp) const {
      return (x0 >= 0.0 ? tp.a : -tp.a) - x0;
    }
    double operator()(const lope_strategy& lp) const {
      const lope_params& p = lp.params;
      const int i = p.segment_index(std::abs(x0));
      return x0 >= 0.0 ? -p.a[i] : p.a[i];
    }
  };
  return std::visit(visitor{x0, cfg}, s);
}

double system_state(const strategy& s, double x0, const problem_config& cfg) {
  return x0 + apply_gamma1(s, x0, cfg);
}

std::vector<double> segment_probabilities(const lope_params& p,
                                          const problem_config& cfg) {
  p.validate();
  cfg.validate();
  const double rq = std::sqrt(cfg.Q);
  std::vector<double> probs(p.n);
  for (int i = 0; i < p.n; ++i) {
    const double hi = (i + 1 < p.n) ? p.B[i + 1] / rq : inf;
    probs[i] = cdf_difference(p.B[i] / rq, hi);
  }
  return probs;
}

double state_density(const lope_params& p, const problem_config& cfg,
                     double x) {
  return density_eval(p, cfg, x, eval_mode::point);
}

double state_density_left_limit(const lope_params& p,
                                const problem_config& cfg, double x) {
  return density_eval(p, cfg, x, eval_mode::left_limit);
}

double state_density_right_limit(const lope_params& p,
                                 const problem_config& cfg, double x) {
  return density_eval(p, cfg, x, eval_mode::right_limit);
}

std::vector<double> state_density_breakpoints(const lope_params& p) {
  std::vector<double> pts;
  for (const density_piece& piece : density_pieces(p)) {
    if (std::isfinite(piece.lo_x)) pts.push_back(piece.lo_x);
    if (std::isfinite(piece.hi_x)) pts.push_back(piece.hi_x);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double state_mass(const lope_params& p, const problem_config& cfg, double lo,
                  double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::invalid_argument("state_mass requires lo <= hi");
  }
  const double rq = std::sqrt(cfg.Q);
  double mass = 0.0;
  for (const density_piece& piece : density_pieces(p)) {
    // x in [lo, hi] corresponds to x0 in [lo, hi] + shift within the piece.
    const double x0_lo = std::max(piece.lo, lo + piece.shift);
    const double x0_hi = std::min(piece.hi, hi + piece.shift);
    if (x0_lo < x0_hi) mass += cdf_difference(x0_lo / rq, x0_hi / rq);
  }
  return mass;
}

std::vector<std::pair<double, double>> state_density_table(
    const lope_params& p, const problem_config& cfg, double lo, double hi,
    int base_points) {
  p.validate();
  cfg.validate();
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw std::invalid_argument("state_density_table requires finite lo < hi");
  }
  if (base_points < 2) {
    throw std::invalid_argument("state_density_table needs >= 2 grid points");
  }

  std::vector<double> coords;
  if (lo == -hi) {
    // Mirror-exact symmetric grid: +/- i*step are bitwise negations.
    const int half = std::max(1, base_points / 2);
    const double step = hi / half;
    coords.reserve(2 * half + 1);
    for (int i = half; i >= 1; --i) coords.push_back(-(i * step));
    coords.push_back(0.0);
    for (int i = 1; i <= half; ++i) coords.push_back(i * step);
  } else {
    const double step = (hi - lo) / (base_points - 1);
    coords.reserve(base_points);
    for (int i = 0; i < base_points - 1; ++i) coords.push_back(lo + i * step);
    coords.push_back(hi);
  }

  std::vector<double> jumps;
  for (double b : state_density_breakpoints(p)) {
    if (b > lo && b < hi) jumps.push_back(b);
  }
  coords.insert(coords.end(), jumps.begin(), jumps.end());
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  std::vector<std::pair<double, double>> table;
  table.reserve(coords.size() + jumps.size());
  for (double x : coords) {
    if (std::binary_search(jumps.begin(), jumps.end(), x)) {
      table.emplace_back(x, state_density_left_limit(p, cfg, x));
      table.emplace_back(x, state_density_right_limit(p, cfg, x));
    } else {
      table.emplace_back(x, state_density(p, cfg, x));
    }
  }
  return table;
}

std::string serialize_strategy(const strategy& s) {
  std::ostringstream out;
  out << "kind=" << strategy_kind(s) << "\n";
  if (const auto* lin = std::get_if<linear_strategy>(&s)) {
    out << "power=" << fmt_double(lin->power_target) << "\n";
  } else if (const auto* b = std::get_if<bpsk_strategy>(&s)) {
    out << "a=" << fmt_double(b->a) << "\n";
  } else if (const auto* tp = std::get_if<two_point_strategy>(&s)) {
    out << "a=" << fmt_double(tp->a) << "\n";
  } else if (const auto* lp = std::get_if<lope_strategy>(&s)) {
    out << "n=" << lp->params.n << "\n";
    out << "a=" << fmt_list(lp->params.a) << "\n";
    out << "B=" << fmt_list(lp->params.B) << "\n";
  }
  return out.str();
}

namespace {

double parse_double_token(const std::string& token, int line, int column) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw parse_error("invalid number '" + token + "'", line, column);
  }
  return v;
}

std::vector<double> parse_double_list(const std::string& value, int line,
                                      int value_column) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = value.find(',', start);
    const std::string token =
        value.substr(start, comma == std::string::npos ? comma : comma - start);
    out.push_back(parse_double_token(
        token, line, value_column + static_cast<int>(start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct keyed_value {
  std::string value;
  int line;
  int column;  // 1-based column where the value starts
};

}  // namespace

strategy parse_strategy(const std::string& text) {
  std::map<std::string, keyed_value> kv;
  std::istringstream in(text);
  std::string line_text;
  int line_no = 0;
  while (std::getline(in, line_text)) {
    ++line_no;
    const std::size_t first = line_text.find_first_not_of(" \t\r");
    if (first == std::string::npos || line_text[first] == '#') continue;
    const std::size_t last = line_text.find_last_not_of(" \t\r");
    const std::string trimmed = line_text.substr(first, last - first + 1);
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw parse_error("expected key=value", line_no,
                        static_cast<int>(first) + 1);
    }
    const std::string key = trimmed.substr(0, eq);
    if (kv.count(key)) {
      throw parse_error("duplicate key '" + key + "'", line_no,
                        static_cast<int>(first) + 1);
    }
    kv[key] = {trimmed.substr(eq + 1), line_no,
               static_cast<int>(first + eq) + 2};
  }

  const auto take = [&](const std::string& key) -> keyed_value {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw parse_error("missing key '" + key + "'", line_no ? line_no : 1);
    }
    keyed_value v = it->second;
    kv.erase(it);
    return v;
  };
  const auto expect_empty = [&] {
    if (!kv.empty()) {
      const auto& extra = *kv.begin();
      throw parse_error("unexpected key '" + extra.first + "'",
                        extra.second.line, 1);
    }
  };

  const keyed_value kind = take("kind");
  strategy result;
  if (kind.value == "zero") {
    result = zero_strategy{};
  } else if (kind.value == "linear") {
    const keyed_value p = take("power");
    result = linear_strategy{parse_double_token(p.value, p.line, p.column)};
  } else if (kind.value == "bpsk") {
    const keyed_value a = take("a");
    result = bpsk_strategy{parse_double_token(a.value, a.line, a.column)};
  } else if (kind.value == "two_point") {
    const keyed_value a = take("a");
    result = two_point_strategy{parse_double_token(a.value, a.line, a.column)};
  } else if (kind.value == "lope") {
    const keyed_value n_kv = take("n");
    const long n = std::strtol(n_kv.value.c_str(), nullptr, 10);
    if (n < 1 || std::to_string(n) != n_kv.value) {
      throw parse_error("invalid step count '" + n_kv.value + "'", n_kv.line,
                        n_kv.column);
    }
    const keyed_value a_kv = take("a");
    const keyed_value b_kv = take("B");
    lope_params params;
    params.n = static_cast<int>(n);
    params.a = parse_double_list(a_kv.value, a_kv.line, a_kv.column);
    params.B = parse_double_list(b_kv.value, b_kv.line, b_kv.column);
    if (params.a.size() != static_cast<std::size_t>(params.n)) {
      throw parse_error("expected " + std::to_string(n) + " amplitudes",
                        a_kv.line, a_kv.column);
    }
    if (params.B.size() != static_cast<std::size_t>(params.n)) {
      throw parse_error("expected " + std::to_string(n) + " breakpoints",
                        b_kv.line, b_kv.column);
    }
    result = lope_strategy{std::move(params)};
  } else {
    throw parse_error("unknown strategy kind '" + kind.value + "'", kind.line,
                      kind.column);
  }
  expect_empty();
  return result;
}

}  // namespace witsbench
