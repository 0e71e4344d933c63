#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "generators.hpp"
#include "shadowgm/bounds.hpp"

using namespace shadowgm;

namespace {

Parameters scenario() { return validate(Parameters{}); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

BoundInputs record(double C1) {
  BoundInputs in;
  in.params = scenario();
  in.beta = 1.0;
  in.k = 11.0 / 6.0;
  in.ell = in.k;
  in.h0 = 1000.0;
  in.t_lambda = 0.1;
  in.Bstar_t_lambda = 0.2;
  in.C0 = 400.0;
  in.C1 = C1;
  return in;
}

}  // namespace

TEST_CASE("K_theta hand value and limits") {
  CHECK(K_theta(2.0, 1.0, 2.0, 1.0, 1.0, 0.0) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-15));
  CHECK(K_theta(2.0, 1.0, 2.0, 1.0, 1.0, 0.0) == doctest::Approx(0.18394).epsilon(1e-4));
  CHECK(K_theta(2.0, 1.0, 2.0, 1.0, 1.0, 1e3) == 0.0);
  CHECK_THROWS_AS(K_theta(2.0, 1.0, 2.0, 1.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(K_theta(2.0, 1.0, 2.0, 1.0, 1.0, -1.0), DomainError);
}

TEST_CASE("gamma condition") {
  const double K = std::exp(-1.0) / 2.0;
  const auto c = gamma_condition(100.0, K, 2.0, 3);
  CHECK(c.margin == doctest::Approx(100.0 * K - 12.0));
  CHECK(c.margin == doctest::Approx(6.394).epsilon(1e-3));
  CHECK(c.holds);
  const auto edge = gamma_condition(12.0 / 0.5, 0.5, 2.0, 3);
  CHECK(edge.margin == 0.0);
  CHECK_FALSE(edge.holds);
}

TEST_CASE("blowup bound hand values") {
  const double K = std::exp(-1.0) / 2.0;
  const auto b = blowup_bound_thm31(100.0, K, 2.0, 0.5, 2.0, 3);
  CHECK(b.value == doctest::Approx(0.5 / (100.0 * K) * 0.5).epsilon(1e-14));
  CHECK(b.value == doctest::Approx(0.013592).epsilon(1e-4));
  CHECK(b.cap == doctest::Approx(0.25 / 6.0 * 0.5).epsilon(1e-14));
  CHECK(b.value < b.cap);
  CHECK(b.applicable);
  CHECK(blowup_bound_thm31(1e8, K, 2.0, 0.5, 2.0, 3).value < 1e-7);
}

TEST_CASE("tau at the origin is the blowup bound, bit for bit") {
  gen::Source src(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const Parameters prm = validate(gen::admissible(src));
    const double K = src.log_uniform(1e-3, 10.0);
    const double tau = tau_profile(0.0, prm.gamma, K, prm.p, prm.alpha, prm.delta);
    const auto b = blowup_bound_thm31(prm.gamma, K, prm.p, prm.delta, prm.alpha, prm.n);
    CHECK(tau == b.value);
  }
  CHECK_THROWS_AS(tau_profile(1.0, 100.0, 0.1, 2.0, 2.0, 0.5), DomainError);
}

TEST_CASE("tau is increasing and continuous at the corner") {
  const double K = 0.2, gamma = 100.0, p = 2.0, alpha = 2.0, delta = 0.5;
  double prev = tau_profile(0.0, gamma, K, p, alpha, delta);
  for (int i = 1; i < 1000; ++i) {
    const double cur = tau_profile(i / 1000.0, gamma, K, p, alpha, delta);
    CHECK(cur >= prev);
    prev = cur;
  }
  const double left = tau_profile(delta, gamma, K, p, alpha, delta);
  const double right = tau_profile(std::nextafter(delta, 1.0), gamma, K, p, alpha, delta);
  CHECK(rel(left, right) <= 1e-12);
}

TEST_CASE("chained inequality whenever the gamma condition holds") {
  gen::Source src(32);
  int applicable = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Parameters prm = validate(gen::admissible(src));
    const double K = src.log_uniform(1e-4, 10.0);
    const double gamma = src.log_uniform(1.0, 1e6);
    const auto b = blowup_bound_thm31(gamma, K, prm.p, prm.delta, prm.alpha, prm.n);
    if (gamma_condition(gamma, K, prm.p, prm.n).holds) {
      ++applicable;
      CHECK(b.value < b.cap);
    }
  }
  CHECK(applicable > 1000);
}

TEST_CASE("probability bound examples") {
  const auto small = probability_bound_cor32(1.0, 100.0, 2.0, 1.0, 2.0, 1.0, 3);
  CHECK(small.A0 == doctest::Approx(std::log(100.0 / 24.0) - 1.0).epsilon(1e-14));
  CHECK(small.A0 == doctest::Approx(0.4271).epsilon(1e-3));
  CHECK(small.vacuous);
  CHECK(small.bound < 0.0);
  const auto large = probability_bound_cor32(1.0, 1e6, 2.0, 1.0, 2.0, 1.0, 3);
  CHECK(large.A0 == doctest::Approx(9.638).epsilon(1e-3));
  CHECK_FALSE(large.vacuous);
  CHECK(1.0 - large.bound < 1e-18);
  CHECK(large.tail < 1e-18);
  const auto negative = probability_bound_cor32(10.0, 10.0, 2.0, 1.0, 2.0, 1.0, 3);
  CHECK(negative.A0 < 0.0);
  CHECK(negative.vacuous);
  CHECK_THROWS_AS(probability_bound_cor32(0.0, 10.0, 2.0, 1.0, 2.0, 1.0, 3), DomainError);
}

TEST_CASE("beta and k selection") {
  Parameters prm = scenario();
  const auto bk = select_beta_k(prm);
  CHECK(bk.beta == 1.0);
  CHECK(bk.k == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  prm.p = 3.0;
  prm.r = 2.0;
  prm.q = 2.0;
  const auto slack = select_beta_k(prm);
  CHECK(slack.beta > 0.0);
  CHECK(slack.beta <= 1.0);
  CHECK(6.0 > 2.0 * slack.beta);
  Parameters outside = scenario();
  outside.n = 1;
  CHECK_THROWS_AS(select_beta_k(outside), InfeasibleSelection);
}

TEST_CASE("beta and k selection: constraints on random blowup-regime sets") {
  gen::Source src(33);
  for (int trial = 0; trial < 2000; ++trial) {
    const Parameters prm = validate(gen::blowup_regime(src));
    REQUIRE(prm.blowup_regime);
    BetaK bk{};
    try {
      bk = select_beta_k(prm);
    } catch (const InfeasibleSelection&) {
      // Only possible when r + 1 - p exceeds min(1, n(p-1)/2).
      CHECK(prm.r + 1.0 - prm.p >= std::min(1.0, prm.n * (prm.p - 1.0) / 2.0) - 1e-12);
      continue;
    }
    CHECK(bk.beta > 0.0);
    CHECK(bk.beta <= 1.0);
    CHECK(prm.n * (prm.p - 1.0) > 2.0 * bk.beta);
    CHECK(2.0 * bk.beta >= 2.0 * (prm.r + 1.0 - prm.p) - 1e-12);
    CHECK(bk.k > 1.0);
    CHECK(bk.k < prm.p);
    CHECK(prm.n * (bk.k - 1.0) > 2.0 * bk.beta);
  }
}

TEST_CASE("h* limits and cap") {
  BoundInputs in = record(10.0);
  in.t_lambda = 0.0;
  in.Bstar_t_lambda = 0.0;
  const auto at_zero = h_star_lambda(in);
  CHECK(at_zero.value == at_zero.cap);
  in.params.lambda = std::nextafter(1.0, 2.0);
  CHECK(h_star_lambda(in).value == doctest::Approx(in.h0).epsilon(1e-12));
  gen::Source src(34);
  for (int trial = 0; trial < 2000; ++trial) {
    BoundInputs r;
    r.params = validate(gen::blowup_regime(src));
    r.beta = std::min(1.0, std::max(r.params.r + 1.0 - r.params.p, 0.5));
    if (r.params.p + r.beta - 1.0 < r.params.r) continue;
    r.h0 = src.log_uniform(1.0, 1e4);
    r.t_lambda = src.uniform(0.0, 2.0);
    r.Bstar_t_lambda = src.uniform(0.0, 3.0);
    const auto h = h_star_lambda(r);
    CHECK(h.value <= h.cap);
    CHECK(h.value >= r.h0);
  }
}

TEST_CASE("eps* is positive and no larger than any term") {
  const auto e = eps_star(record(10.0));
  CHECK(e.value > 0.0);
  for (double t : e.terms) CHECK(e.value <= t);
  CHECK(e.value == e.terms[e.active_term - 1]);
}

TEST_CASE("L: middle term vanishes at beta = 1, monotone in C1 and h*") {
  const BoundInputs in = record(10.0);
  const double h = h_star_lambda(in).value;
  const double L = L_lemma45(in, 0.5, h);
  // Two surviving terms recomputed by hand.
  const long double first = 10.0L * 3.0L * 1.0L * 0.25L * 1.0L;
  const long double third = std::exp(1.5L * 0.1L + 0.2L) * std::pow((long double)h / 0.125L, 2.0L);
  CHECK(rel(L, double(first + third)) <= 1e-12);
  CHECK(L_lemma45(record(20.0), 0.5, h) > L);
  CHECK(L_lemma45(in, 0.5, 2.0 * h) > L);
  CHECK_THROWS_AS(L_lemma45(in, 0.0, h), DomainError);
  CHECK_THROWS_AS(L_lemma45(in, 1.0, h), DomainError);
}

TEST_CASE("t-hat bound: flag when no R works, vanishing as R shrinks") {
  BoundInputs in = record(10.0);
  in.Bstar_t_lambda = 50.0;  // h* - h(0) is negligible, so every numerator is negative
  const auto none = t_hat_lower_bound(in);
  CHECK_FALSE(none.positive);
  CHECK(none.value == 0.0);
  const BoundInputs base = record(10.0);
  const double h = h_star_lambda(base).value;
  const double eps = eps_star(base).value;
  CHECK(std::abs(t_hat_bound_at(base, 1e-12, h, eps)) < 1e-20);
  const auto out = t_hat_lower_bound(base);
  CHECK(out.value >= 0.0);
  if (out.positive) {
    CHECK(out.value == doctest::Approx(t_hat_bound_at(base, out.R_used, h, eps)));
    for (int i = 0; i < kTHatGridSize; ++i)
      CHECK(t_hat_bound_at(base, t_hat_R_grid(i), h, eps) <= out.value);
  }
  CHECK(t_hat_R_grid(0) == doctest::Approx(1e-4));
  CHECK(t_hat_R_grid(kTHatGridSize - 1) < 1.0);
}

TEST_CASE("exponent conventions agree at beta = 1 and parse by name") {
  BoundInputs a = record(10.0);
  BoundInputs b = a;
  b.convention = ExponentConvention::derived;
  const double h = h_star_lambda(a).value;
  const double eps = eps_star(a).value;
  CHECK(t_hat_bound_at(a, 0.3, h, eps) == t_hat_bound_at(b, 0.3, h, eps));
  CHECK(parse_exponent_convention("stated") == ExponentConvention::stated);
  CHECK(parse_exponent_convention("derived") == ExponentConvention::derived);
  CHECK_THROWS_AS(parse_exponent_convention("other"), ConfigError);
}

TEST_CASE("evaluators are pure") {
  const BoundInputs in = record(10.0);
  const auto a = t_hat_lower_bound(in);
  const auto b = t_hat_lower_bound(in);
  CHECK(a.value == b.value);
  CHECK(a.R_used == b.R_used);
  CHECK(eps_star(in).value == eps_star(in).value);
}

TEST_CASE("per-path check: reaction-only oracle sits under the bound") {
  Parameters prm;
  prm.gamma = 100.0;
  prm = validate(prm);
  SolverControls ctl;
  ctl.cells = 512;
  ctl.horizon = 0.05;
  ctl.dt_max = 1e-4;
  ctl.switches.diffusion = false;
  ctl.switches.freeze_xi = true;
  RadialSolver solver(prm, ctl);
  BrownianPath path = sample_path(1.0, 1e-3, 5);
  const RunResult run = solver.run(path, 5);
  REQUIRE(run.report.blew_up);
  // Peak at the origin, γ φ(0) = 800, K = 1.
  const double T = 1.0 / 800.0;
  CHECK(std::abs(run.report.t_hi - T) <= 0.01 * T);
  BoundCheckOptions opt;
  opt.window = 1e-9;
  const auto check = bound_check_per_path(run, path, opt);
  CHECK(check.applicable);
  CHECK(check.verdict == Verdict::satisfied);
  CHECK(run.report.t_hi <= check.bound);
}

TEST_CASE("per-path check: small amplitude is not applicable") {
  Parameters prm;
  prm.gamma = 1.0;
  prm = validate(prm);
  SolverControls ctl;
  ctl.cells = 64;
  ctl.horizon = 0.01;
  const RunResult run = simulate(prm, ctl, 2);
  const BrownianPath path = sample_path(1.0, ctl.path_dt, 2);
  const auto check = bound_check_per_path(run, path);
  CHECK_FALSE(check.applicable);
  CHECK(check.verdict == Verdict::not_applicable);
}

TEST_CASE("verdict names") {
  CHECK(std::string(to_string(Verdict::satisfied)) == "satisfied");
  CHECK(std::string(to_string(Verdict::violated)) == "violated");
  CHECK(std::string(to_string(Verdict::not_applicable)) == "not_applicable");
}
