#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "shadowgm/model.hpp"
#include "shadowgm/radial.hpp"

using namespace shadowgm;

namespace {

Parameters with(double p, double q, double r, double s, int n) {
  Parameters prm;
  prm.p = p;
  prm.q = q;
  prm.r = r;
  prm.s = s;
  prm.n = n;
  return prm;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("validate: reference exponents are admissible and in the blowup regime") {
  const Parameters prm = validate(with(2, 1, 2, 0, 3));
  CHECK(prm.alpha == doctest::Approx(2.0));
  CHECK(prm.blowup_regime);
}

TEST_CASE("validate: boundary of the admissibility inequality is rejected") {
  CHECK_THROWS_AS(validate(with(2, 1, 2, 1, 3)), AdmissibilityViolation);
}

TEST_CASE("validate: one dimension is admissible but outside the blowup regime") {
  const Parameters prm = validate(with(2, 1, 2, 0, 1));
  CHECK_FALSE(prm.blowup_regime);
}

TEST_CASE("validate: domain errors") {
  CHECK_THROWS_AS(validate(with(1, 1, 2, 0, 3)), DomainError);
  CHECK_THROWS_AS(validate(with(2, 1, 2, -1, 3)), DomainError);
  CHECK_THROWS_AS(validate(with(2, 1, 2, 0, 0)), DomainError);
  Parameters prm = with(2, 1, 2, 0, 3);
  prm.lambda = 1.0;
  CHECK_THROWS_AS(validate(prm), DomainError);
  prm = with(2, 1, 2, 0, 3);
  prm.delta = 1.0;
  CHECK_THROWS_AS(validate(prm), DomainError);
}

TEST_CASE("validate: property sweep") {
  gen::Source src(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const Parameters raw = gen::admissible(src);
    const Parameters prm = validate(raw);
    CHECK(prm.alpha * (prm.p - 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    const bool regime = prm.p >= prm.r && (prm.p - 1.0) / prm.r > 2.0 / (prm.n + 2.0);
    CHECK(prm.blowup_regime == regime);
    CHECK(validate(prm) == prm);
  }
}

TEST_CASE("phi: hand values") {
  CHECK(phi(1.0, 0.5, 2.0) == doctest::Approx(1.0));
  CHECK(phi(0.5, 0.5, 2.0) == doctest::Approx(4.0));
  CHECK(phi_inner_jet(0.5, 0.5, 2.0).value == doctest::Approx(4.0));
  CHECK(phi(0.0, 0.5, 2.0) == doctest::Approx(8.0));
  CHECK_THROWS_AS(phi(1.5, 0.5, 2.0), DomainError);
  CHECK_THROWS_AS(phi(-0.1, 0.5, 2.0), DomainError);
}

TEST_CASE("phi: C1 at the corner and strictly decreasing, over a sweep") {
  gen::Source src(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const double delta = src.uniform(0.05, 0.95);
    const double alpha = src.uniform(0.1, 10.0);
    const auto in = phi_inner_jet(delta, delta, alpha);
    const auto out = phi_outer_jet(delta, alpha);
    CHECK(rel(in.value, out.value) <= 1e-12);
    CHECK(rel(in.slope, out.slope) <= 1e-12);
    double prev = phi(0.0, delta, alpha);
    for (int i = 1; i <= 200; ++i) {
      const double z = i / 200.0;
      const double cur = phi(z, delta, alpha);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("phi inequality on 10^4 nodes") {
  Parameters prm = validate(with(2, 1, 2, 0, 3));
  const auto grid = make_radial_grid(10000, prm.n);
  const auto rep = verify_phi_inequality(prm, grid);
  CHECK(rep.min_margin >= -1e-10);
  CHECK(rep.value_mismatch <= 1e-12);
  CHECK(rep.slope_mismatch <= 1e-12);
  CHECK(std::isfinite(rep.margin_left_of_delta));
  CHECK(std::isfinite(rep.margin_right_of_delta));
  CHECK(rep.margin_left_of_delta >= 0.0);
  CHECK(rep.margin_right_of_delta >= 0.0);
}

TEST_CASE("phi inequality: random admissible sets") {
  gen::Source src(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Parameters prm = validate(gen::admissible(src));
    const auto grid = make_radial_grid(2000, prm.n);
    const auto rep = verify_phi_inequality(prm, grid);
    CHECK(rep.min_relative_margin >= -1e-10);
    CHECK(rep.value_mismatch <= 1e-12);
    CHECK(rep.slope_mismatch <= 1e-12);
  }
}

TEST_CASE("u and v transforms") {
  CHECK(u_from_v(5.0, 0.0) == 5.0);
  CHECK(v_from_u(1.0, std::log(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  gen::Source src(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const double u = src.log_uniform(1e-3, 1e3);
    const double t = src.uniform(0.0, 20.0);
    CHECK(rel(u_from_v(v_from_u(u, t), t), u) <= 1e-14);
  }
}

TEST_CASE("radial grid structure") {
  for (int n = 1; n <= 5; ++n) {
    const auto g = make_radial_grid(64, n);
    CHECK(g.nodes(0) == 0.0);
    CHECK(g.nodes(64) == 1.0);
    CHECK((g.weights >= 0.0).all());
    CHECK(g.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (Eigen::Index i = 1; i < g.size(); ++i) CHECK(g.nodes(i) > g.nodes(i - 1));
  }
  CHECK_THROWS_AS(make_radial_grid(1, 3), DomainError);
}

TEST_CASE("grid weights integrate low powers") {
  for (int n = 1; n <= 4; ++n) {
    for (int m = 0; m <= 2; ++m) {
      const double exact = double(n) / double(n + m);
      double prev_err = 1.0;
      for (Eigen::Index cells : {64, 128, 256}) {
        const auto g = make_radial_grid(cells, n);
        const double err = std::abs((g.weights * g.nodes.pow(m)).sum() - exact);
        CHECK(err <= 2.0 / double(cells * cells));
        CHECK(err <= prev_err + 1e-15);
        prev_err = err;
      }
    }
  }
}

TEST_CASE("mean_power examples") {
  const auto g = make_radial_grid(512, 3);
  ArrayX<double> c = ArrayX<double>::Constant(g.size(), 1.7);
  CHECK(mean_power(c, 2.5, g) == doctest::Approx(std::pow(1.7, 2.5)).epsilon(1e-13));
  CHECK(mean_power(g.nodes, 1.0, g) == doctest::Approx(0.75).epsilon(1e-5));
  ArrayX<double> neg = ArrayX<double>::Constant(g.size(), -1.0);
  CHECK_THROWS_AS(mean_power(neg, 1.0, g), DomainError);
  CHECK_THROWS_AS(mean_power(c, -1.0, g), DomainError);
}

TEST_CASE("mean_power of the initial profile converges at second order") {
  Parameters prm = validate(with(2, 1, 2, 0, 3));
  auto at = [&](Eigen::Index cells) {
    const auto g = make_radial_grid(cells, prm.n);
    return mean_power(initial_profile(prm, g), prm.r, g);
  };
  const double ref = at(1 << 16);
  const double e1 = std::abs(at(128) - ref);
  const double e2 = std::abs(at(256) - ref);
  const double e3 = std::abs(at(512) - ref);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("diffusion conserves the weighted mean and keeps a decreasing profile decreasing") {
  Parameters prm = validate(with(2, 1, 2, 0, 3));
  const auto g = make_radial_grid(256, prm.n);
  RadialDiffusion<double> op(g);
  ArrayX<double> v = initial_profile(prm, g);
  const double m0 = mean_power(v, 1.0, g);
  CHECK(std::abs((g.weights * op.apply(v)).sum()) <= 1e-9 * m0);
  for (int k = 0; k < 50; ++k) op.solve_implicit(1e-3, v);
  CHECK(mean_power(v, 1.0, g) == doctest::Approx(m0).epsilon(1e-12));
  for (Eigen::Index i = 1; i < v.size(); ++i) CHECK(v(i) <= v(i - 1));
  CHECK(v.minCoeff() >= prm.gamma);
}
