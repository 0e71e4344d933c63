#include <doctest.h>

#include <cmath>
#include <vector>

#include "shadowgm/brownian.hpp"
#include "shadowgm/bounds.hpp"
#include "shadowgm/solver.hpp"

using namespace shadowgm;

namespace {

Parameters scenario() {
  Parameters prm;  // p=2, q=1, r=2, s=0, n=3, δ=0.5, γ=100, ξ0=1, λ=2
  return validate(prm);
}

// Admissible set on which the reaction wins before ξ moves.
Parameters reaction_dominated() {
  Parameters prm;
  prm.q = 3.0;
  prm.r = 0.5;
  return validate(prm);
}

BrownianPath zero_path(double horizon, double dt) {
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  return BrownianPath(dt, 0, std::vector<double>(steps + 1, 0.0));
}

double ode_blowup_time(double c, double K0, double p) {
  return std::pow(c, 1.0 - p) / (K0 * (p - 1.0));
}

}  // namespace

TEST_CASE("pure diffusion conserves the mean") {
  SolverControls ctl;
  ctl.cells = 256;
  ctl.horizon = 1.0;
  ctl.switches.reaction = false;
  RadialSolver solver(scenario(), ctl);
  BrownianPath path = sample_path(1.0, 1e-3, 3);
  const RunResult res = solver.run(path);
  const double m0 = mean_power(initial_profile(scenario(), solver.grid()), 1.0, solver.grid());
  REQUIRE(res.trajectory.snapshots.size() >= 2);
  const auto& last = res.trajectory.snapshots.back();
  CHECK(last.t == doctest::Approx(1.0));
  CHECK(std::abs(mean_power(last.v, 1.0, solver.grid()) - m0) <= 1e-10 * m0 * last.t);
  CHECK_FALSE(res.report.blew_up);
}

TEST_CASE("reaction oracle: uniform data, no diffusion, frozen inhibitor") {
  struct Case {
    double c, K0, p;
  };
  for (const Case cs : {Case{1, 1, 2}, Case{2, 0.5, 2}, Case{1, 1, 3}}) {
    Parameters prm;
    prm.p = cs.p;
    prm.q = 1.0;
    prm.r = cs.p;  // keeps (p-1)/r < q
    prm.xi0 = std::pow(cs.K0, -1.0 / prm.q);
    prm.gamma = cs.c;
    prm = validate(prm);
    const double T = ode_blowup_time(cs.c, cs.K0, cs.p);
    for (double dt_max : {1e-2, 1e-3, 1e-4}) {
      SolverControls ctl;
      ctl.cells = 16;
      ctl.horizon = 2.0 * T;
      ctl.dt_max = dt_max;
      ctl.switches.diffusion = false;
      ctl.switches.freeze_xi = true;
      RadialSolver solver(prm, ctl);
      BrownianPath path = sample_path(ctl.horizon, 1e-3, 17);
      const ArrayX<double> v0 = ArrayX<double>::Constant(ctl.cells + 1, cs.c);
      const RunResult res = solver.run(path, 17, v0);
      REQUIRE(res.report.blew_up);
      CHECK(res.report.t_lo < res.report.t_hi);
      const double mid = 0.5 * (res.report.t_lo + res.report.t_hi);
      CHECK(std::abs(mid - T) <= 0.01 * T);
      // Profile against the closed form at half the blowup time.
      for (const auto& s : res.trajectory.samples) {
        if (s.t > 0.5 * T) {
          const double exact =
              std::pow(std::pow(cs.c, 1.0 - cs.p) - cs.K0 * (cs.p - 1.0) * s.t, -1.0 / (cs.p - 1.0));
          CHECK(std::abs(s.vmax - exact) <= 0.01 * exact);
          break;
        }
      }
    }
  }
}

TEST_CASE("zero path without the mean term: inhibitor decays like exp(-3t/2)") {
  SolverControls ctl;
  ctl.cells = 64;
  ctl.horizon = 1.0;
  ctl.switches.coupling = false;
  ctl.switches.reaction = false;
  const Parameters prm = scenario();
  RadialSolver solver(prm, ctl);
  BrownianPath path = zero_path(1.0, 1e-3);
  const RunResult res = solver.run(path);
  for (const auto& s : res.trajectory.samples) {
    CHECK(std::abs(s.xi - prm.xi0 * std::exp(-1.5 * s.t)) <= 1e-8 * prm.xi0);
    CHECK(s.xi_hat == prm.xi0);
  }
  CHECK_FALSE(res.report.t_lambda.has_value());
  CHECK_FALSE(stopping_time_t_lambda(res.trajectory, prm).has_value());
}

TEST_CASE("reaction-dominated set blows up; invariants hold along the run") {
  const Parameters prm = reaction_dominated();
  SolverControls ctl;
  ctl.cells = 256;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RunResult res = simulate(prm, ctl, seed);
    const auto& rep = res.report;
    REQUIRE(rep.blew_up);
    CHECK(rep.trigger == Trigger::threshold);
    CHECK(rep.t_lo < rep.t_hi);
    CHECK(rep.worst_profile.worst() <= 1e-8);
    CHECK(rep.worst_xi_hat_decrease <= 1e-12);
    CHECK(rep.worst_xi_hat_identity <= 1e-12);
    CHECK(rep.worst_K_identity <= 1e-12);
    const auto& s = res.trajectory.samples;
    for (std::size_t k = 1; k < s.size(); ++k) {
      CHECK(s[k].t > s[k - 1].t);
      CHECK(s[k].xi_hat >= s[k - 1].xi_hat * (1.0 - 1e-12));
    }
    // Diffusion cannot beat the pure reaction started from the peak with the largest K.
    double K_max = 0.0;
    for (const auto& x : s) K_max = std::max(K_max, x.K);
    CHECK(rep.t_hi >= ode_blowup_time(s.front().vmax, K_max, prm.p) * (1.0 - 1e-3));
    CHECK(estimate_C0(res.trajectory, prm.n).value > 0.0);
  }
}

TEST_CASE("self-convergence of the blowup time") {
  const Parameters prm = reaction_dominated();
  SolverControls coarse;
  coarse.cells = 256;
  coarse.dt_max = 1e-3;
  SolverControls fine = coarse;
  fine.cells = 512;
  fine.dt_max = 5e-4;
  for (std::uint64_t seed : {4u, 5u}) {
    const auto a = simulate(prm, coarse, seed).report;
    const auto b = simulate(prm, fine, seed).report;
    REQUIRE(a.blew_up);
    REQUIRE(b.blew_up);
    const double ma = 0.5 * (a.t_lo + a.t_hi);
    const double mb = 0.5 * (b.t_lo + b.t_hi);
    CHECK(std::abs(ma - mb) <= 0.05 * mb);
  }
}

TEST_CASE("K sandwich on the window before the stopping time") {
  for (const Parameters& prm : {scenario(), reaction_dominated()}) {
    SolverControls ctl;
    ctl.cells = 128;
    ctl.horizon = 0.05;
    RadialSolver solver(prm, ctl);
    BrownianPath path = sample_path(1.0, 1e-3, 23);
    const RunResult res = solver.run(path, 23);
    const double theta = res.report.t_lambda ? *res.report.t_lambda : res.report.final_time;
    REQUIRE(theta > 0.0);
    const double Bstar = running_max(path, theta);
    const double lo = K_theta(prm.p, prm.q, prm.lambda, prm.xi0, theta, Bstar);
    const double hi = std::pow(prm.xi0, -prm.q) * std::exp(1.5 * prm.q * theta + prm.q * Bstar);
    for (const auto& s : res.trajectory.samples) {
      if (s.t > theta) break;
      CHECK(s.K >= lo * (1.0 - 1e-12));
      CHECK(s.K <= hi * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("stopping time: limits and monotonicity in the level") {
  SolverControls ctl;
  ctl.cells = 128;
  ctl.horizon = 0.01;
  const RunResult res = simulate(scenario(), ctl, 31);
  Parameters prm = scenario();
  prm.lambda = 1.0 + 1e-9;
  const auto near_one = stopping_time_t_lambda(res.trajectory, prm);
  REQUIRE(near_one.has_value());
  CHECK(*near_one <= 1e-6);
  double prev = 0.0;
  for (double lambda : {1.1, 1.5, 2.0, 3.0, 5.0}) {
    prm.lambda = lambda;
    const auto t = stopping_time_t_lambda(res.trajectory, prm);
    REQUIRE(t.has_value());
    CHECK(*t >= prev);
    prev = *t;
  }
  prm.lambda = 1e12;
  CHECK_FALSE(stopping_time_t_lambda(res.trajectory, prm).has_value());
}

TEST_CASE("invariant monitor examples") {
  const Parameters prm = scenario();
  const auto grid = make_radial_grid(1000, prm.n);
  const auto v0 = initial_profile(prm, grid);
  for (double beta : {0.3, 1.0}) {
    const auto d = monitor_lemma21(v0, grid, prm.gamma, beta);
    CHECK(d.lower_bound == 0.0);
    CHECK(d.monotone == 0.0);
    CHECK(d.mean_bound == 0.0);
  }
  const ArrayX<double> flat = ArrayX<double>::Constant(grid.size(), prm.gamma);
  CHECK(monitor_lemma21(flat, grid, prm.gamma, 1.0).worst() == 0.0);
  ArrayX<double> bumpy = v0;
  bumpy(10) = bumpy(9) * 1.5;
  CHECK(monitor_lemma21(bumpy, grid, prm.gamma, 1.0).monotone > 0.0);
  ArrayX<double> low = v0;
  low(grid.size() - 1) = 0.5 * prm.gamma;
  CHECK(monitor_lemma21(low, grid, prm.gamma, 1.0).lower_bound > 0.0);
}

TEST_CASE("identical inputs give a bit-identical trajectory") {
  SolverControls ctl;
  ctl.cells = 128;
  ctl.horizon = 0.05;
  const RunResult a = simulate(scenario(), ctl, 77);
  const RunResult b = simulate(scenario(), ctl, 77);
  REQUIRE(a.trajectory.samples.size() == b.trajectory.samples.size());
  for (std::size_t k = 0; k < a.trajectory.samples.size(); ++k) {
    const auto& x = a.trajectory.samples[k];
    const auto& y = b.trajectory.samples[k];
    CHECK(x.t == y.t);
    CHECK(x.xi == y.xi);
    CHECK(x.vmax == y.vmax);
    CHECK(x.B == y.B);
  }
  REQUIRE(a.trajectory.snapshots.size() == b.trajectory.snapshots.size());
  for (std::size_t k = 0; k < a.trajectory.snapshots.size(); ++k)
    CHECK((a.trajectory.snapshots[k].v == b.trajectory.snapshots[k].v).all());
}

TEST_CASE("acceptance scenario: structure holds although no blowup occurs by t = 1") {
  SolverControls ctl;
  ctl.cells = 256;
  const RunResult res = simulate(scenario(), ctl, 7);
  CHECK(res.report.t_lambda.has_value());
  CHECK(res.report.worst_profile.worst() <= 1e-8);
  CHECK(res.report.worst_xi_hat_decrease <= 1e-12);
  CHECK(res.report.final_time == doctest::Approx(1.0));
}

TEST_CASE("controls are validated") {
  SolverControls ctl;
  ctl.dt_max = -1.0;
  CHECK_THROWS_AS(RadialSolver(scenario(), ctl), DomainError);
  ctl = SolverControls{};
  ctl.cells = 1;
  CHECK_THROWS_AS(RadialSolver(scenario(), ctl), DomainError);
}

TEST_CASE("first_time_mean_reaches interpolates") {
  Trajectory traj;
  traj.samples.push_back({0.0, 1, 1, 0, 0, 1, 1, 1, 1.0, 1, 0});
  traj.samples.push_back({1.0, 1, 1, 0, 0, 1, 1, 1, 3.0, 1, 1});
  CHECK(*first_time_mean_reaches(traj, 2.0) == doctest::Approx(0.5));
  CHECK_FALSE(first_time_mean_reaches(traj, 4.0).has_value());
}

TEST_CASE("C0 and C1 estimates on a known profile") {
  const Parameters prm = scenario();
  // -(1/2)^{n-1} γ φ'(1/2) with φ'(1/2) = -α δ^{-α-1} = -16. The curvature jumps
  // at 1/2, so the centered slope there is first order in h.
  const double exact = 0.25 * 100.0 * 16.0;
  double prev_err = INFINITY;
  for (Eigen::Index cells : {1000, 10000}) {
    const auto grid = make_radial_grid(cells, prm.n);
    Trajectory traj;
    traj.z = grid.nodes;
    traj.snapshots.push_back({0.0, initial_profile(prm, grid)});
    const auto c0 = estimate_C0(traj, prm.n);
    const double err = std::abs(c0.value - exact);
    CHECK(err <= 2.0 * exact / double(cells));
    CHECK(err < prev_err);
    prev_err = err;
    CHECK_FALSE(c0.clipped);
    CHECK(c0.snapshots_used == 1);
    CHECK(estimate_C1(traj) == doctest::Approx(100.0 * 16.0).epsilon(2e-3));
  }
}
