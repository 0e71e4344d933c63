#include "shadowgm/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace shadowgm {

const char* to_string(Trigger trigger) {
  switch (trigger) {
    case Trigger::threshold: return "threshold";
    case Trigger::dt_floor: return "dt_floor";
    case Trigger::horizon: return "horizon";
  }
  return "unknown";
}

double ProfileDiagnostics::worst() const {
  return std::max({lower_bound, monotone, mean_bound});
}

void ProfileDiagnostics::absorb(const ProfileDiagnostics& other) {
  lower_bound = std::max(lower_bound, other.lower_bound);
  monotone = std::max(monotone, other.monotone);
  mean_bound = std::max(mean_bound, other.mean_bound);
}

ProfileDiagnostics monitor_lemma21(const ArrayX<double>& v, const RadialGrid<double>& grid,
                                   double gamma, double beta) {
  ProfileDiagnostics d;
  const double scale = v.abs().maxCoeff();
  if (!(scale > 0.0)) return d;
  d.lower_bound = std::max(gamma - v.minCoeff(), 0.0) / scale;
  const Eigen::Index n = v.size();
  const double rise = (v.tail(n - 1) - v.head(n - 1)).maxCoeff();
  d.monotone = std::max(rise, 0.0) / scale;
  const double h = mean_power(v, beta, grid);
  const double peak =
      (grid.nodes.pow(double(grid.dimension)) * v.max(0.0).pow(beta)).maxCoeff();
  d.mean_bound = h > 0.0 ? std::max(peak - h, 0.0) / h : 0.0;
  return d;
}

RadialSolver::RadialSolver(const Parameters& params, const SolverControls& controls)
    : params_(validate(params)),
      controls_(controls),
      grid_(make_radial_grid<double>(controls.cells, params_.n)),
      diffusion_(grid_) {
  const auto& c = controls_;
  if (!(c.horizon > 0.0)) throw DomainError("horizon must be positive");
  if (!(c.dt_max > 0.0) || !(c.dt_min > 0.0) || c.dt_min > c.dt_max)
    throw DomainError("need 0 < dt_min <= dt_max");
  if (!(c.v_blow > 0.0)) throw DomainError("blowup threshold must be positive");
  if (!(c.safety > 0.0 && c.safety <= 1.0)) throw DomainError("safety must lie in (0, 1]");
  if (!(c.growth_cap > 0.0) || !(c.xi_hat_growth_cap > 0.0))
    throw DomainError("growth caps must be positive");
  if (!(c.beta > 0.0 && c.beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (!(c.path_dt > 0.0)) throw DomainError("path dt must be positive");
  if (c.snapshot_every < 0) throw DomainError("snapshot_every must be non-negative");
}

double RadialSolver::reaction_coefficient(double t, double xi) const {
  if (controls_.switches.freeze_xi) return std::pow(params_.xi0, -params_.q);
  return std::exp(-(params_.p - 1.0) * t) / std::pow(xi, params_.q);
}

double RadialSolver::xi_hat_rate(double t, double B, double mean_vr, double xi_start) const {
  if (!controls_.switches.coupling) return 0.0;
  return std::exp((1.5 - params_.r) * t - B) * mean_vr / std::pow(xi_start, params_.s);
}

RadialState RadialSolver::initial_state(const ArrayX<double>& v0) const {
  if (v0.size() != grid_.size()) throw DomainError("initial profile does not match the grid");
  RadialState s;
  s.v = v0;
  s.xi = params_.xi0;
  s.xi_hat = params_.xi0;
  s.K = reaction_coefficient(0.0, s.xi);
  return s;
}

RadialState RadialSolver::initial_state() const {
  return initial_state(initial_profile(params_, grid_));
}

std::int64_t RadialSolver::propose_ticks(const RadialState& state, const BrownianPath& path,
                                         std::int64_t end_tick) const {
  const auto& c = controls_;
  double dt = c.dt_max;
  if (c.switches.reaction) {
    const double rate = state.K * std::pow(state.v.maxCoeff(), params_.p - 1.0);
    if (rate > 0.0) dt = std::min(dt, c.safety * c.growth_cap / rate);
  }
  const double g = xi_hat_rate(state.t, state.B, mean_power(state.v, params_.r, grid_), state.xi);
  if (g > 0.0) dt = std::min(dt, c.safety * c.xi_hat_growth_cap * state.xi_hat / g);

  const double want = std::floor(dt / path.tick_length());
  if (!(want >= 1.0)) return 0;
  const auto cap = std::min(want, 0x1.0p62);
  std::int64_t ticks = std::bit_floor(static_cast<std::uint64_t>(cap));
  if (state.tick != 0) ticks = std::min(ticks, state.tick & -state.tick);
  while (ticks > end_tick - state.tick) ticks >>= 1;
  return ticks;
}

RadialState RadialSolver::step(const RadialState& state, BrownianPath& path, std::int64_t ticks) {
  if (ticks < 1) throw DomainError("step needs a positive tick count");
  const Parameters& prm = params_;
  const auto& c = controls_;

  RadialState next;
  next.tick = state.tick + ticks;
  next.t = path.time_of_tick(next.tick);
  const double dt = next.t - state.t;
  next.v = state.v;

  if (c.switches.diffusion) diffusion_.solve_implicit(dt, next.v);

  const double K0 = state.K;
  if (c.switches.reaction) {
    const double load = K0 * std::pow(next.v.maxCoeff(), prm.p - 1.0) * dt;
    if (!(load <= c.growth_cap)) throw StepRejected("reaction growth over the step exceeds the cap");
    const ArrayX<double> factor = 1.0 - (prm.p - 1.0) * K0 * dt * next.v.pow(prm.p - 1.0);
    if (!(factor.minCoeff() > 0.0)) throw StepRejected("reaction flow leaves its existence interval");
    next.v *= factor.pow(-1.0 / (prm.p - 1.0));
  }

  if (!next.v.allFinite()) throw NumericalBreakdown("non-finite field value");
  const double vmax = next.v.maxCoeff();
  if (next.v.minCoeff() < -1e-14 * std::max(vmax, 1.0))
    throw NumericalBreakdown("negative field value");

  next.B = path.value_at_tick(next.tick);
  next.Bstar = path.running_max_at_tick(next.tick);

  const double g0 = xi_hat_rate(state.t, state.B, mean_power(state.v, prm.r, grid_), state.xi);
  const double g1 = xi_hat_rate(next.t, next.B, mean_power(next.v, prm.r, grid_), state.xi);
  const double increment = 0.5 * dt * (g0 + g1);
  if (increment > c.xi_hat_growth_cap * state.xi_hat)
    throw StepRejected("xi_hat growth over the step exceeds the cap");
  next.xi_hat = state.xi_hat + increment;
  next.xi = std::exp(-1.5 * next.t + next.B) * next.xi_hat;
  next.K = reaction_coefficient(next.t, next.xi);

  if (c.switches.reaction) {
    const double load = std::max(K0, next.K) * std::pow(vmax, prm.p - 1.0) * dt;
    if (!(load <= c.growth_cap)) throw StepRejected("reaction growth over the step exceeds the cap");
  }
  if (!std::isfinite(next.xi) || !(next.xi > 0.0) || !std::isfinite(next.K))
    throw NumericalBreakdown("inhibitor left (0, inf)");
  return next;
}

namespace {

TrajectorySample sample_of(const RadialState& s, const RadialGrid<double>& grid,
                           const Parameters& prm, double beta, double dt) {
  return {s.t,
          s.xi,
          s.xi_hat,
          s.B,
          s.Bstar,
          s.v(0),
          s.v.maxCoeff(),
          mean_power(s.v, prm.r, grid),
          mean_power(s.v, beta, grid),
          s.K,
          dt};
}

}  // namespace

RunResult RadialSolver::run(BrownianPath& path, std::uint64_t seed,
                            const std::optional<ArrayX<double>>& v0) {
  const Parameters& prm = params_;
  const auto& c = controls_;
  RunResult res;
  res.params = prm;
  res.controls = c;
  res.seed = seed;
  Trajectory& traj = res.trajectory;
  BlowupReport& rep = res.report;
  traj.z = grid_.nodes;
  rep.path_dt = path.base_dt();

  RadialState state = v0 ? initial_state(*v0) : initial_state();
  const std::int64_t end_tick = std::min(path.nearest_tick(c.horizon), path.end_tick());
  const double level = prm.lambda * prm.xi0;
  std::size_t next_time = 0;

  auto observe = [&](const RadialState& s, double dt, bool force_snapshot) {
    traj.samples.push_back(sample_of(s, grid_, prm, c.beta, dt));
    rep.worst_profile.absorb(monitor_lemma21(s.v, grid_, prm.gamma, c.beta));
    const double ident = std::abs(s.xi_hat - std::exp(1.5 * s.t - s.B) * s.xi) / s.xi_hat;
    rep.worst_xi_hat_identity = std::max(rep.worst_xi_hat_identity, ident);
    if (!c.switches.freeze_xi) {
      const double k = std::exp(-(prm.p - 1.0) * s.t) / std::pow(s.xi, prm.q);
      rep.worst_K_identity = std::max(rep.worst_K_identity, std::abs(s.K - k) / s.K);
    }

    bool keep = force_snapshot;
    if (c.snapshot_until_t_lambda && traj.samples.size() >= 2 &&
        traj.samples[traj.samples.size() - 2].xi_hat < level)
      keep = true;
    if (c.snapshot_every > 0 && rep.accepted_steps % c.snapshot_every == 0) keep = true;
    while (next_time < c.snapshot_times.size() && c.snapshot_times[next_time] <= s.t) {
      keep = true;
      ++next_time;
    }
    if (!keep) return;
    if (traj.snapshots.size() >= c.max_snapshots) {
      traj.snapshots_truncated = true;
      return;
    }
    traj.snapshots.push_back({s.t, s.v});
  };

  auto finish = [&] {
    rep.final_time = state.t;
    rep.final_Bstar = state.Bstar;
    rep.t_lambda = stopping_time_t_lambda(traj, prm);
    const double t_read = rep.t_lambda ? std::min(*rep.t_lambda, state.t) : state.t;
    rep.Bstar_t_lambda = running_max(path, t_read);
  };

  observe(state, 0.0, true);
  while (true) {
    if (state.tick >= end_tick) {
      rep.trigger = Trigger::horizon;
      break;
    }
    std::int64_t ticks = propose_ticks(state, path, end_tick);
    std::optional<RadialState> next;
    double dt = 0.0;
    while (!next) {
      dt = ticks >= 1 ? path.time_of_tick(state.tick + ticks) - state.t : 0.0;
      if (ticks < 1 || dt < c.dt_min) break;
      try {
        next = step(state, path, ticks);
      } catch (const StepRejected&) {
        ++rep.rejected_steps;
        ticks >>= 1;
      } catch (const NumericalBreakdown& e) {
        finish();
        throw SolverBreakdown(e.what(), std::make_shared<RunResult>(std::move(res)));
      }
    }
    if (!next) {
      rep.blew_up = true;
      rep.trigger = Trigger::dt_floor;
      rep.t_lo = state.t;
      rep.t_hi = state.t + c.dt_min;
      break;
    }

    const double drop = (state.xi_hat - next->xi_hat) / state.xi_hat;
    rep.worst_xi_hat_decrease = std::max(rep.worst_xi_hat_decrease, drop);
    const double t_prev = state.t;
    state = std::move(*next);
    ++rep.accepted_steps;
    const bool blown = state.v.maxCoeff() >= c.v_blow;
    observe(state, dt, blown || state.tick >= end_tick);
    if (blown) {
      rep.blew_up = true;
      rep.trigger = Trigger::threshold;
      rep.t_lo = t_prev;
      rep.t_hi = state.t;
      break;
    }
  }
  finish();
  return res;
}

RunResult simulate(const Parameters& params, const SolverControls& controls, std::uint64_t seed) {
  RadialSolver solver(params, controls);
  BrownianPath path = sample_path(std::max(controls.horizon, 1.0), controls.path_dt, seed);
  return solver.run(path, seed);
}

namespace {

template <typename Field>
std::optional<double> first_crossing(const Trajectory& traj, double level, Field field) {
  const auto& s = traj.samples;
  if (s.empty()) return std::nullopt;
  if (field(s.front()) >= level) return s.front().t;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double a = field(s[k - 1]);
    const double b = field(s[k]);
    if (b >= level) {
      const double w = b > a ? (level - a) / (b - a) : 1.0;
      return s[k - 1].t + std::clamp(w, 0.0, 1.0) * (s[k].t - s[k - 1].t);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> stopping_time_t_lambda(const Trajectory& traj, const Parameters& params) {
  return first_crossing(traj, params.lambda * params.xi0,
                        [](const TrajectorySample& s) { return s.xi_hat; });
}

std::optional<double> first_time_mean_reaches(const Trajectory& traj, double level) {
  return first_crossing(traj, level, [](const TrajectorySample& s) { return s.mean_vbeta; });
}

double slope_at(const ArrayX<double>& v, Eigen::Index i, double h) {
  const Eigen::Index last = v.size() - 1;
  if (i <= 0) return (v(1) - v(0)) / h;
  if (i >= last) return (v(last) - v(last - 1)) / h;
  return (v(i + 1) - v(i - 1)) / (2.0 * h);
}

C0Estimate estimate_C0(const Trajectory& traj, int n, double t_until) {
  C0Estimate est;
  const Eigen::Index cells = traj.z.size() - 1;
  if (cells < 2) return est;
  const double h = 1.0 / double(cells);
  const auto mid = static_cast<Eigen::Index>(std::lround(0.5 * double(cells)));
  const double weight = std::pow(0.5, n - 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& snap : traj.snapshots) {
    if (snap.t > t_until) continue;
    peak = std::max(peak, weight * slope_at(snap.v, mid, h));
    ++est.snapshots_used;
  }
  if (est.snapshots_used == 0) return est;
  est.value = -peak;
  if (est.value <= 0.0) {
    est.value = 0.0;
    est.clipped = true;
  }
  return est;
}

double estimate_C1(const Trajectory& traj, double t_until) {
  const Eigen::Index cells = traj.z.size() - 1;
  double peak = 0.0;
  for (const auto& snap : traj.snapshots) {
    if (snap.t > t_until) continue;
    const ArrayX<double> diff = (snap.v.tail(cells) - snap.v.head(cells)).abs() * double(cells);
    peak = std::max(peak, diff.maxCoeff());
  }
  return peak;
}

}  // namespace shadowgm
